// SPDX-License-Identifier: Apache-2.0
// Geometry helpers (steering vectors, path loss, satellite beam gain) and the
// seeded samplers for the three fading models, assembled per scenario into a
// full channel realization.

#ifndef HCSS_CHANNEL_HPP
#define HCSS_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "hcss/config.hpp"
#include "hcss/rng.hpp"

namespace hcss {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// ULA response with entry i = exp(j*2*pi*sep_ratio*i*sin(angle)), i = 0..dim-1.
VecC steering_vector(double angle_rad, int dim, double sep_ratio);

// 28 + 22 log10(d) + 20 log10(f), d in meters, f in GHz.
double los_path_loss_db(double d_m, double f_ghz);
// 22.7 + 36.7 log10(d) + 26 log10(f).
double nlos_path_loss_db(double d_m, double f_ghz);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Satellite beam gain b_max*(J1(u)/(2u) + 36*J3(u)/u^3)^2 with
// u = 2.07123*sin(phi)/sin(phi_3db); the phi = 0 limit equals b_max exactly.
double beam_gain(double phi_deg, double phi_3db_deg, double b_max_linear);

// Rician vector: sqrt(L_los^-1) * (sqrt(k/(1+k))*los + sqrt(1/(1+k))*scatter),
// scatter entries i.i.d. CN(0,1). kappa = +inf selects the pure LoS limit.
VecC sample_rician(RngStream& rng, const VecC& los_direction, double d_m, double f_ghz,
                   double kappa);

// Rayleigh vector: i.i.d. CN(0, L_nlos^-1) entries.
VecC sample_rayleigh(RngStream& rng, int dim, double d_m, double f_ghz);

// Shadowed-Rician vector: sqrt(L_los^-1 * b(phi)) * f_tilde, each f_tilde entry
// an independent sum of CN(0, 2b) scatter and a Nakagami-m LoS amplitude
// (mean power omega) at uniform phase. sr_m = +inf degrades to amplitude
// sqrt(omega).
VecC sample_shadowed_rician(RngStream& rng, int dim, double d_m, double f_ghz,
                            double phi_deg, const FadingParams& params);

// All channels of one Monte Carlo trial, linear amplitude scale.
struct ChannelRealization {
    std::vector<VecC> h_s;                           // BS n -> satellite terminal (M_G)
    std::vector<VecC> h_a;                           // BS n -> aerial user (M_G)
    std::vector<std::vector<std::vector<VecC>>> h;   // h[n][m][l]: BS n -> terminal (m,l)
    VecC g_s;                                        // aerial BS -> satellite terminal (M_A)
    VecC g_a;                                        // aerial BS -> aerial user (M_A)
    std::vector<std::vector<VecC>> g;                // aerial BS -> terminal (n,k)
    VecC f_s;                                        // satellite -> satellite terminal (M_S)
    VecC f_a;                                        // satellite -> aerial user (M_S)
    std::vector<std::vector<VecC>> f;                // satellite -> terminal (n,k)
    VecC u;                                          // satellite beamformer, |u|^2 = p_s
    std::uint64_t seed = 0;                          // trial seed the draw was keyed on
};

// Deterministic in (seed, scenario): per-link substreams keyed on the link
// identity, so draw order never matters.
ChannelRealization draw_realization(std::uint64_t seed, const ScenarioConfig& scenario);

double distance(const Vec3& a, const Vec3& b);

}  // namespace hcss

#endif
