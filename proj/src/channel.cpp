// SPDX-License-Identifier: Apache-2.0

#include "hcss/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hcss {

namespace {

constexpr double kPi = std::numbers::pi;

// Link tags for RNG substreams; values are part of the determinism contract.
enum LinkTag : std::uint64_t {
    kTagHs = 1,
    kTagHa = 2,
    kTagH = 3,
    kTagGs = 4,
    kTagGa = 5,
    kTagG = 6,
    kTagFs = 7,
    kTagFa = 8,
    kTagF = 9,
};

std::complex<double> cgaussian(RngStream& rng) {
    // CN(0,1): independent N(0, 1/2) parts.
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

double elevation_angle(const Vec3& from, const Vec3& to) {
    const double d = distance(from, to);
    return std::asin((to[2] - from[2]) / d);
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

VecC steering_vector(double angle_rad, int dim, double sep_ratio) {
    if (dim < 1) throw std::invalid_argument("steering_vector: dim must be >= 1");
    VecC out(dim);
    const double phase_step = 2.0 * kPi * sep_ratio * std::sin(angle_rad);
    for (int i = 0; i < dim; ++i)
        out(i) = std::polar(1.0, phase_step * static_cast<double>(i));
    return out;
}

double los_path_loss_db(double d_m, double f_ghz) {
    if (!(d_m > 0.0) || !(f_ghz > 0.0))
        throw std::invalid_argument("los_path_loss_db: d and f must be positive");
    return 28.0 + 22.0 * std::log10(d_m) + 20.0 * std::log10(f_ghz);
}

double nlos_path_loss_db(double d_m, double f_ghz) {
    if (!(d_m > 0.0) || !(f_ghz > 0.0))
        throw std::invalid_argument("nlos_path_loss_db: d and f must be positive");
    return 22.7 + 36.7 * std::log10(d_m) + 26.0 * std::log10(f_ghz);
}

double beam_gain(double phi_deg, double phi_3db_deg, double b_max_linear) {
    if (!(phi_deg >= 0.0) || !(phi_3db_deg > 0.0))
        throw std::invalid_argument("beam_gain: need phi >= 0 and phi_3db > 0");
    const double phi = phi_deg * kPi / 180.0;
    const double phi3 = phi_3db_deg * kPi / 180.0;
    const double u = 2.07123 * std::sin(phi) / std::sin(phi3);
    // Bracket J1(u)/(2u) + 36 J3(u)/u^3 tends to 1/4 + 3/4 = 1 as u -> 0; the
    // series switch keeps the removable singularity well conditioned.
    if (u < 1e-6) {
        // Leading terms: J1(u)/(2u) = 1/4 - u^2/32 + O(u^4),
        // 36 J3(u)/u^3 = 3/4 - 3u^2/64 + O(u^4).
        const double bracket = 1.0 - u * u * (1.0 / 32.0 + 3.0 / 64.0);
        return b_max_linear * bracket * bracket;
    }
    const double bracket = std::cyl_bessel_j(1.0, u) / (2.0 * u) +
                           36.0 * std::cyl_bessel_j(3.0, u) / (u * u * u);
    return b_max_linear * bracket * bracket;
}

VecC sample_rician(RngStream& rng, const VecC& los_direction, double d_m, double f_ghz,
                   double kappa) {
    const double amp = std::sqrt(db_to_linear(-los_path_loss_db(d_m, f_ghz)));
    if (std::isinf(kappa)) return amp * los_direction;
    const double w_los = std::sqrt(kappa / (1.0 + kappa));
    const double w_nlos = std::sqrt(1.0 / (1.0 + kappa));
    VecC out(los_direction.size());
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) = amp * (w_los * los_direction(i) + w_nlos * cgaussian(rng));
    return out;
}

VecC sample_rayleigh(RngStream& rng, int dim, double d_m, double f_ghz) {
    if (dim < 1) throw std::invalid_argument("sample_rayleigh: dim must be >= 1");
    const double amp = std::sqrt(db_to_linear(-nlos_path_loss_db(d_m, f_ghz)));
    VecC out(dim);
    for (int i = 0; i < dim; ++i) out(i) = amp * cgaussian(rng);
    return out;
}

VecC sample_shadowed_rician(RngStream& rng, int dim, double d_m, double f_ghz,
                            double phi_deg, const FadingParams& params) {
    if (dim < 1) throw std::invalid_argument("sample_shadowed_rician: dim must be >= 1");
    const double gain = beam_gain(phi_deg, params.beam_3db_angle_deg,
                                  db_to_linear(params.beam_gain_max_db));
    const double amp = std::sqrt(db_to_linear(-los_path_loss_db(d_m, f_ghz)) * gain);
    const double scatter_amp = std::sqrt(2.0 * params.sr_b);
    VecC out(dim);
    for (int i = 0; i < dim; ++i) {
        // Nakagami-m amplitude: power Gamma(m, omega/m), mean power omega.
        double los_amp;
        if (std::isinf(params.sr_m)) {
            los_amp = std::sqrt(params.sr_omega);
        } else {
            los_amp = std::sqrt(rng.gamma(params.sr_m, params.sr_omega / params.sr_m));
        }
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        out(i) = amp * (std::polar(los_amp, phase) + scatter_amp * cgaussian(rng));
    }
    return out;
}

ChannelRealization draw_realization(std::uint64_t seed, const ScenarioConfig& scenario) {
    scenario.validate();
    const auto& geo = scenario.geometry;
    const auto& fade = scenario.fading;
    const double f_ghz = geo.carrier_ghz;
    const int n_cells = scenario.cells;
    const int m_g = scenario.terrestrial_antennas;
    const int m_a = scenario.aerial_antennas;
    const int m_s = scenario.satellite_antennas;

    auto stream = [&](std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
                      std::uint64_t c = 0) { return RngStream({seed, tag, a, b, c}); };

    auto rician_link = [&](std::uint64_t tag, std::uint64_t a, const Vec3& tx,
                           const Vec3& rx, int dim) {
        RngStream rng = stream(tag, a);
        const VecC los = steering_vector(elevation_angle(tx, rx), dim,
                                         geo.antenna_separation_ratio);
        return sample_rician(rng, los, distance(tx, rx), f_ghz, fade.rician_kappa);
    };
    auto rayleigh_link = [&](std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c, const Vec3& tx, const Vec3& rx, int dim) {
        RngStream rng = stream(tag, a, b, c);
        return sample_rayleigh(rng, dim, distance(tx, rx), f_ghz);
    };
    auto sr_link = [&](std::uint64_t tag, std::uint64_t a, std::uint64_t b, const Vec3& rx,
                       double phi_deg) {
        RngStream rng = stream(tag, a, b);
        return sample_shadowed_rician(rng, m_s, distance(geo.satellite, rx), f_ghz,
                                      phi_deg, fade);
    };

    ChannelRealization ch;
    ch.seed = seed;
    ch.h_s.resize(n_cells);
    ch.h_a.resize(n_cells);
    ch.h.resize(n_cells);
    ch.g.resize(n_cells);
    ch.f.resize(n_cells);
    for (int n = 0; n < n_cells; ++n) {
        const Vec3& bs = geo.terrestrial_bs[n];
        ch.h_s[n] = rayleigh_link(kTagHs, n, 0, 0, bs, geo.satellite_terminal, m_g);
        ch.h_a[n] = rician_link(kTagHa, n, bs, geo.aerial_user, m_g);
        ch.h[n].resize(n_cells);
        for (int m = 0; m < n_cells; ++m) {
            const int k_m = scenario.terminals_per_cell[m];
            ch.h[n][m].resize(k_m);
            for (int l = 0; l < k_m; ++l)
                ch.h[n][m][l] =
                    rayleigh_link(kTagH, n, m, l, bs, geo.terminals[m][l], m_g);
        }
        const int k_n = scenario.terminals_per_cell[n];
        ch.g[n].resize(k_n);
        ch.f[n].resize(k_n);
        for (int k = 0; k < k_n; ++k) {
            ch.g[n][k] = rayleigh_link(kTagG, n, k, 0, geo.aerial_bs,
                                       geo.terminals[n][k], m_a);
            ch.f[n][k] = sr_link(kTagF, n, k, geo.terminals[n][k],
                                 geo.beam_angle_terminals_deg[n][k]);
        }
    }
    ch.g_s = rayleigh_link(kTagGs, 0, 0, 0, geo.aerial_bs, geo.satellite_terminal, m_a);
    ch.g_a = rician_link(kTagGa, 0, geo.aerial_bs, geo.aerial_user, m_a);
    ch.f_s = sr_link(kTagFs, 0, 0, geo.satellite_terminal,
                     geo.beam_angle_satellite_terminal_deg);
    ch.f_a = sr_link(kTagFa, 0, 0, geo.aerial_user, geo.beam_angle_aerial_user_deg);
    ch.u = std::sqrt(scenario.satellite_power_w) * ch.f_s / ch.f_s.norm();
    return ch;
}

}  // namespace hcss
