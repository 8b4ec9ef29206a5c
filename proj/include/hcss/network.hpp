// SPDX-License-Identifier: Apache-2.0
// SINR/rate/interference evaluators, constraint checking, the matrix lifting
// used by the SDR machinery, the rank-one penalty F, and the merit function mu.

#ifndef HCSS_NETWORK_HPP
#define HCSS_NETWORK_HPP

#include <optional>
#include <string>
#include <vector>

#include "hcss/channel.hpp"
#include "hcss/config.hpp"

namespace hcss {

struct BeamformerSet {
    VecC v;                               // aerial BS beamformer (M_A)
    std::vector<std::vector<VecC>> w;     // w[n][k], terrestrial beamformers (M_G)

    static BeamformerSet zeros(const ScenarioConfig& scenario);
};

// Lifted SDR iterate: V ~ vv^H, W[n][k] ~ ww^H, plus the auxiliary scalars
// u[n][k] (natural log of the interference-plus-noise term, absolute watts).
// TCSSA carries one extra auxiliary for the aerial user.
struct LiftedIterate {
    MatC V;
    std::vector<std::vector<MatC>> W;
    std::vector<std::vector<double>> u;
    std::optional<double> u_aerial;

    static LiftedIterate from_beamformers(const BeamformerSet& bf);
};

struct EffectiveNoise {
    std::vector<std::vector<double>> terminal;  // sigma_bar^2[n][k], watts
    double aerial = 0.0;                        // sigma_bar^2_A
};

struct ConstraintReport {
    double interference_w = 0.0;
    double interference_limit_w = 0.0;
    std::vector<double> cell_power_w;
    std::vector<double> cell_power_limit_w;
    double aerial_power_w = 0.0;
    double aerial_power_limit_w = 0.0;
    double aerial_rate_bpshz = 0.0;
    double aerial_rate_floor_bpshz = 0.0;  // 0 when the mode drops the floor
    bool rate_floor_checked = false;
    bool feasible = false;
    std::vector<std::string> violations;
};

EffectiveNoise effective_noise(const ChannelRealization& ch, double sigma2);

double terrestrial_sinr(const ChannelRealization& ch, const BeamformerSet& bf,
                        const EffectiveNoise& noise, int n, int k);
double aerial_sinr(const ChannelRealization& ch, const BeamformerSet& bf,
                   const EffectiveNoise& noise);
double satellite_interference(const ChannelRealization& ch, const BeamformerSet& bf);

// Terrestrial sum rate, bps/Hz.
double sum_rate(const ScenarioConfig& scenario, const ChannelRealization& ch,
                const BeamformerSet& bf);

// Relative tolerance 1e-6 on every constraint; TCSSA drops the rate floor.
ConstraintReport check_constraints(const ScenarioConfig& scenario,
                                   const ChannelRealization& ch, const BeamformerSet& bf);

// Largest eigenvalue and a matching unit eigenvector of a Hermitian matrix.
std::pair<double, VecC> top_eig(const MatC& x);

// sum(Tr X - eta(X)) over all lifted matrices; zero exactly on rank-one sets.
double penalty_F(const LiftedIterate& it);

// Merit mu = sum(s - ln alpha) - xi*F, natural logs, absolute units; in TCSSA
// mode the aerial (s, alpha) pair joins the sum.
double merit_mu(const ScenarioConfig& scenario, const ChannelRealization& ch,
                const LiftedIterate& it, double xi);

// Per-link Gram matrices plus effective noises, precomputed once per trial.
struct GramData {
    MatC g_s, g_a;                              // aerial-BS side (M_A x M_A)
    std::vector<std::vector<MatC>> g;           // g[n][k]
    std::vector<MatC> h_s, h_a;                 // per-cell (M_G x M_G)
    std::vector<std::vector<std::vector<MatC>>> h;  // h[n][m][l]
    EffectiveNoise noise;
    double sigma2 = 0.0;
};

GramData build_gram_data(const ScenarioConfig& scenario, const ChannelRealization& ch);

// Lifted-domain evaluators (absolute units). s is the log of the full
// received power including the desired term, alpha the linear
// interference-plus-noise total; for the aerial pair the desired term is
// Tr(G_A V).
double lifted_s(const GramData& d, const LiftedIterate& it, int n, int k);
double lifted_alpha(const GramData& d, const LiftedIterate& it, int n, int k);
double lifted_s_aerial(const GramData& d, const LiftedIterate& it);
double lifted_alpha_aerial(const GramData& d, const LiftedIterate& it);
double lifted_satellite_interference(const GramData& d, const LiftedIterate& it);

}  // namespace hcss

#endif
