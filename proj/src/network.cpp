// SPDX-License-Identifier: Apache-2.0

#include "hcss/network.hpp"

#include <cmath>

namespace hcss {

namespace {

double abs2(const std::complex<double>& z) { return std::norm(z); }

double inner_power(const VecC& a, const VecC& b) { return abs2(a.dot(b)); }

void require_hermitian(const MatC& x, const char* what) {
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

double trace_prod(const MatC& a, const MatC& x) {
    // Tr(A X) for Hermitian A, X; the product trace is real up to roundoff.
    return (a.cwiseProduct(x.transpose())).sum().real();
}

}  // namespace

BeamformerSet BeamformerSet::zeros(const ScenarioConfig& scenario) {
    BeamformerSet bf;
    bf.v = VecC::Zero(scenario.aerial_antennas);
    bf.w.resize(scenario.cells);
    for (int n = 0; n < scenario.cells; ++n)
        bf.w[n].assign(scenario.terminals_per_cell[n],
                       VecC::Zero(scenario.terrestrial_antennas));
    return bf;
}

LiftedIterate LiftedIterate::from_beamformers(const BeamformerSet& bf) {
    LiftedIterate it;
    it.V = bf.v * bf.v.adjoint();
    it.W.resize(bf.w.size());
    it.u.resize(bf.w.size());
    for (std::size_t n = 0; n < bf.w.size(); ++n) {
        it.W[n].reserve(bf.w[n].size());
        for (const auto& w : bf.w[n]) it.W[n].push_back(w * w.adjoint());
        it.u[n].assign(bf.w[n].size(), 0.0);
    }
    return it;
}

EffectiveNoise effective_noise(const ChannelRealization& ch, double sigma2) {
    EffectiveNoise noise;
    noise.terminal.resize(ch.f.size());
    for (std::size_t n = 0; n < ch.f.size(); ++n) {
        noise.terminal[n].resize(ch.f[n].size());
        for (std::size_t k = 0; k < ch.f[n].size(); ++k)
            noise.terminal[n][k] = sigma2 + inner_power(ch.f[n][k], ch.u);
    }
    noise.aerial = sigma2 + inner_power(ch.f_a, ch.u);
    return noise;
}

double terrestrial_sinr(const ChannelRealization& ch, const BeamformerSet& bf,
                        const EffectiveNoise& noise, int n, int k) {
    const double desired = inner_power(ch.h[n][n][k], bf.w[n][k]);
    double denom = noise.terminal[n][k] + inner_power(ch.g[n][k], bf.v);
    for (std::size_t m = 0; m < bf.w.size(); ++m)
        for (std::size_t l = 0; l < bf.w[m].size(); ++l) {
            if (static_cast<int>(m) == n && static_cast<int>(l) == k) continue;
            denom += inner_power(ch.h[m][n][k], bf.w[m][l]);
        }
    return desired / denom;
}

double aerial_sinr(const ChannelRealization& ch, const BeamformerSet& bf,
                   const EffectiveNoise& noise) {
    const double desired = inner_power(ch.g_a, bf.v);
    double denom = noise.aerial;
    for (std::size_t m = 0; m < bf.w.size(); ++m)
        for (const auto& w : bf.w[m]) denom += inner_power(ch.h_a[m], w);
    return desired / denom;
}

double satellite_interference(const ChannelRealization& ch, const BeamformerSet& bf) {
    double total = inner_power(ch.g_s, bf.v);
    for (std::size_t n = 0; n < bf.w.size(); ++n)
        for (const auto& w : bf.w[n]) total += inner_power(ch.h_s[n], w);
    return total;
}

double sum_rate(const ScenarioConfig& scenario, const ChannelRealization& ch,
                const BeamformerSet& bf) {
    const EffectiveNoise noise = effective_noise(ch, scenario.noise_power_w());
    double total = 0.0;
    for (int n = 0; n < scenario.cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            total += std::log2(1.0 + terrestrial_sinr(ch, bf, noise, n, k));
    return total;
}

ConstraintReport check_constraints(const ScenarioConfig& scenario,
                                   const ChannelRealization& ch, const BeamformerSet& bf) {
    constexpr double kTol = 1e-6;
    ConstraintReport report;
    report.interference_w = satellite_interference(ch, bf);
    report.interference_limit_w = scenario.interference_temperature_w;
    report.feasible = true;
    if (report.interference_w > report.interference_limit_w * (1.0 + kTol)) {
        report.feasible = false;
        report.violations.push_back("satellite_interference");
    }
    report.cell_power_limit_w = scenario.cell_power_w;
    report.cell_power_w.resize(bf.w.size());
    for (std::size_t n = 0; n < bf.w.size(); ++n) {
        double used = 0.0;
        for (const auto& w : bf.w[n]) used += w.squaredNorm();
        report.cell_power_w[n] = used;
        if (used > scenario.cell_power_w[n] * (1.0 + kTol)) {
            report.feasible = false;
            report.violations.push_back("cell_power_" + std::to_string(n));
        }
    }
    report.aerial_power_w = bf.v.squaredNorm();
    report.aerial_power_limit_w = scenario.aerial_power_w;
    if (report.aerial_power_w > report.aerial_power_limit_w * (1.0 + kTol)) {
        report.feasible = false;
        report.violations.push_back("aerial_power");
    }
    const EffectiveNoise noise = effective_noise(ch, scenario.noise_power_w());
    report.aerial_rate_bpshz = std::log2(1.0 + aerial_sinr(ch, bf, noise));
    if (scenario.mode == Mode::HCSSA) {
        report.rate_floor_checked = true;
        report.aerial_rate_floor_bpshz = scenario.aerial_rate_floor_bpshz;
        if (report.aerial_rate_bpshz <
            scenario.aerial_rate_floor_bpshz * (1.0 - kTol) - 1e-12) {
            report.feasible = false;
            report.violations.push_back("aerial_rate_floor");
        }
    }
    return report;
}

std::pair<double, VecC> top_eig(const MatC& x) {
    require_hermitian(x, "top_eig");
    Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (x + x.adjoint()));
    const Eigen::Index last = x.rows() - 1;
    VecC vec = es.eigenvectors().col(last);
    // Canonical phase: the largest-modulus entry is made real and positive,
    // so repeated factorizations of the same matrix agree exactly.
    Eigen::Index imax = 0;
    vec.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> pivot = vec(imax);
    if (std::abs(pivot) > 0.0) vec *= std::conj(pivot) / std::abs(pivot);
    return {es.eigenvalues()(last), vec};
}

double penalty_F(const LiftedIterate& it) {
    auto contribution = [](const MatC& x) {
        require_hermitian(x, "penalty_F");
        Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (x + x.adjoint()),
                                               Eigen::EigenvaluesOnly);
        return x.trace().real() - es.eigenvalues()(x.rows() - 1);
    };
    double total = contribution(it.V);
    for (const auto& row : it.W)
        for (const auto& w : row) total += contribution(w);
    return total;
}

GramData build_gram_data(const ScenarioConfig& scenario, const ChannelRealization& ch) {
    GramData d;
    d.sigma2 = scenario.noise_power_w();
    d.noise = effective_noise(ch, d.sigma2);
    auto gram = [](const VecC& v) -> MatC { return v * v.adjoint(); };
    d.g_s = gram(ch.g_s);
    d.g_a = gram(ch.g_a);
    d.g.resize(ch.g.size());
    for (std::size_t n = 0; n < ch.g.size(); ++n)
        for (const auto& v : ch.g[n]) d.g[n].push_back(gram(v));
    d.h_s.reserve(ch.h_s.size());
    for (const auto& v : ch.h_s) d.h_s.push_back(gram(v));
    d.h_a.reserve(ch.h_a.size());
    for (const auto& v : ch.h_a) d.h_a.push_back(gram(v));
    d.h.resize(ch.h.size());
    for (std::size_t n = 0; n < ch.h.size(); ++n) {
        d.h[n].resize(ch.h[n].size());
        for (std::size_t m = 0; m < ch.h[n].size(); ++m)
            for (const auto& v : ch.h[n][m]) d.h[n][m].push_back(gram(v));
    }
    return d;
}

double lifted_s(const GramData& d, const LiftedIterate& it, int n, int k) {
    return std::log(lifted_alpha(d, it, n, k) +
                    trace_prod(d.h[n][n][k], it.W[n][k]));
}

double lifted_alpha(const GramData& d, const LiftedIterate& it, int n, int k) {
    double total = d.noise.terminal[n][k] + trace_prod(d.g[n][k], it.V);
    for (std::size_t m = 0; m < it.W.size(); ++m)
        for (std::size_t l = 0; l < it.W[m].size(); ++l) {
            if (static_cast<int>(m) == n && static_cast<int>(l) == k) continue;
            total += trace_prod(d.h[m][n][k], it.W[m][l]);
        }
    return total;
}

double lifted_s_aerial(const GramData& d, const LiftedIterate& it) {
    return std::log(lifted_alpha_aerial(d, it) + trace_prod(d.g_a, it.V));
}

double lifted_alpha_aerial(const GramData& d, const LiftedIterate& it) {
    double total = d.noise.aerial;
    for (std::size_t m = 0; m < it.W.size(); ++m)
        for (const auto& w : it.W[m]) total += trace_prod(d.h_a[m], w);
    return total;
}

double lifted_satellite_interference(const GramData& d, const LiftedIterate& it) {
    double total = trace_prod(d.g_s, it.V);
    for (std::size_t n = 0; n < it.W.size(); ++n)
        for (const auto& w : it.W[n]) total += trace_prod(d.h_s[n], w);
    return total;
}

double merit_mu(const ScenarioConfig& scenario, const ChannelRealization& ch,
                const LiftedIterate& it, double xi) {
    const GramData d = build_gram_data(scenario, ch);
    double total = 0.0;
    for (int n = 0; n < scenario.cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            total += lifted_s(d, it, n, k) - std::log(lifted_alpha(d, it, n, k));
    if (scenario.tcssa_aerial_active())
        total += scenario.aerial_objective_weight *
                 (lifted_s_aerial(d, it) - std::log(lifted_alpha_aerial(d, it)));
    return total - xi * penalty_F(it);
}

}  // namespace hcss
