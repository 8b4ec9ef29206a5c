// SPDX-License-Identifier: Apache-2.0

#include "hcss/pibf.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hcss/rng.hpp"

namespace hcss {

namespace {

// Stream tag for the feasibility-pass starting anchors; channel link tags
// stay in single digits, so this cannot collide.
constexpr std::uint64_t kInitAnchorTag = 100;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start)
        .count();
}

// Random starting anchors u0 ~ U[0, ln(10 * max sigma_bar'^2)] in
// noise-normalized units, keyed on the realization's seed.
ExpTangent random_anchor(const ScenarioConfig& scenario, const GramData& d,
                         std::uint64_t seed) {
    RngStream rng({seed, kInitAnchorTag});
    double nmax = 0.0;
    for (const auto& row : d.noise.terminal)
        for (double v : row) nmax = std::max(nmax, v / d.sigma2);
    if (scenario.tcssa_aerial_active())
        nmax = std::max(nmax, d.noise.aerial / d.sigma2);
    const double hi = std::log(10.0 * nmax);
    ExpTangent tan;
    for (int n = 0; n < scenario.cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            tan.u0.push_back(rng.uniform(0.0, hi));
    if (scenario.tcssa_aerial_active()) tan.u0_aerial = rng.uniform(0.0, hi);
    return tan;
}

ExpTangent tangent_from_flat(const ScenarioConfig& scenario, const std::vector<double>& flat,
                             double sigma2) {
    const double shift = std::log(sigma2);
    ExpTangent tan;
    const std::size_t terminals = static_cast<std::size_t>(scenario.total_terminals());
    for (std::size_t i = 0; i < terminals; ++i) tan.u0.push_back(flat[i] - shift);
    if (scenario.tcssa_aerial_active()) tan.u0_aerial = flat[terminals] - shift;
    return tan;
}

void fill_rates(const ScenarioConfig& scenario, const ChannelRealization& ch,
                SchemeResult& res) {
    const EffectiveNoise noise = effective_noise(ch, scenario.noise_power_w());
    res.terminal_rates_bpshz.assign(scenario.cells, {});
    double total = 0.0;
    for (int n = 0; n < scenario.cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
            const double r =
                std::log2(1.0 + terrestrial_sinr(ch, res.beamformers, noise, n, k));
            res.terminal_rates_bpshz[n].push_back(r);
            total += r;
        }
    res.terrestrial_rate_bpshz = total;
    res.aerial_rate_bpshz = res.report.aerial_rate_bpshz;
}

SchemeResult run_impl(const ScenarioConfig& scenario, const ChannelRealization& ch,
                      const PibfSettings& settings) {
    const auto t_start = std::chrono::steady_clock::now();
    SchemeResult res;
    res.scheme = Scheme::PIBF;
    res.mode = scenario.mode;

    const GramData d = build_gram_data(scenario, ch);
    InitOutcome init = initialize(scenario, ch, settings);
    res.init_iterations = init.iterations;
    if (!init.solver_ok) {
        res.status = SchemeStatus::NumericalFailure;
        res.message = "feasibility pass failed: " + init.message;
        res.wall_ms = elapsed_ms(t_start);
        return res;
    }
    if (!init.feasible) {
        res.status = SchemeStatus::Infeasible;
        res.message = init.message.empty() ? "no feasible point found" : init.message;
        res.wall_ms = elapsed_ms(t_start);
        return res;
    }

    LiftedIterate it = init.iterate;
    const LiftedIterate interior = it;  // retry fallback, strictly feasible
    double xi = settings.xi0;
    bool converged = false;

    for (int outer = 0; outer < settings.outer_cap && !converged; ++outer) {
        res.trace.outer_initial_mu.push_back(merit_mu(scenario, ch, it, xi));
        double phi_prev = 0.0;
        bool have_prev = false;
        for (int t = 0; t < settings.t_max; ++t) {
            ConvexSubproblem sub = build_inner_subproblem(scenario, d, it, xi);
            SolveOutcome sol = solve(sub);
            if (sol.status != SolveStatus::Optimal) {
                // One retry per step, from an anchor pulled toward the known
                // interior point.
                it.V = it.V + 0.1 * (interior.V - it.V);
                for (std::size_t n = 0; n < it.W.size(); ++n)
                    for (std::size_t k = 0; k < it.W[n].size(); ++k)
                        it.W[n][k] = it.W[n][k] + 0.1 * (interior.W[n][k] - it.W[n][k]);
                update_aux(scenario, d, it);
                sub = build_inner_subproblem(scenario, d, it, xi);
                sol = solve(sub);
            }
            if (sol.status != SolveStatus::Optimal) {
                res.status = SchemeStatus::NumericalFailure;
                res.message = "surrogate solve failed: " + sol.message;
                res.wall_ms = elapsed_ms(t_start);
                return res;
            }
            ++res.inner_iterations;
            it = lifted_from_solution(sub, sol.x);
            update_aux(scenario, d, it);
            res.trace.points.push_back({outer, t, sol.objective,
                                        merit_mu(scenario, ch, it, xi), penalty_F(it),
                                        xi});
            if (have_prev && std::abs(sol.objective - phi_prev) <= settings.eps1) break;
            phi_prev = sol.objective;
            have_prev = true;
        }
        ++res.outer_iterations;
        const double f = penalty_F(it);
        res.trace.outer_final_f.push_back(f);
        if (f < settings.eps2)
            converged = true;
        else
            xi *= settings.omega;
    }

    if (!converged) {
        res.status = SchemeStatus::NumericalFailure;
        res.message = "penalty stayed above threshold through the outer cap";
        res.wall_ms = elapsed_ms(t_start);
        return res;
    }

    res.beamformers = recover_rank_one(it, settings.eps2);
    res.report = check_constraints(scenario, ch, res.beamformers);
    res.feasible = res.report.feasible;
    fill_rates(scenario, ch, res);
    res.status = SchemeStatus::Ok;
    res.wall_ms = elapsed_ms(t_start);
    return res;
}

}  // namespace

void PibfSettings::validate() const {
    if (!(omega > 1.0)) throw std::invalid_argument("pibf: omega must be > 1");
    if (!(eps1 > 0.0) || !(eps2 > 0.0))
        throw std::invalid_argument("pibf: tolerances must be > 0");
    if (!(xi0 > 0.0)) throw std::invalid_argument("pibf: xi0 must be > 0");
    if (t_max < 1 || outer_cap < 1 || init_cap < 1)
        throw std::invalid_argument("pibf: iteration caps must be >= 1");
}

InitOutcome initialize(const ScenarioConfig& scenario, const ChannelRealization& ch,
                       const PibfSettings& settings) {
    settings.validate();
    scenario.validate();
    const GramData d = build_gram_data(scenario, ch);
    ExpTangent tan = random_anchor(scenario, d, ch.seed);

    InitOutcome out;
    for (int pass = 0; pass < settings.init_cap; ++pass) {
        ConvexSubproblem sub = build_feasibility_subproblem(scenario, d, tan);
        SolveOutcome sol = solve(sub);
        ++out.iterations;
        if (sol.status != SolveStatus::Optimal) {
            out.solver_ok = false;
            out.message = "slack maximization failed: " + sol.message;
            return out;
        }
        out.iterate = lifted_from_solution(sub, sol.x);
        out.delta = sol.objective;
        if (out.delta >= 0.0) {
            out.feasible = true;
            update_aux(scenario, d, out.iterate);
            return out;
        }
        tan = tangent_from_flat(scenario, update_aux(scenario, d, out.iterate), d.sigma2);
    }
    out.message = "slack stayed negative through the feasibility cap";
    return out;
}

SchemeResult run_pibf(const ScenarioConfig& scenario, const ChannelRealization& ch,
                      const PibfSettings& settings) {
    if (scenario.mode != Mode::HCSSA)
        throw std::invalid_argument("run_pibf: scenario mode must be hcssa");
    return run_impl(scenario, ch, settings);
}

SchemeResult run_pibf_tcssa(const ScenarioConfig& scenario, const ChannelRealization& ch,
                            const PibfSettings& settings) {
    if (scenario.mode != Mode::TCSSA)
        throw std::invalid_argument("run_pibf_tcssa: scenario mode must be tcssa");
    return run_impl(scenario, ch, settings);
}

}  // namespace hcss
