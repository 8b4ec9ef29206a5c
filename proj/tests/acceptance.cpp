// SPDX-License-Identifier: Apache-2.0
// Release acceptance gate. Runs ten scenario-level checks against the default
// two-cell configuration with fixed seeds and prints one verdict line each;
// the process exits nonzero if any check fails. Runtime is dominated by the
// iterative scheme and stays well under the registered ctest timeout.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hcss/channel.hpp"
#include "hcss/harness.hpp"
#include "hcss/lowcomplexity.hpp"
#include "hcss/network.hpp"
#include "hcss/pibf.hpp"

#include "oracles.hpp"

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr std::uint64_t kMasterSeed = 2026;

struct Gate {
    int failures = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void verdict(int index, const char* label, bool ok, const std::string& detail) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d. %-42s %s  (t=%.0fs)\n", ok ? "PASS" : "FAIL", index, label,
                    detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

// Memoized per-trial runs so criteria sharing a configuration reuse results.
class RunCache {
  public:
    explicit RunCache(const hcss::ScenarioConfig& base) : base_(base) {}

    const hcss::ChannelRealization& channel(std::uint64_t seed) {
        auto it = channels_.find(seed);
        if (it == channels_.end())
            it = channels_.emplace(seed, hcss::draw_realization(seed, base_)).first;
        return it->second;
    }

    const hcss::SchemeResult& run(const hcss::ScenarioConfig& config, std::uint64_t seed,
                                  hcss::Scheme scheme) {
        const std::string key = hcss::config_to_json(config) + "|" + std::to_string(seed) +
                                "|" + hcss::to_string(scheme);
        auto it = results_.find(key);
        if (it != results_.end()) return it->second;
        const hcss::ChannelRealization& ch = channel(seed);
        hcss::SchemeResult res;
        if (scheme == hcss::Scheme::PIBF)
            res = config.mode == hcss::Mode::TCSSA ? hcss::run_pibf_tcssa(config, ch)
                                                   : hcss::run_pibf(config, ch);
        else
            res = hcss::run_scheme(scheme, config, ch);
        return results_.emplace(key, std::move(res)).first->second;
    }

  private:
    hcss::ScenarioConfig base_;  // channel geometry shared by every config here
    std::map<std::uint64_t, hcss::ChannelRealization> channels_;
    std::map<std::string, hcss::SchemeResult> results_;
};

bool usable(const hcss::SchemeResult& r) {
    return r.status == hcss::SchemeStatus::Ok && r.feasible;
}

// --- criteria 1-2: trace properties of the iterative scheme ----------------

struct TraceStats {
    int runs = 0;
    int ok_runs = 0;
    int failures = 0;        // numerical-failure runs
    int stages = 0;
    int stages_fast = 0;     // inner loops done within 10 iterations
    int worst_inner = 0;
    int monotonicity_breaks = 0;
    int unconverged_stages = 0;
};

TraceStats scan_traces(const std::vector<const hcss::SchemeResult*>& runs, double eps1,
                       int t_max) {
    TraceStats st;
    for (const hcss::SchemeResult* res : runs) {
        ++st.runs;
        if (res->status == hcss::SchemeStatus::NumericalFailure) ++st.failures;
        if (res->status != hcss::SchemeStatus::Ok) continue;
        ++st.ok_runs;

        const auto& points = res->trace.points;
        std::size_t i = 0;
        int stage = 0;
        while (i < points.size()) {
            std::size_t j = i;
            while (j < points.size() && points[j].outer == points[i].outer) ++j;

            const int count = static_cast<int>(j - i);
            ++st.stages;
            st.worst_inner = std::max(st.worst_inner, count);
            if (count <= 10) ++st.stages_fast;
            if (count > t_max) ++st.unconverged_stages;

            // Ascent within the stage, both for the surrogate optimum phi and
            // for the merit at each refreshed anchor.
            if (stage < static_cast<int>(res->trace.outer_initial_mu.size()) &&
                points[i].mu < res->trace.outer_initial_mu[stage] - 1e-6)
                ++st.monotonicity_breaks;
            for (std::size_t t = i + 1; t < j; ++t) {
                if (points[t].phi < points[t - 1].phi - 1e-6) ++st.monotonicity_breaks;
                if (points[t].mu < points[t - 1].mu - 1e-6) ++st.monotonicity_breaks;
            }
            // Termination by tolerance, not by the iteration cap.
            if (count >= 2 && count == t_max &&
                std::abs(points[j - 1].phi - points[j - 2].phi) > eps1)
                ++st.unconverged_stages;
            i = j;
            ++stage;
        }
    }
    return st;
}

// --- criterion 7 helper: scalar power problem rebuilt from first principles -

struct ScalarModel {
    double sat_v = 0.0, aerial_v = 0.0;
    std::vector<double> direct, from_v, sat_w, aerial_w, noise;
    std::vector<std::vector<double>> cross;  // cross[k][l], l != k
    double noise_a = 0.0;
    double cap = 0.0, beta = 0.0, p_budget = 0.0, q_budget = 0.0;
    bool floor_active = false;

    // x = {q, p_0, .., p_{K-1}}
    double objective(const std::vector<double>& x) const {
        double total = 0.0;
        const int kk = static_cast<int>(direct.size());
        for (int k = 0; k < kk; ++k) {
            double denom = noise[k] + from_v[k] * x[0];
            for (int l = 0; l < kk; ++l)
                if (l != k) denom += cross[k][l] * x[1 + l];
            total += std::log1p(direct[k] * x[1 + k] / denom);
        }
        return total;
    }

    bool feasible(const std::vector<double>& x) const {
        const int kk = static_cast<int>(direct.size());
        double p_sum = 0.0, sat = sat_v * x[0], aerial_i = 0.0;
        for (int k = 0; k < kk; ++k) {
            p_sum += x[1 + k];
            sat += sat_w[k] * x[1 + k];
            aerial_i += aerial_w[k] * x[1 + k];
        }
        if (p_sum > p_budget * (1.0 + 1e-9)) return false;
        if (sat > cap * (1.0 + 1e-9)) return false;
        if (floor_active && aerial_v * x[0] < beta * (noise_a + aerial_i) * (1.0 - 1e-9))
            return false;
        return true;
    }
};

ScalarModel build_scalar_model(const hcss::ScenarioConfig& scenario,
                               const hcss::ChannelRealization& ch,
                               const hcss::NormalizedBeamformers& nb) {
    ScalarModel m;
    const hcss::EffectiveNoise en = hcss::effective_noise(ch, scenario.noise_power_w());
    const int kk = scenario.terminals_per_cell[0];
    m.direct.resize(kk);
    m.from_v.resize(kk);
    m.sat_w.resize(kk);
    m.aerial_w.resize(kk);
    m.noise.resize(kk);
    m.cross.assign(kk, std::vector<double>(kk, 0.0));
    for (int k = 0; k < kk; ++k) {
        m.direct[k] = std::norm(ch.h[0][0][k].dot(nb.w_bar[0][k]));
        for (int l = 0; l < kk; ++l)
            if (l != k) m.cross[k][l] = std::norm(ch.h[0][0][k].dot(nb.w_bar[0][l]));
        m.from_v[k] = std::norm(ch.g[0][k].dot(nb.v_bar));
        m.sat_w[k] = std::norm(ch.h_s[0].dot(nb.w_bar[0][k]));
        m.aerial_w[k] = std::norm(ch.h_a[0].dot(nb.w_bar[0][k]));
        m.noise[k] = en.terminal[0][k];
    }
    m.sat_v = std::norm(ch.g_s.dot(nb.v_bar));
    m.aerial_v = std::norm(ch.g_a.dot(nb.v_bar));
    m.noise_a = en.aerial;
    m.cap = scenario.interference_temperature_w;
    m.beta = scenario.beta_bar();
    m.p_budget = scenario.cell_power_w[0];
    m.q_budget = scenario.aerial_power_w;
    m.floor_active = scenario.mode == hcss::Mode::HCSSA;
    return m;
}

// --- criterion 8 helper: paired-subset mean over a swept axis ---------------

// Means restricted to trials feasible at every swept value, so the comparison
// is between identical channel sets. Returns false when no trial qualifies.
bool paired_means(const std::vector<std::vector<const hcss::SchemeResult*>>& by_value,
                  std::vector<double>* means, int* kept) {
    const std::size_t n_values = by_value.size();
    const std::size_t trials = by_value.empty() ? 0 : by_value[0].size();
    std::vector<int> keep;
    for (std::size_t t = 0; t < trials; ++t) {
        bool all = true;
        for (std::size_t v = 0; v < n_values; ++v)
            if (!usable(*by_value[v][t])) all = false;
        if (all) keep.push_back(static_cast<int>(t));
    }
    *kept = static_cast<int>(keep.size());
    if (keep.empty()) return false;
    means->assign(n_values, 0.0);
    for (std::size_t v = 0; v < n_values; ++v) {
        for (int t : keep) (*means)[v] += by_value[v][t]->terrestrial_rate_bpshz;
        (*means)[v] /= static_cast<double>(keep.size());
    }
    return true;
}

// Slack sits at the conic solver's duality-gap scale: means assembled from
// solver output are not comparable any finer than that.
bool monotone(const std::vector<double>& xs, bool increasing) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (increasing && xs[i] < xs[i - 1] - 1e-6) return false;
        if (!increasing && xs[i] > xs[i - 1] + 1e-6) return false;
    }
    return true;
}

}  // namespace

int main() {
    const hcss::ScenarioConfig base;  // defaults: 2 cells, 2 terminals each
    base.validate();
    RunCache cache(base);
    Gate gate;
    const hcss::PibfSettings pibf_defaults;
    const hcss::IsSettings is_defaults;

    std::printf("acceptance gate: default scenario, %d trials batch, master seed %llu\n",
                50, static_cast<unsigned long long>(kMasterSeed));
    std::fflush(stdout);

    // Shared 50-trial batch at the default operating point (interference cap
    // 2e-12 mW, 60 W budgets, 3 bps/Hz floor).
    const int batch = 50;
    std::vector<std::uint64_t> seeds(batch);
    for (int t = 0; t < batch; ++t) seeds[t] = hcss::trial_seed(kMasterSeed, t);

    std::vector<const hcss::SchemeResult*> pibf_runs, is_runs, zf_runs, mrc_runs;
    for (int t = 0; t < batch; ++t) {
        pibf_runs.push_back(&cache.run(base, seeds[t], hcss::Scheme::PIBF));
        is_runs.push_back(&cache.run(base, seeds[t], hcss::Scheme::IS));
        zf_runs.push_back(&cache.run(base, seeds[t], hcss::Scheme::ZF));
        mrc_runs.push_back(&cache.run(base, seeds[t], hcss::Scheme::MRC));
    }

    // 1. Every surrogate optimum and every refreshed-anchor merit ascends
    //    (within 1e-6) inside each penalty stage, on all 50 runs.
    const TraceStats st = scan_traces(pibf_runs, pibf_defaults.eps1, pibf_defaults.t_max);
    gate.verdict(1, "penalty-loop monotonicity",
                 st.failures == 0 && st.monotonicity_breaks == 0 && st.ok_runs > 0,
                 fmt("%d runs ok, %d stages, %d breaks, %d failures", st.ok_runs,
                     st.stages, st.monotonicity_breaks, st.failures));

    // 2. Inner loops converge by tolerance within 20 iterations, 90% within 10.
    const double fast_fraction =
        st.stages > 0 ? static_cast<double>(st.stages_fast) / st.stages : 0.0;
    gate.verdict(2, "inner-loop convergence",
                 st.unconverged_stages == 0 && st.worst_inner <= pibf_defaults.t_max &&
                     fast_fraction >= 0.9,
                 fmt("worst inner %d, fast fraction %.3f, unconverged %d", st.worst_inner,
                     fast_fraction, st.unconverged_stages));

    // 3. Completed runs end rank-one (F < 1e-3), the recovered vectors satisfy
    //    every constraint at the 1e-6 relative tolerance, and vector-domain
    //    rates track the lifted objective within 2%.
    {
        int checked = 0, f_bad = 0, infeasible = 0, rate_bad = 0;
        double worst_gap = 0.0;
        for (int t = 0; t < batch; ++t) {
            const hcss::SchemeResult& res = *pibf_runs[t];
            if (res.status != hcss::SchemeStatus::Ok || res.trace.points.empty()) continue;
            ++checked;
            if (res.trace.outer_final_f.empty() ||
                res.trace.outer_final_f.back() >= pibf_defaults.eps2)
                ++f_bad;
            const hcss::ConstraintReport report =
                hcss::check_constraints(base, cache.channel(seeds[t]), res.beamformers);
            if (!report.feasible) ++infeasible;
            const hcss::TracePoint& last = res.trace.points.back();
            const double lifted_rate = (last.mu + last.xi * last.f) / kLn2;
            const double gap = std::abs(res.terrestrial_rate_bpshz - lifted_rate) /
                               std::max(std::abs(lifted_rate), 1e-9);
            worst_gap = std::max(worst_gap, gap);
            if (gap > 0.02) ++rate_bad;
        }
        gate.verdict(3, "rank-one recovery fidelity",
                     checked > 0 && f_bad == 0 && infeasible == 0 && rate_bad == 0,
                     fmt("%d runs, F misses %d, constraint misses %d, worst rate gap %.4f",
                         checked, f_bad, infeasible, worst_gap));
    }

    // 4. Mean terrestrial sum rate of the iterative scheme is at least each
    //    low-complexity scheme's mean minus 0.1 bps/Hz, on >= 30 feasible trials.
    {
        auto mean_rate = [](const std::vector<const hcss::SchemeResult*>& runs, int* count) {
            double sum = 0.0;
            *count = 0;
            for (const hcss::SchemeResult* r : runs)
                if (usable(*r)) {
                    sum += r->terrestrial_rate_bpshz;
                    ++*count;
                }
            return *count > 0 ? sum / *count : 0.0;
        };
        int n_pibf = 0, n_is = 0, n_zf = 0, n_mrc = 0;
        const double m_pibf = mean_rate(pibf_runs, &n_pibf);
        const double m_is = mean_rate(is_runs, &n_is);
        const double m_zf = mean_rate(zf_runs, &n_zf);
        const double m_mrc = mean_rate(mrc_runs, &n_mrc);
        const bool ok = n_pibf >= 30 && m_pibf >= m_is - 0.1 && m_pibf >= m_zf - 0.1 &&
                        m_pibf >= m_mrc - 0.1;
        gate.verdict(4, "scheme ordering", ok,
                     fmt("means: pibf %.3f (%d), is %.3f (%d), zf %.3f (%d), mrc %.3f (%d)",
                         m_pibf, n_pibf, m_is, n_is, m_zf, n_zf, m_mrc, n_mrc));
    }

    // 5. Zero forcing nulls every collected interference channel below 1e-10,
    //    and the resulting SINRs match their interference-free values to 1e-9.
    {
        double worst_null = 0.0, worst_sinr_gap = 0.0;
        int step1_bad = 0, checked = 0;
        for (int t = 0; t < batch; ++t) {
            const hcss::ChannelRealization& ch = cache.channel(seeds[t]);
            const hcss::Step1Outcome step1 = hcss::zf_step1(base, ch);
            if (step1.status != hcss::SchemeStatus::Ok) {
                ++step1_bad;
                continue;
            }
            for (int n = 0; n < base.cells; ++n)
                for (int k = 0; k < base.terminals_per_cell[n]; ++k) {
                    const hcss::VecC& w = step1.nb.w_bar[n][k];
                    worst_null = std::max(worst_null, std::abs(ch.h_a[n].dot(w)));
                    for (int m = 0; m < base.cells; ++m)
                        for (int l = 0; l < base.terminals_per_cell[m]; ++l)
                            if (m != n || l != k)
                                worst_null =
                                    std::max(worst_null, std::abs(ch.h[n][m][l].dot(w)));
                    worst_null =
                        std::max(worst_null, std::abs(ch.g[n][k].dot(step1.nb.v_bar)));
                }

            const hcss::SchemeResult& res = *zf_runs[t];
            if (!usable(res)) continue;
            ++checked;
            const hcss::EffectiveNoise en = hcss::effective_noise(ch, base.noise_power_w());
            for (int n = 0; n < base.cells; ++n)
                for (int k = 0; k < base.terminals_per_cell[n]; ++k) {
                    const double full =
                        hcss::terrestrial_sinr(ch, res.beamformers, en, n, k);
                    const double clean =
                        std::norm(ch.h[n][n][k].dot(res.beamformers.w[n][k])) /
                        en.terminal[n][k];
                    const double gap =
                        std::abs(full - clean) / std::max(clean, 1e-30);
                    if (clean > 0.0 || full > 0.0)
                        worst_sinr_gap = std::max(worst_sinr_gap, gap);
                }
        }
        gate.verdict(5, "zero-forcing nulling",
                     step1_bad == 0 && worst_null < 1e-10 && worst_sinr_gap < 1e-9 &&
                         checked > 0,
                     fmt("worst residual %.2e, worst sinr gap %.2e, %d runs",
                         worst_null, worst_sinr_gap, checked));
    }

    // 6. Scalar power allocation after interference suppression converges
    //    within 5 surrogate solves on every default trial. The matched-filter
    //    variant starts from stronger coupling and is reported informationally.
    {
        int worst_is = 0, worst_mrc = 0, is_checked = 0;
        for (int t = 0; t < batch; ++t) {
            if (is_runs[t]->status == hcss::SchemeStatus::Ok) {
                worst_is = std::max(worst_is, is_runs[t]->inner_iterations);
                ++is_checked;
            }
            if (mrc_runs[t]->status == hcss::SchemeStatus::Ok)
                worst_mrc = std::max(worst_mrc, mrc_runs[t]->inner_iterations);
        }
        gate.verdict(6, "power-allocation convergence",
                     is_checked > 0 && worst_is <= 5,
                     fmt("suppressed-direction worst %d solves over %d trials "
                         "(matched-filter worst %d, informational)",
                         worst_is, is_checked, worst_mrc));
    }

    // 7. Step-2 objectives match a brute-force grid search (100+ points per
    //    power dimension, refined once) within 1% on 1-cell 2-terminal cases.
    {
        hcss::ScenarioConfig two = base;
        two.cells = 1;
        two.terminals_per_cell = {2};
        two.cell_power_w = {60.0};
        two.geometry.terrestrial_bs = {{-250.0, 0.0, 0.0}};
        two.geometry.terminals = {{{-170.0, 60.0, 0.0}, {-290.0, -120.0, 0.0}}};
        two.geometry.beam_angle_terminals_deg = {{0.8, 0.8}};
        two.validate();

        int instances = 0, misses = 0, skipped = 0;
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const std::uint64_t seed = hcss::trial_seed(777, i);
            const hcss::ChannelRealization ch = hcss::draw_realization(seed, two);
            for (const hcss::Scheme scheme :
                 {hcss::Scheme::IS, hcss::Scheme::ZF, hcss::Scheme::MRC}) {
                hcss::Step1Outcome step1;
                if (scheme == hcss::Scheme::IS)
                    step1 = hcss::is_step1(two, ch);
                else if (scheme == hcss::Scheme::ZF)
                    step1 = hcss::zf_step1(two, ch);
                else
                    step1.nb = hcss::mrc_step1(two, ch);
                if (step1.status != hcss::SchemeStatus::Ok) {
                    ++skipped;
                    continue;
                }

                const hcss::PowerAllocOutcome pa =
                    scheme == hcss::Scheme::ZF
                        ? hcss::zf_power(two, ch, step1.nb)
                        : hcss::power_alloc_sca(two, ch, step1.nb, is_defaults.eps4);
                const ScalarModel model = build_scalar_model(two, ch, step1.nb);
                const oracles::GridResult grid = oracles::grid_search(
                    {model.q_budget, model.p_budget, model.p_budget}, 101,
                    [&](const std::vector<double>& x) { return model.feasible(x); },
                    [&](const std::vector<double>& x) { return model.objective(x); });

                if (!pa.feasible || !grid.found) {
                    // Both sides must agree that no feasible power exists.
                    if (pa.feasible != grid.found) ++misses;
                    ++skipped;
                    continue;
                }
                ++instances;
                const double got =
                    model.objective({pa.alloc.q, pa.alloc.p[0][0], pa.alloc.p[0][1]});
                const double gap =
                    std::abs(got - grid.value) / std::max(std::abs(grid.value), 1e-9);
                worst = std::max(worst, gap);
                if (gap > 0.01) ++misses;
            }
        }
        gate.verdict(7, "power-allocation grid equivalence",
                     misses == 0 && instances >= 20,
                     fmt("%d instances, worst gap %.4f, %d skipped", instances, worst,
                         skipped));
    }

    // 8. Paired-seed budget sweeps move the mean terrestrial rate the right
    //    way for every scheme: up in power, up in the interference cap, down
    //    in the aerial rate floor.
    {
        const int trials = 10;
        const std::vector<hcss::Scheme> schemes{hcss::Scheme::PIBF, hcss::Scheme::IS,
                                                hcss::Scheme::ZF, hcss::Scheme::MRC};
        struct Axis {
            const char* parameter;
            std::vector<double> values;
            bool increasing;
        };
        const std::vector<Axis> axes{
            {"power", {20.0, 40.0, 60.0, 80.0}, true},
            {"interference_temperature", {0.5e-12, 1e-12, 2e-12, 4e-12}, true},
            {"aerial_rate_floor", {3.0, 6.0, 9.0}, false},
        };

        bool all_ok = true;
        std::ostringstream detail;
        for (const Axis& axis : axes) {
            for (const hcss::Scheme scheme : schemes) {
                std::vector<std::vector<const hcss::SchemeResult*>> by_value;
                for (double value : axis.values) {
                    const hcss::ScenarioConfig config =
                        hcss::apply_sweep_value(base, axis.parameter, value);
                    std::vector<const hcss::SchemeResult*> runs;
                    for (int t = 0; t < trials; ++t)
                        runs.push_back(
                            &cache.run(config, hcss::trial_seed(kMasterSeed, t), scheme));
                    by_value.push_back(std::move(runs));
                }
                std::vector<double> means;
                int kept = 0;
                const bool ok = paired_means(by_value, &means, &kept) &&
                                monotone(means, axis.increasing);
                if (!ok) {
                    all_ok = false;
                    detail << " " << axis.parameter << "/" << hcss::to_string(scheme)
                           << " broke (kept " << kept << ")";
                }
            }
        }
        gate.verdict(8, "monotone budget trends", all_ok,
                     all_ok ? "3 axes x 4 schemes, paired subsets"
                            : "violations:" + detail.str());
    }

    // 9. Mode contract across the floor sweep: the relaxed mode is blind to
    //    the floor, the strict mode honors it on every feasible trial, and at
    //    some floor the strict mode protects the aerial rate while the relaxed
    //    mode misses it on most trials. The sweep reaches 10 bps/Hz because
    //    the relaxed optimum leaves the aerial link just under that.
    {
        const int trials = 10;
        const std::vector<double> floors{3.0, 6.0, 9.0, 10.0};
        bool relaxed_constant = true, strict_floor_ok = true, crossover = false;
        double relaxed_mean0 = 0.0;
        std::string crossover_note = "none";
        std::vector<std::vector<double>> relaxed_rates(floors.size());

        for (std::size_t fi = 0; fi < floors.size(); ++fi) {
            hcss::ScenarioConfig strict =
                hcss::apply_sweep_value(base, "aerial_rate_floor", floors[fi]);
            hcss::ScenarioConfig relaxed = strict;
            relaxed.mode = hcss::Mode::TCSSA;

            int strict_hits = 0, relaxed_misses = 0, relaxed_ok = 0;
            double relaxed_sum = 0.0;
            for (int t = 0; t < trials; ++t) {
                const std::uint64_t seed = hcss::trial_seed(kMasterSeed, t);
                const hcss::SchemeResult& hs = cache.run(strict, seed, hcss::Scheme::PIBF);
                const hcss::SchemeResult& ts = cache.run(relaxed, seed, hcss::Scheme::PIBF);

                if (usable(hs)) {
                    if (hs.aerial_rate_bpshz < floors[fi] - 1e-4) strict_floor_ok = false;
                    if (hs.aerial_rate_bpshz >= floors[fi] - 1e-4) ++strict_hits;
                }
                if (ts.status == hcss::SchemeStatus::Ok) {
                    ++relaxed_ok;
                    relaxed_sum += ts.terrestrial_rate_bpshz;
                    relaxed_rates[fi].push_back(ts.terrestrial_rate_bpshz);
                    if (ts.aerial_rate_bpshz < floors[fi]) ++relaxed_misses;
                } else {
                    relaxed_constant = false;  // the relaxed mode must always run
                }
            }
            const double relaxed_mean = relaxed_ok > 0 ? relaxed_sum / relaxed_ok : 0.0;
            if (fi == 0)
                relaxed_mean0 = relaxed_mean;
            else if (relaxed_mean != relaxed_mean0)
                relaxed_constant = false;
            if (strict_hits * 2 > trials && relaxed_misses * 2 > trials) {
                crossover = true;
                crossover_note = fmt("floor %.0f: strict %d/%d, relaxed misses %d/%d",
                                     floors[fi], strict_hits, trials, relaxed_misses,
                                     trials);
            }
        }
        // Bitwise identity of the per-trial relaxed rates, not just the means.
        for (std::size_t fi = 1; fi < floors.size(); ++fi)
            if (relaxed_rates[fi] != relaxed_rates[0]) relaxed_constant = false;

        gate.verdict(9, "mode contract on the rate floor",
                     relaxed_constant && strict_floor_ok && crossover,
                     fmt("relaxed constant %d, strict floor %d, crossover %s",
                         relaxed_constant ? 1 : 0, strict_floor_ok ? 1 : 0,
                         crossover_note.c_str()));
    }

    // 10. Sampler second moments at 1e5 draws within 2%, and the beam-gain
    //     curve against the high-precision Bessel oracle at 1e-9.
    {
        const int draws = 100000;
        const int dim = 8;
        const double d_m = 100.0, f_ghz = 18.0;
        hcss::RngStream rng({10101});

        const hcss::VecC los = hcss::steering_vector(0.37, dim, 0.5);
        double acc_rice = 0.0, acc_ray = 0.0, acc_sr = 0.0;
        hcss::FadingParams fading;  // omega 0.835, b 0.126 -> omega + 2b = 1.087
        for (int i = 0; i < draws; ++i) {
            acc_rice += hcss::sample_rician(rng, los, d_m, f_ghz, 10.0).squaredNorm();
            acc_ray += hcss::sample_rayleigh(rng, dim, d_m, f_ghz).squaredNorm();
            acc_sr +=
                hcss::sample_shadowed_rician(rng, dim, d_m, f_ghz, 0.4, fading).squaredNorm();
        }
        const double norm = static_cast<double>(draws) * dim;
        const double los_loss = hcss::db_to_linear(hcss::los_path_loss_db(d_m, f_ghz));
        const double nlos_loss = hcss::db_to_linear(hcss::nlos_path_loss_db(d_m, f_ghz));
        const double b_max = hcss::db_to_linear(fading.beam_gain_max_db);
        const double gain_04 = hcss::beam_gain(0.4, fading.beam_3db_angle_deg, b_max);

        const double rice_rel = acc_rice / norm * los_loss - 1.0;
        const double ray_rel = acc_ray / norm * nlos_loss - 1.0;
        const double sr_rel = acc_sr / norm * los_loss / (gain_04 * 1.087) - 1.0;

        double worst_gain = 0.0;
        for (const double phi : {0.01, 0.4, 0.8}) {
            const long double oracle =
                oracles::beam_gain_oracle(phi, fading.beam_3db_angle_deg, b_max);
            const double rel = std::abs(
                static_cast<double>((hcss::beam_gain(phi, fading.beam_3db_angle_deg, b_max) -
                                     oracle) /
                                    oracle));
            worst_gain = std::max(worst_gain, rel);
        }

        gate.verdict(10, "channel sampler statistics",
                     std::abs(rice_rel) <= 0.02 && std::abs(ray_rel) <= 0.02 &&
                         std::abs(sr_rel) <= 0.02 && worst_gain <= 1e-9,
                     fmt("moment errors: rician %+.4f, rayleigh %+.4f, sr %+.4f; "
                         "beam gain %.2e",
                         rice_rel, ray_rel, sr_rel, worst_gain));
    }

    if (gate.failures == 0) {
        std::printf("acceptance: all 10 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", gate.failures);
    return 1;
}
