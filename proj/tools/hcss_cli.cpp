// SPDX-License-Identifier: Apache-2.0
// Command-line harness: `run` (Monte Carlo sweep), `trial` (single
// realization with full traces), `check` (seeded invariant suite).
// Exit codes: 0 success, 1 config/usage error, 2 numerical failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcss/harness.hpp"

namespace {

using namespace hcss;

std::vector<Scheme> parse_schemes(const std::string& csv) {
    std::vector<Scheme> schemes;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) schemes.push_back(scheme_from_string(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (schemes.empty()) throw ConfigError("empty scheme list");
    return schemes;
}

std::vector<Mode> parse_modes(const std::string& csv) {
    std::vector<Mode> modes;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) modes.push_back(mode_from_string(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (modes.empty()) throw ConfigError("empty mode list");
    return modes;
}

std::vector<double> default_values(const std::string& parameter) {
    if (parameter == "power") return {20.0, 40.0, 60.0, 80.0};
    if (parameter == "interference_temperature") return {0.5e-12, 1e-12, 2e-12, 4e-12};
    if (parameter == "aerial_rate_floor") return {3.0, 6.0, 9.0};
    return {0.0};
}

void print_rows(const std::vector<AggregateRow>& rows) {
    std::printf("%12s %6s %6s %12s %12s %10s\n", "value", "scheme", "mode",
                "mean_rate", "aerial_rate", "feasible");
    for (const AggregateRow& row : rows)
        std::printf("%12g %6s %6s %12.4f %12.4f %7d/%-3d\n", row.value,
                    to_string(row.scheme).c_str(), to_string(row.mode).c_str(),
                    row.mean_terrestrial_rate_bpshz, row.mean_aerial_rate_bpshz,
                    row.feasible_trials, row.trials);
}

void print_records(const std::vector<TrialRecord>& records) {
    for (const TrialRecord& rec : records) {
        const SchemeResult& r = rec.result;
        std::printf("%5s %6s seed=%" PRIu64 " status=%s feasible=%d rate=%.4f "
                    "aerial=%.4f iters=%d/%d/%d%s%s\n",
                    to_string(r.scheme).c_str(), to_string(r.mode).c_str(), rec.seed,
                    to_string(r.status).c_str(), r.feasible ? 1 : 0,
                    r.terrestrial_rate_bpshz, r.aerial_rate_bpshz, r.init_iterations,
                    r.outer_iterations, r.inner_iterations,
                    r.message.empty() ? "" : " msg=", r.message.c_str());
    }
}

struct CheckContext {
    int failures = 0;
    void report(const std::string& name, bool pass) {
        std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name.c_str());
        if (!pass) ++failures;
    }
};

// Seeded invariant suite over a few random realizations; cheap enough to run
// on every build.
int run_checks(std::uint64_t master_seed) {
    ScenarioConfig sc;
    CheckContext ctx;

    for (int i = 0; i < 3; ++i) {
        const std::uint64_t seed = trial_seed(master_seed, i);
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        const ChannelRealization ch = draw_realization(seed, sc);
        {
            const ChannelRealization again = draw_realization(seed, sc);
            bool same = (ch.g_a - again.g_a).norm() == 0.0 &&
                        (ch.f_s - again.f_s).norm() == 0.0;
            for (int n = 0; n < sc.cells && same; ++n)
                same = (ch.h_a[n] - again.h_a[n]).norm() == 0.0;
            ctx.report("channel draw is deterministic" + tag, same);
        }
        {
            const double s2 = sc.noise_power_w();
            const EffectiveNoise noise = effective_noise(ch, s2);
            bool ok = noise.aerial >= s2;
            for (const auto& row : noise.terminal)
                for (double v : row) ok = ok && v >= s2;
            ctx.report("effective noise dominates thermal noise" + tag, ok);
        }
        {
            // Lifted SINR ratio against the vector-domain evaluator at a
            // random beamformer set.
            RngStream rng({seed, 999});
            BeamformerSet bf = BeamformerSet::zeros(sc);
            for (int a = 0; a < bf.v.size(); ++a)
                bf.v(a) = std::complex<double>(rng.gaussian(), rng.gaussian());
            bf.v *= std::sqrt(sc.aerial_power_w) / (2.0 * bf.v.norm());
            for (int n = 0; n < sc.cells; ++n)
                for (int k = 0; k < sc.terminals_per_cell[n]; ++k) {
                    VecC& w = bf.w[n][k];
                    for (int a = 0; a < w.size(); ++a)
                        w(a) = std::complex<double>(rng.gaussian(), rng.gaussian());
                    w *= std::sqrt(sc.cell_power_w[n] / sc.terminals_per_cell[n]) /
                         (2.0 * w.norm());
                }
            const GramData d = build_gram_data(sc, ch);
            const LiftedIterate it = LiftedIterate::from_beamformers(bf);
            const EffectiveNoise noise = effective_noise(ch, sc.noise_power_w());
            double worst = 0.0;
            for (int n = 0; n < sc.cells; ++n)
                for (int k = 0; k < sc.terminals_per_cell[n]; ++k) {
                    const double direct = terrestrial_sinr(ch, bf, noise, n, k);
                    const double alpha = lifted_alpha(d, it, n, k);
                    // s is the log of the full received power, alpha the
                    // linear interference-plus-noise term.
                    const double lifted = std::exp(lifted_s(d, it, n, k)) / alpha - 1.0;
                    worst = std::max(worst, std::abs(direct - lifted) /
                                                std::max(1e-300, direct));
                }
            ctx.report("lifted SINR matches the vector evaluator" + tag, worst < 1e-9);
            const double f = penalty_F(it);
            double scale = std::real(it.V.trace());
            for (int n = 0; n < sc.cells; ++n)
                for (int k = 0; k < sc.terminals_per_cell[n]; ++k)
                    scale += std::real(it.W[n][k].trace());
            ctx.report("penalty vanishes on rank-one lifts" + tag,
                       f <= 1e-9 * std::max(1.0, scale));
        }
        {
            Step1Outcome zf = zf_step1(sc, ch);
            bool ok = zf.status == SchemeStatus::Ok;
            double worst = 0.0;
            if (ok) {
                for (int n = 0; n < sc.cells; ++n)
                    for (int k = 0; k < sc.terminals_per_cell[n]; ++k) {
                        worst = std::max(worst,
                                         std::abs(ch.h_a[n].dot(zf.nb.w_bar[n][k])));
                        for (int m = 0; m < sc.cells; ++m)
                            for (int l = 0; l < sc.terminals_per_cell[m]; ++l) {
                                if (m == n && l == k) continue;
                                worst = std::max(
                                    worst, std::abs(ch.h[n][m][l].dot(zf.nb.w_bar[n][k])));
                            }
                        worst = std::max(worst, std::abs(ch.g[n][k].dot(zf.nb.v_bar)));
                    }
            }
            ctx.report("zero-forcing nulls every interference channel" + tag,
                       ok && worst < 1e-10);
        }
        {
            IsSettings st;
            Step1Outcome is1 = is_step1(sc, ch, st);
            bool ok = is1.status == SchemeStatus::Ok;
            if (ok) {
                const GramData d = build_gram_data(sc, ch);
                for (int n = 0; n < sc.cells && ok; ++n)
                    for (int k = 0; k < sc.terminals_per_cell[n] && ok; ++k) {
                        MatC dmat = d.h_a[n];
                        for (int m = 0; m < sc.cells; ++m)
                            for (int l = 0; l < sc.terminals_per_cell[m]; ++l) {
                                if (m == n && l == k) continue;
                                dmat += d.h[n][m][l];
                            }
                        const VecC& w = is1.nb.w_bar[n][k];
                        ok = std::real(w.dot(dmat * w)) <= st.chi * (1.0 + 1e-6);
                    }
            }
            ctx.report("interference suppression respects the cap" + tag, ok);
        }
        {
            NormalizedBeamformers nb = mrc_step1(sc, ch);
            double worst = std::abs(nb.v_bar.norm() - 1.0);
            for (const auto& cell : nb.w_bar)
                for (const VecC& w : cell) worst = std::max(worst, std::abs(w.norm() - 1.0));
            ctx.report("matched directions have unit norm" + tag, worst < 1e-12);
        }
    }

    {
        // One scalar power allocation end to end: surrogate values must climb
        // monotonically (Theorem-1 argument on the scalar problem).
        const std::uint64_t seed = trial_seed(master_seed, 0);
        const ChannelRealization ch = draw_realization(seed, sc);
        SchemeResult r = run_scheme(Scheme::IS, sc, ch);
        bool mono = r.status == SchemeStatus::Ok;
        for (std::size_t i = 1; i < r.trace.points.size(); ++i)
            mono = mono && r.trace.points[i].phi >= r.trace.points[i - 1].phi - 1e-6;
        ctx.report("scalar power surrogate is monotone", mono);
    }
    {
        // Lifted feasibility pass finds a nonnegative slack on the defaults.
        const std::uint64_t seed = trial_seed(master_seed, 1);
        const ChannelRealization ch = draw_realization(seed, sc);
        InitOutcome init = initialize(sc, ch);
        ctx.report("lifted feasibility pass reaches delta >= 0",
                   init.solver_ok && init.feasible && init.delta >= 0.0);
    }

    std::printf("%d check(s) failed\n", ctx.failures);
    return ctx.failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical cognitive spectrum sharing beamforming harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string sweep_name = "none";
    std::string schemes_csv = "pibf,is,zf,mrc";
    std::string modes_csv = "hcssa";
    std::uint64_t seed = 1;
    int trials = 50;
    bool traces = false;
    bool timing = false;
    std::vector<double> values;

    CLI::App* cmd_run = app.add_subcommand("run", "Monte Carlo sweep with CSV outputs");
    cmd_run->add_option("--config", config_path, "scenario config (JSON)");
    cmd_run->add_option("--out", out_dir, "output directory (default: out)");
    cmd_run->add_option("--seed", seed, "master seed (default: 1)");
    cmd_run->add_option("--trials", trials, "trials per sweep value (default: 50)");
    cmd_run->add_option("--sweep", sweep_name,
                        "power | interference_temperature | aerial_rate_floor | none");
    cmd_run->add_option("--values", values, "swept values (defaults per parameter)")
        ->delimiter(',');
    cmd_run->add_option("--schemes", schemes_csv, "comma-separated: pibf,is,zf,mrc");
    cmd_run->add_option("--mode", modes_csv, "comma-separated: hcssa,tcssa");
    cmd_run->add_flag("--traces", traces, "write per-trial convergence traces");
    cmd_run->add_flag("--timing", timing, "keep wall-clock columns");

    CLI::App* cmd_trial =
        app.add_subcommand("trial", "single realization with full traces");
    cmd_trial->add_option("--config", config_path, "scenario config (JSON)");
    cmd_trial->add_option("--out", out_dir, "output directory (default: out)");
    cmd_trial->add_option("--seed", seed, "master seed (default: 1)");
    cmd_trial->add_option("--schemes", schemes_csv, "comma-separated: pibf,is,zf,mrc");
    cmd_trial->add_option("--mode", modes_csv, "comma-separated: hcssa,tcssa");
    cmd_trial->add_flag("--timing", timing, "keep wall-clock columns");

    CLI::App* cmd_check = app.add_subcommand("check", "seeded invariant suite");
    cmd_check->add_option("--seed", seed, "master seed (default: 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_check->parsed()) return run_checks(seed);

        ScenarioConfig base;
        if (!config_path.empty()) base = load_config(config_path);
        base.validate();

        SweepSpec spec;
        spec.master_seed = seed;
        spec.schemes = parse_schemes(schemes_csv);
        spec.modes = parse_modes(modes_csv);
        spec.timing = timing;
        if (cmd_trial->parsed()) {
            spec.trials = 1;
            spec.traces = true;
        } else {
            spec.parameter = sweep_name;
            spec.values = values.empty() ? default_values(sweep_name) : values;
            spec.trials = trials;
            spec.traces = traces;
        }
        spec.validate();

        preflight_output_dir(out_dir);
        const SweepResult result = run_sweep(spec, base);
        emit_results(result, spec, base, out_dir);
        if (cmd_trial->parsed())
            print_records(result.records);
        else
            print_rows(result.rows);
        std::printf("results written to %s\n", out_dir.c_str());
        if (result.any_failure) {
            std::fprintf(stderr, "at least one trial ended in numerical failure\n");
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
