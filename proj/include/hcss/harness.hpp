// SPDX-License-Identifier: Apache-2.0
// Seeded Monte Carlo sweeps over budgets/thresholds across schemes and modes,
// aggregation over feasible trials, and CSV/metadata emission.

#ifndef HCSS_HARNESS_HPP
#define HCSS_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hcss/lowcomplexity.hpp"
#include "hcss/pibf.hpp"

namespace hcss {

// Sweep axes: "power" sets every cell budget and the aerial budget (W),
// "interference_temperature" sets the satellite cap (mW, the config unit),
// "aerial_rate_floor" sets the HCSSA floor (bps/Hz), "none" runs the base
// config once per trial.
struct SweepSpec {
    std::string parameter = "none";
    std::vector<double> values{0.0};
    int trials = 50;
    std::uint64_t master_seed = 1;
    std::vector<Scheme> schemes{Scheme::PIBF, Scheme::IS, Scheme::ZF, Scheme::MRC};
    std::vector<Mode> modes{Mode::HCSSA};
    bool traces = false;   // write one CSV per convergence trace
    bool timing = false;   // keep wall-clock columns (zeroed otherwise)
    PibfSettings pibf;
    IsSettings is;

    // Throws ConfigError on an unknown parameter, empty lists, or trials < 1.
    void validate() const;
};

struct TrialRecord {
    double value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    SchemeResult result;
};

// One aggregate cell; means run over feasible trials only and are zero when
// the cell has none.
struct AggregateRow {
    double value = 0.0;
    Scheme scheme = Scheme::PIBF;
    Mode mode = Mode::HCSSA;
    double mean_terrestrial_rate_bpshz = 0.0;
    double mean_aerial_rate_bpshz = 0.0;
    double feasible_fraction = 0.0;
    int feasible_trials = 0;
    double mean_iterations = 0.0;
    double mean_wall_time_ms = 0.0;
    int trials = 0;
};

struct SweepResult {
    // Canonical order: value-major, then trial, then mode, then scheme.
    std::vector<TrialRecord> records;
    std::vector<AggregateRow> rows;
    bool any_failure = false;  // at least one numerical-failure record
};

// Deterministic per-trial realization seed derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, int trial);

// Copy of base with the swept parameter applied; sweep values never touch the
// channel statistics, so equal trial seeds pair realizations across values.
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, const std::string& parameter,
                                 double value);

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& base);
// Serial reference implementation; identical records by construction.
SweepResult run_sweep_serial(const SweepSpec& spec, const ScenarioConfig& base);

std::vector<AggregateRow> aggregate(const SweepSpec& spec,
                                    const std::vector<TrialRecord>& records);

// Creates the directory and verifies it is writable; throws std::runtime_error
// otherwise. Called by the CLI before any computation starts.
void preflight_output_dir(const std::string& out_dir);

// Writes aggregate.csv, trials.csv, metadata.json, and (on request) one CSV
// per nonempty convergence trace under <out_dir>/traces/.
void emit_results(const SweepResult& result, const SweepSpec& spec,
                  const ScenarioConfig& base, const std::string& out_dir);

}  // namespace hcss

#endif
