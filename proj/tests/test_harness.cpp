// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcss/harness.hpp"

using namespace hcss;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

// Small fast sweep used by most output tests: MRC across modes with one
// infeasible floor value mixed in.
SweepSpec small_spec() {
    SweepSpec spec;
    spec.parameter = "aerial_rate_floor";
    spec.values = {3.0, 12.0};
    spec.trials = 2;
    spec.master_seed = 9;
    spec.schemes = {Scheme::MRC};
    spec.modes = {Mode::HCSSA, Mode::TCSSA};
    return spec;
}

}  // namespace

TEST_CASE("scheme and status names round-trip") {
    CHECK(to_string(Scheme::PIBF) == "PIBF");
    CHECK(to_string(Scheme::IS) == "IS");
    CHECK(scheme_from_string("mrc") == Scheme::MRC);
    CHECK(scheme_from_string("Zf") == Scheme::ZF);
    CHECK(scheme_from_string("PIBF") == Scheme::PIBF);
    CHECK_THROWS_AS(scheme_from_string("fancy"), ConfigError);

    CHECK(to_string(SchemeStatus::Ok) == "ok");
    CHECK(to_string(SchemeStatus::Infeasible) == "infeasible");
    CHECK(to_string(SchemeStatus::NotApplicable) == "not_applicable");
    CHECK(to_string(SchemeStatus::NumericalFailure) == "numerical_failure");
}

TEST_CASE("sweep spec validation") {
    SweepSpec spec;
    CHECK_NOTHROW(spec.validate());

    SweepSpec bad = spec;
    bad.parameter = "bandwidth";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.values.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.schemes.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.modes.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.parameter = "unknown_axis";
    const ScenarioConfig base;
    CHECK_THROWS_AS(run_sweep(bad, base), ConfigError);
}

TEST_CASE("trial seeds are deterministic and distinct") {
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    std::vector<std::uint64_t> seen;
    for (int t = 0; t < 50; ++t) seen.push_back(trial_seed(1, t));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("sweep values touch budgets but never the channels") {
    const ScenarioConfig base;

    ScenarioConfig powered = apply_sweep_value(base, "power", 40.0);
    for (double p : powered.cell_power_w) CHECK(p == 40.0);
    CHECK(powered.aerial_power_w == 40.0);

    const ScenarioConfig capped =
        apply_sweep_value(base, "interference_temperature", 2e-12);
    CHECK(capped.interference_temperature_w == Approx(2e-15).epsilon(1e-14));

    const ScenarioConfig floored = apply_sweep_value(base, "aerial_rate_floor", 6.0);
    CHECK(floored.aerial_rate_floor_bpshz == 6.0);

    const ScenarioConfig untouched = apply_sweep_value(base, "none", 123.0);
    CHECK(config_to_json(untouched) == config_to_json(base));

    // Identical trial seeds produce identical channels whatever the budgets.
    const std::uint64_t seed = trial_seed(3, 1);
    ChannelRealization a = draw_realization(seed, base);
    ChannelRealization b = draw_realization(seed, powered);
    CHECK((a.g_a - b.g_a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.h[0][0][0] - b.h[0][0][0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-trial sweep yields one deterministic row") {
    SweepSpec spec;
    spec.trials = 1;
    spec.schemes = {Scheme::MRC};
    spec.modes = {Mode::HCSSA};
    const ScenarioConfig base;

    const SweepResult first = run_sweep(spec, base);
    const SweepResult second = run_sweep(spec, base);
    REQUIRE(first.records.size() == 1);
    REQUIRE(first.rows.size() == 1);
    CHECK(first.records[0].seed == trial_seed(spec.master_seed, 0));
    CHECK(first.records[0].result.terrestrial_rate_bpshz ==
          second.records[0].result.terrestrial_rate_bpshz);
    CHECK(first.records[0].result.aerial_rate_bpshz ==
          second.records[0].result.aerial_rate_bpshz);
    CHECK(first.records[0].result.wall_ms == 0.0);  // timing off zeroes the column
    CHECK(first.rows[0].trials == 1);
}

TEST_CASE("parallel and serial sweeps produce identical records") {
    SweepSpec spec;
    spec.trials = 4;
    spec.schemes = {Scheme::MRC, Scheme::ZF};
    spec.modes = {Mode::HCSSA, Mode::TCSSA};
    const ScenarioConfig base;

    const SweepResult par = run_sweep(spec, base);
    const SweepResult ser = run_sweep_serial(spec, base);
    REQUIRE(par.records.size() == ser.records.size());
    for (std::size_t i = 0; i < par.records.size(); ++i) {
        const TrialRecord& a = par.records[i];
        const TrialRecord& b = ser.records[i];
        CHECK(a.value == b.value);
        CHECK(a.trial == b.trial);
        CHECK(a.seed == b.seed);
        CHECK(a.result.scheme == b.result.scheme);
        CHECK(a.result.mode == b.result.mode);
        CHECK(a.result.status == b.result.status);
        CHECK(a.result.feasible == b.result.feasible);
        CHECK(a.result.terrestrial_rate_bpshz == b.result.terrestrial_rate_bpshz);
        CHECK(a.result.aerial_rate_bpshz == b.result.aerial_rate_bpshz);
        CHECK(a.result.inner_iterations == b.result.inner_iterations);
    }
    CHECK(par.any_failure == ser.any_failure);
}

TEST_CASE("aggregation averages feasible trials only") {
    SweepSpec spec;
    spec.values = {1.0};
    spec.trials = 3;
    spec.schemes = {Scheme::MRC};
    spec.modes = {Mode::HCSSA};

    auto record = [](int trial, bool feasible, double rate) {
        TrialRecord rec;
        rec.value = 1.0;
        rec.trial = trial;
        rec.seed = 100 + trial;
        rec.result.scheme = Scheme::MRC;
        rec.result.mode = Mode::HCSSA;
        rec.result.status = feasible ? SchemeStatus::Ok : SchemeStatus::Infeasible;
        rec.result.feasible = feasible;
        rec.result.terrestrial_rate_bpshz = rate;
        rec.result.aerial_rate_bpshz = rate / 2.0;
        rec.result.init_iterations = 1;
        rec.result.inner_iterations = trial;
        return rec;
    };
    const std::vector<TrialRecord> records{record(0, true, 2.0), record(1, false, 99.0),
                                           record(2, true, 4.0)};

    const std::vector<AggregateRow> rows = aggregate(spec, records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_terrestrial_rate_bpshz == 3.0);
    CHECK(rows[0].mean_aerial_rate_bpshz == 1.5);
    CHECK(rows[0].feasible_trials == 2);
    CHECK(rows[0].feasible_fraction == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(rows[0].mean_iterations == Approx(2.0).epsilon(1e-15));  // (1+0 + 1+2)/2
    CHECK(rows[0].trials == 3);

    // A cell with no feasible trials reports zero means, not NaNs.
    const std::vector<TrialRecord> none{record(0, false, 1.0), record(1, false, 1.0),
                                        record(2, false, 1.0)};
    const std::vector<AggregateRow> empty_rows = aggregate(spec, none);
    REQUIRE(empty_rows.size() == 1);
    CHECK(empty_rows[0].mean_terrestrial_rate_bpshz == 0.0);
    CHECK(empty_rows[0].feasible_trials == 0);
    CHECK(empty_rows[0].feasible_fraction == 0.0);
}

TEST_CASE("emitted outputs are byte-identical across reruns") {
    const SweepSpec spec = small_spec();
    const ScenarioConfig base;

    const SweepResult result = run_sweep(spec, base);
    const fs::path dir_a = fresh_dir("hcss_out_a");
    const fs::path dir_b = fresh_dir("hcss_out_b");
    emit_results(result, spec, base, dir_a.string());
    emit_results(result, spec, base, dir_b.string());

    const SweepResult rerun = run_sweep(spec, base);
    const fs::path dir_c = fresh_dir("hcss_out_c");
    emit_results(rerun, spec, base, dir_c.string());

    for (const char* name : {"aggregate.csv", "trials.csv", "metadata.json"}) {
        const std::string a = read_file(dir_a / name);
        CHECK(a == read_file(dir_b / name));
        CHECK(a == read_file(dir_c / name));
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::remove_all(dir_c);
}

TEST_CASE("trials csv reproduces the aggregate table") {
    const SweepSpec spec = small_spec();
    const ScenarioConfig base;
    const SweepResult result = run_sweep(spec, base);
    const fs::path dir = fresh_dir("hcss_out_agg");
    emit_results(result, spec, base, dir.string());

    const std::vector<std::string> agg_lines = split_lines(read_file(dir / "aggregate.csv"));
    REQUIRE(!agg_lines.empty());
    CHECK(agg_lines[0] ==
          "value,scheme,mode,mean_terrestrial_rate_bpshz,mean_aerial_rate_bpshz,"
          "feasible_fraction,feasible_trials,mean_iterations,mean_wall_time_ms,trials");

    const std::vector<std::string> trial_lines = split_lines(read_file(dir / "trials.csv"));
    REQUIRE(!trial_lines.empty());
    CHECK(trial_lines[0] ==
          "value,trial,seed,scheme,mode,status,feasible,terrestrial_rate_bpshz,"
          "aerial_rate_bpshz,init_iterations,outer_iterations,inner_iterations,"
          "wall_time_ms,message");

    struct Bucket {
        double rate_sum = 0.0;
        double aerial_sum = 0.0;
        int feasible = 0;
        int total = 0;
    };
    std::map<std::string, Bucket> buckets;
    for (std::size_t i = 1; i < trial_lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(trial_lines[i]);
        REQUIRE(f.size() >= 13);
        Bucket& b = buckets[f[0] + "|" + f[3] + "|" + f[4]];
        ++b.total;
        if (f[5] == "ok" && f[6] == "1") {
            ++b.feasible;
            b.rate_sum += std::stod(f[7]);
            b.aerial_sum += std::stod(f[8]);
        }
    }

    REQUIRE(agg_lines.size() > 1);
    for (std::size_t i = 1; i < agg_lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(agg_lines[i]);
        REQUIRE(f.size() == 10);
        const Bucket& b = buckets.at(f[0] + "|" + f[1] + "|" + f[2]);
        CHECK(b.total == std::stoi(f[9]));
        CHECK(b.feasible == std::stoi(f[6]));
        const double mean_rate = b.feasible > 0 ? b.rate_sum / b.feasible : 0.0;
        const double mean_aerial = b.feasible > 0 ? b.aerial_sum / b.feasible : 0.0;
        CHECK(std::abs(std::stod(f[3]) - mean_rate) <= 1e-12 * std::max(1.0, mean_rate));
        CHECK(std::abs(std::stod(f[4]) - mean_aerial) <=
              1e-12 * std::max(1.0, mean_aerial));
        CHECK(std::stod(f[5]) ==
              Approx(static_cast<double>(b.feasible) / b.total).epsilon(1e-15));
    }

    // The floor sweep mixes feasible and infeasible cells in the strict mode.
    bool saw_infeasible = false;
    for (std::size_t i = 1; i < trial_lines.size(); ++i)
        if (split_fields(trial_lines[i])[5] == "infeasible") saw_infeasible = true;
    CHECK(saw_infeasible);
    fs::remove_all(dir);
}

TEST_CASE("relaxed-mode means ignore the swept floor entirely") {
    const SweepSpec spec = small_spec();
    const ScenarioConfig base;
    const SweepResult result = run_sweep(spec, base);

    std::vector<const AggregateRow*> relaxed;
    for (const AggregateRow& row : result.rows)
        if (row.mode == Mode::TCSSA) relaxed.push_back(&row);
    REQUIRE(relaxed.size() == spec.values.size());
    for (std::size_t i = 1; i < relaxed.size(); ++i) {
        CHECK(relaxed[i]->mean_terrestrial_rate_bpshz ==
              relaxed[0]->mean_terrestrial_rate_bpshz);
        CHECK(relaxed[i]->mean_aerial_rate_bpshz == relaxed[0]->mean_aerial_rate_bpshz);
        CHECK(relaxed[i]->feasible_trials == relaxed[0]->feasible_trials);
    }
}

TEST_CASE("metadata round-trips the resolved configuration") {
    const SweepSpec spec = small_spec();
    ScenarioConfig base;
    base.aerial_objective_weight = 0.75;
    base.interference_temperature_w = 4e-15;
    const SweepResult result = run_sweep(spec, base);
    const fs::path dir = fresh_dir("hcss_out_meta");
    emit_results(result, spec, base, dir.string());

    const nlohmann::json meta = nlohmann::json::parse(read_file(dir / "metadata.json"));
    CHECK(meta.at("version").get<std::string>() == "hcss 0.1.0");

    const ScenarioConfig back = config_from_json(meta.at("config").dump());
    CHECK(config_to_json(back) == config_to_json(base));

    CHECK(meta.at("sweep").at("parameter").get<std::string>() == "aerial_rate_floor");
    CHECK(meta.at("sweep").at("trials").get<int>() == spec.trials);
    CHECK(meta.at("sweep").at("master_seed").get<std::uint64_t>() == spec.master_seed);
    CHECK(meta.at("tolerances").at("solver_gap_abs").get<double>() == 1e-7);
    CHECK(meta.at("tolerances").at("pibf").at("eps2").get<double>() == 1e-3);
    CHECK(meta.at("tolerances").at("is").at("chi").get<double>() == 1e-16);
    fs::remove_all(dir);
}

TEST_CASE("requested traces land on disk with the exact column header") {
    SweepSpec spec;
    spec.trials = 1;
    spec.schemes = {Scheme::PIBF};
    spec.modes = {Mode::HCSSA};
    spec.traces = true;
    const ScenarioConfig base;

    const SweepResult result = run_sweep(spec, base);
    REQUIRE(result.records.size() == 1);
    REQUIRE(result.records[0].result.status == SchemeStatus::Ok);

    const fs::path dir = fresh_dir("hcss_out_traces");
    emit_results(result, spec, base, dir.string());
    const fs::path trace = dir / "traces" / "trace_v0_t0_pibf_hcssa.csv";
    REQUIRE(fs::exists(trace));

    const std::vector<std::string> lines = split_lines(read_file(trace));
    REQUIRE(lines.size() == result.records[0].result.trace.points.size() + 1);
    CHECK(lines[0] == "outer,inner,phi,mu,F,xi");

    // phi never backslides inside a penalty stage.
    int prev_outer = -1;
    double prev_phi = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(lines[i]);
        REQUIRE(f.size() == 6);
        const int outer = std::stoi(f[0]);
        const double phi = std::stod(f[2]);
        if (outer == prev_outer) CHECK(phi >= prev_phi - 1e-6);
        prev_outer = outer;
        prev_phi = phi;
    }
    fs::remove_all(dir);
}

TEST_CASE("output preflight fails fast on unwritable paths") {
    const fs::path ok_dir = fresh_dir("hcss_out_preflight") / "nested" / "deeper";
    CHECK_NOTHROW(preflight_output_dir(ok_dir.string()));
    CHECK(fs::exists(ok_dir));
    fs::remove_all(fs::temp_directory_path() / "hcss_out_preflight");

    const fs::path blocker = fs::temp_directory_path() / "hcss_out_blocker";
    fs::remove_all(blocker);
    std::ofstream(blocker) << "plain file";
    CHECK_THROWS_AS(preflight_output_dir((blocker / "sub").string()),
                    std::runtime_error);
    fs::remove(blocker);
}
