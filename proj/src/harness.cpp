// SPDX-License-Identifier: Apache-2.0

#include "hcss/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hcss {

namespace {

using nlohmann::json;

// Full round-trip precision; aggregation is re-derivable from trials.csv.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

struct JobIndex {
    int value = 0;
    int trial = 0;
    int mode = 0;
    int scheme = 0;
};

JobIndex decode_job(const SweepSpec& spec, int j) {
    JobIndex idx;
    const int n_schemes = static_cast<int>(spec.schemes.size());
    const int n_modes = static_cast<int>(spec.modes.size());
    idx.scheme = j % n_schemes;
    j /= n_schemes;
    idx.mode = j % n_modes;
    j /= n_modes;
    idx.trial = j % spec.trials;
    idx.value = j / spec.trials;
    return idx;
}

SweepResult run_sweep_impl(const SweepSpec& spec, const ScenarioConfig& base,
                           bool parallel) {
    spec.validate();
    base.validate();

    // Resolve and validate every swept config up front so a bad sweep value
    // fails before any trial runs.
    const int n_modes = static_cast<int>(spec.modes.size());
    std::vector<ScenarioConfig> configs;
    for (double value : spec.values)
        for (Mode mode : spec.modes) {
            ScenarioConfig cfg = apply_sweep_value(base, spec.parameter, value);
            cfg.mode = mode;
            cfg.validate();
            configs.push_back(std::move(cfg));
        }

    const int n_jobs = static_cast<int>(spec.values.size()) * spec.trials * n_modes *
                       static_cast<int>(spec.schemes.size());
    SweepResult result;
    result.records.resize(n_jobs);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int j = 0; j < n_jobs; ++j) {
        const JobIndex idx = decode_job(spec, j);
        const ScenarioConfig& cfg = configs[idx.value * n_modes + idx.mode];
        const Scheme scheme = spec.schemes[idx.scheme];
        const std::uint64_t seed = trial_seed(spec.master_seed, idx.trial);

        TrialRecord rec;
        rec.value = spec.values[idx.value];
        rec.trial = idx.trial;
        rec.seed = seed;
        try {
            const ChannelRealization ch = draw_realization(seed, cfg);
            if (scheme == Scheme::PIBF)
                rec.result = cfg.mode == Mode::HCSSA ? run_pibf(cfg, ch, spec.pibf)
                                                     : run_pibf_tcssa(cfg, ch, spec.pibf);
            else
                rec.result = run_scheme(scheme, cfg, ch, spec.is);
        } catch (const std::exception& e) {
            rec.result.scheme = scheme;
            rec.result.mode = cfg.mode;
            rec.result.status = SchemeStatus::NumericalFailure;
            rec.result.message = e.what();
        }
        if (!spec.timing) rec.result.wall_ms = 0.0;
        result.records[j] = std::move(rec);
    }

    for (const TrialRecord& rec : result.records)
        if (rec.result.status == SchemeStatus::NumericalFailure) result.any_failure = true;
    result.rows = aggregate(spec, result.records);
    return result;
}

json sweep_to_json(const SweepSpec& spec) {
    json js;
    js["parameter"] = spec.parameter;
    js["values"] = spec.values;
    js["trials"] = spec.trials;
    js["master_seed"] = spec.master_seed;
    js["schemes"] = json::array();
    for (Scheme s : spec.schemes) js["schemes"].push_back(to_string(s));
    js["modes"] = json::array();
    for (Mode m : spec.modes) js["modes"].push_back(to_string(m));
    js["traces"] = spec.traces;
    js["timing"] = spec.timing;
    return js;
}

json tolerances_to_json(const SweepSpec& spec) {
    json pibf;
    pibf["eps1"] = spec.pibf.eps1;
    pibf["eps2"] = spec.pibf.eps2;
    pibf["t_max"] = spec.pibf.t_max;
    pibf["xi0"] = spec.pibf.xi0;
    pibf["omega"] = spec.pibf.omega;
    pibf["outer_cap"] = spec.pibf.outer_cap;
    pibf["init_cap"] = spec.pibf.init_cap;
    json is;
    is["chi"] = spec.is.chi;
    is["eps3"] = spec.is.eps3;
    is["eps4"] = spec.is.eps4;
    is["direction_cap"] = spec.is.direction_cap;
    is["sca_cap"] = spec.is.sca_cap;
    is["init_cap"] = spec.is.init_cap;
    json tol;
    tol["pibf"] = pibf;
    tol["is"] = is;
    tol["solver_gap_abs"] = 1e-7;
    tol["constraint_tol_rel"] = 1e-6;
    return tol;
}

}  // namespace

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::PIBF: return "PIBF";
        case Scheme::IS: return "IS";
        case Scheme::ZF: return "ZF";
        case Scheme::MRC: return "MRC";
    }
    return "PIBF";
}

Scheme scheme_from_string(const std::string& text) {
    const std::string t = lower(text);
    if (t == "pibf") return Scheme::PIBF;
    if (t == "is") return Scheme::IS;
    if (t == "zf") return Scheme::ZF;
    if (t == "mrc") return Scheme::MRC;
    throw ConfigError("unknown scheme '" + text + "' (expected pibf, is, zf, or mrc)");
}

std::string to_string(SchemeStatus status) {
    switch (status) {
        case SchemeStatus::Ok: return "ok";
        case SchemeStatus::Infeasible: return "infeasible";
        case SchemeStatus::NotApplicable: return "not_applicable";
        case SchemeStatus::NumericalFailure: return "numerical_failure";
    }
    return "numerical_failure";
}

void ConvergenceTrace::write_csv(const std::string& path) const {
    std::ofstream out = open_out(path);
    out << "outer,inner,phi,mu,F,xi\n";
    for (const TracePoint& pt : points)
        out << pt.outer << ',' << pt.inner << ',' << fmt(pt.phi) << ',' << fmt(pt.mu)
            << ',' << fmt(pt.f) << ',' << fmt(pt.xi) << '\n';
    if (!out) throw std::runtime_error("short write on " + path);
}

void SweepSpec::validate() const {
    if (parameter != "power" && parameter != "interference_temperature" &&
        parameter != "aerial_rate_floor" && parameter != "none")
        throw ConfigError("sweep: unknown parameter '" + parameter + "'");
    if (values.empty()) throw ConfigError("sweep: value list is empty");
    if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
    if (schemes.empty()) throw ConfigError("sweep: scheme list is empty");
    if (modes.empty()) throw ConfigError("sweep: mode list is empty");
    pibf.validate();
    is.validate();
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
    std::uint64_t state = master + static_cast<std::uint64_t>(trial) * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, const std::string& parameter,
                                 double value) {
    ScenarioConfig cfg = base;
    if (parameter == "power") {
        for (double& p : cfg.cell_power_w) p = value;
        cfg.aerial_power_w = value;
    } else if (parameter == "interference_temperature") {
        cfg.interference_temperature_w = value * 1e-3;  // swept in mW, stored in W
    } else if (parameter == "aerial_rate_floor") {
        cfg.aerial_rate_floor_bpshz = value;
    } else if (parameter != "none") {
        throw ConfigError("sweep: unknown parameter '" + parameter + "'");
    }
    return cfg;
}

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& base) {
    return run_sweep_impl(spec, base, true);
}

SweepResult run_sweep_serial(const SweepSpec& spec, const ScenarioConfig& base) {
    return run_sweep_impl(spec, base, false);
}

std::vector<AggregateRow> aggregate(const SweepSpec& spec,
                                    const std::vector<TrialRecord>& records) {
    std::vector<AggregateRow> rows;
    const int n_modes = static_cast<int>(spec.modes.size());
    const int n_schemes = static_cast<int>(spec.schemes.size());
    for (int vi = 0; vi < static_cast<int>(spec.values.size()); ++vi)
        for (int mi = 0; mi < n_modes; ++mi)
            for (int si = 0; si < n_schemes; ++si) {
                AggregateRow row;
                row.value = spec.values[vi];
                row.scheme = spec.schemes[si];
                row.mode = spec.modes[mi];
                row.trials = spec.trials;
                for (int t = 0; t < spec.trials; ++t) {
                    const int j =
                        ((vi * spec.trials + t) * n_modes + mi) * n_schemes + si;
                    const SchemeResult& r = records[j].result;
                    if (r.status != SchemeStatus::Ok || !r.feasible) continue;
                    ++row.feasible_trials;
                    row.mean_terrestrial_rate_bpshz += r.terrestrial_rate_bpshz;
                    row.mean_aerial_rate_bpshz += r.aerial_rate_bpshz;
                    row.mean_iterations += r.solver_iterations();
                    row.mean_wall_time_ms += r.wall_ms;
                }
                if (row.feasible_trials > 0) {
                    row.mean_terrestrial_rate_bpshz /= row.feasible_trials;
                    row.mean_aerial_rate_bpshz /= row.feasible_trials;
                    row.mean_iterations /= row.feasible_trials;
                    row.mean_wall_time_ms /= row.feasible_trials;
                }
                row.feasible_fraction =
                    static_cast<double>(row.feasible_trials) / spec.trials;
                rows.push_back(std::move(row));
            }
    return rows;
}

void preflight_output_dir(const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " +
                                     ec.message());
    const fs::path probe = fs::path(out_dir) / ".writecheck";
    {
        std::ofstream out(probe);
        if (!out) throw std::runtime_error("output directory " + out_dir + " is not writable");
    }
    fs::remove(probe, ec);
}

void emit_results(const SweepResult& result, const SweepSpec& spec,
                  const ScenarioConfig& base, const std::string& out_dir) {
    namespace fs = std::filesystem;
    preflight_output_dir(out_dir);
    const fs::path dir(out_dir);

    {
        std::ofstream out = open_out(dir / "aggregate.csv");
        out << "value,scheme,mode,mean_terrestrial_rate_bpshz,mean_aerial_rate_bpshz,"
               "feasible_fraction,feasible_trials,mean_iterations,mean_wall_time_ms,"
               "trials\n";
        for (const AggregateRow& row : result.rows)
            out << fmt(row.value) << ',' << to_string(row.scheme) << ','
                << to_string(row.mode) << ',' << fmt(row.mean_terrestrial_rate_bpshz)
                << ',' << fmt(row.mean_aerial_rate_bpshz) << ','
                << fmt(row.feasible_fraction) << ',' << row.feasible_trials << ','
                << fmt(row.mean_iterations) << ',' << fmt(row.mean_wall_time_ms) << ','
                << row.trials << '\n';
        if (!out) throw std::runtime_error("short write on aggregate.csv");
    }

    {
        std::ofstream out = open_out(dir / "trials.csv");
        out << "value,trial,seed,scheme,mode,status,feasible,terrestrial_rate_bpshz,"
               "aerial_rate_bpshz,init_iterations,outer_iterations,inner_iterations,"
               "wall_time_ms,message\n";
        for (const TrialRecord& rec : result.records) {
            const SchemeResult& r = rec.result;
            std::string msg = r.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << fmt(rec.value) << ',' << rec.trial << ',' << rec.seed << ','
                << to_string(r.scheme) << ',' << to_string(r.mode) << ','
                << to_string(r.status) << ',' << (r.feasible ? 1 : 0) << ','
                << fmt(r.terrestrial_rate_bpshz) << ',' << fmt(r.aerial_rate_bpshz)
                << ',' << r.init_iterations << ',' << r.outer_iterations << ','
                << r.inner_iterations << ',' << fmt(r.wall_ms) << ',' << msg << '\n';
        }
        if (!out) throw std::runtime_error("short write on trials.csv");
    }

    if (spec.traces) {
        const fs::path tdir = dir / "traces";
        std::error_code ec;
        fs::create_directories(tdir, ec);
        if (ec) throw std::runtime_error("cannot create " + tdir.string());
        const int n_modes = static_cast<int>(spec.modes.size());
        const int n_schemes = static_cast<int>(spec.schemes.size());
        for (int j = 0; j < static_cast<int>(result.records.size()); ++j) {
            const TrialRecord& rec = result.records[j];
            if (rec.result.trace.points.empty()) continue;
            const int vi = j / (spec.trials * n_modes * n_schemes);
            const std::string name = "trace_v" + std::to_string(vi) + "_t" +
                                     std::to_string(rec.trial) + "_" +
                                     lower(to_string(rec.result.scheme)) + "_" +
                                     lower(to_string(rec.result.mode)) + ".csv";
            rec.result.trace.write_csv((tdir / name).string());
        }
    }

    {
        json meta;
        meta["version"] = "hcss 0.1.0";
        meta["config"] = json::parse(config_to_json(base));
        meta["sweep"] = sweep_to_json(spec);
        meta["tolerances"] = tolerances_to_json(spec);
        std::ofstream out = open_out(dir / "metadata.json");
        out << meta.dump(2) << '\n';
        if (!out) throw std::runtime_error("short write on metadata.json");
    }
}

}  // namespace hcss
