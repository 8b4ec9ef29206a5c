// SPDX-License-Identifier: Apache-2.0

#include "hcss/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hcss {

using nlohmann::json;

std::string to_string(Mode mode) { return mode == Mode::HCSSA ? "HCSSA" : "TCSSA"; }

Mode mode_from_string(const std::string& name) {
    if (name == "HCSSA" || name == "hcssa") return Mode::HCSSA;
    if (name == "TCSSA" || name == "tcssa") return Mode::TCSSA;
    throw ConfigError("unknown mode '" + name + "' (expected HCSSA or TCSSA)");
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (cells < 1) fail("cells must be >= 1");
    if (static_cast<int>(terminals_per_cell.size()) != cells)
        fail("terminals_per_cell size must equal cells");
    for (int k : terminals_per_cell)
        if (k < 1) fail("every cell needs at least one terminal");
    if (satellite_antennas < 1 || aerial_antennas < 1 || terrestrial_antennas < 1)
        fail("antenna counts must be >= 1");
    if (!(interference_temperature_w > 0.0)) fail("interference temperature must be > 0");
    if (static_cast<int>(cell_power_w.size()) != cells)
        fail("cell_power_w size must equal cells");
    for (double p : cell_power_w)
        if (!(p > 0.0)) fail("cell power budgets must be > 0");
    if (!(aerial_power_w > 0.0)) fail("aerial power budget must be > 0");
    if (!(aerial_rate_floor_bpshz >= 0.0)) fail("aerial rate floor must be >= 0");
    if (!(aerial_objective_weight >= 0.0)) fail("aerial objective weight must be >= 0");
    if (!(satellite_power_w > 0.0)) fail("satellite power must be > 0");
    if (!(noise_power_w() > 0.0)) fail("noise power must be > 0");
    if (static_cast<int>(geometry.terrestrial_bs.size()) != cells)
        fail("geometry.terrestrial_bs size must equal cells");
    if (static_cast<int>(geometry.terminals.size()) != cells)
        fail("geometry.terminals size must equal cells");
    if (static_cast<int>(geometry.beam_angle_terminals_deg.size()) != cells)
        fail("geometry.beam_angle_terminals_deg size must equal cells");
    for (int n = 0; n < cells; ++n) {
        if (static_cast<int>(geometry.terminals[n].size()) != terminals_per_cell[n])
            fail("geometry.terminals row size mismatch");
        if (static_cast<int>(geometry.beam_angle_terminals_deg[n].size()) !=
            terminals_per_cell[n])
            fail("geometry.beam_angle_terminals_deg row size mismatch");
        for (double phi : geometry.beam_angle_terminals_deg[n])
            if (!(phi >= 0.0)) fail("beam angles must be >= 0");
    }
    if (!(geometry.carrier_ghz > 0.0)) fail("carrier frequency must be > 0");
    if (!(geometry.antenna_separation_ratio > 0.0)) fail("antenna separation must be > 0");
    if (!(geometry.beam_angle_satellite_terminal_deg >= 0.0) ||
        !(geometry.beam_angle_aerial_user_deg >= 0.0))
        fail("beam angles must be >= 0");
    if (!(fading.rician_kappa > 0.0)) fail("rician_kappa must be > 0");
    if (!(fading.sr_omega > 0.0) || !(fading.sr_b > 0.0)) fail("sr_omega and sr_b must be > 0");
    if (!(fading.sr_m >= 1.0)) fail("sr_m must be >= 1");
    if (!(fading.beam_3db_angle_deg > 0.0)) fail("beam_3db_angle_deg must be > 0");
}

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected [x, y, z] position");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double finite_or_inf(const json& j) {
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "Inf"))
        return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json number_or_inf(double v) {
    if (std::isinf(v)) return json("inf");
    return json(v);
}

}  // namespace

std::string config_to_json(const ScenarioConfig& c) {
    json g;
    g["satellite_m"] = vec3_to_json(c.geometry.satellite);
    g["satellite_terminal_m"] = vec3_to_json(c.geometry.satellite_terminal);
    g["aerial_bs_m"] = vec3_to_json(c.geometry.aerial_bs);
    g["aerial_user_m"] = vec3_to_json(c.geometry.aerial_user);
    g["terrestrial_bs_m"] = json::array();
    for (const auto& p : c.geometry.terrestrial_bs) g["terrestrial_bs_m"].push_back(vec3_to_json(p));
    g["terminals_m"] = json::array();
    for (const auto& row : c.geometry.terminals) {
        json jrow = json::array();
        for (const auto& p : row) jrow.push_back(vec3_to_json(p));
        g["terminals_m"].push_back(jrow);
    }
    g["carrier_ghz"] = c.geometry.carrier_ghz;
    g["antenna_separation_ratio"] = c.geometry.antenna_separation_ratio;
    g["beam_angle_satellite_terminal_deg"] = c.geometry.beam_angle_satellite_terminal_deg;
    g["beam_angle_aerial_user_deg"] = c.geometry.beam_angle_aerial_user_deg;
    g["beam_angle_terminals_deg"] = c.geometry.beam_angle_terminals_deg;

    json f;
    f["rician_kappa"] = number_or_inf(c.fading.rician_kappa);
    f["sr_omega"] = c.fading.sr_omega;
    f["sr_b"] = c.fading.sr_b;
    f["sr_m"] = number_or_inf(c.fading.sr_m);
    f["beam_gain_max_db"] = c.fading.beam_gain_max_db;
    f["beam_3db_angle_deg"] = c.fading.beam_3db_angle_deg;

    json j;
    j["mode"] = to_string(c.mode);
    j["cells"] = c.cells;
    j["terminals_per_cell"] = c.terminals_per_cell;
    j["antennas"] = {{"satellite", c.satellite_antennas},
                     {"aerial", c.aerial_antennas},
                     {"terrestrial", c.terrestrial_antennas}};
    j["interference_temperature_mw"] = c.interference_temperature_w * 1e3;
    j["cell_power_w"] = c.cell_power_w;
    j["aerial_power_w"] = c.aerial_power_w;
    j["aerial_rate_floor_bpshz"] = c.aerial_rate_floor_bpshz;
    j["aerial_objective_weight"] = c.aerial_objective_weight;
    j["satellite_power_w"] = c.satellite_power_w;
    j["noise"] = {{"boltzmann_jk", c.boltzmann_jk},
                  {"temperature_k", c.temperature_k},
                  {"bandwidth_hz", c.bandwidth_hz}};
    j["geometry"] = g;
    j["fading"] = f;
    return j.dump(2) + "\n";
}

ScenarioConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ScenarioConfig c;
    try {
        if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
        if (j.contains("cells")) c.cells = j["cells"].get<int>();
        if (j.contains("terminals_per_cell"))
            c.terminals_per_cell = j["terminals_per_cell"].get<std::vector<int>>();
        if (j.contains("antennas")) {
            const auto& a = j["antennas"];
            if (a.contains("satellite")) c.satellite_antennas = a["satellite"].get<int>();
            if (a.contains("aerial")) c.aerial_antennas = a["aerial"].get<int>();
            if (a.contains("terrestrial")) c.terrestrial_antennas = a["terrestrial"].get<int>();
        }
        if (j.contains("interference_temperature_mw"))
            c.interference_temperature_w = j["interference_temperature_mw"].get<double>() * 1e-3;
        if (j.contains("cell_power_w")) {
            if (j["cell_power_w"].is_array())
                c.cell_power_w = j["cell_power_w"].get<std::vector<double>>();
            else
                c.cell_power_w.assign(static_cast<std::size_t>(c.cells),
                                      j["cell_power_w"].get<double>());
        }
        // "p0_w" is accepted as an alias for the aerial budget.
        if (j.contains("p0_w")) c.aerial_power_w = j["p0_w"].get<double>();
        if (j.contains("aerial_power_w")) c.aerial_power_w = j["aerial_power_w"].get<double>();
        if (j.contains("aerial_rate_floor_bpshz"))
            c.aerial_rate_floor_bpshz = j["aerial_rate_floor_bpshz"].get<double>();
        if (j.contains("aerial_objective_weight"))
            c.aerial_objective_weight = j["aerial_objective_weight"].get<double>();
        if (j.contains("satellite_power_w"))
            c.satellite_power_w = j["satellite_power_w"].get<double>();
        if (j.contains("noise")) {
            const auto& n = j["noise"];
            if (n.contains("boltzmann_jk")) c.boltzmann_jk = n["boltzmann_jk"].get<double>();
            if (n.contains("temperature_k")) c.temperature_k = n["temperature_k"].get<double>();
            if (n.contains("bandwidth_hz")) c.bandwidth_hz = n["bandwidth_hz"].get<double>();
        }
        if (j.contains("geometry")) {
            const auto& g = j["geometry"];
            auto& geo = c.geometry;
            if (g.contains("satellite_m")) geo.satellite = vec3_from_json(g["satellite_m"]);
            if (g.contains("satellite_terminal_m"))
                geo.satellite_terminal = vec3_from_json(g["satellite_terminal_m"]);
            if (g.contains("aerial_bs_m")) geo.aerial_bs = vec3_from_json(g["aerial_bs_m"]);
            if (g.contains("aerial_user_m")) geo.aerial_user = vec3_from_json(g["aerial_user_m"]);
            if (g.contains("terrestrial_bs_m")) {
                geo.terrestrial_bs.clear();
                for (const auto& p : g["terrestrial_bs_m"])
                    geo.terrestrial_bs.push_back(vec3_from_json(p));
            }
            if (g.contains("terminals_m")) {
                geo.terminals.clear();
                for (const auto& row : g["terminals_m"]) {
                    std::vector<Vec3> r;
                    for (const auto& p : row) r.push_back(vec3_from_json(p));
                    geo.terminals.push_back(std::move(r));
                }
            }
            if (g.contains("carrier_ghz")) geo.carrier_ghz = g["carrier_ghz"].get<double>();
            if (g.contains("antenna_separation_ratio"))
                geo.antenna_separation_ratio = g["antenna_separation_ratio"].get<double>();
            if (g.contains("beam_angle_satellite_terminal_deg"))
                geo.beam_angle_satellite_terminal_deg =
                    g["beam_angle_satellite_terminal_deg"].get<double>();
            if (g.contains("beam_angle_aerial_user_deg"))
                geo.beam_angle_aerial_user_deg = g["beam_angle_aerial_user_deg"].get<double>();
            if (g.contains("beam_angle_terminals_deg")) {
                if (g["beam_angle_terminals_deg"].is_number()) {
                    geo.beam_angle_terminals_deg.assign(
                        static_cast<std::size_t>(c.cells), {});
                    for (int n = 0; n < c.cells; ++n)
                        geo.beam_angle_terminals_deg[n].assign(
                            static_cast<std::size_t>(c.terminals_per_cell[n]),
                            g["beam_angle_terminals_deg"].get<double>());
                } else {
                    geo.beam_angle_terminals_deg =
                        g["beam_angle_terminals_deg"].get<std::vector<std::vector<double>>>();
                }
            }
        }
        if (j.contains("fading")) {
            const auto& f = j["fading"];
            auto& fade = c.fading;
            if (f.contains("rician_kappa")) fade.rician_kappa = finite_or_inf(f["rician_kappa"]);
            if (f.contains("sr_omega")) fade.sr_omega = f["sr_omega"].get<double>();
            if (f.contains("sr_b")) fade.sr_b = f["sr_b"].get<double>();
            if (f.contains("sr_m")) fade.sr_m = finite_or_inf(f["sr_m"]);
            if (f.contains("beam_gain_max_db"))
                fade.beam_gain_max_db = f["beam_gain_max_db"].get<double>();
            if (f.contains("beam_3db_angle_deg"))
                fade.beam_3db_angle_deg = f["beam_3db_angle_deg"].get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

void save_config(const ScenarioConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    out << config_to_json(config);
}

}  // namespace hcss
