// SPDX-License-Identifier: Apache-2.0
// Scenario configuration: network layout, fading parameters, budgets, and
// serialization to/from the JSON config format described in the README.

#ifndef HCSS_CONFIG_HPP
#define HCSS_CONFIG_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcss {

using Vec3 = std::array<double, 3>;

enum class Mode { HCSSA, TCSSA };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

// Thrown on malformed or inconsistent configuration input; the CLI maps it to
// exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryConfig {
    Vec3 satellite{0.0, 0.0, 3.5786e7};
    Vec3 satellite_terminal{500.0, 500.0, 0.0};
    Vec3 aerial_bs{0.0, 0.0, 100.0};
    Vec3 aerial_user{100.0, 150.0, 10000.0};
    std::vector<Vec3> terrestrial_bs{{-250.0, 0.0, 0.0}, {250.0, 0.0, 0.0}};
    // terminals[n][k]: terminal k of cell n, fixed offsets inside 200 m disks
    std::vector<std::vector<Vec3>> terminals{
        {{-170.0, 60.0, 0.0}, {-290.0, -120.0, 0.0}},
        {{330.0, -70.0, 0.0}, {180.0, 100.0, 0.0}}};
    double carrier_ghz = 18.0;
    double antenna_separation_ratio = 0.5;  // d_bar / lambda
    // Off-axis angles seen from the satellite beam center, degrees.
    double beam_angle_satellite_terminal_deg = 0.01;
    double beam_angle_aerial_user_deg = 0.4;
    std::vector<std::vector<double>> beam_angle_terminals_deg{{0.8, 0.8}, {0.8, 0.8}};
};

struct FadingParams {
    double rician_kappa = 10.0;   // may be +inf (pure LoS limit)
    double sr_omega = 0.835;      // mean LoS power of the shadowed-Rician model
    double sr_b = 0.126;          // half the scatter power per entry
    double sr_m = 10.0;           // Nakagami shadowing order, may be +inf
    double beam_gain_max_db = 52.1;
    double beam_3db_angle_deg = 0.4;
};

struct ScenarioConfig {
    Mode mode = Mode::HCSSA;
    int cells = 2;
    std::vector<int> terminals_per_cell{2, 2};
    int satellite_antennas = 7;   // M_S
    int aerial_antennas = 8;      // M_A
    int terrestrial_antennas = 8; // M_G
    double interference_temperature_w = 2e-15;  // config key is in mW
    std::vector<double> cell_power_w{60.0, 60.0};
    double aerial_power_w = 60.0;
    double aerial_rate_floor_bpshz = 3.0;
    // TCSSA-only: weight on the aerial user's rate in the objective. Zero
    // removes the aerial term entirely, reducing TCSSA to HCSSA without a
    // rate floor.
    double aerial_objective_weight = 1.0;
    double satellite_power_w = 40.0;
    double boltzmann_jk = 1.38e-23;
    double temperature_k = 300.0;
    double bandwidth_hz = 5e5;
    GeometryConfig geometry;
    FadingParams fading;

    double noise_power_w() const { return boltzmann_jk * temperature_k * bandwidth_hz; }
    double beta_bar() const { return std::exp2(aerial_rate_floor_bpshz) - 1.0; }
    // True when the aerial user's rate actually participates in the objective.
    bool tcssa_aerial_active() const {
        return mode == Mode::TCSSA && aerial_objective_weight > 0.0;
    }
    int total_terminals() const {
        int total = 0;
        for (int k : terminals_per_cell) total += k;
        return total;
    }

    // Throws ConfigError when invariants are broken (dimension mismatches,
    // nonpositive powers, negative rate floor, bad geometry).
    void validate() const;
};

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);
std::string config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const std::string& text);

}  // namespace hcss

#endif
