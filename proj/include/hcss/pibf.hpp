// SPDX-License-Identifier: Apache-2.0
// Penalty-based iterative beamforming: outer penalty escalation around an
// inner SCA loop on the lifted program, plus the feasibility initialization.

#ifndef HCSS_PIBF_HPP
#define HCSS_PIBF_HPP

#include "hcss/convex.hpp"
#include "hcss/result.hpp"

namespace hcss {

struct PibfSettings {
    double eps1 = 3e-3;   // inner |delta phi| exit
    double eps2 = 1e-3;   // penalty threshold on F
    int t_max = 20;       // inner iteration cap
    double xi0 = 1e-5;    // initial penalty factor
    double omega = 10.0;  // penalty escalation
    int outer_cap = 12;
    int init_cap = 20;    // feasibility-pass iteration cap

    // Throws std::invalid_argument unless omega > 1 and tolerances/caps > 0.
    void validate() const;
};

struct InitOutcome {
    bool feasible = false;
    LiftedIterate iterate;  // meaningful only when feasible
    int iterations = 0;
    double delta = 0.0;     // final slack value
    std::string message;
    bool solver_ok = true;
};

// Feasibility search: maximize the common constraint slack, re-anchoring the
// exponential tangents at each pass, until the slack turns nonnegative. The
// random starting anchors come from a stream keyed on the realization's seed.
InitOutcome initialize(const ScenarioConfig& scenario, const ChannelRealization& ch,
                       const PibfSettings& settings = {});

// Full iterative run; requires scenario.mode == HCSSA.
SchemeResult run_pibf(const ScenarioConfig& scenario, const ChannelRealization& ch,
                      const PibfSettings& settings = {});

// Variant with the aerial rate in the objective and no rate floor; requires
// scenario.mode == TCSSA.
SchemeResult run_pibf_tcssa(const ScenarioConfig& scenario, const ChannelRealization& ch,
                            const PibfSettings& settings = {});

}  // namespace hcss

#endif
