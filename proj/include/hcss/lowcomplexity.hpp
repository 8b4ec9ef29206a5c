// SPDX-License-Identifier: Apache-2.0
// Two-step low-complexity schemes: normalized direction design (interference
// suppression, zero forcing, maximum ratio combination) followed by scalar
// convex power allocation.

#ifndef HCSS_LOWCOMPLEXITY_HPP
#define HCSS_LOWCOMPLEXITY_HPP

#include "hcss/convex.hpp"
#include "hcss/result.hpp"

namespace hcss {

struct NormalizedBeamformers {
    VecC v_bar;                             // unit M_A-vector
    std::vector<std::vector<VecC>> w_bar;   // unit M_G-vectors, w_bar[n][k]
};

struct IsSettings {
    double chi = 1e-16;   // interference threshold, linear watts
    double eps3 = 1e-18;  // direction-iteration exit on |delta psi|
    double eps4 = 1e-2;   // power-allocation exit on |delta phi|
    int direction_cap = 200;
    int sca_cap = 30;
    int init_cap = 20;    // scalar feasibility-pass cap

    // Throws std::invalid_argument unless chi/tolerances > 0 and caps >= 1.
    void validate() const;
};

// Result of the capped generalized-Rayleigh-quotient iteration. psi is the
// quotient w^H H w / w^H (D/chi + rho I) w at exit; clamps counts updates of
// rho that left [0,1] before clamping.
struct IsDirection {
    VecC w;
    double psi = 0.0;
    double rho = 0.0;
    int iterations = 0;
    int clamps = 0;
    bool converged = false;
    bool ok = false;
    std::string message;
};

IsDirection is_direction(const MatC& desired, const MatC& interference_sum, double chi,
                         double eps3, int cap = 200);

// Step-1 outcome shared by the three schemes; status is Ok unless the scheme
// is structurally inapplicable or an iteration failed.
struct Step1Outcome {
    SchemeStatus status = SchemeStatus::Ok;
    NormalizedBeamformers nb;
    int iterations = 0;  // direction-iteration total (IS only)
    int clamps = 0;
    std::string message;
};

Step1Outcome is_step1(const ScenarioConfig& scenario, const ChannelRealization& ch,
                      const IsSettings& settings = {});
Step1Outcome zf_step1(const ScenarioConfig& scenario, const ChannelRealization& ch);
// Matched directions; throws std::invalid_argument on a zero direct channel.
NormalizedBeamformers mrc_step1(const ScenarioConfig& scenario, const ChannelRealization& ch);

struct PowerAllocOutcome {
    bool solver_ok = true;
    bool feasible = false;
    PowerAllocation alloc;
    int init_iterations = 0;  // feasibility, exploration and refinement solves
    int sca_iterations = 0;   // winning ascent's solves to reach eps4
    ConvergenceTrace trace;
    std::string message;
};

// Scalar SCA power allocation for fixed directions (used by IS and MRC): a
// delta-feasibility pass seeds the exponential tangents, then surrogate
// solves ascend until |delta phi| <= eps4. The ascent restarts from a small
// deterministic set of budget-saturating anchors, refines each candidate
// well past eps4, and keeps the best point by the true objective, since the
// surrogate is only locally tight.
PowerAllocOutcome power_alloc_sca(const ScenarioConfig& scenario, const ChannelRealization& ch,
                                  const NormalizedBeamformers& nb, double eps4,
                                  const IsSettings& settings = {});

// One-shot concave power program after zero forcing; no SCA loop needed.
PowerAllocOutcome zf_power(const ScenarioConfig& scenario, const ChannelRealization& ch,
                           const NormalizedBeamformers& nb);

// Full two-step run for scheme in {IS, ZF, MRC}; throws std::invalid_argument
// when called with Scheme::PIBF.
SchemeResult run_scheme(Scheme scheme, const ScenarioConfig& scenario,
                        const ChannelRealization& ch, const IsSettings& settings = {});

}  // namespace hcss

#endif
