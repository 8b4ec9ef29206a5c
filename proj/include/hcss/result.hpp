// SPDX-License-Identifier: Apache-2.0
// Per-trial scheme outcome shared by the iterative and low-complexity paths.

#ifndef HCSS_RESULT_HPP
#define HCSS_RESULT_HPP

#include <string>
#include <vector>

#include "hcss/network.hpp"

namespace hcss {

enum class Scheme { PIBF, IS, ZF, MRC };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& text);

enum class SchemeStatus { Ok, Infeasible, NotApplicable, NumericalFailure };

std::string to_string(SchemeStatus status);

struct TracePoint {
    int outer = 0;
    int inner = 0;
    double phi = 0.0;
    double mu = 0.0;
    double f = 0.0;
    double xi = 0.0;
};

struct ConvergenceTrace {
    std::vector<TracePoint> points;
    // Merit at the anchor entering each outer stage (evaluated at that
    // stage's penalty factor), and the penalty value closing it.
    std::vector<double> outer_initial_mu;
    std::vector<double> outer_final_f;

    // Columns: outer,inner,phi,mu,F,xi
    void write_csv(const std::string& path) const;
};

struct SchemeResult {
    Scheme scheme = Scheme::PIBF;
    Mode mode = Mode::HCSSA;
    SchemeStatus status = SchemeStatus::NumericalFailure;
    bool feasible = false;
    double terrestrial_rate_bpshz = 0.0;
    double aerial_rate_bpshz = 0.0;
    std::vector<std::vector<double>> terminal_rates_bpshz;
    int init_iterations = 0;   // feasibility-pass solves
    int outer_iterations = 0;  // penalty stages (PIBF only)
    int inner_iterations = 0;  // surrogate solves / SCA steps
    double wall_ms = 0.0;
    ConvergenceTrace trace;
    ConstraintReport report;
    BeamformerSet beamformers;
    std::string message;

    int solver_iterations() const { return init_iterations + inner_iterations; }
};

}  // namespace hcss

#endif
