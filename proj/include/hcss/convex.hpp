// SPDX-License-Identifier: Apache-2.0
// SCA surrogate construction (exponential tangents, eigenvalue linearization)
// and a self-contained log-barrier interior-point solver for the four convex
// subproblem shapes. Subproblems are assembled in noise-normalized units; the
// objective sum(s - u) is invariant under that normalization.

#ifndef HCSS_CONVEX_HPP
#define HCSS_CONVEX_HPP

#include <complex>
#include <string>
#include <vector>

#include "hcss/network.hpp"

namespace hcss {

struct ExpTangent {
    // Expansion points, one per terrestrial terminal (flattened), plus the
    // aerial auxiliary in TCSSA mode; nats in the solver's normalized units.
    std::vector<double> u0;
    std::optional<double> u0_aerial;
};

struct EigTangent {
    double eta = 0.0;  // top eigenvalue at the expansion point
    VecC theta;        // matching unit eigenvector
};

// eta_bar(X; X0) = Tr(theta theta^H (X - X0)) + eta(X0) <= eta(X).
EigTangent eig_tangent(const MatC& x0);
double eig_tangent_value(const EigTangent& t, const MatC& x0, const MatC& x);
// Affine minorant of exp at u0 evaluated at u.
inline double exp_tangent_value(double u0, double u) {
    return std::exp(u0) * (u - u0 + 1.0);
}

enum class SubproblemKind { PibfInner, PibfInit, PowerAllocIs, PowerAllocZf };

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

// One scalar log term w*ln(a.x + c) of the objective.
struct LogTerm {
    Eigen::VectorXd a;
    double c = 0.0;
    double weight = 1.0;
};

// Linear inequality q.x <= r.
struct LinCon {
    Eigen::VectorXd q;
    double r = 0.0;
};

struct BasisEntry {
    int var = 0;
    int row = 0;
    int col = 0;
    std::complex<double> val;
};

// Hermitian PSD constraint C + sum_p x_p B_p >= 0 with sparse basis matrices.
struct PsdBlock {
    int dim = 0;
    MatC constant;
    std::vector<BasisEntry> entries;
};

// Affine row alpha(x) = a.x + c tied to auxiliary variable u_var with anchor
// u0; used to verify tangent-constraint tightness at the optimum.
struct TangentRow {
    Eigen::VectorXd a;
    double c = 0.0;
    int u_var = -1;
    double u0 = 0.0;
};

// Variable layout bookkeeping for unpacking solutions.
struct VarLayout {
    int v_offset = -1;
    int v_dim = 0;
    std::vector<std::vector<int>> w_offset;
    int w_dim = 0;
    std::vector<std::vector<int>> u_index;
    int u_aerial_index = -1;
    int delta_index = -1;
    int q_index = -1;
    std::vector<std::vector<int>> p_index;
    double sigma2 = 1.0;  // normalization; absolute aux u = u' + ln(sigma2)
};

struct ConvexSubproblem {
    SubproblemKind kind = SubproblemKind::PibfInner;
    int nvars = 0;
    std::vector<LogTerm> logs;
    Eigen::VectorXd lin;      // linear objective part
    double constant = 0.0;    // objective constant
    std::vector<LinCon> cons;
    std::vector<PsdBlock> blocks;
    std::vector<TangentRow> tangent_rows;
    Eigen::VectorXd x0;       // strictly feasible start
    VarLayout layout;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    double gap = 0.0;
    int newton_steps = 0;
    std::string message;
};

// Maximizes the subproblem objective by a damped-Newton barrier method with
// native log terms; deterministic for identical inputs.
SolveOutcome solve(const ConvexSubproblem& sub);

// Problem (19)-shaped inner surrogate at the given anchor; mode-aware
// (TCSSA adds the aerial s/alpha/u triple and drops the rate floor).
ConvexSubproblem build_inner_subproblem(const ScenarioConfig& scenario, const GramData& d,
                                        const LiftedIterate& anchor, double xi);
// Problem (21)-shaped feasibility program (maximize the common slack delta);
// u0 holds the current exponential-tangent anchors in normalized units.
ConvexSubproblem build_feasibility_subproblem(const ScenarioConfig& scenario,
                                              const GramData& d, const ExpTangent& u0);

// Scalar power-allocation coefficients for fixed normalized directions.
struct PowerCoeffs {
    std::vector<std::vector<double>> direct;     // |h_nnk^H w_nk|^2 / sigma2
    // cross[n][k][m][l]: power seen by terminal (n,k) from beam (m,l)
    std::vector<std::vector<std::vector<std::vector<double>>>> cross;
    std::vector<std::vector<double>> from_v;     // |g_nk^H v|^2 / sigma2
    std::vector<std::vector<double>> sat_w;      // |h_Sn^H w_nk|^2 / sigma2
    double sat_v = 0.0;                          // |g_S^H v|^2 / sigma2
    std::vector<std::vector<double>> aerial_w;   // |h_Am^H w_ml|^2 / sigma2
    double aerial_v = 0.0;                       // |g_A^H v|^2 / sigma2
    std::vector<std::vector<double>> noise;      // sigma_bar^2 / sigma2
    double noise_aerial = 0.0;
    double interference_limit = 0.0;             // I_S / sigma2
};

PowerCoeffs build_power_coeffs(const ScenarioConfig& scenario, const ChannelRealization& ch,
                               const VecC& v_bar,
                               const std::vector<std::vector<VecC>>& w_bar);

// Problem (32)-shaped SCA step for scalar powers at the given tangents; when
// with_delta is set, builds the (21)-style scalar feasibility relaxation.
ConvexSubproblem build_power_subproblem(const ScenarioConfig& scenario,
                                        const PowerCoeffs& pc, const ExpTangent& u0,
                                        bool with_delta,
                                        const std::vector<std::vector<double>>* start = nullptr,
                                        double q_start = -1.0);
// Problem (36): one-shot concave program after zero-forcing.
ConvexSubproblem build_zf_power_subproblem(const ScenarioConfig& scenario,
                                           const PowerCoeffs& pc);

// u = ln(alpha) in absolute nats for every terminal (and the aerial user in
// TCSSA mode); throws when any alpha <= 0.
std::vector<double> update_aux(const ScenarioConfig& scenario, const GramData& d,
                               LiftedIterate& it);

// v = sqrt(eta(V)) theta(V), likewise per W; requires penalty F below eps2.
BeamformerSet recover_rank_one(const LiftedIterate& it, double eps2 = 1e-3);

LiftedIterate lifted_from_solution(const ConvexSubproblem& sub, const Eigen::VectorXd& x);

struct PowerAllocation {
    double q = 0.0;
    std::vector<std::vector<double>> p;
};

PowerAllocation power_from_solution(const ConvexSubproblem& sub, const Eigen::VectorXd& x);

// Portable sparse text dump for external verification.
void dump_subproblem(const ConvexSubproblem& sub, const std::string& path);

}  // namespace hcss

#endif
