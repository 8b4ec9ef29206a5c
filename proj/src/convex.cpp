// SPDX-License-Identifier: Apache-2.0

#include "hcss/convex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hcss {

namespace {

// Hermitian matrices enter the solver as m^2 real parameters: m diagonal
// entries first, then (Re, Im) pairs of the upper triangle in row-major order.
int herm_param_count(int m) { return m * m; }

int pair_base(int m, int i, int j) {
    // Index of the (Re, Im) pair for entry (i, j), i < j.
    const int before = i * m - i * (i + 1) / 2;
    return m + 2 * (before + j - i - 1);
}

MatC params_to_herm(const Eigen::VectorXd& x, int offset, int m) {
    MatC out(m, m);
    for (int i = 0; i < m; ++i) out(i, i) = x(offset + i);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const int base = offset + pair_base(m, i, j);
            out(i, j) = {x(base), x(base + 1)};
            out(j, i) = std::conj(out(i, j));
        }
    return out;
}

void herm_to_params(const MatC& x, int offset, Eigen::VectorXd& out) {
    const int m = static_cast<int>(x.rows());
    for (int i = 0; i < m; ++i) out(offset + i) = x(i, i).real();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const int base = offset + pair_base(m, i, j);
            out(base) = x(i, j).real();
            out(base + 1) = x(i, j).imag();
        }
}

// Accumulates the coefficients of Tr(A X) over the parameters of X.
void add_trace_coeffs(Eigen::VectorXd& a, const MatC& mat, int offset, double scale = 1.0) {
    const int m = static_cast<int>(mat.rows());
    for (int i = 0; i < m; ++i) a(offset + i) += scale * mat(i, i).real();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const int base = offset + pair_base(m, i, j);
            a(base) += scale * 2.0 * mat(i, j).real();
            a(base + 1) += scale * 2.0 * mat(i, j).imag();
        }
}

void add_block_basis(PsdBlock& block, int offset) {
    const int m = block.dim;
    for (int i = 0; i < m; ++i) block.entries.push_back({offset + i, i, i, {1.0, 0.0}});
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const int base = offset + pair_base(m, i, j);
            block.entries.push_back({base, i, j, {1.0, 0.0}});
            block.entries.push_back({base, j, i, {1.0, 0.0}});
            block.entries.push_back({base + 1, i, j, {0.0, 1.0}});
            block.entries.push_back({base + 1, j, i, {0.0, -1.0}});
        }
}

MatC block_matrix(const PsdBlock& block, const Eigen::VectorXd& x) {
    MatC m = block.constant.size() > 0 ? block.constant
                                       : MatC::Zero(block.dim, block.dim);
    for (const auto& e : block.entries) m(e.row, e.col) += x(e.var) * e.val;
    return m;
}

struct Feasibility {
    bool ok = false;
    double min_slack = 0.0;
};

Feasibility strictly_feasible(const ConvexSubproblem& sub, const Eigen::VectorXd& x) {
    Feasibility f;
    f.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& log : sub.logs) {
        const double val = log.a.dot(x) + log.c;
        if (!(val > 0.0)) return f;
    }
    for (const auto& con : sub.cons) {
        const double slack = con.r - con.q.dot(x);
        f.min_slack = std::min(f.min_slack, slack);
        if (!(slack > 0.0)) return f;
    }
    for (const auto& block : sub.blocks) {
        Eigen::LLT<MatC> llt(block_matrix(block, x));
        if (llt.info() != Eigen::Success) return f;
    }
    f.ok = true;
    return f;
}

double objective_value(const ConvexSubproblem& sub, const Eigen::VectorXd& x) {
    double f = sub.constant + sub.lin.dot(x);
    for (const auto& log : sub.logs) f += log.weight * std::log(log.a.dot(x) + log.c);
    return f;
}

// Barrier potential -t*f(x) + Phi(x); +inf outside the interior.
double potential(const ConvexSubproblem& sub, const Eigen::VectorXd& x, double t) {
    double psi = -t * (sub.constant + sub.lin.dot(x));
    for (const auto& log : sub.logs) {
        const double val = log.a.dot(x) + log.c;
        if (!(val > 0.0)) return std::numeric_limits<double>::infinity();
        psi -= t * log.weight * std::log(val);
    }
    for (const auto& con : sub.cons) {
        const double slack = con.r - con.q.dot(x);
        if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
        psi -= std::log(slack);
    }
    for (const auto& block : sub.blocks) {
        Eigen::LLT<MatC> llt(block_matrix(block, x));
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        double logdet = 0.0;
        for (int i = 0; i < block.dim; ++i)
            logdet += 2.0 * std::log(llt.matrixLLT()(i, i).real());
        psi -= logdet;
    }
    return psi;
}

}  // namespace

EigTangent eig_tangent(const MatC& x0) {
    auto [eta, theta] = top_eig(x0);
    return {eta, theta};
}

double eig_tangent_value(const EigTangent& t, const MatC& x0, const MatC& x) {
    return (t.theta.adjoint() * (x - x0) * t.theta)(0).real() + t.eta;
}

SolveOutcome solve(const ConvexSubproblem& sub) {
    constexpr double kGapTol = 1e-7;
    constexpr double kTMul = 30.0;
    const int n = sub.nvars;
    SolveOutcome out;
    Eigen::VectorXd x = sub.x0;

    if (!strictly_feasible(sub, x).ok) {
        out.message = "start point not strictly interior";
        return out;
    }

    double nu = static_cast<double>(sub.cons.size());
    for (const auto& block : sub.blocks) nu += block.dim;

    Eigen::VectorXd grad(n), grad_f(n), grad_phi(n), dx(n);
    Eigen::MatrixXd hess(n, n);

    // Gradient pieces at the start decide the initial barrier weight: pick t0
    // minimizing ||∇(-t f + Phi)|| in a least-squares sense (warm starts then
    // skip most of the t-path).
    auto gradient_pieces = [&](const Eigen::VectorXd& at, Eigen::VectorXd& gf,
                               Eigen::VectorXd& gphi) {
        gf = sub.lin;
        for (const auto& log : sub.logs)
            gf += (log.weight / (log.a.dot(at) + log.c)) * log.a;
        gphi.setZero();
        for (const auto& con : sub.cons) gphi += con.q / (con.r - con.q.dot(at));
        for (const auto& block : sub.blocks) {
            const MatC m = block_matrix(block, at);
            const MatC y = m.llt().solve(MatC::Identity(block.dim, block.dim));
            for (const auto& e : block.entries)
                gphi(e.var) -= (e.val * y(e.col, e.row)).real();
        }
    };

    gradient_pieces(x, grad_f, grad_phi);
    double t = 1.0;
    const double gf2 = grad_f.squaredNorm();
    if (gf2 > 0.0) {
        const double fit = grad_f.dot(grad_phi) / gf2;
        t = std::clamp(fit, 1.0, 0.1 * nu / kGapTol);
        if (!std::isfinite(t)) t = 1.0;
    }

    for (int stage = 0; stage < 60; ++stage) {
        // Center at the current t.
        for (int iter = 0; iter < 80; ++iter) {
            ++out.newton_steps;
            hess.setZero();
            gradient_pieces(x, grad_f, grad_phi);
            grad = -t * grad_f + grad_phi;

            for (const auto& log : sub.logs) {
                const double val = log.a.dot(x) + log.c;
                hess.selfadjointView<Eigen::Lower>().rankUpdate(
                    log.a, t * log.weight / (val * val));
            }
            for (const auto& con : sub.cons) {
                const double slack = con.r - con.q.dot(x);
                hess.selfadjointView<Eigen::Lower>().rankUpdate(con.q,
                                                                1.0 / (slack * slack));
            }
            for (const auto& block : sub.blocks) {
                const MatC m = block_matrix(block, x);
                const MatC y = m.llt().solve(MatC::Identity(block.dim, block.dim));
                const auto& es = block.entries;
                for (std::size_t a = 0; a < es.size(); ++a)
                    for (std::size_t b = 0; b <= a; ++b) {
                        const int p = es[a].var;
                        const int q = es[b].var;
                        // Tr(Y B_p Y B_q) restricted to this entry pair.
                        const double term =
                            (es[a].val * es[b].val * y(es[b].col, es[a].row) *
                             y(es[a].col, es[b].row))
                                .real();
                        if (p == q)
                            hess(p, q) += (a == b) ? term : 2.0 * term;
                        else if (p > q)
                            hess(p, q) += term;
                        else
                            hess(q, p) += term;
                    }
            }

            Eigen::LDLT<Eigen::MatrixXd> ldlt;
            double reg = 0.0;
            for (int attempt = 0; attempt < 4; ++attempt) {
                Eigen::MatrixXd h = hess.selfadjointView<Eigen::Lower>();
                if (reg > 0.0) h.diagonal().array() += reg;
                ldlt.compute(h);
                if (ldlt.info() == Eigen::Success) {
                    dx = ldlt.solve(-grad);
                    if (dx.allFinite()) break;
                }
                reg = reg == 0.0 ? 1e-10 * std::max(1.0, hess.diagonal().maxCoeff())
                                 : reg * 100.0;
                dx.setZero();
            }
            if (!dx.allFinite() || dx.isZero(0.0)) {
                if (grad.norm() < 1e-6 * (1.0 + t)) break;
                out.message = "newton system solve failed";
                return out;
            }

            // Dimensionless Newton decrement; a fixed exit threshold keeps
            // binding-row slacks within a whisker of their central values at
            // every stage, which the activity invariants downstream rely on.
            const double lambda2 = -grad.dot(dx);
            if (lambda2 / 2.0 <= 1e-10) break;

            // Backtracking line search staying strictly interior.
            const double psi0 = potential(sub, x, t);
            double step = 1.0;
            bool moved = false;
            const double slope = grad.dot(dx);
            for (int ls = 0; ls < 70; ++ls) {
                const Eigen::VectorXd cand = x + step * dx;
                const double psic = potential(sub, cand, t);
                if (std::isfinite(psic) &&
                    psic <= psi0 + 0.1 * step * slope + 1e-13 * std::abs(psi0)) {
                    x = cand;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                if (lambda2 / 2.0 <= 1e-4) break;  // roundoff-limited center
                out.message = "line search stalled";
                return out;
            }
        }
        if (nu / t <= kGapTol) break;
        t *= kTMul;
    }

    out.status = SolveStatus::Optimal;
    out.x = x;
    out.objective = objective_value(sub, x);
    out.gap = nu / t;
    return out;
}

LiftedIterate lifted_from_solution(const ConvexSubproblem& sub, const Eigen::VectorXd& x) {
    const VarLayout& lay = sub.layout;
    LiftedIterate it;
    it.V = params_to_herm(x, lay.v_offset, lay.v_dim);
    const double shift = std::log(lay.sigma2);
    it.W.resize(lay.w_offset.size());
    it.u.resize(lay.w_offset.size());
    for (std::size_t n = 0; n < lay.w_offset.size(); ++n) {
        for (std::size_t k = 0; k < lay.w_offset[n].size(); ++k) {
            it.W[n].push_back(params_to_herm(x, lay.w_offset[n][k], lay.w_dim));
            it.u[n].push_back(x(lay.u_index[n][k]) + shift);
        }
    }
    if (lay.u_aerial_index >= 0) it.u_aerial = x(lay.u_aerial_index) + shift;
    return it;
}

PowerAllocation power_from_solution(const ConvexSubproblem& sub, const Eigen::VectorXd& x) {
    const VarLayout& lay = sub.layout;
    PowerAllocation pa;
    pa.q = x(lay.q_index);
    pa.p.resize(lay.p_index.size());
    for (std::size_t n = 0; n < lay.p_index.size(); ++n)
        for (int idx : lay.p_index[n]) pa.p[n].push_back(x(idx));
    return pa;
}

namespace {

// Shared assembly for problems (19) and (21): same constraint family, with
// (21) adding the slack variable delta to every row and block.
ConvexSubproblem build_lifted_program(const ScenarioConfig& scenario, const GramData& d,
                                      const LiftedIterate* anchor, const ExpTangent& tan,
                                      double xi, bool with_delta) {
    const bool tcssa = scenario.mode == Mode::TCSSA;
    const bool aerial_obj = scenario.tcssa_aerial_active();
    const double w_a = scenario.aerial_objective_weight;
    const int n_cells = scenario.cells;
    const int m_a = scenario.aerial_antennas;
    const int m_g = scenario.terrestrial_antennas;
    const double s2 = d.sigma2;

    ConvexSubproblem sub;
    sub.kind = with_delta ? SubproblemKind::PibfInit : SubproblemKind::PibfInner;
    VarLayout& lay = sub.layout;
    lay.sigma2 = s2;
    lay.v_dim = m_a;
    lay.w_dim = m_g;

    int next = 0;
    lay.v_offset = next;
    next += herm_param_count(m_a);
    lay.w_offset.resize(n_cells);
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
            lay.w_offset[n].push_back(next);
            next += herm_param_count(m_g);
        }
    lay.u_index.resize(n_cells);
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            lay.u_index[n].push_back(next++);
    if (aerial_obj) lay.u_aerial_index = next++;
    if (with_delta) lay.delta_index = next++;
    sub.nvars = next;

    auto zero_vec = [&]() { return Eigen::VectorXd::Zero(sub.nvars).eval(); };

    // Normalized effective noises.
    auto nbar = [&](int n, int k) { return d.noise.terminal[n][k] / s2; };
    const double nbar_a = d.noise.aerial / s2;

    // Objective log terms s_{n,k} (and the aerial one in TCSSA mode).
    if (!with_delta) {
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
                LogTerm log;
                log.a = zero_vec();
                add_trace_coeffs(log.a, d.g[n][k], lay.v_offset, 1.0 / s2);
                for (int m = 0; m < n_cells; ++m)
                    for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                        add_trace_coeffs(log.a, d.h[m][n][k], lay.w_offset[m][l], 1.0 / s2);
                log.c = nbar(n, k);
                sub.logs.push_back(std::move(log));
            }
        if (aerial_obj) {
            LogTerm log;
            log.a = zero_vec();
            add_trace_coeffs(log.a, d.g_a, lay.v_offset, 1.0 / s2);
            for (int m = 0; m < n_cells; ++m)
                for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                    add_trace_coeffs(log.a, d.h_a[m], lay.w_offset[m][l], 1.0 / s2);
            log.c = nbar_a;
            log.weight = w_a;
            sub.logs.push_back(std::move(log));
        }
    }

    // Linear objective: -sum u (minus the eigenvalue-linearized penalty), or
    // +delta for the feasibility variant.
    sub.lin = zero_vec();
    if (with_delta) {
        sub.lin(lay.delta_index) = 1.0;
    } else {
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                sub.lin(lay.u_index[n][k]) = -1.0;
        if (aerial_obj) sub.lin(lay.u_aerial_index) = -w_a;
        // F_bar(X; X0) = sum Tr((I - theta theta^H) X): affine, no constant.
        const EigTangent tv = eig_tangent(anchor->V);
        add_trace_coeffs(sub.lin,
                         MatC::Identity(m_a, m_a) - tv.theta * tv.theta.adjoint(),
                         lay.v_offset, -xi);
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
                const EigTangent tw = eig_tangent(anchor->W[n][k]);
                add_trace_coeffs(sub.lin,
                                 MatC::Identity(m_g, m_g) - tw.theta * tw.theta.adjoint(),
                                 lay.w_offset[n][k], -xi);
            }
    }

    auto push_con = [&](Eigen::VectorXd q, double r) {
        if (with_delta) q(lay.delta_index) += 1.0;
        sub.cons.push_back({std::move(q), r});
    };

    // Satellite interference cap.
    {
        Eigen::VectorXd q = zero_vec();
        add_trace_coeffs(q, d.g_s, lay.v_offset, 1.0 / s2);
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                add_trace_coeffs(q, d.h_s[n], lay.w_offset[n][k], 1.0 / s2);
        push_con(std::move(q), scenario.interference_temperature_w / s2);
    }
    // Per-cell power.
    for (int n = 0; n < n_cells; ++n) {
        Eigen::VectorXd q = zero_vec();
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            add_trace_coeffs(q, MatC::Identity(m_g, m_g), lay.w_offset[n][k]);
        push_con(std::move(q), scenario.cell_power_w[n]);
    }
    // Aerial power.
    {
        Eigen::VectorXd q = zero_vec();
        add_trace_coeffs(q, MatC::Identity(m_a, m_a), lay.v_offset);
        push_con(std::move(q), scenario.aerial_power_w);
    }
    // Aerial rate floor (HCSSA only; a zero floor adds nothing).
    if (!tcssa && scenario.beta_bar() > 0.0) {
        const double beta = scenario.beta_bar();
        Eigen::VectorXd q = zero_vec();
        add_trace_coeffs(q, d.g_a, lay.v_offset, -1.0 / s2);
        for (int m = 0; m < n_cells; ++m)
            for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                add_trace_coeffs(q, d.h_a[m], lay.w_offset[m][l], beta / s2);
        push_con(std::move(q), -beta * nbar_a);
    }
    // Exponential-tangent rows: alpha <= e^{u0} (u - u0 + 1).
    {
        std::size_t flat = 0;
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k, ++flat) {
                TangentRow row;
                row.a = zero_vec();
                add_trace_coeffs(row.a, d.g[n][k], lay.v_offset, 1.0 / s2);
                for (int m = 0; m < n_cells; ++m)
                    for (int l = 0; l < scenario.terminals_per_cell[m]; ++l) {
                        if (m == n && l == k) continue;
                        add_trace_coeffs(row.a, d.h[m][n][k], lay.w_offset[m][l], 1.0 / s2);
                    }
                row.c = nbar(n, k);
                row.u_var = lay.u_index[n][k];
                row.u0 = tan.u0[flat];
                Eigen::VectorXd q = row.a;
                const double e0 = std::exp(row.u0);
                q(row.u_var) -= e0;
                push_con(std::move(q), e0 * (1.0 - row.u0) - row.c);
                sub.tangent_rows.push_back(std::move(row));
            }
        if (aerial_obj) {
            TangentRow row;
            row.a = zero_vec();
            for (int m = 0; m < n_cells; ++m)
                for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                    add_trace_coeffs(row.a, d.h_a[m], lay.w_offset[m][l], 1.0 / s2);
            row.c = nbar_a;
            row.u_var = lay.u_aerial_index;
            row.u0 = tan.u0_aerial.value();
            Eigen::VectorXd q = row.a;
            const double e0 = std::exp(row.u0);
            q(row.u_var) -= e0;
            push_con(std::move(q), e0 * (1.0 - row.u0) - row.c);
            sub.tangent_rows.push_back(std::move(row));
        }
    }
    // PSD blocks, relaxed to X - delta*I >= 0 for the feasibility variant.
    {
        PsdBlock bv;
        bv.dim = m_a;
        add_block_basis(bv, lay.v_offset);
        if (with_delta)
            for (int i = 0; i < m_a; ++i)
                bv.entries.push_back({lay.delta_index, i, i, {-1.0, 0.0}});
        sub.blocks.push_back(std::move(bv));
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
                PsdBlock bw;
                bw.dim = m_g;
                add_block_basis(bw, lay.w_offset[n][k]);
                if (with_delta)
                    for (int i = 0; i < m_g; ++i)
                        bw.entries.push_back({lay.delta_index, i, i, {-1.0, 0.0}});
                sub.blocks.push_back(std::move(bw));
            }
    }
    return sub;
}

// Minimum strictly-feasible nudge for every tangent row at the start point.
void nudge_tangent_start(ConvexSubproblem& sub) {
    for (const auto& row : sub.tangent_rows) {
        const double alpha = row.a.dot(sub.x0) + row.c;
        const double e0 = std::exp(row.u0);
        const double needed = alpha / e0 - 1.0 + row.u0;  // u with exact equality
        sub.x0(row.u_var) =
            std::max(sub.x0(row.u_var), needed) + 1e-6 * std::max(1.0, std::abs(row.u0));
    }
}

}  // namespace

ConvexSubproblem build_inner_subproblem(const ScenarioConfig& scenario, const GramData& d,
                                        const LiftedIterate& anchor, double xi) {
    ExpTangent tan;
    const double shift = std::log(d.sigma2);
    for (const auto& row : anchor.u)
        for (double u : row) tan.u0.push_back(u - shift);
    if (scenario.tcssa_aerial_active()) {
        if (!anchor.u_aerial)
            throw std::invalid_argument("build_inner_subproblem: TCSSA anchor needs u_aerial");
        tan.u0_aerial = *anchor.u_aerial - shift;
    }
    for (double u : tan.u0)
        if (!std::isfinite(u))
            throw std::invalid_argument("build_inner_subproblem: anchor alpha must be positive");

    ConvexSubproblem sub = build_lifted_program(scenario, d, &anchor, tan, xi, false);

    sub.x0 = Eigen::VectorXd::Zero(sub.nvars);
    herm_to_params(anchor.V, sub.layout.v_offset, sub.x0);
    for (std::size_t n = 0; n < anchor.W.size(); ++n)
        for (std::size_t k = 0; k < anchor.W[n].size(); ++k)
            herm_to_params(anchor.W[n][k], sub.layout.w_offset[n][k], sub.x0);
    {
        std::size_t flat = 0;
        for (std::size_t n = 0; n < anchor.u.size(); ++n)
            for (std::size_t k = 0; k < anchor.u[n].size(); ++k)
                sub.x0(sub.layout.u_index[n][k]) = tan.u0[flat++];
        if (scenario.tcssa_aerial_active())
            sub.x0(sub.layout.u_aerial_index) = *tan.u0_aerial;
    }
    nudge_tangent_start(sub);
    return sub;
}

ConvexSubproblem build_feasibility_subproblem(const ScenarioConfig& scenario,
                                              const GramData& d, const ExpTangent& tan) {
    ConvexSubproblem sub = build_lifted_program(scenario, d, nullptr, tan, 0.0, true);
    const VarLayout& lay = sub.layout;

    sub.x0 = Eigen::VectorXd::Zero(sub.nvars);
    const double cv = scenario.aerial_power_w / (4.0 * lay.v_dim);
    herm_to_params(cv * MatC::Identity(lay.v_dim, lay.v_dim), lay.v_offset, sub.x0);
    double cmin = cv;
    for (int n = 0; n < scenario.cells; ++n) {
        const double cw = scenario.cell_power_w[n] /
                          (4.0 * lay.w_dim * scenario.terminals_per_cell[n]);
        cmin = std::min(cmin, cw);
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            herm_to_params(cw * MatC::Identity(lay.w_dim, lay.w_dim),
                           lay.w_offset[n][k], sub.x0);
    }
    {
        std::size_t flat = 0;
        for (int n = 0; n < scenario.cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                sub.x0(lay.u_index[n][k]) = tan.u0[flat++];
        if (scenario.tcssa_aerial_active()) sub.x0(lay.u_aerial_index) = *tan.u0_aerial;
    }
    double min_slack = cmin;
    for (const auto& con : sub.cons)
        min_slack = std::min(min_slack, con.r - con.q.dot(sub.x0));
    sub.x0(lay.delta_index) = min_slack - 0.5 * std::max(1.0, std::abs(min_slack));
    return sub;
}

PowerCoeffs build_power_coeffs(const ScenarioConfig& scenario, const ChannelRealization& ch,
                               const VecC& v_bar,
                               const std::vector<std::vector<VecC>>& w_bar) {
    const double s2 = scenario.noise_power_w();
    const EffectiveNoise noise = effective_noise(ch, s2);
    const int n_cells = scenario.cells;
    auto p2 = [&](const VecC& a, const VecC& b) { return std::norm(a.dot(b)) / s2; };

    PowerCoeffs pc;
    pc.direct.resize(n_cells);
    pc.cross.resize(n_cells);
    pc.from_v.resize(n_cells);
    pc.sat_w.resize(n_cells);
    pc.aerial_w.resize(n_cells);
    pc.noise.resize(n_cells);
    for (int n = 0; n < n_cells; ++n) {
        const int kn = scenario.terminals_per_cell[n];
        pc.direct[n].resize(kn);
        pc.cross[n].resize(kn);
        pc.from_v[n].resize(kn);
        pc.sat_w[n].resize(kn);
        pc.aerial_w[n].resize(kn);
        pc.noise[n].resize(kn);
        for (int k = 0; k < kn; ++k) {
            pc.direct[n][k] = p2(ch.h[n][n][k], w_bar[n][k]);
            pc.from_v[n][k] = p2(ch.g[n][k], v_bar);
            pc.sat_w[n][k] = p2(ch.h_s[n], w_bar[n][k]);
            pc.aerial_w[n][k] = p2(ch.h_a[n], w_bar[n][k]);
            pc.noise[n][k] = noise.terminal[n][k] / s2;
            pc.cross[n][k].resize(n_cells);
            for (int m = 0; m < n_cells; ++m) {
                const int km = scenario.terminals_per_cell[m];
                pc.cross[n][k][m].resize(km);
                for (int l = 0; l < km; ++l)
                    pc.cross[n][k][m][l] = p2(ch.h[m][n][k], w_bar[m][l]);
            }
        }
    }
    pc.sat_v = p2(ch.g_s, v_bar);
    pc.aerial_v = p2(ch.g_a, v_bar);
    pc.noise_aerial = noise.aerial / s2;
    pc.interference_limit = scenario.interference_temperature_w / s2;
    return pc;
}

ConvexSubproblem build_power_subproblem(const ScenarioConfig& scenario,
                                        const PowerCoeffs& pc, const ExpTangent& tan,
                                        bool with_delta,
                                        const std::vector<std::vector<double>>* start,
                                        double q_start) {
    const bool tcssa = scenario.mode == Mode::TCSSA;
    const bool aerial_obj = scenario.tcssa_aerial_active();
    const double w_a = scenario.aerial_objective_weight;
    const int n_cells = scenario.cells;

    ConvexSubproblem sub;
    sub.kind = SubproblemKind::PowerAllocIs;
    VarLayout& lay = sub.layout;
    lay.sigma2 = scenario.noise_power_w();

    int next = 0;
    lay.q_index = next++;
    lay.p_index.resize(n_cells);
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            lay.p_index[n].push_back(next++);
    lay.u_index.resize(n_cells);
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            lay.u_index[n].push_back(next++);
    if (aerial_obj) lay.u_aerial_index = next++;
    if (with_delta) lay.delta_index = next++;
    sub.nvars = next;

    auto zero_vec = [&]() { return Eigen::VectorXd::Zero(sub.nvars).eval(); };

    auto alpha_row = [&](int n, int k) {
        Eigen::VectorXd a = zero_vec();
        a(lay.q_index) += pc.from_v[n][k];
        for (int m = 0; m < n_cells; ++m)
            for (int l = 0; l < scenario.terminals_per_cell[m]; ++l) {
                if (m == n && l == k) continue;
                a(lay.p_index[m][l]) += pc.cross[n][k][m][l];
            }
        return a;
    };

    if (!with_delta) {
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
                LogTerm log;
                log.a = alpha_row(n, k);
                log.a(lay.p_index[n][k]) += pc.direct[n][k];
                log.c = pc.noise[n][k];
                sub.logs.push_back(std::move(log));
            }
        if (aerial_obj) {
            LogTerm log;
            log.a = zero_vec();
            log.a(lay.q_index) += pc.aerial_v;
            for (int m = 0; m < n_cells; ++m)
                for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                    log.a(lay.p_index[m][l]) += pc.aerial_w[m][l];
            log.c = pc.noise_aerial;
            log.weight = w_a;
            sub.logs.push_back(std::move(log));
        }
    }

    sub.lin = zero_vec();
    if (with_delta) {
        sub.lin(lay.delta_index) = 1.0;
    } else {
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                sub.lin(lay.u_index[n][k]) = -1.0;
        if (aerial_obj) sub.lin(lay.u_aerial_index) = -w_a;
    }

    auto push_con = [&](Eigen::VectorXd q, double r) {
        if (with_delta) q(lay.delta_index) += 1.0;
        sub.cons.push_back({std::move(q), r});
    };

    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = pc.sat_v;
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                q(lay.p_index[n][k]) = pc.sat_w[n][k];
        push_con(std::move(q), pc.interference_limit);
    }
    for (int n = 0; n < n_cells; ++n) {
        Eigen::VectorXd q = zero_vec();
        for (int idx : lay.p_index[n]) q(idx) = 1.0;
        push_con(std::move(q), scenario.cell_power_w[n]);
    }
    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = 1.0;
        push_con(std::move(q), scenario.aerial_power_w);
    }
    if (!tcssa && scenario.beta_bar() > 0.0) {
        const double beta = scenario.beta_bar();
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) -= pc.aerial_v;
        for (int m = 0; m < n_cells; ++m)
            for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                q(lay.p_index[m][l]) += beta * pc.aerial_w[m][l];
        push_con(std::move(q), -beta * pc.noise_aerial);
    }
    {
        std::size_t flat = 0;
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k, ++flat) {
                TangentRow row;
                row.a = alpha_row(n, k);
                row.c = pc.noise[n][k];
                row.u_var = lay.u_index[n][k];
                row.u0 = tan.u0[flat];
                Eigen::VectorXd q = row.a;
                const double e0 = std::exp(row.u0);
                q(row.u_var) -= e0;
                push_con(std::move(q), e0 * (1.0 - row.u0) - row.c);
                sub.tangent_rows.push_back(std::move(row));
            }
        if (aerial_obj) {
            TangentRow row;
            row.a = zero_vec();
            for (int m = 0; m < n_cells; ++m)
                for (int l = 0; l < scenario.terminals_per_cell[m]; ++l)
                    row.a(lay.p_index[m][l]) += pc.aerial_w[m][l];
            row.c = pc.noise_aerial;
            row.u_var = lay.u_aerial_index;
            row.u0 = tan.u0_aerial.value();
            Eigen::VectorXd q = row.a;
            const double e0 = std::exp(row.u0);
            q(row.u_var) -= e0;
            push_con(std::move(q), e0 * (1.0 - row.u0) - row.c);
            sub.tangent_rows.push_back(std::move(row));
        }
    }
    // Nonnegativity as explicit rows (1x1 "PSD blocks" in spirit).
    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = -1.0;
        push_con(std::move(q), 0.0);
        for (int n = 0; n < n_cells; ++n)
            for (int idx : lay.p_index[n]) {
                Eigen::VectorXd qq = zero_vec();
                qq(idx) = -1.0;
                push_con(std::move(qq), 0.0);
            }
    }

    sub.x0 = Eigen::VectorXd::Zero(sub.nvars);
    sub.x0(lay.q_index) = q_start > 0.0 ? q_start : 1e-3 * scenario.aerial_power_w;
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            sub.x0(lay.p_index[n][k]) =
                start ? (*start)[n][k]
                      : 1e-3 * scenario.cell_power_w[n] / scenario.terminals_per_cell[n];
    {
        std::size_t flat = 0;
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                sub.x0(lay.u_index[n][k]) = tan.u0[flat++];
        if (aerial_obj) sub.x0(lay.u_aerial_index) = *tan.u0_aerial;
    }
    if (with_delta) {
        double min_slack = std::numeric_limits<double>::infinity();
        for (const auto& con : sub.cons) {
            Eigen::VectorXd q = con.q;
            q(lay.delta_index) = 0.0;
            min_slack = std::min(min_slack, con.r - q.dot(sub.x0));
        }
        sub.x0(lay.delta_index) = min_slack - 0.5 * std::max(1.0, std::abs(min_slack));
    } else {
        nudge_tangent_start(sub);
    }
    return sub;
}

ConvexSubproblem build_zf_power_subproblem(const ScenarioConfig& scenario,
                                           const PowerCoeffs& pc) {
    const bool tcssa = scenario.mode == Mode::TCSSA;
    const bool aerial_obj = scenario.tcssa_aerial_active();
    const int n_cells = scenario.cells;

    ConvexSubproblem sub;
    sub.kind = SubproblemKind::PowerAllocZf;
    VarLayout& lay = sub.layout;
    lay.sigma2 = scenario.noise_power_w();

    int next = 0;
    lay.q_index = next++;
    lay.p_index.resize(n_cells);
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            lay.p_index[n].push_back(next++);
    sub.nvars = next;

    auto zero_vec = [&]() { return Eigen::VectorXd::Zero(sub.nvars).eval(); };

    sub.lin = zero_vec();
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
            LogTerm log;
            log.a = zero_vec();
            log.a(lay.p_index[n][k]) = pc.direct[n][k];
            log.c = pc.noise[n][k];
            sub.logs.push_back(std::move(log));
            sub.constant -= std::log(pc.noise[n][k]);
        }
    if (aerial_obj) {
        LogTerm log;
        log.a = zero_vec();
        log.a(lay.q_index) = pc.aerial_v;
        log.c = pc.noise_aerial;
        log.weight = scenario.aerial_objective_weight;
        sub.logs.push_back(std::move(log));
        sub.constant -= scenario.aerial_objective_weight * std::log(pc.noise_aerial);
    }

    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = pc.sat_v;
        for (int n = 0; n < n_cells; ++n)
            for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
                q(lay.p_index[n][k]) = pc.sat_w[n][k];
        sub.cons.push_back({std::move(q), pc.interference_limit});
    }
    for (int n = 0; n < n_cells; ++n) {
        Eigen::VectorXd q = zero_vec();
        for (int idx : lay.p_index[n]) q(idx) = 1.0;
        sub.cons.push_back({std::move(q), scenario.cell_power_w[n]});
    }
    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = 1.0;
        sub.cons.push_back({std::move(q), scenario.aerial_power_w});
    }
    if (!tcssa && scenario.beta_bar() > 0.0) {
        // Tr(G_A V_bar) q >= beta_bar sigma_bar^2_A; interference-free floor.
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = -pc.aerial_v;
        sub.cons.push_back({std::move(q), -scenario.beta_bar() * pc.noise_aerial});
    }
    {
        Eigen::VectorXd q = zero_vec();
        q(lay.q_index) = -1.0;
        sub.cons.push_back({std::move(q), 0.0});
        for (int n = 0; n < n_cells; ++n)
            for (int idx : lay.p_index[n]) {
                Eigen::VectorXd qq = zero_vec();
                qq(idx) = -1.0;
                sub.cons.push_back({std::move(qq), 0.0});
            }
    }

    // Feasible start; the rate floor fixes the minimum q in HCSSA mode.
    sub.x0 = Eigen::VectorXd::Zero(sub.nvars);
    double q0 = 1e-3 * scenario.aerial_power_w;
    if (!tcssa && scenario.beta_bar() > 0.0) {
        if (!(pc.aerial_v > 0.0)) {
            sub.nvars = -1;  // marks structural infeasibility for the caller
            return sub;
        }
        const double q_min = scenario.beta_bar() * pc.noise_aerial / pc.aerial_v;
        q0 = q_min * (1.0 + 1e-6) + 1e-12;
        if (q0 > scenario.aerial_power_w || pc.sat_v * q0 > pc.interference_limit) {
            sub.nvars = -1;
            return sub;
        }
    }
    sub.x0(lay.q_index) = q0;
    const double leak_slack = pc.interference_limit - pc.sat_v * q0;
    double leak_sum = 0.0;
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k)
            leak_sum += pc.sat_w[n][k];
    for (int n = 0; n < n_cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
            double p0 = 1e-3 * scenario.cell_power_w[n] / scenario.terminals_per_cell[n];
            if (leak_sum > 0.0) p0 = std::min(p0, 0.5 * leak_slack / leak_sum);
            sub.x0(lay.p_index[n][k]) = std::max(p0, 1e-15);
        }
    return sub;
}

std::vector<double> update_aux(const ScenarioConfig& scenario, const GramData& d,
                               LiftedIterate& it) {
    std::vector<double> flat;
    for (int n = 0; n < scenario.cells; ++n)
        for (int k = 0; k < scenario.terminals_per_cell[n]; ++k) {
            const double alpha = lifted_alpha(d, it, n, k);
            if (!(alpha > 0.0))
                throw std::invalid_argument("update_aux: alpha must be positive");
            it.u[n][k] = std::log(alpha);
            flat.push_back(it.u[n][k]);
        }
    if (scenario.tcssa_aerial_active()) {
        const double alpha = lifted_alpha_aerial(d, it);
        if (!(alpha > 0.0)) throw std::invalid_argument("update_aux: alpha must be positive");
        it.u_aerial = std::log(alpha);
        flat.push_back(*it.u_aerial);
    }
    return flat;
}

BeamformerSet recover_rank_one(const LiftedIterate& it, double eps2) {
    const double f = penalty_F(it);
    if (!(f < eps2))
        throw std::invalid_argument("recover_rank_one: penalty F exceeds threshold");
    BeamformerSet bf;
    auto principal = [](const MatC& x) -> VecC {
        auto [eta, theta] = top_eig(x);
        if (eta <= 0.0) return VecC::Zero(x.rows());
        return std::sqrt(eta) * theta;
    };
    bf.v = principal(it.V);
    bf.w.resize(it.W.size());
    for (std::size_t n = 0; n < it.W.size(); ++n)
        for (const auto& w : it.W[n]) bf.w[n].push_back(principal(w));
    return bf;
}

void dump_subproblem(const ConvexSubproblem& sub, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_subproblem: cannot open " + path);
    out.precision(17);
    const char* kind = "pibf_inner";
    if (sub.kind == SubproblemKind::PibfInit) kind = "pibf_init";
    if (sub.kind == SubproblemKind::PowerAllocIs) kind = "power_is";
    if (sub.kind == SubproblemKind::PowerAllocZf) kind = "power_zf";
    out << "hcss-conic v1 kind " << kind << " nvars " << sub.nvars << "\n";
    out << "objective constant " << sub.constant << "\n";
    for (int i = 0; i < sub.lin.size(); ++i)
        if (sub.lin(i) != 0.0) out << "lin " << i << " " << sub.lin(i) << "\n";
    for (const auto& log : sub.logs) {
        out << "log weight " << log.weight << " constant " << log.c;
        for (int i = 0; i < log.a.size(); ++i)
            if (log.a(i) != 0.0) out << " " << i << ":" << log.a(i);
        out << "\n";
    }
    for (const auto& con : sub.cons) {
        out << "row rhs " << con.r;
        for (int i = 0; i < con.q.size(); ++i)
            if (con.q(i) != 0.0) out << " " << i << ":" << con.q(i);
        out << "\n";
    }
    for (const auto& block : sub.blocks) {
        out << "psd dim " << block.dim << " entries " << block.entries.size() << "\n";
        if (block.constant.size() > 0)
            for (int r = 0; r < block.dim; ++r)
                for (int c = 0; c < block.dim; ++c)
                    if (block.constant(r, c) != 0.0)
                        out << "  const " << r << " " << c << " "
                            << block.constant(r, c).real() << " "
                            << block.constant(r, c).imag() << "\n";
        for (const auto& e : block.entries)
            out << "  basis " << e.var << " " << e.row << " " << e.col << " "
                << e.val.real() << " " << e.val.imag() << "\n";
    }
    out << "x0";
    for (int i = 0; i < sub.x0.size(); ++i) out << " " << sub.x0(i);
    out << "\n";
}

}  // namespace hcss
