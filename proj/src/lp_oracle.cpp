// Copyright 2026 The rcmdp Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rcmdp/lp_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rcmdp {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPhase1Tol = 1e-9;

// Tableau simplex over rows [A | b] with explicit basis bookkeeping.
class Tableau {
public:
    Tableau(Eigen::MatrixXd a, Eigen::VectorXd b, std::vector<int> basis)
        : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)) {}

    // Minimizes cost^T x with Bland's rule (smallest eligible index enters;
    // smallest basic index leaves on ratio ties). Returns false on an
    // unbounded ray.
    bool minimize(const Eigen::VectorXd& cost) {
        const int rows = static_cast<int>(a_.rows());
        const int cols = static_cast<int>(a_.cols());
        Eigen::VectorXd reduced = cost;
        for (int i = 0; i < rows; ++i) {
            const double cb = cost(basis_[i]);
            if (cb != 0.0) reduced -= cb * a_.row(i).transpose();
        }

        for (;;) {
            int entering = -1;
            for (int j = 0; j < cols; ++j) {
                if (reduced(j) < -kPivotTol) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return true;

            int leaving = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < rows; ++i) {
                if (a_(i, entering) > kPivotTol) {
                    const double ratio = b_(i) / a_(i, entering);
                    if (leaving < 0 || ratio < best_ratio - kPivotTol ||
                        (std::abs(ratio - best_ratio) <= kPivotTol &&
                         basis_[i] < basis_[leaving])) {
                        leaving = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leaving < 0) return false;  // unbounded

            pivot(leaving, entering);
            const double r = reduced(entering);
            reduced -= r * a_.row(leaving).transpose();
            reduced(entering) = 0.0;
        }
    }

    void pivot(int row, int col) {
        const double p = a_(row, col);
        a_.row(row) /= p;
        b_(row) /= p;
        basis_[row] = col;
        for (int i = 0; i < static_cast<int>(a_.rows()); ++i) {
            if (i == row) continue;
            const double factor = a_(i, col);
            if (factor != 0.0) {
                a_.row(i) -= factor * a_.row(row);
                b_(i) -= factor * b_(row);
            }
        }
    }

    Eigen::VectorXd solution(int num_vars) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(num_vars);
        for (int i = 0; i < static_cast<int>(a_.rows()); ++i) {
            if (basis_[i] < num_vars) x(basis_[i]) = b_(i);
        }
        return x;
    }

    const std::vector<int>& basis() const { return basis_; }
    Eigen::MatrixXd& a() { return a_; }
    Eigen::VectorXd& b() { return b_; }
    std::vector<int>& basis_mut() { return basis_; }

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    std::vector<int> basis_;
};

}  // namespace

LPResult solve_lp_two_phase(const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq,
                            const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub,
                            const Eigen::VectorXd& cost) {
    const int num_vars = static_cast<int>(cost.size());
    const int num_eq = static_cast<int>(a_eq.rows());
    const int num_ub = static_cast<int>(a_ub.rows());
    const int rows = num_eq + num_ub;
    if ((num_eq > 0 && a_eq.cols() != num_vars) || (num_ub > 0 && a_ub.cols() != num_vars)) {
        throw std::invalid_argument("solve_lp_two_phase: constraint shape mismatch");
    }

    // Layout: [original | slacks (one per ub row) | artificials].
    const int num_slacks = num_ub;
    std::vector<int> artificial_rows;

    Eigen::MatrixXd work(rows, num_vars + num_slacks);
    work.setZero();
    Eigen::VectorXd rhs(rows);
    std::vector<int> basis(rows, -1);

    for (int i = 0; i < num_eq; ++i) {
        work.row(i).head(num_vars) = a_eq.row(i);
        rhs(i) = b_eq(i);
        if (rhs(i) < 0.0) {
            work.row(i) = -work.row(i);
            rhs(i) = -rhs(i);
        }
        artificial_rows.push_back(i);
    }
    for (int i = 0; i < num_ub; ++i) {
        const int r = num_eq + i;
        work.row(r).head(num_vars) = a_ub.row(i);
        rhs(r) = b_ub(i);
        const int slack = num_vars + i;
        if (rhs(r) >= 0.0) {
            work(r, slack) = 1.0;
            basis[r] = slack;
        } else {
            work.row(r) = -work.row(r);
            rhs(r) = -rhs(r);
            work(r, slack) = -1.0;  // surplus after negation
            artificial_rows.push_back(r);
        }
    }

    const int num_art = static_cast<int>(artificial_rows.size());
    Eigen::MatrixXd full(rows, num_vars + num_slacks + num_art);
    full.setZero();
    full.leftCols(num_vars + num_slacks) = work;
    for (int k = 0; k < num_art; ++k) {
        full(artificial_rows[k], num_vars + num_slacks + k) = 1.0;
        basis[artificial_rows[k]] = num_vars + num_slacks + k;
    }

    Tableau tableau(std::move(full), rhs, basis);

    // Phase 1: minimize the artificial mass.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(num_vars + num_slacks + num_art);
    phase1.tail(num_art).setOnes();
    if (!tableau.minimize(phase1)) {
        throw std::runtime_error("solve_lp_two_phase: phase 1 unbounded (should not happen)");
    }
    double infeasibility = 0.0;
    for (int i = 0; i < rows; ++i) {
        if (tableau.basis()[i] >= num_vars + num_slacks) infeasibility += tableau.b()(i);
    }
    if (infeasibility > kPhase1Tol) {
        return LPResult{LPStatus::Infeasible, Eigen::VectorXd(), 0.0};
    }

    // Drive any zero-level artificials out of the basis; drop redundant rows.
    std::vector<int> keep;
    for (int i = 0; i < rows; ++i) {
        if (tableau.basis()[i] < num_vars + num_slacks) {
            keep.push_back(i);
            continue;
        }
        int col = -1;
        for (int j = 0; j < num_vars + num_slacks; ++j) {
            if (std::abs(tableau.a()(i, j)) > kPivotTol) {
                col = j;
                break;
            }
        }
        if (col >= 0) {
            tableau.pivot(i, col);
            keep.push_back(i);
        }
        // Otherwise the row is redundant; it is dropped below.
    }
    Eigen::MatrixXd pruned(static_cast<int>(keep.size()), num_vars + num_slacks);
    Eigen::VectorXd pruned_rhs(static_cast<int>(keep.size()));
    std::vector<int> pruned_basis;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        pruned.row(static_cast<int>(i)) = tableau.a().row(keep[i]).head(num_vars + num_slacks);
        pruned_rhs(static_cast<int>(i)) = tableau.b()(keep[i]);
        pruned_basis.push_back(tableau.basis()[keep[i]]);
    }

    Tableau phase2(std::move(pruned), std::move(pruned_rhs), std::move(pruned_basis));
    Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(num_vars + num_slacks);
    cost2.head(num_vars) = cost;
    if (!phase2.minimize(cost2)) {
        throw std::runtime_error("solve_lp_two_phase: unbounded objective");
    }

    LPResult out;
    out.status = LPStatus::Optimal;
    out.x = phase2.solution(num_vars);
    out.objective = cost.dot(out.x);
    return out;
}

CMDPSolution solve_cmdp_lp(const RCMDPInstance& inst) {
    if (!inst.is_singleton()) {
        throw std::invalid_argument("solve_cmdp_lp requires a singleton uncertainty set");
    }
    const TransitionKernel& kernel = std::get<FiniteSet>(inst.uncertainty).kernels.front();
    const int S = inst.num_states;
    const int A = inst.num_actions;
    const int SA = S * A;
    const int N = inst.num_constraints();
    const double gamma = inst.gamma;

    // Flow balance over unnormalized occupancies:
    //   sum_a q(s,a) - gamma sum_{s',a'} P(s|s',a') q(s',a') = mu(s).
    Eigen::MatrixXd a_eq = Eigen::MatrixXd::Zero(S, SA);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) a_eq(s, s * A + a) += 1.0;
        for (int s2 = 0; s2 < S; ++s2) {
            for (int a2 = 0; a2 < A; ++a2) {
                a_eq(s, s2 * A + a2) -= gamma * kernel.probs(s2 * A + a2, s);
            }
        }
    }

    Eigen::MatrixXd a_ub(N, SA);
    Eigen::VectorXd b_ub(N);
    for (int n = 0; n < N; ++n) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) a_ub(n, s * A + a) = inst.costs[n + 1].values(s, a);
        }
        b_ub(n) = inst.thresholds(n);
    }

    Eigen::VectorXd cost(SA);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) cost(s * A + a) = inst.costs[0].values(s, a);
    }

    const LPResult lp = solve_lp_two_phase(a_eq, inst.mu, a_ub, b_ub, cost);
    CMDPSolution out;
    if (lp.status == LPStatus::Infeasible) return out;

    out.feasible = true;
    out.optimal_value = lp.objective;
    out.occupancy_sa.resize(S, A);
    Eigen::MatrixXd probs(S, A);
    for (int s = 0; s < S; ++s) {
        double mass = 0.0;
        for (int a = 0; a < A; ++a) {
            out.occupancy_sa(s, a) = lp.x(s * A + a);
            mass += lp.x(s * A + a);
        }
        if (mass <= 1e-12) {
            probs.row(s).setConstant(1.0 / A);
        } else {
            for (int a = 0; a < A; ++a) probs(s, a) = out.occupancy_sa(s, a) / mass;
        }
    }
    out.policy = Policy{std::move(probs)};
    return out;
}

}  // namespace rcmdp
