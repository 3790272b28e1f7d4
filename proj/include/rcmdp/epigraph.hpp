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

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {

/// Euclidean projection of one row onto the probability simplex
/// (sort-and-threshold). Rejects non-finite input.
Eigen::VectorXd project_simplex_row(const Eigen::VectorXd& raw);

/// Row-wise Euclidean projection onto the policy set.
Policy project_policy(const Eigen::MatrixXd& raw);

/// Value and argmax of max_n Jhat_n(pi) - b_n, with b0 substituted for the
/// objective threshold. Ties break to the lowest index. Keeps all per-index
/// evaluations so callers can reuse the maximizer's gradient.
struct DeltaHat {
    double value = 0.0;
    int argmax_n = 0;
    std::vector<EvalResult> evals;   // length N+1
    std::vector<double> returns;     // robust returns Jhat_n, length N+1
};

DeltaHat delta_hat(const RCMDPInstance& inst, const Policy& pi, double b0);

struct SubroutineConfig {
    int iterations = 1;            // T
    double learning_rate = 0.0;    // alpha
    std::optional<Policy> initial_policy;  // defaults to uniform
};

struct InnerRecord {
    int t = 0;
    int selected_n = 0;
    double delta_hat = 0.0;
};

struct SubroutineResult {
    Policy policy;       // best iterate
    double best_delta = 0.0;
    int best_t = 0;
    std::vector<double> robust_returns;  // Jhat_n at the best iterate
    std::vector<InnerRecord> trace;
};

/// Projected policy-gradient subroutine minimizing Delta_{b0}: T projected
/// steps along the maximizer's gradient; returns the iterate with the
/// smallest estimated Delta among pi^(0), ..., pi^(T) (earliest on ties).
SubroutineResult pgs_subroutine(const RCMDPInstance& inst, double b0,
                                const SubroutineConfig& cfg);

struct BisectionConfig {
    int outer_iterations = 1;  // K
    SubroutineConfig subroutine;
    bool warm_start = true;
};

struct OuterRecord {
    int k = 0;
    double lo = 0.0;
    double hi = 0.0;
    double b0 = 0.0;
    double delta_hat = 0.0;
    std::vector<double> robust_returns;
    std::vector<InnerRecord> inner;  // the subroutine trace for this round
    double wall_ms = 0.0;
    Policy policy;
};

struct SolveResult {
    Policy policy;  // subroutine output at j^(K)
    double final_b0 = 0.0;
    double final_delta = 0.0;
    std::vector<OuterRecord> trace;
};

/// Bisection search over b0 in [0, H] with the PG subroutine: raise the lower
/// end while the estimated Delta stays positive, lower the upper end
/// otherwise, then rerun the subroutine at the final upper end.
SolveResult bisection_solve(const RCMDPInstance& inst, const BisectionConfig& cfg);

/// Interval geometry of the bisection update against an arbitrary
/// Delta-oracle; returns the K+1 nested intervals starting from [0, horizon].
/// Shares the update rule with bisection_solve.
std::vector<std::pair<double, double>> bisection_intervals(
    double horizon, int outer_iterations, const std::function<double(double)>& delta_of_b0);

/// Closed-form constants of the convergence analysis, evaluated for given
/// problem sizes. Advisory only: practical runs use the experiment defaults,
/// since these bounds carry H^14-scale factors.
struct TheoreticalParams {
    double lip = 0.0;      // H^2 sqrt(A)
    double smooth = 0.0;   // 2 gamma A H^3
    double c = 0.0;        // 1/(2 gamma H sqrt(A)) + 2 D H sqrt(S)
    double c_grad = 0.0;   // 1/(1024 C^2 smooth sqrt(S))
    double c_j = 0.0;      // 1/(1024 C^2 smooth)
    double c_alpha = 0.0;  // 1/(64 C^2 smooth (lip^2 + eps_grad))
    double c_t = 0.0;      // 4096 C^4 smooth^2 S (lip^2 + eps_grad^2)
    double eps_grad = 0.0;
    double eps_j = 0.0;
    double alpha = 0.0;  // c_alpha * eps^2
    double t = 0.0;      // c_t * eps^-4
    int k = 0;           // floor(log2(2 H / eps))
};

TheoreticalParams theoretical_params(int num_states, int num_actions, double gamma, double d_mismatch,
                                     double epsilon);

}  // namespace rcmdp
