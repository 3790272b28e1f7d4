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

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rcmdp {

/// Tolerance used when accepting externally supplied distributions. Rows
/// whose sums deviate from 1 by at most this amount are renormalized on
/// construction; larger deviations are rejected.
inline constexpr double kRowSumTol = 1e-12;

/// Sign tolerance for estimated violations. Thresholds anchored at an
/// evaluated policy can be exactly tight (a constant constraint cost makes
/// J_n identically b_n), in which case the computed gap is pure linear-solve
/// rounding (~1e-14). Comparisons that branch on the sign of a violation
/// treat anything at or below this as non-positive.
inline constexpr double kViolationSignTol = 1e-9;

/// Transition kernel P(s'|s,a) stored as an (S*A) x S row-stochastic matrix,
/// row index s * A + a.
struct TransitionKernel {
    int num_states = 0;
    int num_actions = 0;
    Eigen::MatrixXd probs;  // (S*A) x S

    double operator()(int s, int a, int s2) const { return probs(s * num_actions + a, s2); }
    Eigen::MatrixXd::ConstRowXpr row(int s, int a) const { return probs.row(s * num_actions + a); }
};

/// Per-step cost c(s,a) in [0, 1], stored S x A.
struct CostFunction {
    Eigen::MatrixXd values;  // S x A
};

/// Markovian stationary policy pi(s,a), stored S x A with row-stochastic rows
/// (the direct parameterization class).
struct Policy {
    Eigen::MatrixXd probs;  // S x A

    int num_states() const { return static_cast<int>(probs.rows()); }
    int num_actions() const { return static_cast<int>(probs.cols()); }
};

struct FiniteSet {
    std::vector<TransitionKernel> kernels;
};

/// (s,a)-rectangular KL set parameterized by the regularization strength
/// (the penalty coefficient of the regularized robust DP update), not the
/// radius. The nominal kernel must be strictly positive everywhere.
struct KLRectangular {
    TransitionKernel nominal;
    double reg = 0.0;
};

using UncertaintySet = std::variant<FiniteSet, KLRectangular>;

struct RCMDPInstance {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;
    Eigen::VectorXd mu;                // length S
    std::vector<CostFunction> costs;   // N+1 entries, index 0 = objective
    Eigen::VectorXd thresholds;        // length N
    UncertaintySet uncertainty;

    int num_constraints() const { return static_cast<int>(costs.size()) - 1; }
    double horizon() const { return 1.0 / (1.0 - gamma); }
    bool is_singleton() const {
        const auto* f = std::get_if<FiniteSet>(&uncertainty);
        return f != nullptr && f->kernels.size() == 1;
    }
};

/// Checks every type invariant and returns one human-readable line per
/// violation (empty means valid). Report-style: never throws.
std::vector<std::string> validate_instance(const RCMDPInstance& inst);

/// Renormalizes all distribution rows (kernel rows, mu) in place. Assumes the
/// instance already passed validate_instance; rows within kRowSumTol of 1 are
/// divided by their sums so downstream linear solves see exact distributions.
void normalize_instance(RCMDPInstance& inst);

/// Validating constructors. Each renormalizes rows within kRowSumTol and
/// throws std::invalid_argument otherwise.
TransitionKernel make_kernel(int num_states, int num_actions, Eigen::MatrixXd probs);
Policy make_policy(Eigen::MatrixXd probs);
CostFunction make_cost(Eigen::MatrixXd values);

Policy uniform_policy(int num_states, int num_actions);
Policy deterministic_policy(const std::vector<int>& action_per_state, int num_actions);

}  // namespace rcmdp
