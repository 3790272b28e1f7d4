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

#include <optional>
#include <vector>

#include "rcmdp/types.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {

/// L_lambda(pi) = Jhat_0(pi) + sum_n lambda_n (Jhat_n(pi) - b_n), robust
/// returns from the per-index evaluators.
double lagrangian_value(const RCMDPInstance& inst, const Policy& pi,
                        const Eigen::VectorXd& lambda);

/// One subgradient of L_lambda: the sum of per-term worst-kernel gradients
/// (each term may have a different maximizer kernel).
Eigen::MatrixXd lagrangian_subgradient(const RCMDPInstance& inst, const Policy& pi,
                                       const Eigen::VectorXd& lambda);

struct LagrangeConfig {
    int outer = 1;   // K
    int inner = 1;   // T
    double alpha_lambda = 0.01;
    double alpha_pi = 0.0;
    std::optional<Eigen::VectorXd> initial_lambda;  // defaults to zero
    std::optional<Policy> initial_policy;           // defaults to uniform
};

struct LagrangeOuterRecord {
    int k = 0;
    Eigen::VectorXd lambda;               // multipliers used for this round
    double lagrangian = 0.0;              // L at the selected inner iterate
    double violation = 0.0;               // max_n Jhat_n - b_n (constraints only)
    double objective_return = 0.0;        // Jhat_0
    std::vector<double> robust_returns;   // all Jhat_n at the selected iterate
    double wall_ms = 0.0;
    Policy policy;
};

struct LagrangeResult {
    Policy policy;
    std::vector<Eigen::VectorXd> lambda_trajectory;  // lambda^(0..K)
    std::vector<LagrangeOuterRecord> trace;
};

/// Lagrangian-formulation baseline: K rounds of (T projected-gradient steps
/// on L_lambda, best inner iterate by Lagrangian value, then a clamped ascent
/// step on lambda).
LagrangeResult lf_solve(const RCMDPInstance& inst, const LagrangeConfig& cfg);

/// Arithmetic mean of policies (the pi-averaging baseline).
Policy average_policies(const std::vector<Policy>& policies);

/// Occupancy-averaging baseline: averages state-action occupancies under the
/// single kernel and extracts the policy from the mean. Requires |U| = 1;
/// rows with negligible mass fall back to uniform.
Policy average_occupancy_policy(const RCMDPInstance& inst, const std::vector<Policy>& policies);

}  // namespace rcmdp
