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

#include "rcmdp/types.hpp"

namespace rcmdp {

/// Action-value function Q(s,a) (S x A) together with the induced state
/// values V(s) = sum_a pi(s,a) Q(s,a).
struct QEval {
    Eigen::MatrixXd q;  // S x A
    Eigen::VectorXd v;  // S
};

/// Exact Q via the dense solve (I - gamma P Pi^pi) Q = c with partial-pivot
/// LU. Q is defined over the full S x A domain for every policy; actions with
/// zero probability are never masked.
QEval q_function(const Policy& pi, const TransitionKernel& P, const CostFunction& c, double gamma);

/// Cost return J = sum_s mu(s) V(s).
double return_value(const Policy& pi, const TransitionKernel& P, const CostFunction& c,
                    double gamma, const Eigen::VectorXd& mu);

/// Normalized occupancy d(s) = (1-gamma) [mu^T (I - gamma Pi^pi P)^{-1}](s);
/// sums to 1.
Eigen::VectorXd occupancy(const Policy& pi, const TransitionKernel& P, double gamma,
                          const Eigen::VectorXd& mu);

/// Direct-parameterization gradient of the return: grad(s,a) = H d(s) Q(s,a)
/// with H = 1/(1-gamma).
Eigen::MatrixXd policy_gradient(const Policy& pi, const TransitionKernel& P,
                                const CostFunction& c, double gamma, const Eigen::VectorXd& mu);

/// Test oracle: central differences of return_value along simplex-preserving
/// directions e_(s,a) - e_(s,a') with a' = (a+1) mod A. Entry (s,a)
/// approximates grad(s,a) - grad(s,a'). Requires pi strictly interior (every
/// entry >= step).
Eigen::MatrixXd finite_diff_gradient(const Policy& pi, const TransitionKernel& P,
                                     const CostFunction& c, double gamma,
                                     const Eigen::VectorXd& mu, double step);

/// Sup-norm Bellman residual ||Q - (c + gamma P Pi^pi Q)||_inf of a candidate
/// Q for (pi, P, c).
double bellman_residual(const Eigen::MatrixXd& q, const Policy& pi, const TransitionKernel& P,
                        const CostFunction& c, double gamma);

}  // namespace rcmdp
