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

enum class LPStatus { Optimal, Infeasible };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// Dense two-phase primal simplex with Bland's anti-cycling rule for
///   min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
/// Sized for desk-scale problems (tens of variables); phase-1 feasibility
/// tolerance 1e-9.
LPResult solve_lp_two_phase(const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq,
                            const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub,
                            const Eigen::VectorXd& cost);

struct CMDPSolution {
    bool feasible = false;
    double optimal_value = 0.0;
    Eigen::MatrixXd occupancy_sa;  // S x A, unnormalized (sums to H)
    Policy policy;
};

/// Ground-truth CMDP optimum via the occupancy-measure LP (singleton
/// uncertainty set only): min <c0, q> over flow-balanced q >= 0 with
/// <c_n, q> <= b_n. The policy is extracted as q(s,a) / sum_a q(s,a), uniform
/// on zero-mass rows. feasible == false signals an empty safe policy set.
CMDPSolution solve_cmdp_lp(const RCMDPInstance& inst);

}  // namespace rcmdp
