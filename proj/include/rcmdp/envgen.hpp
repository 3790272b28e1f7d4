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

#include <cstdint>
#include <string>

#include "rcmdp/types.hpp"

namespace rcmdp {

enum class Setting { Finite, KL, CMDP };

std::string setting_name(Setting s);
Setting setting_from_name(const std::string& name);

/// Generator parameters. Defaults per setting follow the benchmark
/// configuration: finite (S=7, A=4, gamma=0.995, 5 kernels), kl (S=5, A=3,
/// gamma=0.99, reg=2), cmdp (S=7, A=4, gamma=0.99); N=5 everywhere.
struct GenSpec {
    Setting setting = Setting::Finite;
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;
    int num_kernels = 0;    // finite setting only
    double kl_reg = 0.0;    // kl setting only
    int num_constraints = -1;
    std::uint64_t seed = 0;

    static GenSpec defaults(Setting setting, std::uint64_t seed);
};

/// Draws a random instance: transition rows ~ Dirichlet(0.1 1_S), cost
/// entries 0 with probability 0.1 and 1 otherwise, mu ~ Dirichlet(0.5 1_S),
/// thresholds from feasible_thresholds. Sampling order is fixed (kernels,
/// then costs c_0..c_N row-major, then mu), so a given seed reproduces the
/// instance bit for bit.
RCMDPInstance random_instance(const GenSpec& spec);

/// Thresholds anchored at the uniform policy: b_n = Jhat_n(pi_unif) clipped
/// to [0, H]. Guarantees the safe policy set is non-empty (the uniform policy
/// is feasible) and makes returns-relative-to-uniform meaningful.
Eigen::VectorXd feasible_thresholds(const RCMDPInstance& inst);

/// The two-kernel, four-state, two-action instance on which the summed
/// Lagrangian gradient cancels at the suboptimal all-a2 policy. The per-edge
/// costs and transitions are pinned by eight closed-form returns (see the
/// tests) that over-determine the construction. delta must keep all costs in
/// [0, 1] (0 <= delta <= gamma); b1 is the single constraint threshold.
RCMDPInstance counterexample_instance(double gamma, double delta, double b1 = 0.0);

}  // namespace rcmdp
