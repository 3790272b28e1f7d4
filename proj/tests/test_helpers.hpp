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

#include "rcmdp/rng.hpp"
#include "rcmdp/types.hpp"

namespace rcmdp::testing {

/// Random policy with rows bounded away from the simplex boundary (every
/// entry at least 0.1 / A), suitable for finite-difference probes.
inline Policy random_interior_policy(Rng& rng, int num_states, int num_actions) {
    Eigen::MatrixXd probs(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        probs.row(s) = (0.9 * rng.dirichlet(1.0, num_actions).array() + 0.1 / num_actions)
                           .matrix()
                           .transpose();
    }
    return make_policy(probs);
}

inline Policy random_policy(Rng& rng, int num_states, int num_actions) {
    Eigen::MatrixXd probs(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        probs.row(s) = rng.dirichlet(1.0, num_actions).transpose();
    }
    return make_policy(probs);
}

}  // namespace rcmdp::testing
