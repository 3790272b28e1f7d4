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

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "rcmdp/types.hpp"

namespace rcmdp {

/// Instance schema:
///   {"num_states", "num_actions", "gamma", "mu": [..], "costs": [[[..]]],
///    "thresholds": [..],
///    "uncertainty": {"type": "finite", "kernels": [[[[..]]]]}
///                 | {"type": "kl", "nominal": [[[..]]], "reg": r}}
/// with kernel arrays indexed [s][a][s'] and costs [n][s][a]. An optional
/// "meta" object (generator name, seed) is preserved on write and ignored on
/// read.
nlohmann::json instance_to_json(const RCMDPInstance& inst);

/// Parses and validates; throws std::invalid_argument listing every violated
/// invariant. Rows within tolerance are renormalized. A KL set given a
/// "radius" field is rejected with a diagnostic: this solver takes the
/// regularization strength ("reg"), not the set radius.
RCMDPInstance instance_from_json(const nlohmann::json& j);

void save_instance(const std::string& path, const RCMDPInstance& inst,
                   const std::optional<nlohmann::json>& meta = std::nullopt);
RCMDPInstance load_instance(const std::string& path);

nlohmann::json policy_to_json(const Policy& pi);
Policy policy_from_json(const nlohmann::json& j);

}  // namespace rcmdp
