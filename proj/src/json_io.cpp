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

#include "rcmdp/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rcmdp {
namespace {

using nlohmann::json;

json kernel_to_json(const TransitionKernel& k) {
    json out = json::array();
    for (int s = 0; s < k.num_states; ++s) {
        json per_state = json::array();
        for (int a = 0; a < k.num_actions; ++a) {
            json row = json::array();
            for (int s2 = 0; s2 < k.num_states; ++s2) row.push_back(k.probs(s * k.num_actions + a, s2));
            per_state.push_back(std::move(row));
        }
        out.push_back(std::move(per_state));
    }
    return out;
}

TransitionKernel kernel_from_json(const json& j, int S, int A, const std::string& name) {
    if (!j.is_array() || static_cast<int>(j.size()) != S) {
        throw std::invalid_argument(name + " must be an [s][a][s'] array with " +
                                    std::to_string(S) + " states");
    }
    Eigen::MatrixXd probs(S * A, S);
    for (int s = 0; s < S; ++s) {
        const json& per_state = j.at(s);
        if (static_cast<int>(per_state.size()) != A) {
            throw std::invalid_argument(name + "[" + std::to_string(s) + "] must list " +
                                        std::to_string(A) + " actions");
        }
        for (int a = 0; a < A; ++a) {
            const json& row = per_state.at(a);
            if (static_cast<int>(row.size()) != S) {
                throw std::invalid_argument(name + " row has wrong length");
            }
            for (int s2 = 0; s2 < S; ++s2) probs(s * A + a, s2) = row.at(s2).get<double>();
        }
    }
    return TransitionKernel{S, A, std::move(probs)};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument(name + " must be a 2-d array");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (static_cast<int>(row.size()) != cols) {
            throw std::invalid_argument(name + " rows have inconsistent lengths");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
    }
    return m;
}

}  // namespace

json instance_to_json(const RCMDPInstance& inst) {
    json j;
    j["num_states"] = inst.num_states;
    j["num_actions"] = inst.num_actions;
    j["gamma"] = inst.gamma;
    j["mu"] = json::array();
    for (int s = 0; s < inst.num_states; ++s) j["mu"].push_back(inst.mu(s));
    j["costs"] = json::array();
    for (const auto& c : inst.costs) j["costs"].push_back(matrix_to_json(c.values));
    j["thresholds"] = json::array();
    for (int n = 0; n < inst.num_constraints(); ++n) j["thresholds"].push_back(inst.thresholds(n));
    if (const auto* f = std::get_if<FiniteSet>(&inst.uncertainty)) {
        json u;
        u["type"] = "finite";
        u["kernels"] = json::array();
        for (const auto& k : f->kernels) u["kernels"].push_back(kernel_to_json(k));
        j["uncertainty"] = std::move(u);
    } else {
        const auto& kl = std::get<KLRectangular>(inst.uncertainty);
        json u;
        u["type"] = "kl";
        u["nominal"] = kernel_to_json(kl.nominal);
        u["reg"] = kl.reg;
        j["uncertainty"] = std::move(u);
    }
    return j;
}

RCMDPInstance instance_from_json(const json& j) {
    RCMDPInstance inst;
    inst.num_states = j.at("num_states").get<int>();
    inst.num_actions = j.at("num_actions").get<int>();
    inst.gamma = j.at("gamma").get<double>();
    const int S = inst.num_states;
    const int A = inst.num_actions;
    if (S < 1 || A < 1) throw std::invalid_argument("num_states and num_actions must be >= 1");

    const json& mu = j.at("mu");
    inst.mu.resize(static_cast<Eigen::Index>(mu.size()));
    for (std::size_t s = 0; s < mu.size(); ++s) inst.mu(static_cast<Eigen::Index>(s)) = mu.at(s).get<double>();

    for (const json& c : j.at("costs")) {
        inst.costs.push_back(CostFunction{matrix_from_json(c, "costs")});
    }

    const json& th = j.at("thresholds");
    inst.thresholds.resize(static_cast<Eigen::Index>(th.size()));
    for (std::size_t n = 0; n < th.size(); ++n) {
        inst.thresholds(static_cast<Eigen::Index>(n)) = th.at(n).get<double>();
    }

    const json& u = j.at("uncertainty");
    const std::string type = u.at("type").get<std::string>();
    if (type == "finite") {
        FiniteSet set;
        for (std::size_t m = 0; m < u.at("kernels").size(); ++m) {
            set.kernels.push_back(kernel_from_json(u.at("kernels").at(m), S, A,
                                                   "kernels[" + std::to_string(m) + "]"));
        }
        inst.uncertainty = std::move(set);
    } else if (type == "kl") {
        if (u.contains("radius")) {
            throw std::invalid_argument(
                "KL uncertainty sets are parameterized by the regularization strength 'reg', "
                "not a set radius; replace \"radius\" with \"reg\"");
        }
        inst.uncertainty =
            KLRectangular{kernel_from_json(u.at("nominal"), S, A, "nominal"), u.at("reg").get<double>()};
    } else {
        throw std::invalid_argument("unknown uncertainty type '" + type + "'");
    }

    const auto report = validate_instance(inst);
    if (!report.empty()) {
        std::ostringstream os;
        os << "invalid instance:";
        for (const auto& line : report) os << "\n  - " << line;
        throw std::invalid_argument(os.str());
    }
    normalize_instance(inst);
    return inst;
}

void save_instance(const std::string& path, const RCMDPInstance& inst,
                   const std::optional<json>& meta) {
    json j = instance_to_json(inst);
    if (meta) j["meta"] = *meta;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

RCMDPInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return instance_from_json(j);
}

json policy_to_json(const Policy& pi) { return matrix_to_json(pi.probs); }

Policy policy_from_json(const json& j) { return make_policy(matrix_from_json(j, "policy")); }

}  // namespace rcmdp
