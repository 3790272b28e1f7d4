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

#include <doctest.h>

#include <filesystem>
#include <string>

#include "rcmdp/envgen.hpp"
#include "rcmdp/json_io.hpp"
#include "test_helpers.hpp"

using namespace rcmdp;
using nlohmann::json;

TEST_CASE("instance JSON round trip preserves every field") {
    for (Setting setting : {Setting::Finite, Setting::KL, Setting::CMDP}) {
        GenSpec spec = GenSpec::defaults(setting, 321);
        spec.num_states = 4;
        spec.num_actions = 2;
        spec.num_constraints = 2;
        const RCMDPInstance inst = random_instance(spec);
        const json j = instance_to_json(inst);
        CHECK(j.contains("num_states"));
        CHECK(j.contains("num_actions"));
        CHECK(j.contains("gamma"));
        CHECK(j.contains("mu"));
        CHECK(j.contains("costs"));
        CHECK(j.contains("thresholds"));
        CHECK(j.contains("uncertainty"));
        // Loading renormalizes distribution rows, which can perturb entries
        // by an ulp; everything else round-trips exactly.
        const RCMDPInstance back = instance_from_json(j);
        CHECK(back.num_states == inst.num_states);
        CHECK(back.num_actions == inst.num_actions);
        CHECK(back.gamma == inst.gamma);
        CHECK((back.mu - inst.mu).cwiseAbs().maxCoeff() <= 1e-12);
        REQUIRE(back.costs.size() == inst.costs.size());
        for (std::size_t n = 0; n < inst.costs.size(); ++n) {
            CHECK((back.costs[n].values - inst.costs[n].values).cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK((back.thresholds - inst.thresholds).cwiseAbs().maxCoeff() == 0.0);
        if (const auto* f = std::get_if<FiniteSet>(&inst.uncertainty)) {
            const auto& bf = std::get<FiniteSet>(back.uncertainty);
            REQUIRE(bf.kernels.size() == f->kernels.size());
            for (std::size_t m = 0; m < f->kernels.size(); ++m) {
                CHECK((bf.kernels[m].probs - f->kernels[m].probs).cwiseAbs().maxCoeff() <= 1e-12);
            }
        } else {
            const auto& kl = std::get<KLRectangular>(inst.uncertainty);
            const auto& bkl = std::get<KLRectangular>(back.uncertainty);
            CHECK(bkl.reg == kl.reg);
            CHECK((bkl.nominal.probs - kl.nominal.probs).cwiseAbs().maxCoeff() <= 1e-12);
        }
        // A reloaded instance serializes identically to itself.
        const RCMDPInstance twice = instance_from_json(instance_to_json(back));
        CHECK((std::get_if<FiniteSet>(&twice.uncertainty) != nullptr) ==
              (std::get_if<FiniteSet>(&back.uncertainty) != nullptr));
    }
}

TEST_CASE("kernel arrays are indexed [s][a][s']") {
    const RCMDPInstance inst = counterexample_instance(0.4, 0.09);
    const json j = instance_to_json(inst);
    const json& kernels = j["uncertainty"]["kernels"];
    REQUIRE(kernels.size() == 2);
    // P1: (s1, a1) -> s2 and (s1, a2) -> s1.
    CHECK(kernels[0][0][0][1] == 1.0);
    CHECK(kernels[0][0][1][0] == 1.0);
    // costs are [n][s][a]: c0(s1, a1) = delta.
    CHECK(j["costs"][0][0][0] == 0.09);
}

TEST_CASE("radius-parameterized KL input is rejected with a diagnostic") {
    GenSpec spec = GenSpec::defaults(Setting::KL, 5);
    spec.num_states = 3;
    spec.num_actions = 2;
    json j = instance_to_json(random_instance(spec));
    j["uncertainty"].erase("reg");
    j["uncertainty"]["radius"] = 0.5;
    try {
        instance_from_json(j);
        FAIL("expected rejection of radius-parameterized input");
    } catch (const std::invalid_argument& e) {
        const std::string message = e.what();
        CHECK(message.find("reg") != std::string::npos);
        CHECK(message.find("radius") != std::string::npos);
    }
}

TEST_CASE("invalid instances are rejected with the violation list") {
    json j = instance_to_json(counterexample_instance(0.4, 0.09));
    j["mu"] = {0.6, 0.6, 0.6, 0.6};
    try {
        instance_from_json(j);
        FAIL("expected validation failure");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("mu") != std::string::npos);
    }
}

TEST_CASE("save/load round trip with generator metadata") {
    const auto path = std::filesystem::temp_directory_path() / "rcmdp_io_test.json";
    const RCMDPInstance inst = counterexample_instance(0.5, 0.1, 0.25);
    json meta;
    meta["prng"] = "mt19937_64";
    meta["seed"] = 7;
    save_instance(path.string(), inst, meta);
    const RCMDPInstance back = load_instance(path.string());
    CHECK(instance_to_json(back).dump() == instance_to_json(inst).dump());
    std::filesystem::remove(path);
}

TEST_CASE("policy JSON round trip") {
    Rng rng(9);
    const Policy pi = testing::random_policy(rng, 3, 4);
    const Policy back = policy_from_json(policy_to_json(pi));
    CHECK((back.probs - pi.probs).cwiseAbs().maxCoeff() <= 1e-15);
}
