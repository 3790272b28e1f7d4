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

#include "rcmdp/envgen.hpp"

#include <algorithm>
#include <stdexcept>

#include "rcmdp/rng.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {
namespace {

constexpr double kTransitionAlpha = 0.1;
constexpr double kInitialAlpha = 0.5;
constexpr double kZeroCostProb = 0.1;

TransitionKernel sample_kernel(Rng& rng, int S, int A) {
    Eigen::MatrixXd probs(S * A, S);
    for (int row = 0; row < S * A; ++row) {
        probs.row(row) = rng.dirichlet(kTransitionAlpha, S).transpose();
    }
    return TransitionKernel{S, A, std::move(probs)};
}

CostFunction sample_cost(Rng& rng, int S, int A) {
    Eigen::MatrixXd values(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            values(s, a) = rng.uniform() < kZeroCostProb ? 0.0 : 1.0;
        }
    }
    return CostFunction{std::move(values)};
}

}  // namespace

std::string setting_name(Setting s) {
    switch (s) {
        case Setting::Finite: return "finite";
        case Setting::KL: return "kl";
        case Setting::CMDP: return "cmdp";
    }
    return "finite";
}

Setting setting_from_name(const std::string& name) {
    if (name == "finite") return Setting::Finite;
    if (name == "kl") return Setting::KL;
    if (name == "cmdp") return Setting::CMDP;
    throw std::invalid_argument("unknown setting '" + name + "' (expected finite|kl|cmdp)");
}

GenSpec GenSpec::defaults(Setting setting, std::uint64_t seed) {
    GenSpec spec;
    spec.setting = setting;
    spec.seed = seed;
    spec.num_constraints = 5;
    switch (setting) {
        case Setting::Finite:
            spec.num_states = 7;
            spec.num_actions = 4;
            spec.gamma = 0.995;
            spec.num_kernels = 5;
            break;
        case Setting::KL:
            spec.num_states = 5;
            spec.num_actions = 3;
            spec.gamma = 0.99;
            spec.kl_reg = 2.0;
            break;
        case Setting::CMDP:
            spec.num_states = 7;
            spec.num_actions = 4;
            spec.gamma = 0.99;
            spec.num_kernels = 1;
            break;
    }
    return spec;
}

RCMDPInstance random_instance(const GenSpec& spec) {
    const int S = spec.num_states;
    const int A = spec.num_actions;
    if (S < 1 || A < 1) throw std::invalid_argument("random_instance: sizes must be positive");
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) {
        throw std::invalid_argument("random_instance: gamma must lie in (0,1)");
    }
    const int N = spec.num_constraints >= 0 ? spec.num_constraints : 5;

    Rng rng(spec.seed);
    RCMDPInstance inst;
    inst.num_states = S;
    inst.num_actions = A;
    inst.gamma = spec.gamma;

    switch (spec.setting) {
        case Setting::Finite: {
            if (spec.num_kernels < 1) {
                throw std::invalid_argument("random_instance: finite setting needs num_kernels >= 1");
            }
            FiniteSet set;
            for (int m = 0; m < spec.num_kernels; ++m) set.kernels.push_back(sample_kernel(rng, S, A));
            inst.uncertainty = std::move(set);
            break;
        }
        case Setting::KL: {
            if (!(spec.kl_reg > 0.0)) {
                throw std::invalid_argument("random_instance: kl setting needs kl_reg > 0");
            }
            inst.uncertainty = KLRectangular{sample_kernel(rng, S, A), spec.kl_reg};
            break;
        }
        case Setting::CMDP: {
            inst.uncertainty = FiniteSet{{sample_kernel(rng, S, A)}};
            break;
        }
    }

    for (int n = 0; n <= N; ++n) inst.costs.push_back(sample_cost(rng, S, A));

    inst.mu = rng.dirichlet(kInitialAlpha, S);
    inst.thresholds = feasible_thresholds(inst);
    return inst;
}

Eigen::VectorXd feasible_thresholds(const RCMDPInstance& inst) {
    const int N = inst.num_constraints();
    const Policy unif = uniform_policy(inst.num_states, inst.num_actions);
    const double horizon = inst.horizon();
    Eigen::VectorXd thresholds(N);
    for (int n = 0; n < N; ++n) {
        thresholds(n) = std::clamp(robust_eval(inst, n + 1, unif).value, 0.0, horizon);
    }
    return thresholds;
}

RCMDPInstance counterexample_instance(double gamma, double delta, double b1) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("counterexample_instance: gamma must lie in (0,1)");
    }
    if (delta < 0.0 || delta > gamma || delta > 1.0) {
        throw std::invalid_argument(
            "counterexample_instance: delta must satisfy 0 <= delta <= gamma so costs stay in [0,1]");
    }
    const int S = 4;
    const int A = 2;
    const double horizon = 1.0 / (1.0 - gamma);
    if (b1 < 0.0 || b1 > horizon) {
        throw std::invalid_argument("counterexample_instance: b1 must lie in [0, H]");
    }

    // States 0..3 are s1..s4, actions 0..1 are a1/a2. The a2 rows self-loop in
    // s1 and s2; s3 and s4 are action-independent and differ between the two
    // kernels (P1 funnels them into s3, P2 into s4).
    auto one_hot = [S](int target) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(S);
        row(target) = 1.0;
        return row;
    };

    Eigen::MatrixXd p1(S * A, S);
    p1.row(0 * A + 0) = one_hot(1);  // s1, a1 -> s2
    p1.row(0 * A + 1) = one_hot(0);  // s1, a2 -> s1
    p1.row(1 * A + 0) = one_hot(0);  // s2, a1 -> s1
    p1.row(1 * A + 1) = one_hot(1);  // s2, a2 -> s2
    p1.row(2 * A + 0) = one_hot(2);  // s3 -> s3
    p1.row(2 * A + 1) = one_hot(2);
    p1.row(3 * A + 0) = one_hot(2);  // s4 -> s3
    p1.row(3 * A + 1) = one_hot(2);

    Eigen::MatrixXd p2(S * A, S);
    p2.row(0 * A + 0) = one_hot(1);  // s1, a1 -> s2
    p2.row(0 * A + 1) = one_hot(0);  // s1, a2 -> s1
    p2.row(1 * A + 0) = one_hot(1);  // s2, a1 -> s2
    p2.row(1 * A + 1) = one_hot(1);  // s2, a2 -> s2
    p2.row(2 * A + 0) = one_hot(3);  // s3 -> s4
    p2.row(2 * A + 1) = one_hot(3);
    p2.row(3 * A + 0) = one_hot(3);  // s4 -> s4
    p2.row(3 * A + 1) = one_hot(3);

    Eigen::MatrixXd c0(S, A);
    c0 << delta, 1.0,
          1.0,   1.0,
          1.0,   1.0,
          0.0,   0.0;

    Eigen::MatrixXd c1(S, A);
    c1 << 1.0, gamma - delta,
          1.0, 1.0 - delta,
          0.0, 0.0,
          1.0, 1.0;

    RCMDPInstance inst;
    inst.num_states = S;
    inst.num_actions = A;
    inst.gamma = gamma;
    inst.mu = Eigen::VectorXd::Constant(S, 0.25);
    inst.costs = {CostFunction{std::move(c0)}, CostFunction{std::move(c1)}};
    inst.thresholds = Eigen::VectorXd::Constant(1, b1);
    inst.uncertainty =
        FiniteSet{{TransitionKernel{S, A, std::move(p1)}, TransitionKernel{S, A, std::move(p2)}}};
    return inst;
}

}  // namespace rcmdp
