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

#include <cmath>
#include <limits>

#include "rcmdp/envgen.hpp"
#include "rcmdp/epigraph.hpp"
#include "test_helpers.hpp"

using namespace rcmdp;

namespace {

// Independent projection oracle: enumerate every support set, solve the KKT
// system on it, and keep the closest feasible candidate.
Eigen::VectorXd project_by_support_enumeration(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::VectorXd best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << n); ++mask) {
        double sum = 0.0;
        int size = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1 << i)) {
                sum += u(i);
                ++size;
            }
        }
        const double tau = (sum - 1.0) / size;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        bool valid = true;
        for (int i = 0; i < n && valid; ++i) {
            if (mask & (1 << i)) {
                x(i) = u(i) - tau;
                valid = x(i) >= -1e-12;
            } else {
                valid = u(i) - tau <= 1e-12;
            }
        }
        if (!valid) continue;
        const double dist = (x - u).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best = x;
        }
    }
    return best;
}

// One-state CMDP whose optimum is pinned analytically: A=2, gamma=0.5,
// c0=(0,1), c1=(1,0), b1=1 gives J* = 1 at pi(a1) = 1/2.
RCMDPInstance one_state_cmdp() {
    RCMDPInstance inst;
    inst.num_states = 1;
    inst.num_actions = 2;
    inst.gamma = 0.5;
    inst.mu = Eigen::VectorXd::Ones(1);
    Eigen::MatrixXd c0(1, 2), c1(1, 2);
    c0 << 0.0, 1.0;
    c1 << 1.0, 0.0;
    inst.costs = {CostFunction{c0}, CostFunction{c1}};
    inst.thresholds = Eigen::VectorXd::Ones(1);
    inst.uncertainty = FiniteSet{{TransitionKernel{1, 2, Eigen::MatrixXd::Ones(2, 1)}}};
    return inst;
}

// Constant-cost instance: every robust return is fixed, so delta_hat is pure
// threshold arithmetic.
RCMDPInstance constant_return_instance(const std::vector<double>& returns,
                                       const std::vector<double>& thresholds, double gamma) {
    RCMDPInstance inst;
    inst.num_states = 1;
    inst.num_actions = 1;
    inst.gamma = gamma;
    inst.mu = Eigen::VectorXd::Ones(1);
    const double horizon = 1.0 / (1.0 - gamma);
    for (double j : returns) {
        inst.costs.push_back(CostFunction{Eigen::MatrixXd::Constant(1, 1, j / horizon)});
    }
    inst.thresholds.resize(static_cast<Eigen::Index>(thresholds.size()));
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        inst.thresholds(static_cast<Eigen::Index>(i)) = thresholds[i];
    }
    inst.uncertainty = FiniteSet{{TransitionKernel{1, 1, Eigen::MatrixXd::Ones(1, 1)}}};
    return inst;
}

}  // namespace

TEST_CASE("simplex projection basics") {
    Eigen::Vector2d on_simplex(0.3, 0.7);
    CHECK((project_simplex_row(on_simplex) - on_simplex).norm() == 0.0);

    Eigen::Vector2d symmetric(1.0, 1.0);
    CHECK((project_simplex_row(symmetric) - Eigen::Vector2d(0.5, 0.5)).norm() <= 1e-15);

    Eigen::Vector2d outside(0.9, -0.1);
    CHECK((project_simplex_row(outside) - Eigen::Vector2d(1.0, 0.0)).norm() <= 1e-12);

    Eigen::Vector2d nan_row(std::nan(""), 0.0);
    CHECK_THROWS_AS(project_simplex_row(nan_row), std::invalid_argument);
    Eigen::Vector2d inf_row(std::numeric_limits<double>::infinity(), 0.0);
    CHECK_THROWS_AS(project_simplex_row(inf_row), std::invalid_argument);
}

TEST_CASE("simplex projection agrees with the support-enumeration oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 5);
        Eigen::VectorXd u(n);
        for (int i = 0; i < n; ++i) u(i) = 6.0 * rng.uniform() - 3.0;
        const Eigen::VectorXd x = project_simplex_row(u);
        const Eigen::VectorXd oracle = project_by_support_enumeration(u);
        CHECK((x - oracle).norm() <= 1e-9);
        // Exact idempotence.
        const Eigen::VectorXd xx = project_simplex_row(x);
        CHECK((xx - x).norm() == 0.0);
    }
}

TEST_CASE("delta_hat is threshold arithmetic with tie-break to the lowest index") {
    const RCMDPInstance inst = constant_return_instance({0.8, 0.3, 0.5}, {0.4, 0.5}, 0.5);
    const Policy pi = uniform_policy(1, 1);
    const DeltaHat dh = delta_hat(inst, pi, 0.7);
    CHECK(std::abs(dh.value - 0.1) <= 1e-12);
    CHECK(dh.argmax_n == 0);

    // Exact tie between indices 1 and 2 resolves to 1.
    const RCMDPInstance tie = constant_return_instance({0.1, 0.6, 0.6}, {0.4, 0.4}, 0.5);
    const DeltaHat dht = delta_hat(tie, pi, 1.0);
    CHECK(dht.argmax_n == 1);
    CHECK_THROWS_AS(delta_hat(tie, pi, std::nan("")), std::invalid_argument);
}

TEST_CASE("delta_hat at uniform-anchored thresholds is non-positive at b0 = H") {
    GenSpec spec = GenSpec::defaults(Setting::Finite, 3);
    spec.num_states = 4;
    spec.num_actions = 2;
    spec.gamma = 0.8;
    spec.num_kernels = 2;
    spec.num_constraints = 2;
    const RCMDPInstance inst = random_instance(spec);  // thresholds anchored at uniform
    const Policy unif = uniform_policy(4, 2);
    const DeltaHat dh = delta_hat(inst, unif, inst.horizon());
    CHECK(dh.value <= 1e-9);
}

TEST_CASE("delta_hat on the counterexample at b0 = J0(pi2)") {
    const double gamma = 0.4;
    const RCMDPInstance base = counterexample_instance(gamma, 0.09, 0.0);
    const Policy pi2 = deterministic_policy({1, 1, 1, 1}, 2);
    RCMDPInstance inst = base;
    inst.thresholds(0) = inst.horizon();  // slack constraint
    const double j0 = delta_hat(inst, pi2, 0.0).returns[0];
    const DeltaHat dh = delta_hat(inst, pi2, j0);
    CHECK(std::abs(dh.value) <= 1e-12);
    CHECK(dh.argmax_n == 0);
}

TEST_CASE("pgs subroutine best-iterate semantics") {
    const RCMDPInstance inst = one_state_cmdp();

    SUBCASE("zero learning rate returns the initial policy") {
        SubroutineConfig cfg;
        cfg.iterations = 1;
        cfg.learning_rate = 0.0;
        cfg.initial_policy = deterministic_policy({0}, 2);
        const SubroutineResult res = pgs_subroutine(inst, 1.0, cfg);
        CHECK(res.best_t == 0);
        CHECK((res.policy.probs - cfg.initial_policy->probs).cwiseAbs().maxCoeff() == 0.0);
        const double initial_delta = delta_hat(inst, *cfg.initial_policy, 1.0).value;
        CHECK(res.best_delta == initial_delta);
    }

    SUBCASE("T = 1 keeps the better of the initial and projected policy") {
        SubroutineConfig cfg;
        cfg.iterations = 1;
        cfg.learning_rate = 1e-2;
        cfg.initial_policy = deterministic_policy({0}, 2);
        const SubroutineResult res = pgs_subroutine(inst, 1.0, cfg);
        REQUIRE(res.trace.size() == 2);
        CHECK(res.best_delta == std::min(res.trace[0].delta_hat, res.trace[1].delta_hat));
        CHECK(res.best_delta <= res.trace[0].delta_hat);
    }

    SUBCASE("best delta never exceeds the initial delta") {
        Rng rng(7);
        SubroutineConfig cfg;
        cfg.iterations = 25;
        cfg.learning_rate = 5e-3;
        cfg.initial_policy = testing::random_policy(rng, 1, 2);
        const SubroutineResult res = pgs_subroutine(inst, 0.3, cfg);
        CHECK(res.best_delta <= res.trace.front().delta_hat);
        // The projection closes the policy set: the returned iterate is a
        // valid distribution row by row.
        for (int s = 0; s < res.policy.num_states(); ++s) {
            CHECK(std::abs(res.policy.probs.row(s).sum() - 1.0) <= 1e-12);
            CHECK(res.policy.probs.row(s).minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("pgs subroutine reaches the analytic optimum of the one-state CMDP") {
    const RCMDPInstance inst = one_state_cmdp();
    SubroutineConfig cfg;
    cfg.iterations = 2000;
    cfg.learning_rate = 1e-3;
    cfg.initial_policy = deterministic_policy({0}, 2);
    const SubroutineResult res = pgs_subroutine(inst, 1.0, cfg);  // b0 = J* = 1
    CHECK(res.best_delta <= 0.01);
}

TEST_CASE("all-zero costs make delta independent of the policy") {
    RCMDPInstance inst = constant_return_instance({0.0, 0.0, 0.0}, {0.25, 0.75}, 0.5);
    SubroutineConfig cfg;
    cfg.iterations = 3;
    cfg.learning_rate = 0.1;
    const double horizon = inst.horizon();
    const SubroutineResult res = pgs_subroutine(inst, horizon, cfg);
    CHECK(res.best_delta == -0.25);  // -min_n b_n, exactly
}

TEST_CASE("bisection geometry against stubbed subroutines") {
    // Dyadic horizons make every midpoint representable, so the closed forms
    // hold bit for bit.
    for (double gamma : {0.5, 0.75, 0.9375}) {
        const double horizon = 1.0 / (1.0 - gamma);
        for (int iterations : {1, 5, 12, 20}) {
            const auto up = bisection_intervals(horizon, iterations, [](double) { return 1.0; });
            CHECK(up.back().first == horizon - std::ldexp(horizon, -iterations));
            CHECK(up.back().second == horizon);
            const auto down = bisection_intervals(horizon, iterations, [](double) { return 0.0; });
            CHECK(down.back().first == 0.0);
            CHECK(down.back().second == std::ldexp(horizon, -iterations));
            for (int k = 0; k <= iterations; ++k) {
                CHECK(up[k].second - up[k].first == std::ldexp(horizon, -k));
            }
        }
    }

    // Non-dyadic horizon: widths match up to accumulated rounding.
    const double horizon = 1.0 / (1.0 - 0.9);
    const auto intervals = bisection_intervals(horizon, 3, [](double) { return 1.0; });
    CHECK(std::abs(intervals.back().second - intervals.back().first - 1.25) <= 1e-12);
}

TEST_CASE("bisection_solve produces nested halving intervals and a feasible final b0") {
    const RCMDPInstance inst = one_state_cmdp();
    BisectionConfig cfg;
    cfg.outer_iterations = 8;
    cfg.subroutine.iterations = 200;
    cfg.subroutine.learning_rate = 5e-3;
    const SolveResult res = bisection_solve(inst, cfg);
    REQUIRE(res.trace.size() == 8);
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
        const auto& rec = res.trace[k];
        CHECK(rec.lo <= rec.b0);
        CHECK(rec.b0 <= rec.hi);
        if (k > 0) {
            CHECK(rec.lo >= res.trace[k - 1].lo);
            CHECK(rec.hi <= res.trace[k - 1].hi);
        }
        CHECK(std::abs((rec.hi - rec.lo) - std::ldexp(inst.horizon(), -static_cast<int>(k))) <=
              1e-12);
    }
    // J* = 1 for this instance; the final threshold is within the bisection
    // resolution plus subroutine slack.
    CHECK(res.final_b0 >= 1.0 - 0.1);
    CHECK(res.final_b0 <= 1.0 + 0.1);
    CHECK(std::abs(res.final_delta) <= 0.05);
}

TEST_CASE("single-gradient update escapes the Lagrangian trap on the counterexample") {
    const double gamma = 0.4;
    const double delta = gamma / 4.0;
    const double horizon = 1.0 / (1.0 - gamma);
    RCMDPInstance inst = counterexample_instance(gamma, delta, 0.0);
    inst.thresholds(0) = horizon;  // keep the constraint inactive
    const Policy pi2 = deterministic_policy({1, 1, 1, 1}, 2);

    // b0 below J0(pi2) keeps the objective the active maximizer.
    const double j0 = delta_hat(inst, pi2, 0.0).returns[0];
    const double b0 = j0 - 0.2;
    const DeltaHat at_pi2 = delta_hat(inst, pi2, b0);
    CHECK(at_pi2.argmax_n == 0);

    const Policy updated =
        project_policy(pi2.probs - 0.05 * at_pi2.evals[at_pi2.argmax_n].gradient);
    const DeltaHat after = delta_hat(inst, updated, b0);
    CHECK(after.value < at_pi2.value - 1e-6);
}

TEST_CASE("theoretical parameter calculator") {
    const TheoreticalParams p = theoretical_params(2, 2, 0.5, 4.0, 0.1);
    CHECK(std::abs(p.c - 22.980970) <= 1e-6);
    CHECK(std::abs(p.lip - 4.0 * std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(p.smooth - 2.0 * 0.5 * 2.0 * 8.0) <= 1e-12);

    // Halving epsilon multiplies T by 16 (up to the negligible eps_grad^2
    // term inside C_T).
    const TheoreticalParams half = theoretical_params(2, 2, 0.5, 4.0, 0.05);
    CHECK(std::abs(half.t / p.t - 16.0) <= 1e-9);

    // K = floor(log2(2 H / eps)).
    const TheoreticalParams k_case = theoretical_params(3, 2, 0.9, 1.0, 5.0);
    CHECK(k_case.k == 2);

    CHECK_THROWS_AS(theoretical_params(2, 2, 0.5, -1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(theoretical_params(2, 2, 0.5, 4.0, 3.0), std::invalid_argument);
}
