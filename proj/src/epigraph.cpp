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

#include "rcmdp/epigraph.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcmdp {
namespace {

// Raise the lower end only on a violation clearly above solve noise; zero
// (and anything indistinguishable from it) lowers the upper end.
void update_interval(double& lo, double& hi, double b0, double delta) {
    if (delta > kViolationSignTol) {
        lo = b0;
    } else {
        hi = b0;
    }
}

double midpoint(double lo, double hi) { return lo + (hi - lo) / 2.0; }

}  // namespace

Eigen::VectorXd project_simplex_row(const Eigen::VectorXd& raw) {
    if (!raw.allFinite()) {
        throw std::invalid_argument("project_simplex_row: non-finite input");
    }
    const int n = static_cast<int>(raw.size());
    if (n == 0) throw std::invalid_argument("project_simplex_row: empty row");

    // A valid distribution is its own projection; returning it unchanged also
    // makes the operator exactly idempotent.
    if (raw.minCoeff() >= 0.0 && std::abs(raw.sum() - 1.0) <= 1e-9) return raw;

    std::vector<double> u(raw.data(), raw.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (int k = 0; k < n; ++k) {
        cumulative += u[k];
        const double candidate = (cumulative - 1.0) / (k + 1);
        if (u[k] - candidate > 0.0) tau = candidate;
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = std::max(raw(i) - tau, 0.0);
    out /= out.sum();
    return out;
}

Policy project_policy(const Eigen::MatrixXd& raw) {
    Policy out;
    out.probs.resize(raw.rows(), raw.cols());
    for (Eigen::Index s = 0; s < raw.rows(); ++s) {
        out.probs.row(s) = project_simplex_row(raw.row(s).transpose()).transpose();
    }
    return out;
}

DeltaHat delta_hat(const RCMDPInstance& inst, const Policy& pi, double b0) {
    if (!std::isfinite(b0)) throw std::invalid_argument("delta_hat: b0 must be finite");
    const int count = static_cast<int>(inst.costs.size());
    DeltaHat out;
    out.evals.resize(count);
    out.returns.resize(count);
    std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
    for (int n = 0; n < count; ++n) {
        try {
            out.evals[n] = robust_eval(inst, n, pi);
            out.returns[n] = out.evals[n].value;
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    out.argmax_n = 0;
    out.value = out.returns[0] - b0;
    for (int n = 1; n < count; ++n) {
        const double gap = out.returns[n] - inst.thresholds(n - 1);
        if (gap > out.value) {
            out.value = gap;
            out.argmax_n = n;
        }
    }
    return out;
}

SubroutineResult pgs_subroutine(const RCMDPInstance& inst, double b0,
                                const SubroutineConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("subroutine iterations must be >= 1");
    if (!(cfg.learning_rate >= 0.0)) {
        throw std::invalid_argument("subroutine learning rate must be non-negative");
    }

    Policy pi = cfg.initial_policy ? *cfg.initial_policy
                                   : uniform_policy(inst.num_states, inst.num_actions);

    SubroutineResult out;
    out.best_delta = std::numeric_limits<double>::infinity();
    out.trace.reserve(cfg.iterations + 1);
    for (int t = 0; t <= cfg.iterations; ++t) {
        const DeltaHat dh = delta_hat(inst, pi, b0);
        out.trace.push_back(InnerRecord{t, dh.argmax_n, dh.value});
        if (dh.value < out.best_delta) {
            out.best_delta = dh.value;
            out.best_t = t;
            out.policy = pi;
            out.robust_returns = dh.returns;
        }
        if (t == cfg.iterations) break;
        const Eigen::MatrixXd& grad = dh.evals[dh.argmax_n].gradient;
        pi = project_policy(pi.probs - cfg.learning_rate * grad);
    }
    return out;
}

SolveResult bisection_solve(const RCMDPInstance& inst, const BisectionConfig& cfg) {
    if (cfg.outer_iterations < 1) throw std::invalid_argument("outer iterations must be >= 1");
    const double horizon = inst.horizon();

    double lo = 0.0;
    double hi = horizon;
    SolveResult out;
    out.trace.reserve(cfg.outer_iterations);

    std::optional<Policy> warm = cfg.subroutine.initial_policy;
    for (int k = 0; k < cfg.outer_iterations; ++k) {
        const auto started = std::chrono::steady_clock::now();
        const double b0 = midpoint(lo, hi);
        SubroutineConfig sub = cfg.subroutine;
        sub.initial_policy = warm;
        const SubroutineResult res = pgs_subroutine(inst, b0, sub);
        if (cfg.warm_start) warm = res.policy;

        OuterRecord record;
        record.k = k;
        record.lo = lo;
        record.hi = hi;
        record.b0 = b0;
        record.delta_hat = res.best_delta;
        record.robust_returns = res.robust_returns;
        record.inner = res.trace;
        record.policy = res.policy;
        update_interval(lo, hi, b0, res.best_delta);
        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        out.trace.push_back(std::move(record));
    }

    SubroutineConfig final_cfg = cfg.subroutine;
    final_cfg.initial_policy = warm;
    const SubroutineResult final_res = pgs_subroutine(inst, hi, final_cfg);
    out.policy = final_res.policy;
    out.final_b0 = hi;
    out.final_delta = final_res.best_delta;
    return out;
}

std::vector<std::pair<double, double>> bisection_intervals(
    double horizon, int outer_iterations, const std::function<double(double)>& delta_of_b0) {
    double lo = 0.0;
    double hi = horizon;
    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(outer_iterations + 1);
    intervals.emplace_back(lo, hi);
    for (int k = 0; k < outer_iterations; ++k) {
        const double b0 = midpoint(lo, hi);
        update_interval(lo, hi, b0, delta_of_b0(b0));
        intervals.emplace_back(lo, hi);
    }
    return intervals;
}

TheoreticalParams theoretical_params(int num_states, int num_actions, double gamma,
                                     double d_mismatch, double epsilon) {
    if (num_states < 1 || num_actions < 1) {
        throw std::invalid_argument("theoretical_params requires positive sizes");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("theoretical_params requires gamma in (0,1)");
    }
    if (!(d_mismatch > 0.0)) {
        throw std::invalid_argument("theoretical_params requires D > 0");
    }
    const double horizon = 1.0 / (1.0 - gamma);
    if (!(epsilon > 0.0 && epsilon < horizon)) {
        throw std::invalid_argument("theoretical_params requires epsilon in (0, H)");
    }
    const double s = static_cast<double>(num_states);
    const double a = static_cast<double>(num_actions);

    TheoreticalParams p;
    p.lip = horizon * horizon * std::sqrt(a);
    p.smooth = 2.0 * gamma * a * horizon * horizon * horizon;
    p.c = 1.0 / (2.0 * gamma * horizon * std::sqrt(a)) +
          2.0 * d_mismatch * horizon * std::sqrt(s);
    const double c2 = p.c * p.c;
    p.c_grad = 1.0 / (1024.0 * c2 * p.smooth * std::sqrt(s));
    p.c_j = 1.0 / (1024.0 * c2 * p.smooth);
    p.eps_grad = p.c_grad * epsilon * epsilon;
    p.eps_j = p.c_j * epsilon * epsilon;
    p.c_alpha = 1.0 / (64.0 * c2 * p.smooth * (p.lip * p.lip + p.eps_grad));
    p.c_t = 4096.0 * c2 * c2 * p.smooth * p.smooth * s * (p.lip * p.lip + p.eps_grad * p.eps_grad);
    p.alpha = p.c_alpha * epsilon * epsilon;
    p.t = p.c_t / (epsilon * epsilon * epsilon * epsilon);
    p.k = static_cast<int>(std::floor(std::log2(2.0 * horizon / epsilon)));
    return p;
}

}  // namespace rcmdp
