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

#include "rcmdp/uncertainty.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <utility>

namespace rcmdp {
namespace {

constexpr double kKLFixedPointTol = 1e-10;

void check_cost_index(const RCMDPInstance& inst, int n) {
    if (n < 0 || n >= static_cast<int>(inst.costs.size())) {
        throw std::out_of_range("cost index " + std::to_string(n) + " out of range [0, " +
                                std::to_string(inst.costs.size() - 1) + "]");
    }
}

int kl_iteration_cap(double gamma) {
    const double horizon = 1.0 / (1.0 - gamma);
    return static_cast<int>(std::ceil(std::log(horizon / kKLFixedPointTol) /
                                      std::log(1.0 / gamma))) +
           100;
}

EvalResult result_under_kernel(const RCMDPInstance& inst, int n, const Policy& pi,
                               const TransitionKernel& kernel, int index) {
    const double horizon = inst.horizon();
    EvalResult out;
    out.worst_kernel = kernel;
    out.worst_index = index;
    const QEval qe = q_function(pi, kernel, inst.costs[n], inst.gamma);
    out.q = qe.q;
    out.value = inst.mu.dot(qe.v);
    out.occupancy = occupancy(pi, kernel, inst.gamma, inst.mu);
    out.gradient.resize(inst.num_states, inst.num_actions);
    for (int s = 0; s < inst.num_states; ++s) {
        out.gradient.row(s) = horizon * out.occupancy(s) * out.q.row(s);
    }
    return out;
}

// One regularized robust DP sweep; returns the sup-norm residual. The
// adversary's regularized best response has the closed-form value
//   max_p <p, V> - reg * KL(p || nominal_row) = reg * ln <nominal_row, exp(V/reg)>,
// attained at the tilt p* proportional to nominal_row * exp(V/reg). Iterating
// the log-sum-exp value (stabilized by subtracting max V) keeps the update a
// gamma-contraction in the sup-norm; the tilt weights depend on s' only, so
// they are computed once per sweep. Deliberately serial: the per-sweep work
// is a few hundred flops, far below parallel-region overhead; robust
// evaluations parallelize one level up, across cost indices.
double kl_sweep(const RCMDPInstance& inst, const TransitionKernel& nominal, double reg,
                const CostFunction& cost, const Policy& pi, Eigen::MatrixXd& q,
                Eigen::MatrixXd& next, Eigen::VectorXd& v, Eigen::VectorXd& w) {
    const int S = inst.num_states;
    const int A = inst.num_actions;
    const double gamma = inst.gamma;

    for (int s = 0; s < S; ++s) v(s) = pi.probs.row(s).dot(q.row(s));
    const double vmax = v.maxCoeff();
    for (int s2 = 0; s2 < S; ++s2) w(s2) = std::exp((v(s2) - vmax) / reg);

    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double z = nominal.probs.row(s * A + a).dot(w);
            next(s, a) = cost.values(s, a) + gamma * (vmax + reg * std::log(z));
        }
    }
    const double residual = (next - q).cwiseAbs().maxCoeff();
    q.swap(next);
    return residual;
}

KLFixedPoint kl_fixed_point_impl(const RCMDPInstance& inst, int n, const Policy& pi) {
    check_cost_index(inst, n);
    const auto* kl = std::get_if<KLRectangular>(&inst.uncertainty);
    if (kl == nullptr) {
        throw std::invalid_argument("kl_regularized_fixed_point requires a KL uncertainty set");
    }
    if (kl->nominal.probs.minCoeff() <= 0.0) {
        throw std::invalid_argument("KL nominal kernel must be strictly positive");
    }

    const int S = inst.num_states;
    const int A = inst.num_actions;
    const int cap = kl_iteration_cap(inst.gamma);

    KLFixedPoint out;
    out.q = Eigen::MatrixXd::Zero(S, A);
    out.residuals.reserve(256);
    Eigen::MatrixXd next(S, A);
    Eigen::VectorXd v(S), w(S);
    for (int t = 0; t < cap; ++t) {
        const double residual =
            kl_sweep(inst, kl->nominal, kl->reg, inst.costs[n], pi, out.q, next, v, w);
        out.residuals.push_back(residual);
        out.iterations = t + 1;
        if (residual <= kKLFixedPointTol) {
            // Assemble the worst kernel from the converged values.
            Eigen::VectorXd v(S);
            for (int s = 0; s < S; ++s) v(s) = pi.probs.row(s).dot(out.q.row(s));
            const double vmax = v.maxCoeff();
            Eigen::VectorXd w(S);
            for (int s2 = 0; s2 < S; ++s2) w(s2) = std::exp((v(s2) - vmax) / kl->reg);
            Eigen::MatrixXd probs(S * A, S);
            for (int row = 0; row < S * A; ++row) {
                probs.row(row) = kl->nominal.probs.row(row).cwiseProduct(w.transpose());
                probs.row(row) /= probs.row(row).sum();
            }
            out.worst_kernel = TransitionKernel{S, A, std::move(probs)};
            return out;
        }
    }
    throw std::runtime_error(
        "kl_regularized_fixed_point failed to converge within " + std::to_string(cap) +
        " iterations; check reg and gamma");
}

EvalResult eval_kl_impl(const RCMDPInstance& inst, int n, const Policy& pi) {
    KLFixedPoint fp = kl_fixed_point_impl(inst, n, pi);
    return result_under_kernel(inst, n, pi, fp.worst_kernel, -1);
}

EvalResult eval_finite_parallel(const RCMDPInstance& inst, int n, const Policy& pi) {
    check_cost_index(inst, n);
    const auto* fin = std::get_if<FiniteSet>(&inst.uncertainty);
    if (fin == nullptr) {
        throw std::invalid_argument("eval_finite requires a finite uncertainty set");
    }
    const int num_kernels = static_cast<int>(fin->kernels.size());
    std::vector<double> values(num_kernels);
    std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < num_kernels; ++m) {
        try {
            values[m] =
                inst.mu.dot(q_function(pi, fin->kernels[m], inst.costs[n], inst.gamma).v);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    int best = 0;
    for (int m = 1; m < num_kernels; ++m) {
        if (values[m] > values[best]) best = m;
    }
    return result_under_kernel(inst, n, pi, fin->kernels[best], best);
}

}  // namespace

EvalResult eval_finite(const RCMDPInstance& inst, int n, const Policy& pi) {
    return eval_finite_parallel(inst, n, pi);
}

KLFixedPoint kl_regularized_fixed_point(const RCMDPInstance& inst, int n, const Policy& pi) {
    return kl_fixed_point_impl(inst, n, pi);
}

EvalResult eval_kl(const RCMDPInstance& inst, int n, const Policy& pi) {
    return eval_kl_impl(inst, n, pi);
}

EvalResult robust_eval(const RCMDPInstance& inst, int n, const Policy& pi) {
    if (std::holds_alternative<FiniteSet>(inst.uncertainty)) return eval_finite(inst, n, pi);
    return eval_kl(inst, n, pi);
}

namespace ref {

EvalResult eval_finite(const RCMDPInstance& inst, int n, const Policy& pi) {
    check_cost_index(inst, n);
    const auto& fin = std::get<FiniteSet>(inst.uncertainty);
    if (fin.kernels.empty()) throw std::invalid_argument("empty finite uncertainty set");
    int best = 0;
    double best_value = -1.0;
    for (std::size_t m = 0; m < fin.kernels.size(); ++m) {
        const double value =
            inst.mu.dot(q_function(pi, fin.kernels[m], inst.costs[n], inst.gamma).v);
        if (value > best_value) {
            best_value = value;
            best = static_cast<int>(m);
        }
    }
    return result_under_kernel(inst, n, pi, fin.kernels[best], best);
}

KLFixedPoint kl_regularized_fixed_point(const RCMDPInstance& inst, int n, const Policy& pi) {
    return kl_fixed_point_impl(inst, n, pi);
}

EvalResult robust_eval(const RCMDPInstance& inst, int n, const Policy& pi) {
    if (std::holds_alternative<FiniteSet>(inst.uncertainty)) {
        return ref::eval_finite(inst, n, pi);
    }
    return eval_kl_impl(inst, n, pi);
}

}  // namespace ref

}  // namespace rcmdp
