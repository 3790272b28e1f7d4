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

#include <vector>

#include "rcmdp/exact_eval.hpp"
#include "rcmdp/types.hpp"

namespace rcmdp {

/// Robust return estimate for one cost index: the value, the maximizing
/// kernel, and the exact Q / occupancy / gradient under that kernel.
struct EvalResult {
    double value = 0.0;
    TransitionKernel worst_kernel;
    int worst_index = -1;  // kernel index for finite sets, -1 for KL
    Eigen::MatrixXd q;          // S x A under the worst kernel
    Eigen::VectorXd occupancy;  // normalized, under the worst kernel
    Eigen::MatrixXd gradient;   // H * occupancy(s) * q(s,a)
};

/// Robust evaluation over a finite kernel set: evaluates every kernel, picks
/// the maximizer (ties broken by lowest index). Per-kernel solves run in
/// parallel; the argmax is taken serially in index order.
EvalResult eval_finite(const RCMDPInstance& inst, int n, const Policy& pi);

struct KLFixedPoint {
    Eigen::MatrixXd q;  // S x A fixed point of the regularized robust update
    TransitionKernel worst_kernel;
    int iterations = 0;
    std::vector<double> residuals;  // sup-norm residual per iteration
};

/// Iterates the regularized robust DP update
///   Q(s,a) <- c_n(s,a) + gamma <P*_{s,a}, V>,
///   P*_{s,a} proportional to P(.|s,a) exp((V(.) - max V) / reg)
/// from Q = 0 until the sup-norm residual drops below 1e-10, then assembles
/// the worst-case kernel from the final tilt. Throws if the gamma-contraction
/// cap is exceeded (misconfigured reg or gamma).
KLFixedPoint kl_regularized_fixed_point(const RCMDPInstance& inst, int n, const Policy& pi);

/// KL-set robust evaluation: fixed point, then an exact re-solve of Q and
/// occupancy under the assembled worst kernel.
EvalResult eval_kl(const RCMDPInstance& inst, int n, const Policy& pi);

/// Dispatch over the uncertainty-set variant.
EvalResult robust_eval(const RCMDPInstance& inst, int n, const Policy& pi);

namespace ref {

/// Serial reference implementations (plain loops, no OpenMP), kept for
/// equivalence tests and the serial-vs-parallel benchmark. The KL fixed
/// point is a sequential contraction either way, so its entry point is
/// shared; the parallel/serial split applies to the per-kernel loop of the
/// finite evaluator and to everything layered above robust_eval.
EvalResult eval_finite(const RCMDPInstance& inst, int n, const Policy& pi);
KLFixedPoint kl_regularized_fixed_point(const RCMDPInstance& inst, int n, const Policy& pi);
EvalResult robust_eval(const RCMDPInstance& inst, int n, const Policy& pi);

}  // namespace ref

}  // namespace rcmdp
