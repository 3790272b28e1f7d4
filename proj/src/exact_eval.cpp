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

#include "rcmdp/exact_eval.hpp"

#include <cmath>
#include <stdexcept>

namespace rcmdp {
namespace {

// Chain matrix under pi: M(s, s') = sum_a pi(s,a) P(s'|s,a).
Eigen::MatrixXd state_chain(const Policy& pi, const TransitionKernel& P) {
    const int S = P.num_states;
    const int A = P.num_actions;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            m.row(s) += pi.probs(s, a) * P.probs.row(s * A + a);
        }
    }
    return m;
}

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("gamma must lie in (0,1), got " + std::to_string(gamma));
    }
}

}  // namespace

QEval q_function(const Policy& pi, const TransitionKernel& P, const CostFunction& c,
                 double gamma) {
    check_gamma(gamma);
    const int S = P.num_states;
    const int A = P.num_actions;
    const int SA = S * A;

    // (I - gamma P Pi^pi) with (P Pi^pi)((s,a),(s',a')) = P(s'|s,a) pi(s',a').
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(SA, SA);
    for (int row = 0; row < SA; ++row) {
        for (int s2 = 0; s2 < S; ++s2) {
            const double p = P.probs(row, s2);
            if (p == 0.0) continue;
            for (int a2 = 0; a2 < A; ++a2) {
                system(row, s2 * A + a2) -= gamma * p * pi.probs(s2, a2);
            }
        }
    }

    Eigen::VectorXd cost_vec(SA);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) cost_vec(s * A + a) = c.values(s, a);
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const Eigen::VectorXd q_vec = lu.solve(cost_vec);
    if (!q_vec.allFinite()) {
        throw std::runtime_error("q_function: linear solve produced non-finite values");
    }

    QEval out;
    out.q.resize(S, A);
    out.v.resize(S);
    for (int s = 0; s < S; ++s) {
        double v = 0.0;
        for (int a = 0; a < A; ++a) {
            out.q(s, a) = q_vec(s * A + a);
            v += pi.probs(s, a) * out.q(s, a);
        }
        out.v(s) = v;
    }
    return out;
}

double return_value(const Policy& pi, const TransitionKernel& P, const CostFunction& c,
                    double gamma, const Eigen::VectorXd& mu) {
    return mu.dot(q_function(pi, P, c, gamma).v);
}

Eigen::VectorXd occupancy(const Policy& pi, const TransitionKernel& P, double gamma,
                          const Eigen::VectorXd& mu) {
    check_gamma(gamma);
    const int S = P.num_states;
    const Eigen::MatrixXd chain = state_chain(pi, P);
    // d^T (I - gamma M) = (1-gamma) mu^T  <=>  (I - gamma M)^T d = (1-gamma) mu
    const Eigen::MatrixXd system =
        (Eigen::MatrixXd::Identity(S, S) - gamma * chain).transpose();
    Eigen::VectorXd d = Eigen::PartialPivLU<Eigen::MatrixXd>(system).solve(
        ((1.0 - gamma) * mu).eval());
    if (!d.allFinite()) {
        throw std::runtime_error("occupancy: linear solve produced non-finite values");
    }
    return d;
}

Eigen::MatrixXd policy_gradient(const Policy& pi, const TransitionKernel& P,
                                const CostFunction& c, double gamma, const Eigen::VectorXd& mu) {
    const double horizon = 1.0 / (1.0 - gamma);
    const Eigen::VectorXd d = occupancy(pi, P, gamma, mu);
    const QEval qe = q_function(pi, P, c, gamma);
    Eigen::MatrixXd grad(P.num_states, P.num_actions);
    for (int s = 0; s < P.num_states; ++s) {
        grad.row(s) = horizon * d(s) * qe.q.row(s);
    }
    return grad;
}

Eigen::MatrixXd finite_diff_gradient(const Policy& pi, const TransitionKernel& P,
                                     const CostFunction& c, double gamma,
                                     const Eigen::VectorXd& mu, double step) {
    const int S = P.num_states;
    const int A = P.num_actions;
    if (pi.probs.minCoeff() < step) {
        throw std::invalid_argument("finite_diff_gradient requires an interior policy");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const int paired = (a + 1) % A;
            if (paired == a) continue;  // A = 1: simplex is a point
            Policy plus = pi;
            plus.probs(s, a) += step;
            plus.probs(s, paired) -= step;
            Policy minus = pi;
            minus.probs(s, a) -= step;
            minus.probs(s, paired) += step;
            out(s, a) = (return_value(plus, P, c, gamma, mu) -
                         return_value(minus, P, c, gamma, mu)) /
                        (2.0 * step);
        }
    }
    return out;
}

double bellman_residual(const Eigen::MatrixXd& q, const Policy& pi, const TransitionKernel& P,
                        const CostFunction& c, double gamma) {
    const int S = P.num_states;
    const int A = P.num_actions;
    Eigen::VectorXd v(S);
    for (int s = 0; s < S; ++s) v(s) = pi.probs.row(s).dot(q.row(s));
    double residual = 0.0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double backup = c.values(s, a) + gamma * P.probs.row(s * A + a).dot(v);
            residual = std::max(residual, std::abs(q(s, a) - backup));
        }
    }
    return residual;
}

}  // namespace rcmdp
