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

#include "rcmdp/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rcmdp {
namespace {

bool in_unit_interval(double x) { return x >= -kRowSumTol && x <= 1.0 + kRowSumTol; }

void check_rows_stochastic(const Eigen::MatrixXd& m, const std::string& name,
                           std::vector<std::string>& report) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            if (!in_unit_interval(v)) {
                std::ostringstream os;
                os << name << " entry (" << r << "," << c << ") = " << v << " outside [0,1]";
                report.push_back(os.str());
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << name << " row " << r << " sums to " << sum << ", expected 1";
            report.push_back(os.str());
        }
    }
}

void renormalize_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double sum = m.row(r).sum();
        m.row(r) /= sum;
    }
}

}  // namespace

std::vector<std::string> validate_instance(const RCMDPInstance& inst) {
    std::vector<std::string> report;
    const int S = inst.num_states;
    const int A = inst.num_actions;
    if (S < 1) report.push_back("num_states must be >= 1, got " + std::to_string(S));
    if (A < 1) report.push_back("num_actions must be >= 1, got " + std::to_string(A));
    if (!(inst.gamma > 0.0 && inst.gamma < 1.0)) {
        report.push_back("gamma must lie in (0,1), got " + std::to_string(inst.gamma));
    }
    if (S < 1 || A < 1) return report;

    if (inst.mu.size() != S) {
        report.push_back("mu has length " + std::to_string(inst.mu.size()) + ", expected " +
                         std::to_string(S));
    } else {
        double sum = 0.0;
        for (int s = 0; s < S; ++s) {
            if (inst.mu(s) < -kRowSumTol) {
                std::ostringstream os;
                os << "mu(" << s << ") = " << inst.mu(s) << " is negative";
                report.push_back(os.str());
            }
            sum += inst.mu(s);
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << "mu sums to " << sum << ", expected 1";
            report.push_back(os.str());
        }
    }

    if (inst.costs.empty()) {
        report.push_back("costs must be non-empty");
    }
    for (std::size_t n = 0; n < inst.costs.size(); ++n) {
        const auto& c = inst.costs[n].values;
        if (c.rows() != S || c.cols() != A) {
            std::ostringstream os;
            os << "costs[" << n << "] has shape " << c.rows() << "x" << c.cols() << ", expected "
               << S << "x" << A;
            report.push_back(os.str());
            continue;
        }
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                if (!in_unit_interval(c(s, a))) {
                    std::ostringstream os;
                    os << "costs[" << n << "](" << s << "," << a << ") = " << c(s, a)
                       << " outside [0,1]";
                    report.push_back(os.str());
                }
            }
        }
    }

    const double horizon = 1.0 / (1.0 - inst.gamma);
    const int expected_n = static_cast<int>(inst.costs.size()) - 1;
    if (static_cast<int>(inst.thresholds.size()) != expected_n) {
        std::ostringstream os;
        os << "thresholds has length " << inst.thresholds.size() << ", expected " << expected_n;
        report.push_back(os.str());
    } else {
        for (int n = 0; n < expected_n; ++n) {
            const double b = inst.thresholds(n);
            if (!(b >= 0.0 && b <= horizon + kRowSumTol)) {
                std::ostringstream os;
                os << "thresholds(" << n << ") = " << b << " outside [0, H] with H = " << horizon;
                report.push_back(os.str());
            }
        }
    }

    auto check_kernel = [&](const TransitionKernel& k, const std::string& name) {
        if (k.num_states != S || k.num_actions != A || k.probs.rows() != S * A ||
            k.probs.cols() != S) {
            report.push_back(name + " has inconsistent shape");
            return;
        }
        check_rows_stochastic(k.probs, name, report);
    };

    if (const auto* f = std::get_if<FiniteSet>(&inst.uncertainty)) {
        if (f->kernels.empty()) {
            report.push_back("finite uncertainty set must contain at least one kernel");
        }
        for (std::size_t m = 0; m < f->kernels.size(); ++m) {
            check_kernel(f->kernels[m], "kernels[" + std::to_string(m) + "]");
        }
    } else {
        const auto& kl = std::get<KLRectangular>(inst.uncertainty);
        if (!(kl.reg > 0.0)) {
            report.push_back("kl reg must be positive, got " + std::to_string(kl.reg));
        }
        check_kernel(kl.nominal, "nominal");
        if (kl.nominal.probs.size() > 0 && kl.nominal.probs.minCoeff() <= 0.0) {
            report.push_back("kl nominal kernel must be strictly positive on every entry");
        }
    }
    return report;
}

void normalize_instance(RCMDPInstance& inst) {
    const double sum = inst.mu.sum();
    inst.mu = (inst.mu.array().max(0.0) / sum).matrix();
    if (auto* f = std::get_if<FiniteSet>(&inst.uncertainty)) {
        for (auto& k : f->kernels) renormalize_rows(k.probs);
    } else {
        renormalize_rows(std::get<KLRectangular>(inst.uncertainty).nominal.probs);
    }
}

TransitionKernel make_kernel(int num_states, int num_actions, Eigen::MatrixXd probs) {
    if (num_states < 1 || num_actions < 1) {
        throw std::invalid_argument("kernel dimensions must be positive");
    }
    if (probs.rows() != static_cast<Eigen::Index>(num_states) * num_actions ||
        probs.cols() != num_states) {
        throw std::invalid_argument("kernel matrix must be (S*A) x S");
    }
    std::vector<std::string> report;
    check_rows_stochastic(probs, "kernel", report);
    if (!report.empty()) throw std::invalid_argument(report.front());
    renormalize_rows(probs);
    return TransitionKernel{num_states, num_actions, std::move(probs)};
}

Policy make_policy(Eigen::MatrixXd probs) {
    std::vector<std::string> report;
    check_rows_stochastic(probs, "policy", report);
    if (!report.empty()) throw std::invalid_argument(report.front());
    renormalize_rows(probs);
    return Policy{std::move(probs)};
}

CostFunction make_cost(Eigen::MatrixXd values) {
    for (Eigen::Index s = 0; s < values.rows(); ++s) {
        for (Eigen::Index a = 0; a < values.cols(); ++a) {
            if (!in_unit_interval(values(s, a))) {
                std::ostringstream os;
                os << "cost (" << s << "," << a << ") = " << values(s, a) << " outside [0,1]";
                throw std::invalid_argument(os.str());
            }
        }
    }
    return CostFunction{std::move(values)};
}

Policy uniform_policy(int num_states, int num_actions) {
    if (num_states < 1 || num_actions < 1) {
        throw std::invalid_argument("uniform_policy requires S >= 1 and A >= 1");
    }
    return Policy{Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions)};
}

Policy deterministic_policy(const std::vector<int>& action_per_state, int num_actions) {
    if (num_actions < 1) throw std::invalid_argument("deterministic_policy requires A >= 1");
    Eigen::MatrixXd probs =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(action_per_state.size()), num_actions);
    for (std::size_t s = 0; s < action_per_state.size(); ++s) {
        const int a = action_per_state[s];
        if (a < 0 || a >= num_actions) {
            throw std::invalid_argument("action index " + std::to_string(a) + " out of range for A = " +
                                        std::to_string(num_actions));
        }
        probs(static_cast<Eigen::Index>(s), a) = 1.0;
    }
    return Policy{std::move(probs)};
}

}  // namespace rcmdp
