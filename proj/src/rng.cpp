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

#include "rcmdp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rcmdp {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_positive() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double Rng::normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    double x, y, r2;
    do {
        x = 2.0 * uniform() - 1.0;
        y = 2.0 * uniform() - 1.0;
        r2 = x * x + y * y;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_normal_ = y * f;
    have_spare_normal_ = true;
    return x * f;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
        const double u = uniform_positive();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_positive();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

Eigen::VectorXd Rng::dirichlet(double alpha, int n) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        // Gamma(0.1) variates can underflow to zero; keep a floor so the
        // normalized entries remain strictly positive.
        out(i) = std::max(gamma(alpha), 1e-300);
    }
    out /= out.sum();
    return out;
}

}  // namespace rcmdp
