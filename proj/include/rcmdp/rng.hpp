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

#include <cstdint>
#include <random>
#include <string>

namespace rcmdp {

/// Deterministic random source built on std::mt19937_64, whose output stream
/// is fully specified by the standard. All variate transforms are implemented
/// here (not via std::*_distribution, which is implementation-defined), so a
/// given seed produces the same values on every platform this builds on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::string algorithm_name() { return "mt19937_64"; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform double in (0, 1); never returns 0.
    double uniform_positive();

    /// Standard normal via the Marsaglia polar method.
    double normal();

    /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost
    /// G(shape) = G(shape + 1) * U^{1/shape}.
    double gamma(double shape);

    /// Dirichlet(alpha, ..., alpha) over `n` categories as normalized gamma
    /// variates. Entries are clamped away from exact zero so KL-set nominals
    /// stay strictly positive.
    Eigen::VectorXd dirichlet(double alpha, int n);

private:
    std::mt19937_64 engine_;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace rcmdp
