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

// Compares the OpenMP evaluation kernels against the serial reference on
// instances large enough for the parallel loops to matter.

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "rcmdp/envgen.hpp"
#include "rcmdp/epigraph.hpp"
#include "rcmdp/uncertainty.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int repetitions) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repetitions; ++i) fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
               .count() /
           repetitions;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   max|diff| %.2e\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif

    using namespace rcmdp;

    {
        GenSpec spec = GenSpec::defaults(Setting::Finite, 7);
        spec.num_states = 24;
        spec.num_actions = 6;
        spec.gamma = 0.95;
        spec.num_kernels = 12;
        spec.num_constraints = 5;
        const RCMDPInstance inst = random_instance(spec);
        const Policy pi = uniform_policy(spec.num_states, spec.num_actions);

        const EvalResult serial = ref::robust_eval(inst, 0, pi);
        const EvalResult parallel = robust_eval(inst, 0, pi);
        const double diff = std::abs(serial.value - parallel.value);
        const double s = time_ms([&] { ref::robust_eval(inst, 0, pi); }, 20);
        const double p = time_ms([&] { robust_eval(inst, 0, pi); }, 20);
        report("finite robust_eval", s, p, diff);

        const double ds = time_ms(
            [&] {
                for (int n = 0; n <= 5; ++n) ref::robust_eval(inst, n, pi);
            },
            10);
        const double dp = time_ms([&] { delta_hat(inst, pi, 1.0); }, 10);
        report("delta_hat over 6 indices", ds, dp, 0.0);
    }

    {
        // The KL fixed point is a sequential contraction; its parallelism
        // lives one level up, across the N+1 cost indices of delta_hat.
        GenSpec spec = GenSpec::defaults(Setting::KL, 7);
        spec.num_states = 30;
        spec.num_actions = 6;
        spec.gamma = 0.95;
        spec.num_constraints = 5;
        const RCMDPInstance inst = random_instance(spec);
        const Policy pi = uniform_policy(spec.num_states, spec.num_actions);

        double serial_value = 0.0;
        const double s = time_ms(
            [&] {
                for (int n = 0; n <= 5; ++n) serial_value = ref::robust_eval(inst, n, pi).value;
            },
            5);
        double parallel_value = 0.0;
        const double p = time_ms([&] { parallel_value = delta_hat(inst, pi, 1.0).returns[5]; }, 5);
        report("kl delta_hat over 6 indices", s, p, std::abs(serial_value - parallel_value));
    }
    return 0;
}
