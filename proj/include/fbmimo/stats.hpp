// SPDX-License-Identifier: Apache-2.0
//
// fbmimo: multiuser MIMO downlink simulator with finite-rate channel feedback
// Copyright (C) 2026 The fbmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fbmimo {

// Neumaier-compensated running sum. Feeding values in a fixed order gives a
// result that does not depend on how they were produced.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct SampleSummary {
    double mean = 0.0;
    double std_err = 0.0; // sample std / sqrt(n)
    std::size_t count = 0;
};

// Two-pass mean and standard error over `values` taken with the given stride,
// i.e. values[offset], values[offset + stride], ...
SampleSummary summarize(std::span<const double> values, std::size_t stride = 1, std::size_t offset = 0);

// Kolmogorov-Smirnov statistic sup |F_n - F| of the samples against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf &&cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov tail probability Pr(D > d) with Stephens' small-sample
// correction, for effective sample size n (n for one-sample, nm/(n+m) for two).
double kolmogorov_pvalue(double d, double n_effective);

} // namespace fbmimo
