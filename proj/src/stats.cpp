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

#include "fbmimo/stats.hpp"

#include "fbmimo/numerics.hpp"

namespace fbmimo {

SampleSummary summarize(std::span<const double> values, std::size_t stride, std::size_t offset) {
    if (stride == 0)
        throw DomainError("summarize: stride must be positive");
    SampleSummary out;
    CompensatedSum sum;
    for (std::size_t i = offset; i < values.size(); i += stride) {
        sum.add(values[i]);
        ++out.count;
    }
    if (out.count == 0)
        return out;
    out.mean = sum.value() / static_cast<double>(out.count);
    if (out.count < 2)
        return out;
    CompensatedSum sq;
    for (std::size_t i = offset; i < values.size(); i += stride) {
        const double d = values[i] - out.mean;
        sq.add(d * d);
    }
    const double n = static_cast<double>(out.count);
    out.std_err = std::sqrt(sq.value() / (n - 1.0) / n);
    return out;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw DomainError("ks_statistic_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_pvalue(double d, double n_effective) {
    if (d <= 0.0)
        return 1.0;
    const double rn = std::sqrt(n_effective);
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace fbmimo
