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

#include "fbmimo/precoder.hpp"

#include <cmath>
#include <string>

namespace fbmimo {
namespace {

std::vector<ComplexVector> normalized_columns(const ComplexMatrix &m) {
    std::vector<ComplexVector> out;
    out.reserve(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c)
        out.push_back(m.column(c).normalized());
    return out;
}

} // namespace

std::string_view to_string(PrecoderKind kind) { return kind == PrecoderKind::zf ? "zf" : "rzf"; }

std::string_view to_string(CsiSource source) { return source == CsiSource::perfect ? "perfect" : "quantized"; }

BeamformerSet zf_beamformers(const ComplexMatrix &g, CsiSource source) {
    if (!g.square())
        throw DomainError("zf_beamformers: channel matrix must be square");
    return {PrecoderKind::zf, source, normalized_columns(invert(g))};
}

BeamformerSet rzf_beamformers(const ComplexMatrix &g, double power, CsiSource source) {
    if (!(power > 0.0))
        throw DomainError("rzf_beamformers: power must be positive");
    const ComplexMatrix gh = g.adjoint();
    ComplexMatrix gram = g * gh;
    const double reg = static_cast<double>(g.cols()) / power;
    for (std::size_t i = 0; i < gram.rows(); ++i)
        gram(i, i) += reg;
    return {PrecoderKind::rzf, source, normalized_columns(gh * invert(gram))};
}

double sinr(const ComplexVector &h, const BeamformerSet &bf, std::size_t user, double power) {
    if (user >= bf.streams())
        throw DomainError("sinr: user index out of range");
    if (!(power >= 0.0))
        throw DomainError("sinr: power must be non-negative");
    if (power == 0.0)
        return 0.0;
    const double per_stream = power / static_cast<double>(bf.streams());
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t j = 0; j < bf.streams(); ++j) {
        if (bf.vectors[j].dim() != h.dim())
            throw DomainError("sinr: beamformer dimension does not match channel");
        const double g = std::norm(dot(h, bf.vectors[j]));
        if (j == user)
            signal = g;
        else
            interference += g;
    }
    return per_stream * signal / (1.0 + per_stream * interference);
}

std::vector<double> zf_rates_perfect_csit(const ComplexMatrix &h, double power) {
    if (!h.square())
        throw DomainError("zf_rates_perfect_csit: channel matrix must be square");
    const BeamformerSet bf = zf_beamformers(h, CsiSource::perfect);
    const double per_stream = power / static_cast<double>(h.rows());
    std::vector<double> rates(h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        // Row i holds h_i^H, so h_i^H v_i is a plain row-column product.
        cdouble gain{0.0, 0.0};
        const auto row = h.row(i);
        for (std::size_t k = 0; k < row.size(); ++k)
            gain += row[k] * bf.vectors[i][k];
        rates[i] = std::log2(1.0 + per_stream * std::norm(gain));
    }
    return rates;
}

} // namespace fbmimo
