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

#include "fbmimo/quantizer.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

namespace fbmimo {
namespace {

void check_antennas(int antennas, const char *who) {
    if (antennas < 2)
        throw DomainError(std::string(who) + ": need at least 2 antennas, got " + std::to_string(antennas));
}

void check_bits(double bits, const char *who) {
    if (!(bits >= 0.0))
        throw DomainError(std::string(who) + ": bits must be non-negative");
}

void check_unit_interval(double z, const char *who) {
    if (!(z >= 0.0 && z <= 1.0))
        throw DomainError(std::string(who) + ": z must lie in [0, 1], got " + std::to_string(z));
}

} // namespace

Codebook::Codebook(int antennas, int bits, ComplexMatrix words)
    : antennas_(antennas), bits_(bits), words_(std::move(words)) {
    check_antennas(antennas, "Codebook");
    if (bits < 0 || bits > kMaxCodebookBits)
        throw DomainError("Codebook: bits out of range");
    if (words_.rows() != (std::size_t{1} << bits) || words_.cols() != static_cast<std::size_t>(antennas))
        throw DomainError("Codebook: word matrix must be 2^B x M");
    for (std::size_t j = 0; j < words_.rows(); ++j)
        if (std::abs(norm2(words_.row(j)) - 1.0) > 1e-12)
            throw DomainError("Codebook: codeword " + std::to_string(j) + " is not unit norm");
}

ComplexVector Codebook::word_vector(std::size_t j) const {
    const auto w = word(j);
    return ComplexVector(std::vector<cdouble>(w.begin(), w.end()));
}

Codebook generate_codebook(int antennas, int bits, RngStream &rng, int max_bits) {
    check_antennas(antennas, "generate_codebook");
    if (bits < 0)
        throw DomainError("generate_codebook: bits must be non-negative");
    if (bits > max_bits)
        throw CapacityError("generate_codebook: 2^" + std::to_string(bits) + " codewords exceeds the budget of 2^" +
                            std::to_string(max_bits));
    ComplexMatrix words(std::size_t{1} << bits, static_cast<std::size_t>(antennas));
    for (std::size_t j = 0; j < words.rows(); ++j)
        fill_isotropic_unit(words.row(j), rng);
    return Codebook(antennas, bits, std::move(words));
}

QuantizationOutcome quantize(const ComplexVector &h, const Codebook &cb) {
    if (h.dim() != static_cast<std::size_t>(cb.antennas()))
        throw DomainError("quantize: channel dimension does not match codebook");
    const double hn2 = h.norm2();
    if (hn2 == 0.0)
        throw DomainError("quantize: zero channel vector");

    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const double gain = std::norm(dot(h.span(), cb.word(j)));
        if (gain > best_gain) {
            best_gain = gain;
            best = j;
        }
    }
    ComplexVector h_hat = cb.word_vector(best);
    const double z = angle_sin2(h, h_hat);
    return {best, std::move(h_hat), z};
}

double error_ccdf(double z, int antennas, double bits) {
    check_unit_interval(z, "error_ccdf");
    check_antennas(antennas, "error_ccdf");
    check_bits(bits, "error_ccdf");
    const double x = std::pow(z, antennas - 1);
    return std::exp(std::exp2(bits) * std::log1p(-x));
}

double expected_error(int antennas, double bits) {
    check_antennas(antennas, "expected_error");
    check_bits(bits, "expected_error");
    const double codewords = std::exp2(bits);
    const double a = static_cast<double>(antennas) / (antennas - 1);
    // N B(N, a) = N Gamma(a) Gamma(N)/Gamma(N + a); the ratio is taken directly
    // because differencing log-gammas of size N loses ~log10(N) digits.
    return codewords * std::tgamma(a) * boost::math::tgamma_delta_ratio(codewords, a);
}

double error_upper_bound(int antennas, double bits) {
    check_antennas(antennas, "error_upper_bound");
    check_bits(bits, "error_upper_bound");
    return std::exp2(-bits / (antennas - 1));
}

NegLog2Error expected_neg_log2_error(int antennas, double bits) {
    check_antennas(antennas, "expected_neg_log2_error");
    check_bits(bits, "expected_neg_log2_error");
    const double m1 = antennas - 1;
    return {kLog2E / m1 * harmonic_number(std::exp2(bits)), bits / m1, (bits + kLog2E) / m1};
}

double error_from_uniform(double u, int antennas, double bits) {
    check_antennas(antennas, "error_from_uniform");
    check_bits(bits, "error_from_uniform");
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("error_from_uniform: u must lie in [0, 1]");
    if (u == 0.0)
        return 1.0;
    // 1 - u^{2^-B} without cancellation when 2^-B is tiny.
    const double one_minus = -std::expm1(std::exp2(-bits) * std::log(u));
    return std::pow(one_minus, 1.0 / (antennas - 1));
}

double sample_error(int antennas, double bits, RngStream &rng) {
    return error_from_uniform(rng.uniform(), antennas, bits);
}

ComplexVector perturb_direction(const ComplexVector &base, const ComplexVector &orth, double z) {
    check_unit_interval(z, "perturb_direction");
    if (base.dim() != orth.dim())
        throw DomainError("perturb_direction: dimension mismatch");
    const double a = std::sqrt(1.0 - z);
    const double b = std::sqrt(z);
    ComplexVector out(base.dim());
    for (std::size_t k = 0; k < base.dim(); ++k)
        out[k] = a * base[k] + b * orth[k];
    return out;
}

QuantizedPair sample_quantized_pair(int antennas, double bits, RngStream &rng) {
    check_antennas(antennas, "sample_quantized_pair");
    check_bits(bits, "sample_quantized_pair");
    ComplexVector h_hat = sample_isotropic_unit(static_cast<std::size_t>(antennas), rng);
    const double z = sample_error(antennas, bits, rng);
    const ComplexVector s = sample_orthogonal_unit(h_hat, rng);
    ComplexVector h_tilde = perturb_direction(h_hat, s, z);
    return {std::move(h_tilde), std::move(h_hat), z};
}

double optimal_error_cdf(double z, int antennas, double bits) {
    check_unit_interval(z, "optimal_error_cdf");
    check_antennas(antennas, "optimal_error_cdf");
    check_bits(bits, "optimal_error_cdf");
    if (z == 0.0)
        return 0.0;
    const double log2_value = bits + (antennas - 1) * std::log2(z);
    return log2_value >= 0.0 ? 1.0 : std::exp2(log2_value);
}

double expected_optimal_error(int antennas, double bits) {
    check_antennas(antennas, "expected_optimal_error");
    check_bits(bits, "expected_optimal_error");
    const double m = antennas;
    return (m - 1.0) / m * std::exp2(-bits / (m - 1.0));
}

} // namespace fbmimo
