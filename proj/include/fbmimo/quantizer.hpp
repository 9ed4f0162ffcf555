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

#include <cstddef>
#include <span>

#include "fbmimo/numerics.hpp"

namespace fbmimo {

// Largest codebook that generate_codebook() will materialise.
inline constexpr int kMaxCodebookBits = 30;

// 2^B unit-norm codewords in C^M, stored one per row.
class Codebook {
  public:
    Codebook(int antennas, int bits, ComplexMatrix words);

    int antennas() const { return antennas_; }
    int bits() const { return bits_; }
    std::size_t size() const { return words_.rows(); }

    std::span<const cdouble> word(std::size_t j) const { return words_.row(j); }
    ComplexVector word_vector(std::size_t j) const;

  private:
    int antennas_;
    int bits_;
    ComplexMatrix words_;
};

struct QuantizationOutcome {
    std::size_t index;
    ComplexVector h_hat; // the selected codeword
    double error_z;      // sin^2 of the angle between h and h_hat
};

// Random vector quantization codebook: 2^B independent isotropic unit vectors.
// Throws CapacityError when bits > max_bits.
Codebook generate_codebook(int antennas, int bits, RngStream &rng, int max_bits = kMaxCodebookBits);

// Nearest codeword by |h^H w|, lowest index on ties.
QuantizationOutcome quantize(const ComplexVector &h, const Codebook &cb);

// Pr(Z >= z) = (1 - z^{M-1})^{2^B}.
double error_ccdf(double z, int antennas, double bits);

// E[Z] = 2^B * beta(2^B, M/(M-1)), evaluated through log-gamma.
double expected_error(int antennas, double bits);

// 2^{-B/(M-1)}; strictly above expected_error().
double error_upper_bound(int antennas, double bits);

struct NegLog2Error {
    double value; // E[-log2 Z] = log2(e)/(M-1) * H(2^B)
    double lower; // B/(M-1)
    double upper; // (B + log2 e)/(M-1)
};
NegLog2Error expected_neg_log2_error(int antennas, double bits);

// Inverse-CDF map from u in (0,1) to the error law: (1 - u^{2^-B})^{1/(M-1)}.
double error_from_uniform(double u, int antennas, double bits);

// One draw of the quantization error without materialising a codebook.
double sample_error(int antennas, double bits, RngStream &rng);

// Unit vector sqrt(1 - z) * base + sqrt(z) * orth, with orth orthogonal to base.
// The result sits at sin^2-angle z from base.
ComplexVector perturb_direction(const ComplexVector &base, const ComplexVector &orth, double z);

struct QuantizedPair {
    ComplexVector h_tilde; // channel direction
    ComplexVector h_hat;   // its quantization
    double error_z;
};

// Channel direction and its quantization drawn jointly via the decomposition
// h_tilde = sqrt(1-Z) h_hat + sqrt(Z) s, s isotropic in the nullspace of h_hat.
QuantizedPair sample_quantized_pair(int antennas, double bits, RngStream &rng);

// Error-CDF lower envelope valid for any B-bit quantizer: min(2^B z^{M-1}, 1).
double optimal_error_cdf(double z, int antennas, double bits);

// Mean of the envelope law: ((M-1)/M) 2^{-B/(M-1)}.
double expected_optimal_error(int antennas, double bits);

} // namespace fbmimo
