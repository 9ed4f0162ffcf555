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
#include <string_view>
#include <vector>

#include "fbmimo/numerics.hpp"

namespace fbmimo {

enum class PrecoderKind { zf, rzf };
enum class CsiSource { perfect, quantized };

std::string_view to_string(PrecoderKind kind);
std::string_view to_string(CsiSource source);

// One unit-norm beamformer per stream. Stream i is intended for user i.
struct BeamformerSet {
    PrecoderKind kind;
    CsiSource source;
    std::vector<ComplexVector> vectors;

    std::size_t streams() const { return vectors.size(); }
};

// Normalised columns of G^{-1}, where row i of G is the (conjugated) channel
// estimate of user i. Throws SingularMatrix for a degenerate G.
BeamformerSet zf_beamformers(const ComplexMatrix &g, CsiSource source = CsiSource::quantized);

// Normalised columns of G^H (G G^H + (M/P) I)^{-1}, M = number of antennas.
BeamformerSet rzf_beamformers(const ComplexMatrix &g, double power, CsiSource source = CsiSource::quantized);

// SINR of `user` with equal per-stream power P / streams:
// (P/n)|h^H v_user|^2 / (1 + sum_{j != user} (P/n)|h^H v_j|^2).
double sinr(const ComplexVector &h, const BeamformerSet &bf, std::size_t user, double power);

// Per-user log2(1 + (P/M)|h_i^H v_i|^2) with v from the true channel matrix
// (row i = h_i^H). Zero interference by construction.
std::vector<double> zf_rates_perfect_csit(const ComplexMatrix &h, double power);

} // namespace fbmimo
