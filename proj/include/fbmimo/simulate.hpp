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
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmimo/bounds.hpp"
#include "fbmimo/numerics.hpp"
#include "fbmimo/precoder.hpp"

namespace fbmimo {

// Inconsistent simulation configuration. The message names the offending field.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class SimPath {
    brute_force,       // materialise 2^B codewords per user and quantize
    fast_decomposition // draw the quantization error and its geometry directly
};

std::string_view to_string(SimPath path);

struct SimConfig {
    int antennas = 4;
    int users = 4;
    std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
    ScalingPolicy policy = ScalingPolicy::fixed(10);
    PrecoderKind precoder = PrecoderKind::zf;
    CsiSource csit = CsiSource::quantized;
    SimPath path = SimPath::fast_decomposition;
    std::size_t trials = 10000;
    std::uint64_t seed = 42;
    unsigned threads = 0; // 0: hardware concurrency capped by FBMIMO_THREADS
    std::string experiment = "sweep";
    std::string curve; // empty: derived from precoder and CSI source
};

// Bits used at snr_db: the policy value, rounded up on the brute-force path.
double effective_bits(const SimConfig &cfg, double snr_db);

// Everything observed in one multiuser trial at one operating point.
struct TrialRecord {
    std::vector<double> sinr;
    std::vector<double> error_z;  // zeros under perfect CSI
    std::vector<double> coupling; // |h~_i^H v_j|^2, row-major users x users
    std::size_t resamples = 0;

    double coupling_at(std::size_t i, std::size_t j) const { return coupling[i * sinr.size() + j]; }
};

// A single trial of the multiuser pipeline configured by cfg.
TrialRecord mu_trial(const SimConfig &cfg, double snr_db, RngStream &rng);

// Sum throughput sum_i log2(1 + SINR_i) of zero-forcing style precoding.
ThroughputCurve mu_throughput(const SimConfig &cfg);

struct RateGapResult {
    ThroughputCurve gap;       // per-user (R_perfect - R_quantized) / M
    ThroughputCurve perfect;   // same precoder on the true channels
    ThroughputCurve quantized; // precoder on the fed-back directions
};

// Both arms are evaluated on the same channel draws.
RateGapResult rate_gap(const SimConfig &cfg);

// Single user (users must be 1): log2(1 + P |h|^2 (1 - Z)).
ThroughputCurve miso_feedback_throughput(const SimConfig &cfg);

// Full power to the strongest of `users` users: log2(1 + P max_i |h_i|^2).
ThroughputCurve tdma_throughput(const SimConfig &cfg);

// M random orthonormal beams, best-beam index plus SINR feedback, each beam
// served to the reporting user with the highest SINR; unclaimed beams idle.
ThroughputCurve random_bf_throughput(const SimConfig &cfg);

// Worker count: cfg.threads if set, else hardware concurrency capped by the
// FBMIMO_THREADS environment variable.
unsigned resolve_thread_count(unsigned requested);

// Runs fn(i) for i in [0, n) on `threads` workers. Rethrows the first failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn);

} // namespace fbmimo
