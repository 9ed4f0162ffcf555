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
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fbmimo {

// Too few curve points to fit or interpolate.
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ScalingMode {
    exact,     // (M-1) log2 P - (M-1) log2(b-1)
    approx_3db // (M-1)/3 P_dB - (M-1) log2(b-1)
};

// How many feedback bits each user spends at a given operating point.
class ScalingPolicy {
  public:
    struct Fixed {
        int bits;
    };
    struct GapScaled {
        double b; // per-user rate gap target log2(b), b > 1
        ScalingMode mode;
    };
    struct LogScaled {
        double alpha; // B = alpha * log2 P
    };
    using Kind = std::variant<Fixed, GapScaled, LogScaled>;

    static ScalingPolicy fixed(int bits);
    static ScalingPolicy gap_scaled(double b, ScalingMode mode);
    static ScalingPolicy log_scaled(double alpha);

    const Kind &kind() const { return kind_; }
    bool is_fixed() const { return std::holds_alternative<Fixed>(kind_); }

    // Real-valued bit budget at snr_db for M antennas (never negative).
    double bits_at(double snr_db, int antennas) const;

    std::string label() const;

  private:
    explicit ScalingPolicy(Kind kind) : kind_(kind) {}
    Kind kind_;
};

struct CurvePoint {
    double snr_db = 0.0;
    double mean_bps_hz = 0.0;
    double std_err = 0.0;
    std::size_t trials = 0;
    // Bits actually used at this point; NaN when feedback is not involved.
    double bits = std::numeric_limits<double>::quiet_NaN();
    std::size_t resamples = 0;
};

struct CurveMeta {
    std::string experiment;
    std::string curve;
    int antennas = 0;
    int users = 0;
    std::string policy = "none";
    std::string precoder = "none";
    std::uint64_t seed = 0;
    std::string notes;
};

class ThroughputCurve {
  public:
    ThroughputCurve() = default;
    explicit ThroughputCurve(CurveMeta meta) : meta_(std::move(meta)) {}

    // Points must arrive with strictly increasing SNR and non-negative std_err.
    void append(const CurvePoint &point);

    const CurveMeta &meta() const { return meta_; }
    CurveMeta &meta() { return meta_; }
    const std::vector<CurvePoint> &points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    // Mean at exactly this grid SNR; throws InsufficientData if absent.
    const CurvePoint &at(double snr_db) const;

  private:
    CurveMeta meta_;
    std::vector<CurvePoint> points_;
};

// Per-user rate-gap bound log2(1 + P 2^{-B/(M-1)}).
double rate_gap_bound(double power, int antennas, double bits);

struct FixedBitsCeiling {
    std::optional<double> loose; // absent for M = 2
    double exact_form;
};

// High-SNR throughput ceiling for a fixed B. The loose form
// M(1 + (B + log2 e)/(M-1) + log2 e + log2(M-2)) needs M >= 3; the harmonic
// form M(1 + log2e/(M-1) H(2^B) + log2e H(M-2)) holds for every M >= 2.
FixedBitsCeiling fixed_bits_ceiling(int antennas, double bits);

// Loose form only; throws DomainError at M = 2.
double fixed_bits_ceiling_loose(int antennas, double bits);

// Bits per user that keep the per-user gap below log2(b), clamped at 0.
double feedback_bits(double snr_db, int antennas, double b, ScalingMode mode);

// M * min(alpha/(M-1), 1).
double mux_gain_prediction(double alpha, int antennas);

// (M-1) log2(M/(M-1)) bits; never above log2 e.
double rvq_bit_penalty(int antennas);

// High-SNR power offset of zero forcing relative to dirty-paper coding, in dB.
double zf_dpc_power_offset_db(int antennas);

// Least-squares slope of throughput against log2 P over the top window_db of
// the sweep. Throws InsufficientData with fewer than 3 points in the window.
double fit_multiplexing_gain(const ThroughputCurve &curve, double window_db = 20.0);

// SNR at which the piecewise-linear reference curve reaches `rate`.
double snr_for_rate(const ThroughputCurve &reference, double rate);

// Mean horizontal distance (dB) from `reference` to `test`, averaged over the
// test points inside [lo_db, hi_db]. Positive when test needs more power.
double power_offset_db(const ThroughputCurve &reference, const ThroughputCurve &test, double lo_db, double hi_db);

// E[log2(1 + scale * X)] for X ~ Gamma(shape, 1).
double expected_log2_gamma(double scale, int shape);

struct MisoReference {
    double c_csit;      // E[log2(1 + P |h|^2)]
    double c_nocsit;    // E[log2(1 + (P/M) |h|^2)]
    double r_fb_approx; // E[log2(1 + P |h|^2 (1 - 2^{-B/(M-1)}))]
};

MisoReference miso_reference(double power, int antennas, double bits);

} // namespace fbmimo
