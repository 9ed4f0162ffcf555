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

#include "fbmimo/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "fbmimo/numerics.hpp"

namespace fbmimo {
namespace {

constexpr double kLog2Of10Over10 = 0.33219280948873623479; // log2(10) / 10

void check_antennas(int antennas, const char *who) {
    if (antennas < 2)
        throw DomainError(std::string(who) + ": need at least 2 antennas");
}

std::string format_number(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

ScalingPolicy ScalingPolicy::fixed(int bits) {
    if (bits < 0)
        throw DomainError("ScalingPolicy: fixed bits must be non-negative");
    return ScalingPolicy(Fixed{bits});
}

ScalingPolicy ScalingPolicy::gap_scaled(double b, ScalingMode mode) {
    if (!(b > 1.0))
        throw DomainError("ScalingPolicy: gap parameter b must exceed 1");
    return ScalingPolicy(GapScaled{b, mode});
}

ScalingPolicy ScalingPolicy::log_scaled(double alpha) {
    if (!(alpha >= 0.0))
        throw DomainError("ScalingPolicy: alpha must be non-negative");
    return ScalingPolicy(LogScaled{alpha});
}

double ScalingPolicy::bits_at(double snr_db, int antennas) const {
    struct Visitor {
        double snr_db;
        int antennas;
        double operator()(const Fixed &f) const { return f.bits; }
        double operator()(const GapScaled &g) const { return feedback_bits(snr_db, antennas, g.b, g.mode); }
        double operator()(const LogScaled &l) const { return std::max(0.0, l.alpha * snr_db * kLog2Of10Over10); }
    };
    return std::visit(Visitor{snr_db, antennas}, kind_);
}

std::string ScalingPolicy::label() const {
    struct Visitor {
        std::string operator()(const Fixed &f) const { return "fixed(B=" + std::to_string(f.bits) + ")"; }
        std::string operator()(const GapScaled &g) const {
            return std::string(g.mode == ScalingMode::exact ? "exact" : "approx3") + "(b=" + format_number(g.b) + ")";
        }
        std::string operator()(const LogScaled &l) const { return "log(alpha=" + format_number(l.alpha) + ")"; }
    };
    return std::visit(Visitor{}, kind_);
}

void ThroughputCurve::append(const CurvePoint &point) {
    if (!points_.empty() && !(point.snr_db > points_.back().snr_db))
        throw DomainError("ThroughputCurve: SNR grid must be strictly increasing");
    if (!(point.std_err >= 0.0))
        throw DomainError("ThroughputCurve: std_err must be non-negative");
    points_.push_back(point);
}

const CurvePoint &ThroughputCurve::at(double snr_db) const {
    for (const auto &p : points_)
        if (std::abs(p.snr_db - snr_db) < 1e-9)
            return p;
    throw InsufficientData("curve '" + meta_.curve + "' has no point at " + format_number(snr_db) + " dB");
}

double rate_gap_bound(double power, int antennas, double bits) {
    check_antennas(antennas, "rate_gap_bound");
    if (!(power > 0.0))
        throw DomainError("rate_gap_bound: power must be positive");
    if (!(bits >= 0.0))
        throw DomainError("rate_gap_bound: bits must be non-negative");
    return std::log2(1.0 + power * std::exp2(-bits / (antennas - 1)));
}

FixedBitsCeiling fixed_bits_ceiling(int antennas, double bits) {
    check_antennas(antennas, "fixed_bits_ceiling");
    if (!(bits >= 0.0))
        throw DomainError("fixed_bits_ceiling: bits must be non-negative");
    const double m = antennas;
    FixedBitsCeiling out{};
    out.exact_form = m * (1.0 + kLog2E / (m - 1.0) * harmonic_number(std::exp2(bits)) +
                          kLog2E * harmonic_number(m - 2.0));
    if (antennas >= 3)
        out.loose = fixed_bits_ceiling_loose(antennas, bits);
    return out;
}

double fixed_bits_ceiling_loose(int antennas, double bits) {
    if (antennas < 3)
        throw DomainError("fixed_bits_ceiling_loose: log2(M-2) is undefined for M < 3");
    const double m = antennas;
    return m * (1.0 + (bits + kLog2E) / (m - 1.0) + kLog2E + std::log2(m - 2.0));
}

double feedback_bits(double snr_db, int antennas, double b, ScalingMode mode) {
    check_antennas(antennas, "feedback_bits");
    if (!(b > 1.0))
        throw DomainError("feedback_bits: b must exceed 1");
    const double m1 = antennas - 1;
    const double slope = mode == ScalingMode::exact ? m1 * kLog2Of10Over10 : m1 / 3.0;
    return std::max(0.0, slope * snr_db - m1 * std::log2(b - 1.0));
}

double mux_gain_prediction(double alpha, int antennas) {
    check_antennas(antennas, "mux_gain_prediction");
    if (!(alpha >= 0.0))
        throw DomainError("mux_gain_prediction: alpha must be non-negative");
    return antennas * std::min(alpha / (antennas - 1), 1.0);
}

double rvq_bit_penalty(int antennas) {
    check_antennas(antennas, "rvq_bit_penalty");
    const double m = antennas;
    return (m - 1.0) * std::log2(m / (m - 1.0));
}

double zf_dpc_power_offset_db(int antennas) {
    check_antennas(antennas, "zf_dpc_power_offset_db");
    double sum = 0.0;
    for (int j = 1; j < antennas; ++j)
        sum += static_cast<double>(j) / (antennas - j);
    return 3.0 * kLog2E / antennas * sum;
}

double fit_multiplexing_gain(const ThroughputCurve &curve, double window_db) {
    if (curve.size() == 0)
        throw InsufficientData("fit_multiplexing_gain: empty curve");
    const double top = curve.points().back().snr_db;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto &p : curve.points())
        if (p.snr_db >= top - window_db - 1e-9) {
            xs.push_back(p.snr_db * kLog2Of10Over10);
            ys.push_back(p.mean_bps_hz);
        }
    if (xs.size() < 3)
        throw InsufficientData("fit_multiplexing_gain: need at least 3 points in the top " + format_number(window_db) +
                               " dB, found " + std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

double snr_for_rate(const ThroughputCurve &reference, double rate) {
    const auto &pts = reference.points();
    if (pts.size() < 2)
        throw InsufficientData("snr_for_rate: reference needs at least 2 points");
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double r0 = pts[i].mean_bps_hz;
        const double r1 = pts[i + 1].mean_bps_hz;
        if (rate >= std::min(r0, r1) && rate <= std::max(r0, r1)) {
            if (r1 == r0)
                return pts[i].snr_db;
            const double t = (rate - r0) / (r1 - r0);
            return pts[i].snr_db + t * (pts[i + 1].snr_db - pts[i].snr_db);
        }
    }
    throw InsufficientData("snr_for_rate: rate " + format_number(rate) + " outside the range of '" +
                           reference.meta().curve + "'");
}

double power_offset_db(const ThroughputCurve &reference, const ThroughputCurve &test, double lo_db, double hi_db) {
    double sum = 0.0;
    int count = 0;
    for (const auto &p : test.points()) {
        if (p.snr_db < lo_db - 1e-9 || p.snr_db > hi_db + 1e-9)
            continue;
        sum += p.snr_db - snr_for_rate(reference, p.mean_bps_hz);
        ++count;
    }
    if (count == 0)
        throw InsufficientData("power_offset_db: no test points inside the window");
    return sum / count;
}

double expected_log2_gamma(double scale, int shape) {
    if (shape < 1)
        throw DomainError("expected_log2_gamma: shape must be at least 1");
    if (!(scale >= 0.0))
        throw DomainError("expected_log2_gamma: scale must be non-negative");
    if (scale == 0.0)
        return 0.0;
    const double log_norm = ln_gamma(shape);
    auto integrand = [&](double x) {
        const double log_pdf = (shape - 1) * std::log(x) - x - log_norm;
        return std::log1p(scale * x) * std::exp(log_pdf);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double nats = integrator.integrate(integrand, 1e-13);
    return nats * kLog2E;
}

MisoReference miso_reference(double power, int antennas, double bits) {
    if (!(power > 0.0))
        throw DomainError("miso_reference: power must be positive");
    check_antennas(antennas, "miso_reference");
    const double loss = 1.0 - std::exp2(-bits / (antennas - 1));
    return {expected_log2_gamma(power, antennas), expected_log2_gamma(power / antennas, antennas),
            expected_log2_gamma(power * loss, antennas)};
}

} // namespace fbmimo
