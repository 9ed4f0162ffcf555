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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "fbmimo/bounds.hpp"
#include "fbmimo/numerics.hpp"

using namespace fbmimo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// E[log2(1 + rho X)], X ~ Gamma(m, 1), via exponential integrals:
// E[ln(1 + rho X)] = e^{1/rho} sum_{k=1}^{m} E_k(1/rho).
double log2_gamma_oracle(double rho, int m) {
    double sum = 0.0;
    for (int k = 1; k <= m; ++k)
        sum += boost::math::expint(k, 1.0 / rho);
    return std::exp(1.0 / rho) * sum / std::log(2.0);
}

ThroughputCurve line_curve(double slope, double intercept, double lo, double hi, double step) {
    ThroughputCurve c(CurveMeta{"test", "line", 4, 4, "none", "none", 0, ""});
    for (double snr = lo; snr <= hi + 1e-9; snr += step)
        c.append({snr, slope * snr * std::log2(10.0) / 10.0 + intercept, 0.0, 1});
    return c;
}

ThroughputCurve analytic_curve(double scale_db, int m, double lo, double hi, double step) {
    ThroughputCurve c(CurveMeta{"test", "analytic", m, 1, "none", "none", 0, ""});
    for (double snr = lo; snr <= hi + 1e-9; snr += step)
        c.append({snr, expected_log2_gamma(db_to_linear(snr + scale_db), m), 0.0, 0});
    return c;
}

} // namespace

TEST_CASE("scaling policies") {
    const ScalingPolicy fixed = ScalingPolicy::fixed(10);
    CHECK(fixed.is_fixed());
    CHECK(fixed.bits_at(-5.0, 4) == 10.0);
    CHECK(fixed.label() == "fixed(B=10)");

    const ScalingPolicy approx = ScalingPolicy::gap_scaled(2.0, ScalingMode::approx_3db);
    CHECK_THAT(approx.bits_at(10.0, 4), WithinAbs(10.0, 1e-12));
    CHECK(approx.bits_at(-10.0, 4) == 0.0);
    CHECK(approx.label() == "approx3(b=2)");

    const ScalingPolicy exact = ScalingPolicy::gap_scaled(2.0, ScalingMode::exact);
    CHECK_THAT(exact.bits_at(20.0, 5), WithinRel(4.0 * std::log2(100.0), 1e-14));
    CHECK(exact.label() == "exact(b=2)");

    const ScalingPolicy log = ScalingPolicy::log_scaled(1.5);
    CHECK_THAT(log.bits_at(30.0, 4), WithinRel(1.5 * std::log2(1000.0), 1e-14));
    CHECK(log.label() == "log(alpha=1.5)");

    CHECK_THROWS_AS(ScalingPolicy::gap_scaled(1.0, ScalingMode::exact), DomainError);
    CHECK_THROWS_AS(ScalingPolicy::fixed(-1), DomainError);
    CHECK_THROWS_AS(ScalingPolicy::log_scaled(-0.1), DomainError);
}

TEST_CASE("throughput curve invariants") {
    ThroughputCurve c(CurveMeta{"e", "c", 2, 2, "none", "none", 1, ""});
    c.append({0.0, 1.0, 0.1, 10});
    CHECK_THROWS_AS(c.append({0.0, 2.0, 0.1, 10}), DomainError);
    CHECK_THROWS_AS(c.append({-1.0, 2.0, 0.1, 10}), DomainError);
    CHECK_THROWS_AS(c.append({1.0, 2.0, -0.1, 10}), DomainError);
    c.append({5.0, 2.0, 0.0, 10});
    CHECK(c.at(5.0).mean_bps_hz == 2.0);
    CHECK_THROWS_AS(c.at(7.0), InsufficientData);
}

TEST_CASE("rate-gap bound") {
    CHECK_THAT(rate_gap_bound(10.0, 4, 0.0), WithinRel(std::log2(11.0), 1e-15));
    CHECK_THAT(rate_gap_bound(10.0, 4, 0.0), WithinAbs(3.459, 1e-3));
    CHECK(rate_gap_bound(1e3, 4, 2000.0) < 1e-12);
    // Bits scaled with the exact rule for b = 2 give a bound of exactly log2 2.
    const double bits = feedback_bits(20.0, 5, 2.0, ScalingMode::exact);
    CHECK_THAT(rate_gap_bound(100.0, 5, bits), WithinAbs(1.0, 1e-12));
    for (double b : {1.5, 2.0, 4.0})
        for (double snr : {5.0, 17.0, 33.0})
            REQUIRE_THAT(rate_gap_bound(db_to_linear(snr), 6, feedback_bits(snr, 6, b, ScalingMode::exact)),
                         WithinAbs(std::log2(b), 1e-9));
    CHECK_THROWS_AS(rate_gap_bound(0.0, 4, 1.0), DomainError);
    CHECK_THROWS_AS(rate_gap_bound(1.0, 1, 1.0), DomainError);
}

TEST_CASE("fixed-B ceiling") {
    const FixedBitsCeiling c = fixed_bits_ceiling(5, 10);
    REQUIRE(c.loose.has_value());
    CHECK_THAT(*c.loose, WithinRel(5.0 * (1.0 + (10.0 + kLog2E) / 4.0 + kLog2E + std::log2(3.0)), 1e-14));
    CHECK_THAT(*c.loose, WithinAbs(34.44, 5e-3));

    double h1024 = 0.0;
    for (int k = 1; k <= 1024; ++k)
        h1024 += 1.0 / k;
    CHECK_THAT(c.exact_form, WithinRel(5.0 * (1.0 + kLog2E / 4.0 * h1024 + kLog2E * (1.0 + 0.5 + 1.0 / 3.0)), 1e-13));

    for (int m = 3; m <= 8; ++m)
        for (int b = 0; b <= 20; ++b) {
            const FixedBitsCeiling x = fixed_bits_ceiling(m, b);
            REQUIRE(x.exact_form <= *x.loose);
        }

    const FixedBitsCeiling two = fixed_bits_ceiling(2, 0);
    CHECK_FALSE(two.loose.has_value());
    CHECK_THAT(two.exact_form, WithinRel(2.0 * (1.0 + kLog2E), 1e-15));
    CHECK_THAT(two.exact_form, WithinAbs(4.885, 1e-3));
    CHECK_THROWS_AS(fixed_bits_ceiling_loose(2, 3), DomainError);
}

TEST_CASE("feedback bits") {
    CHECK_THAT(feedback_bits(10.0, 4, 2.0, ScalingMode::approx_3db), WithinAbs(10.0, 1e-12));
    CHECK_THAT(feedback_bits(30.0, 5, 2.0, ScalingMode::approx_3db), WithinAbs(40.0, 1e-12));
    CHECK_THAT(feedback_bits(30.0, 5, 2.0, ScalingMode::exact), WithinRel(4.0 * 30.0 * std::log2(10.0) / 10.0, 1e-14));
    CHECK(feedback_bits(-20.0, 5, 2.0, ScalingMode::exact) == 0.0);
    for (int m = 2; m <= 8; ++m) {
        const double extra = feedback_bits(25.0, m, std::pow(10.0, 0.1), ScalingMode::approx_3db) -
                             feedback_bits(25.0, m, 2.0, ScalingMode::approx_3db);
        REQUIRE_THAT(extra, WithinRel((m - 1) * std::log2(1.0 / (std::pow(10.0, 0.1) - 1.0)), 1e-12));
        REQUIRE_THAT(extra / (m - 1), WithinAbs(1.95, 0.01));
    }
    for (int m = 2; m <= 8; ++m)
        for (double snr = 0.0; snr <= 40.0; snr += 2.5)
            REQUIRE_THAT(feedback_bits(snr, m, 2.0, ScalingMode::approx_3db), WithinAbs((m - 1) / 3.0 * snr, 1e-12));
    CHECK_THROWS_AS(feedback_bits(10.0, 4, 1.0, ScalingMode::exact), DomainError);
    CHECK_THROWS_AS(feedback_bits(10.0, 4, 0.5, ScalingMode::approx_3db), DomainError);
}

TEST_CASE("multiplexing gain prediction") {
    CHECK(mux_gain_prediction(1.5, 4) == 2.0);
    CHECK(mux_gain_prediction(3.0, 4) == 4.0);
    CHECK(mux_gain_prediction(5.0, 4) == 4.0);
    CHECK(mux_gain_prediction(0.0, 4) == 0.0);
    CHECK_THROWS_AS(mux_gain_prediction(-1.0, 4), DomainError);
}

TEST_CASE("random codebook bit penalty") {
    CHECK_THAT(rvq_bit_penalty(2), WithinRel(1.0, 1e-15));
    for (int m = 2; m <= 64; ++m) {
        REQUIRE(rvq_bit_penalty(m) < 1.442696);
        if (m > 2)
            REQUIRE(rvq_bit_penalty(m) > rvq_bit_penalty(m - 1));
    }
    CHECK_THAT(rvq_bit_penalty(1 << 20), WithinAbs(kLog2E, 1e-6));
}

TEST_CASE("ZF to sum-capacity power offset") {
    CHECK_THAT(zf_dpc_power_offset_db(5), WithinAbs(5.55, 0.01));
    CHECK_THAT(zf_dpc_power_offset_db(2), WithinRel(3.0 * kLog2E / 2.0, 1e-15));
    CHECK_THAT(zf_dpc_power_offset_db(2), WithinAbs(2.164, 1e-3));
    // Ratio to 3 log2 M approaches 1 from below as M grows.
    double previous = 0.0;
    for (int m : {16, 256, 4096, 65536, 1 << 20}) {
        const double ratio = zf_dpc_power_offset_db(m) / (3.0 * std::log2(static_cast<double>(m)));
        REQUIRE(ratio > previous);
        REQUIRE(ratio < 1.0);
        previous = ratio;
    }
    CHECK(previous > 0.96);
}

TEST_CASE("multiplexing gain fit") {
    CHECK_THAT(fit_multiplexing_gain(line_curve(4.0, 7.0, 0, 40, 5)), WithinAbs(4.0, 1e-9));
    CHECK_THAT(fit_multiplexing_gain(line_curve(0.0, 12.0, 0, 40, 5)), WithinAbs(0.0, 1e-9));
    // Only the top window counts: a kink below it is ignored.
    ThroughputCurve kinked(CurveMeta{"t", "k", 2, 2, "none", "none", 0, ""});
    for (double snr = 0; snr <= 40; snr += 5)
        kinked.append({snr, snr < 20 ? 0.0 : 2.0 * snr * std::log2(10.0) / 10.0, 0.0, 1});
    CHECK_THAT(fit_multiplexing_gain(kinked, 20), WithinAbs(2.0, 1e-9));
    CHECK_THROWS_AS(fit_multiplexing_gain(line_curve(1.0, 0.0, 0, 40, 15)), InsufficientData);
    CHECK_THROWS_AS(fit_multiplexing_gain(ThroughputCurve{}), InsufficientData);
}

TEST_CASE("horizontal offsets between curves") {
    const ThroughputCurve ref = line_curve(4.0, 0.0, 0, 40, 5);
    const ThroughputCurve shifted = line_curve(4.0, -4.0 * 3.0 * std::log2(10.0) / 10.0, 0, 40, 5);
    CHECK_THAT(snr_for_rate(ref, ref.at(20).mean_bps_hz), WithinAbs(20.0, 1e-12));
    CHECK_THAT(power_offset_db(ref, shifted, 10, 40), WithinAbs(3.0, 1e-9));
    CHECK_THROWS_AS(snr_for_rate(ref, 1e6), InsufficientData);
    CHECK_THROWS_AS(power_offset_db(ref, shifted, 50, 60), InsufficientData);
}

TEST_CASE("Gamma-weighted log expectation") {
    for (int m : {1, 2, 4, 8})
        for (double rho : {0.05, 0.7, 3.7, 100.0, 1e6})
            REQUIRE_THAT(expected_log2_gamma(rho, m), WithinRel(log2_gamma_oracle(rho, m), 1e-10));
    CHECK(expected_log2_gamma(0.0, 3) == 0.0);
    CHECK_THROWS_AS(expected_log2_gamma(1.0, 0), DomainError);
}

TEST_CASE("single-user reference values") {
    for (double snr : {0.0, 10.0, 25.0}) {
        const double p = db_to_linear(snr);
        const MisoReference r = miso_reference(p, 4, 3);
        CHECK_THAT(r.c_nocsit, WithinRel(miso_reference(p / 4.0, 4, 3).c_csit, 1e-12));
        CHECK_THAT(r.c_csit, WithinRel(log2_gamma_oracle(p, 4), 1e-10));
        CHECK_THAT(r.r_fb_approx, WithinRel(log2_gamma_oracle(p * 0.5, 4), 1e-10));
    }
    // Horizontal gaps at high SNR: 10 log10 M for no CSI, 10 log10(1/(1 - 2^{-B/(M-1)})) for feedback.
    const ThroughputCurve csit = analytic_curve(0.0, 4, 40, 70, 1);
    const ThroughputCurve nocsit = analytic_curve(-10.0 * std::log10(4.0), 4, 40, 70, 1);
    CHECK_THAT(power_offset_db(csit, nocsit, 50, 60), WithinAbs(6.0206, 1e-4));
    ThroughputCurve fb(CurveMeta{"t", "fb", 4, 1, "none", "none", 0, ""});
    for (double snr = 40; snr <= 70; snr += 1)
        fb.append({snr, miso_reference(db_to_linear(snr), 4, 3).r_fb_approx, 0.0, 0});
    CHECK_THAT(power_offset_db(csit, fb, 50, 60), WithinAbs(3.0103, 1e-3));
}
