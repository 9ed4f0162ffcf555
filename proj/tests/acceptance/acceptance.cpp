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

// End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
// status if any criterion fails. Each criterion also carries a runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fbmimo/bounds.hpp"
#include "fbmimo/cli.hpp"
#include "fbmimo/numerics.hpp"
#include "fbmimo/quantizer.hpp"
#include "fbmimo/simulate.hpp"
#include "fbmimo/stats.hpp"

namespace {

using namespace fbmimo;

struct Outcome {
    bool passed;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome()> body;
};

std::string num(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::vector<double> grid(double lo, double step, double hi) {
    std::vector<double> out;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i)
        out.push_back(lo + i * step);
    return out;
}

SimConfig mu_config(int m, std::vector<double> snr, ScalingPolicy policy, std::size_t trials, std::uint64_t seed) {
    SimConfig cfg;
    cfg.antennas = m;
    cfg.users = m;
    cfg.snr_grid_db = std::move(snr);
    cfg.policy = policy;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.experiment = "acceptance";
    return cfg;
}

// Brute-force quantization errors of isotropic channels, one per trial.
std::vector<double> brute_errors(int m, int bits, std::size_t n, std::uint64_t seed) {
    std::vector<double> z(n);
    parallel_for(n, resolve_thread_count(0), [&](std::size_t t) {
        RngStream rng(seed, t);
        const ComplexVector h = sample_complex_gaussian(static_cast<std::size_t>(m), rng);
        z[t] = quantize(h, generate_codebook(m, bits, rng)).error_z;
    });
    return z;
}

Outcome error_mean() {
    Outcome out{true, ""};
    const std::pair<int, int> cases[] = {{2, 2}, {3, 6}, {4, 8}, {5, 10}};
    for (const auto &[m, b] : cases) {
        const std::vector<double> z = brute_errors(m, b, 100000, 1000 + 100 * m + b);
        const SampleSummary s = summarize(z);
        const double expected = expected_error(m, b);
        const double dev = std::abs(s.mean - expected) / s.std_err;
        out.passed = out.passed && dev <= 3.0;
        out.detail += "(M=" + std::to_string(m) + ",B=" + std::to_string(b) + ") mc=" + num(s.mean, 6) +
                      " exact=" + num(expected, 6) + " dev=" + num(dev, 3) + "se; ";
    }
    double worst = 0.0;
    for (int b = 0; b <= 24; ++b) {
        const double closed = 1.0 / (std::exp2(b) + 1.0);
        worst = std::max(worst, std::abs(expected_error(2, b) - closed) / closed);
    }
    out.passed = out.passed && worst < 1e-12;
    out.detail += "M=2 vs 1/(2^B+1) max rel err " + num(worst, 3);
    return out;
}

Outcome error_law() {
    const int m = 3;
    const int b = 4;
    const std::vector<double> z = brute_errors(m, b, 100000, 2024);
    const double d = ks_statistic(z, [&](double x) { return 1.0 - error_ccdf(x, m, b); });
    const double p = kolmogorov_pvalue(d, static_cast<double>(z.size()));
    return {p > 0.01, "D=" + num(d, 4) + " p=" + num(p, 4)};
}

Outcome interference_decomposition() {
    const int m = 4;
    const int b = 6;
    const std::size_t n = 10000;
    SimConfig cfg = mu_config(m, {10.0}, ScalingPolicy::fixed(b), n, 31);
    cfg.path = SimPath::brute_force;
    std::vector<double> pipeline(n);
    std::size_t resamples = 0;
    for (std::size_t t = 0; t < n; ++t) {
        RngStream rng(cfg.seed, t);
        const TrialRecord rec = mu_trial(cfg, 10.0, rng);
        pipeline[t] = rec.coupling_at(0, 1);
        resamples += rec.resamples;
    }
    std::vector<double> product(n);
    for (std::size_t t = 0; t < n; ++t) {
        RngStream rng(77, t);
        const double z = sample_error(m, b, rng);
        const double beta = 1.0 - std::pow(rng.uniform(), 1.0 / (m - 2)); // Beta(1, M-2)
        product[t] = z * beta;
    }
    const double d = ks_statistic_two_sample(pipeline, product);
    const double p = kolmogorov_pvalue(d, n * n / static_cast<double>(2 * n));
    return {p > 0.01, "D=" + num(d, 4) + " p=" + num(p, 4) + " resamples=" + std::to_string(resamples)};
}

Outcome miso_gap() {
    SimConfig cfg;
    cfg.antennas = 4;
    cfg.users = 1;
    cfg.snr_grid_db = grid(0, 1, 30);
    cfg.trials = 20000;
    cfg.seed = 404;
    cfg.path = SimPath::brute_force;
    cfg.csit = CsiSource::perfect;
    const ThroughputCurve csit = miso_feedback_throughput(cfg);
    cfg.csit = CsiSource::quantized;
    cfg.policy = ScalingPolicy::fixed(3);
    const ThroughputCurve feedback = miso_feedback_throughput(cfg);
    const double fb_gap = power_offset_db(csit, feedback, 15, 25);

    ThroughputCurve nocsit(CurveMeta{"acceptance", "nocsit", 4, 1, "none", "isotropic", 0, ""});
    for (double snr : cfg.snr_grid_db)
        nocsit.append({snr, expected_log2_gamma(db_to_linear(snr) / 4.0, 4), 0.0, 0});
    const double nocsit_gap = power_offset_db(csit, nocsit, 15, 25);
    const bool ok = std::abs(fb_gap - 2.7) <= 0.3 && std::abs(nocsit_gap - 6.02) <= 0.1;
    return {ok, "feedback gap " + num(fb_gap) + " dB, no-CSIT gap " + num(nocsit_gap) + " dB"};
}

Outcome fixed_bits_saturation() {
    SimConfig cfg = mu_config(5, {40.0, 50.0}, ScalingPolicy::fixed(10), 10000, 505);
    cfg.path = SimPath::brute_force;
    const ThroughputCurve c = mu_throughput(cfg);
    const double r40 = c.at(40).mean_bps_hz;
    const double r50 = c.at(50).mean_bps_hz;
    const double ceiling = fixed_bits_ceiling(5, 10).exact_form;
    const bool ok = r50 - r40 < 1.0 && r40 <= ceiling && r50 <= ceiling;
    return {ok, "R(40)=" + num(r40) + " R(50)=" + num(r50) + " ceiling=" + num(ceiling) +
                    " resamples=" + std::to_string(c.points().back().resamples)};
}

Outcome scaled_offset() {
    const SimConfig cfg =
        mu_config(5, grid(0, 5, 30), ScalingPolicy::gap_scaled(2.0, ScalingMode::exact), 20000, 606);
    const RateGapResult r = rate_gap(cfg);
    double worst = 0.0;
    for (const auto &p : r.gap.points())
        worst = std::max(worst, p.mean_bps_hz);
    const double offset = power_offset_db(r.perfect, r.quantized, 25, 30);
    const bool ok = worst < 1.0 && std::abs(offset - 2.6) <= 0.4;
    return {ok, "max per-user gap " + num(worst) + " bps/Hz, offset " + num(offset) + " dB"};
}

Outcome six_by_six() {
    Outcome out{true, ""};
    for (const auto &[b, target] : {std::pair{2.0, 2.5}, std::pair{4.0, 5.0}}) {
        const SimConfig cfg =
            mu_config(6, grid(0, 5, 40), ScalingPolicy::gap_scaled(b, ScalingMode::exact), 20000, 707);
        const RateGapResult r = rate_gap(cfg);
        const double offset = power_offset_db(r.perfect, r.quantized, 30, 40);
        out.passed = out.passed && std::abs(offset - target) <= 0.5;
        out.detail += std::string(out.detail.empty() ? "" : "; ") + "b=" + num(b) + " offset " + num(offset) +
                      " dB (target " + num(target) + ")";
    }
    return out;
}

Outcome multiplexing_gain() {
    const int m = 4;
    const SimConfig low = mu_config(m, grid(0, 5, 40), ScalingPolicy::log_scaled(0.5 * (m - 1)), 20000, 808);
    const double slope_low = fit_multiplexing_gain(mu_throughput(low), 20);
    const SimConfig high = mu_config(m, grid(0, 5, 40), ScalingPolicy::log_scaled(1.3 * (m - 1)), 20000, 809);
    const RateGapResult r = rate_gap(high);
    const double slope_high = fit_multiplexing_gain(r.quantized, 20);
    const double g20 = r.gap.at(20).mean_bps_hz;
    const double g30 = r.gap.at(30).mean_bps_hz;
    const double g40 = r.gap.at(40).mean_bps_hz;
    const bool ok =
        std::abs(slope_low - 2.0) <= 0.3 && std::abs(slope_high - 4.0) <= 0.3 && g40 < g30 && g30 < g20;
    return {ok, "slope(alpha=1.5)=" + num(slope_low) + " slope(alpha=3.9)=" + num(slope_high) + " gap 20/30/40 dB " +
                    num(g20, 3) + "/" + num(g30, 3) + "/" + num(g40, 3)};
}

Outcome bound_dominance() {
    const cli::GapGrid g = cli::bound_grid("default");
    std::size_t checked = 0;
    std::size_t failed = 0;
    double worst_margin = -1e300; // largest (gap - bound) / std_err
    for (const auto &[path, trials] : {std::pair{SimPath::brute_force, std::size_t{3000}},
                                       std::pair{SimPath::fast_decomposition, std::size_t{20000}}}) {
        for (const auto &c : cli::check_gap_bound(g, trials, 909, path)) {
            ++checked;
            failed += c.passed ? 0 : 1;
            if (c.std_err > 0)
                worst_margin = std::max(worst_margin, (c.gap - c.bound) / c.std_err);
        }
    }
    return {failed == 0, std::to_string(checked) + " grid points (brute and fast), " + std::to_string(failed) +
                             " violations, closest approach " + num(worst_margin, 3) + " se"};
}

Outcome analytic_values() {
    const double offset = zf_dpc_power_offset_db(5);
    const double bits = feedback_bits(10.0, 4, 2.0, ScalingMode::approx_3db);
    double worst = 0.0;
    for (int m = 2; m <= 64; ++m)
        worst = std::max(worst, rvq_bit_penalty(m));
    const bool ok = std::abs(offset - 5.55) <= 0.01 && std::abs(bits - 10.0) < 1e-12 && worst < 1.4427;
    return {ok, "offset(5)=" + num(offset, 6) + " dB, bits=" + num(bits, 10) + ", max penalty " + num(worst, 6)};
}

Outcome baseline_ordering() {
    const int m = 4;
    const std::size_t trials = 20000;
    SimConfig scaled = mu_config(m, {15.0}, ScalingPolicy::gap_scaled(2.0, ScalingMode::approx_3db), trials, 1111);
    const double zf_scaled = mu_throughput(scaled).at(15).mean_bps_hz;
    SimConfig base = mu_config(m, {15.0, 20.0}, ScalingPolicy::fixed(5), trials, 1112);
    const ThroughputCurve tdma = tdma_throughput(base);
    const ThroughputCurve rbf = random_bf_throughput(base);
    const double zf_b5 = mu_throughput(base).at(20).mean_bps_hz;
    const double t15 = tdma.at(15).mean_bps_hz;
    const double t20 = tdma.at(20).mean_bps_hz;
    const double r15 = rbf.at(15).mean_bps_hz;
    const bool ok = zf_scaled > t15 && t15 > r15 && t20 > zf_b5;
    return {ok, "15 dB: scaled ZF " + num(zf_scaled) + " > TDMA " + num(t15) + " > random BF " + num(r15) +
                    "; 20 dB: TDMA " + num(t20) + " > ZF(B=5) " + num(zf_b5)};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "quantization error mean matches the closed form", 60, error_mean},
        {2, "quantization error follows (1-z^(M-1))^(2^B)", 30, error_law},
        {3, "ZF interference matches Z times Beta(1,M-2)", 120, interference_decomposition},
        {4, "4x1 feedback and no-CSIT power gaps", 120, miso_gap},
        {5, "fixed-B throughput saturates below the ceiling", 300, fixed_bits_saturation},
        {6, "scaled feedback keeps the 5x5 gap under 1 bps/Hz", 180, scaled_offset},
        {7, "6x6 offsets for b=2 and b=4", 240, six_by_six},
        {8, "multiplexing gain follows the feedback scaling", 180, multiplexing_gain},
        {9, "rate-gap bound dominates the simulated gap", 600, bound_dominance},
        {10, "closed-form spot values", 1, analytic_values},
        {11, "scaled ZF, TDMA and random beamforming ordering", 300, baseline_ordering},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.body();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs <= c.budget_s;
        const bool passed = o.passed && in_budget;
        failures += passed ? 0 : 1;
        std::printf("%s [%2d] %s: %s (%.1f s of %.0f s)\n", passed ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
