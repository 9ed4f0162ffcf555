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

#include "fbmimo/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "fbmimo/quantizer.hpp"
#include "fbmimo/stats.hpp"

namespace fbmimo {
namespace {

constexpr int kMaxResamples = 64;

void check_grid(const std::vector<double> &grid) {
    if (grid.empty())
        throw ConfigError("snr_grid_db: must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]))
            throw ConfigError("snr_grid_db: values must be finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ConfigError("snr_grid_db: must be strictly increasing");
    }
}

void check_common(const SimConfig &cfg, int min_antennas) {
    if (cfg.antennas < min_antennas)
        throw ConfigError("antennas: need at least " + std::to_string(min_antennas));
    if (cfg.users < 1)
        throw ConfigError("users: need at least 1");
    if (cfg.trials < 1)
        throw ConfigError("trials: need at least 1");
    check_grid(cfg.snr_grid_db);
}

// Verifies every grid point maps to a realisable bit budget.
void check_bits(const SimConfig &cfg) {
    for (double snr : cfg.snr_grid_db)
        effective_bits(cfg, snr);
}

CurveMeta make_meta(const SimConfig &cfg, std::string curve, std::string policy, std::string precoder) {
    CurveMeta meta;
    meta.experiment = cfg.experiment;
    meta.curve = std::move(curve);
    meta.antennas = cfg.antennas;
    meta.users = cfg.users;
    meta.policy = std::move(policy);
    meta.precoder = std::move(precoder);
    meta.seed = cfg.seed;
    meta.notes = std::string("path=") + std::string(to_string(cfg.path));
    return meta;
}

std::string default_curve(const SimConfig &cfg) {
    if (!cfg.curve.empty())
        return cfg.curve;
    return std::string(to_string(cfg.precoder)) + "_" + std::string(to_string(cfg.csit));
}

// Trial-major result table. Column j of every row is reduced in trial order,
// so the outcome does not depend on how trials were spread over workers.
class TrialTable {
  public:
    TrialTable(std::size_t trials, std::size_t width) : width_(width), values_(trials * width, 0.0) {}

    double *row(std::size_t trial) { return values_.data() + trial * width_; }
    SampleSummary column(std::size_t j) const { return summarize(values_, width_, j); }

  private:
    std::size_t width_;
    std::vector<double> values_;
};

// One channel realisation plus the feedback state derived from it. Bits are
// applied point by point; the channel never changes within a trial.
class MuTrialState {
  public:
    MuTrialState(const SimConfig &cfg, RngStream &rng) : cfg_(cfg), rng_(rng) { draw(); }

    // Redraws everything after a singular precoder input.
    void redraw() {
        draw();
        current_bits_.reset();
    }

    void apply_bits(double bits) {
        if (current_bits_ && *current_bits_ == bits)
            return;
        current_bits_ = bits;
        zf_cache_.reset();
        const auto users = static_cast<std::size_t>(cfg_.users);
        hats_.clear();
        errors_.assign(users, 0.0);
        for (std::size_t i = 0; i < users; ++i) {
            if (cfg_.path == SimPath::brute_force) {
                const Codebook cb = generate_codebook(cfg_.antennas, static_cast<int>(bits), rng_);
                QuantizationOutcome q = quantize(directions_[i], cb);
                errors_[i] = q.error_z;
                hats_.push_back(std::move(q.h_hat));
            } else {
                errors_[i] = error_from_uniform(uniforms_[i], cfg_.antennas, bits);
                hats_.push_back(perturb_direction(directions_[i], orthogonals_[i], errors_[i]));
            }
        }
    }

    // Beamformers for CSI source `source` at linear power P.
    BeamformerSet beamformers(CsiSource source, double power) {
        const bool perfect = source == CsiSource::perfect;
        if (cfg_.precoder == PrecoderKind::rzf)
            return rzf_beamformers(stack_adjoint_rows(perfect ? channels_ : hats_), power, source);
        auto &cache = perfect ? zf_perfect_ : zf_cache_;
        if (!cache)
            cache = zf_beamformers(stack_adjoint_rows(perfect ? channels_ : hats_), source);
        return *cache;
    }

    double sum_rate(const BeamformerSet &bf, double power) const {
        double total = 0.0;
        for (std::size_t i = 0; i < channels_.size(); ++i)
            total += std::log2(1.0 + sinr(channels_[i], bf, i, power));
        return total;
    }

    TrialRecord record(const BeamformerSet &bf, double power, bool with_errors) const {
        const std::size_t users = channels_.size();
        TrialRecord rec;
        rec.sinr.resize(users);
        rec.error_z = with_errors ? errors_ : std::vector<double>(users, 0.0);
        rec.coupling.resize(users * users);
        for (std::size_t i = 0; i < users; ++i) {
            rec.sinr[i] = sinr(channels_[i], bf, i, power);
            for (std::size_t j = 0; j < users; ++j)
                rec.coupling[i * users + j] = std::norm(dot(directions_[i], bf.vectors[j]));
        }
        return rec;
    }

  private:
    void draw() {
        const auto users = static_cast<std::size_t>(cfg_.users);
        const auto m = static_cast<std::size_t>(cfg_.antennas);
        channels_.clear();
        directions_.clear();
        orthogonals_.clear();
        uniforms_.clear();
        zf_perfect_.reset();
        zf_cache_.reset();
        for (std::size_t i = 0; i < users; ++i) {
            channels_.push_back(sample_complex_gaussian(m, rng_));
            directions_.push_back(channels_.back().normalized());
        }
        if (cfg_.path == SimPath::fast_decomposition && cfg_.csit == CsiSource::quantized) {
            for (std::size_t i = 0; i < users; ++i) {
                orthogonals_.push_back(sample_orthogonal_unit(directions_[i], rng_));
                uniforms_.push_back(rng_.uniform());
            }
        }
    }

    const SimConfig &cfg_;
    RngStream &rng_;
    std::vector<ComplexVector> channels_;
    std::vector<ComplexVector> directions_;
    std::vector<ComplexVector> orthogonals_;
    std::vector<double> uniforms_;
    std::vector<ComplexVector> hats_;
    std::vector<double> errors_;
    std::optional<double> current_bits_;
    std::optional<BeamformerSet> zf_perfect_;
    std::optional<BeamformerSet> zf_cache_;
};

void check_mu(const SimConfig &cfg) {
    check_common(cfg, 2);
    if (cfg.users != cfg.antennas)
        throw ConfigError("users: the multiuser engines serve exactly one user per antenna");
    check_bits(cfg);
}

// Runs body(state) until it completes without a singular precoder input.
// Returns the number of redraws.
template <class Body> std::size_t with_resampling(MuTrialState &state, Body &&body) {
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        try {
            body(state);
            return static_cast<std::size_t>(attempt);
        } catch (const SingularMatrix &) {
            state.redraw();
        }
    }
    throw SingularMatrix("precoder input stayed singular after " + std::to_string(kMaxResamples) + " redraws");
}

std::size_t total_resamples(const std::vector<std::size_t> &per_trial) {
    std::size_t total = 0;
    for (std::size_t r : per_trial)
        total += r;
    return total;
}

} // namespace

std::string_view to_string(SimPath path) { return path == SimPath::brute_force ? "brute" : "fast"; }

double effective_bits(const SimConfig &cfg, double snr_db) {
    double bits = cfg.policy.bits_at(snr_db, cfg.antennas);
    if (cfg.path == SimPath::brute_force) {
        // Tolerance absorbs round-off in policies that land on integers.
        bits = std::max(0.0, std::ceil(bits - 1e-9));
        if (bits > kMaxCodebookBits)
            throw ConfigError("policy: " + std::to_string(static_cast<long long>(bits)) +
                              " bits exceed the brute-force codebook limit of " + std::to_string(kMaxCodebookBits));
    }
    return bits;
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0)
        return requested;
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("FBMIMO_THREADS")) {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0)
            n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn) {
    threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex guard;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned w = 0; w < threads; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(guard);
                        if (!first)
                            first = std::current_exception();
                        failed = true;
                    }
                }
            });
    }
    if (first)
        std::rethrow_exception(first);
}

TrialRecord mu_trial(const SimConfig &cfg, double snr_db, RngStream &rng) {
    check_common(cfg, 2);
    if (cfg.users != cfg.antennas)
        throw ConfigError("users: the multiuser engines serve exactly one user per antenna");
    const double bits = effective_bits(cfg, snr_db);
    const double power = db_to_linear(snr_db);
    const bool quantized = cfg.csit == CsiSource::quantized;
    MuTrialState state(cfg, rng);
    TrialRecord rec;
    const std::size_t resamples = with_resampling(state, [&](MuTrialState &s) {
        if (quantized)
            s.apply_bits(bits);
        rec = s.record(s.beamformers(cfg.csit, power), power, quantized);
    });
    rec.resamples = resamples;
#ifndef NDEBUG
    if (quantized && cfg.precoder == PrecoderKind::zf)
        for (std::size_t i = 0; i < rec.sinr.size(); ++i)
            for (std::size_t j = 0; j < rec.sinr.size(); ++j)
                if (i != j)
                    assert(rec.coupling_at(i, j) <= rec.error_z[i] + 1e-9);
#endif
    return rec;
}

ThroughputCurve mu_throughput(const SimConfig &cfg) {
    check_mu(cfg);
    const std::size_t points = cfg.snr_grid_db.size();
    TrialTable table(cfg.trials, points);
    std::vector<std::size_t> resamples(cfg.trials, 0);
    const bool quantized = cfg.csit == CsiSource::quantized;

    parallel_for(cfg.trials, resolve_thread_count(cfg.threads), [&](std::size_t t) {
        RngStream rng(cfg.seed, t);
        MuTrialState state(cfg, rng);
        double *row = table.row(t);
        resamples[t] = with_resampling(state, [&](MuTrialState &s) {
            for (std::size_t p = 0; p < points; ++p) {
                const double snr = cfg.snr_grid_db[p];
                const double power = db_to_linear(snr);
                if (quantized)
                    s.apply_bits(effective_bits(cfg, snr));
                row[p] = s.sum_rate(s.beamformers(cfg.csit, power), power);
            }
        });
    });

    ThroughputCurve curve(make_meta(cfg, default_curve(cfg), quantized ? cfg.policy.label() : "perfect",
                                    std::string(to_string(cfg.precoder))));
    const std::size_t redraws = total_resamples(resamples);
    for (std::size_t p = 0; p < points; ++p) {
        const SampleSummary s = table.column(p);
        CurvePoint pt;
        pt.snr_db = cfg.snr_grid_db[p];
        pt.mean_bps_hz = s.mean;
        pt.std_err = s.std_err;
        pt.trials = s.count;
        pt.bits = quantized ? effective_bits(cfg, pt.snr_db) : std::numeric_limits<double>::quiet_NaN();
        pt.resamples = redraws;
        curve.append(pt);
    }
    return curve;
}

RateGapResult rate_gap(const SimConfig &cfg) {
    check_mu(cfg);
    const std::size_t points = cfg.snr_grid_db.size();
    // Columns: perfect rate, quantized rate, per-user gap, for each point.
    TrialTable table(cfg.trials, 3 * points);
    std::vector<std::size_t> resamples(cfg.trials, 0);
    const double m = cfg.antennas;

    parallel_for(cfg.trials, resolve_thread_count(cfg.threads), [&](std::size_t t) {
        RngStream rng(cfg.seed, t);
        MuTrialState state(cfg, rng);
        double *row = table.row(t);
        resamples[t] = with_resampling(state, [&](MuTrialState &s) {
            for (std::size_t p = 0; p < points; ++p) {
                const double snr = cfg.snr_grid_db[p];
                const double power = db_to_linear(snr);
                s.apply_bits(effective_bits(cfg, snr));
                const double perfect = s.sum_rate(s.beamformers(CsiSource::perfect, power), power);
                const double quant = s.sum_rate(s.beamformers(CsiSource::quantized, power), power);
                row[3 * p] = perfect;
                row[3 * p + 1] = quant;
                row[3 * p + 2] = (perfect - quant) / m;
            }
        });
    });

    const std::string pre(to_string(cfg.precoder));
    const std::string label = cfg.policy.label();
    RateGapResult out{ThroughputCurve(make_meta(cfg, "rate_gap", label, pre)),
                      ThroughputCurve(make_meta(cfg, pre + "_perfect", "perfect", pre)),
                      ThroughputCurve(make_meta(cfg, pre + "_quantized", label, pre))};
    const std::size_t redraws = total_resamples(resamples);
    for (std::size_t p = 0; p < points; ++p) {
        const double snr = cfg.snr_grid_db[p];
        const double bits = effective_bits(cfg, snr);
        auto point = [&](std::size_t column, double b) {
            const SampleSummary s = table.column(column);
            return CurvePoint{snr, s.mean, s.std_err, s.count, b, redraws};
        };
        out.perfect.append(point(3 * p, std::numeric_limits<double>::quiet_NaN()));
        out.quantized.append(point(3 * p + 1, bits));
        out.gap.append(point(3 * p + 2, bits));
    }
    return out;
}

ThroughputCurve miso_feedback_throughput(const SimConfig &cfg) {
    check_common(cfg, 2);
    if (cfg.users != 1)
        throw ConfigError("users: the single-user engine needs users = 1");
    check_bits(cfg);
    const std::size_t points = cfg.snr_grid_db.size();
    const auto m = static_cast<std::size_t>(cfg.antennas);
    const bool quantized = cfg.csit == CsiSource::quantized;
    TrialTable table(cfg.trials, points);

    parallel_for(cfg.trials, resolve_thread_count(cfg.threads), [&](std::size_t t) {
        RngStream rng(cfg.seed, t);
        const ComplexVector h = sample_complex_gaussian(m, rng);
        const double gain = h.norm2();
        const ComplexVector direction = h.normalized();
        const double u = quantized && cfg.path == SimPath::fast_decomposition ? rng.uniform() : 0.0;
        double *row = table.row(t);
        std::optional<double> last_bits;
        double z = 0.0;
        for (std::size_t p = 0; p < points; ++p) {
            const double snr = cfg.snr_grid_db[p];
            if (quantized) {
                const double bits = effective_bits(cfg, snr);
                if (!last_bits || *last_bits != bits) {
                    last_bits = bits;
                    if (cfg.path == SimPath::brute_force)
                        z = quantize(direction, generate_codebook(cfg.antennas, static_cast<int>(bits), rng)).error_z;
                    else
                        z = error_from_uniform(u, cfg.antennas, bits);
                }
            }
            row[p] = std::log2(1.0 + db_to_linear(snr) * gain * (1.0 - z));
        }
    });

    ThroughputCurve curve(make_meta(cfg, cfg.curve.empty() ? (quantized ? "miso_feedback" : "miso_csit") : cfg.curve,
                                    quantized ? cfg.policy.label() : "perfect", "mrt"));
    for (std::size_t p = 0; p < points; ++p) {
        const SampleSummary s = table.column(p);
        const double snr = cfg.snr_grid_db[p];
        curve.append({snr, s.mean, s.std_err, s.count,
                      quantized ? effective_bits(cfg, snr) : std::numeric_limits<double>::quiet_NaN(), 0});
    }
    return curve;
}

ThroughputCurve tdma_throughput(const SimConfig &cfg) {
    check_common(cfg, 1);
    const std::size_t points = cfg.snr_grid_db.size();
    TrialTable table(cfg.trials, points);

    parallel_for(cfg.trials, resolve_thread_count(cfg.threads), [&](std::size_t t) {
        RngStream rng(cfg.seed, t);
        double best = 0.0;
        for (int i = 0; i < cfg.users; ++i)
            best = std::max(best, rng.gamma(cfg.antennas));
        double *row = table.row(t);
        for (std::size_t p = 0; p < points; ++p)
            row[p] = std::log2(1.0 + db_to_linear(cfg.snr_grid_db[p]) * best);
    });

    ThroughputCurve curve(make_meta(cfg, cfg.curve.empty() ? "tdma" : cfg.curve, "perfect", "tdma"));
    for (std::size_t p = 0; p < points; ++p) {
        const SampleSummary s = table.column(p);
        curve.append({cfg.snr_grid_db[p], s.mean, s.std_err, s.count, std::numeric_limits<double>::quiet_NaN(), 0});
    }
    return curve;
}

ThroughputCurve random_bf_throughput(const SimConfig &cfg) {
    check_common(cfg, 1);
    if (cfg.users < cfg.antennas)
        throw ConfigError("users: random beamforming needs at least as many users as antennas");
    const std::size_t points = cfg.snr_grid_db.size();
    const auto m = static_cast<std::size_t>(cfg.antennas);
    const auto users = static_cast<std::size_t>(cfg.users);
    TrialTable table(cfg.trials, points);

    parallel_for(cfg.trials, resolve_thread_count(cfg.threads), [&](std::size_t t) {
        RngStream rng(cfg.seed, t);
        const ComplexMatrix beams = sample_haar_unitary(m, rng);
        // gains[i * m + b] = |h_i^H phi_b|^2
        std::vector<double> gains(users * m);
        std::vector<double> totals(users, 0.0);
        for (std::size_t i = 0; i < users; ++i) {
            const ComplexVector h = sample_complex_gaussian(m, rng);
            for (std::size_t b = 0; b < m; ++b) {
                gains[i * m + b] = std::norm(dot(h, beams.column(b)));
                totals[i] += gains[i * m + b];
            }
        }
        double *row = table.row(t);
        std::vector<double> served(m);
        for (std::size_t p = 0; p < points; ++p) {
            const double rho = db_to_linear(cfg.snr_grid_db[p]) / static_cast<double>(m);
            std::fill(served.begin(), served.end(), 0.0);
            for (std::size_t i = 0; i < users; ++i) {
                std::size_t best_beam = 0;
                double best_sinr = -1.0;
                for (std::size_t b = 0; b < m; ++b) {
                    const double g = gains[i * m + b];
                    const double s = rho * g / (1.0 + rho * (totals[i] - g));
                    if (s > best_sinr) {
                        best_sinr = s;
                        best_beam = b;
                    }
                }
                served[best_beam] = std::max(served[best_beam], best_sinr);
            }
            double total = 0.0;
            for (double s : served)
                total += std::log2(1.0 + s);
            row[p] = total;
        }
    });

    ThroughputCurve curve(make_meta(cfg, cfg.curve.empty() ? "random_bf" : cfg.curve, "best_beam", "random_bf"));
    for (std::size_t p = 0; p < points; ++p) {
        const SampleSummary s = table.column(p);
        curve.append({cfg.snr_grid_db[p], s.mean, s.std_err, s.count, std::numeric_limits<double>::quiet_NaN(), 0});
    }
    return curve;
}

} // namespace fbmimo
