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

#include "fbmimo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbmimo/quantizer.hpp"

namespace fbmimo::cli {
namespace {

using nlohmann::json;

std::string fmt(double x, int digits = 10) {
    if (std::isnan(x))
        return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

bool is_figure_id(std::string_view id) {
    return std::find(std::begin(kFigureIds), std::end(kFigureIds), id) != std::end(kFigureIds);
}

std::vector<double> arange(double lo, double step, double hi) {
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double x = lo + i * step;
        if (x > hi + 1e-9)
            break;
        out.push_back(x);
    }
    return out;
}

double parse_number(std::string_view text, const char *field) {
    const std::string s(text);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception &) {
        throw ConfigError(std::string(field) + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(value))
        throw ConfigError(std::string(field) + ": '" + s + "' is not a number");
    return value;
}

int parse_int(std::string_view text, const char *field) {
    const double v = parse_number(text, field);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigError(std::string(field) + ": '" + std::string(text) + "' is not an integer");
    return static_cast<int>(v);
}

PrecoderKind parse_precoder(std::string_view text) {
    if (text == "zf")
        return PrecoderKind::zf;
    if (text == "rzf")
        return PrecoderKind::rzf;
    throw ConfigError("precoder: expected zf or rzf, got '" + std::string(text) + "'");
}

CsiSource parse_csit(std::string_view text) {
    if (text == "perfect")
        return CsiSource::perfect;
    if (text == "quantized")
        return CsiSource::quantized;
    throw ConfigError("csit: expected perfect or quantized, got '" + std::string(text) + "'");
}

std::string check_engine(std::string_view text) {
    static constexpr std::string_view engines[] = {"mu", "rate_gap", "miso", "tdma", "random_bf"};
    if (std::find(std::begin(engines), std::end(engines), text) == std::end(engines))
        throw ConfigError("engine: expected one of mu, rate_gap, miso, tdma, random_bf, got '" + std::string(text) +
                          "'");
    return std::string(text);
}

std::string check_grid_name(std::string_view text) {
    if (text != "default" && text != "quick")
        throw ConfigError("grid: expected default or quick, got '" + std::string(text) + "'");
    return std::string(text);
}

// Integer-valued JSON field with a lower bound.
long long json_integer(const json &value, const char *field, long long min) {
    if (!value.is_number_integer())
        throw ConfigError(std::string(field) + ": expected an integer");
    const long long v = value.is_number_unsigned() ? static_cast<long long>(value.get<std::uint64_t>())
                                                   : value.get<long long>();
    if (v < min)
        throw ConfigError(std::string(field) + ": must be at least " + std::to_string(min));
    return v;
}

std::string json_string(const json &value, const char *field) {
    if (!value.is_string())
        throw ConfigError(std::string(field) + ": expected a string");
    return value.get<std::string>();
}

void set_target(ExperimentSpec &spec, Command command, std::string target, const char *field) {
    if (spec.command != command)
        throw ConfigError(std::string(field) + ": only valid with command '" + field + "'");
    spec.target = std::move(target);
}

SimConfig preset_config(const ExperimentSpec &spec, std::string_view figure, int antennas,
                        std::vector<double> default_grid) {
    SimConfig cfg;
    cfg.antennas = antennas;
    cfg.users = antennas;
    cfg.snr_grid_db = spec.grid_explicit ? spec.snr_grid_db : std::move(default_grid);
    cfg.path = spec.path;
    cfg.trials = spec.trials;
    cfg.seed = spec.seed;
    cfg.threads = spec.threads;
    cfg.experiment = std::string(figure);
    return cfg;
}

ThroughputCurve quantized_curve(SimConfig cfg, ScalingPolicy policy, PrecoderKind precoder, std::string name) {
    cfg.policy = policy;
    cfg.precoder = precoder;
    cfg.csit = CsiSource::quantized;
    cfg.curve = std::move(name);
    return mu_throughput(cfg);
}

ThroughputCurve perfect_curve(SimConfig cfg, PrecoderKind precoder) {
    cfg.precoder = precoder;
    cfg.csit = CsiSource::perfect;
    cfg.curve = std::string(to_string(precoder)) + "_perfect";
    return mu_throughput(cfg);
}

ThroughputCurve baseline_curve(SimConfig cfg, bool tdma) {
    cfg.curve.clear();
    return tdma ? tdma_throughput(cfg) : random_bf_throughput(cfg);
}

// Perfect-CSI ZF moved left by the analytic ZF-to-sum-capacity offset.
ThroughputCurve sum_capacity_reference(const ThroughputCurve &zf_perfect) {
    const int m = zf_perfect.meta().antennas;
    const double offset = zf_dpc_power_offset_db(m);
    CurveMeta meta = zf_perfect.meta();
    meta.curve = "sum_capacity_offset_reference";
    meta.policy = "analytic_offset";
    meta.precoder = "zf_shifted_" + fmt(offset, 4) + "dB";
    ThroughputCurve out(meta);
    for (CurvePoint p : zf_perfect.points()) {
        p.snr_db -= offset;
        out.append(p);
    }
    return out;
}

ThroughputCurve analytic_curve(const SimConfig &cfg, std::string name, std::string precoder,
                               double (*value)(double power, int antennas)) {
    CurveMeta meta;
    meta.experiment = cfg.experiment;
    meta.curve = std::move(name);
    meta.antennas = cfg.antennas;
    meta.users = cfg.users;
    meta.policy = "analytic";
    meta.precoder = std::move(precoder);
    meta.seed = cfg.seed;
    ThroughputCurve out(meta);
    for (double snr : cfg.snr_grid_db)
        out.append({snr, value(db_to_linear(snr), cfg.antennas), 0.0, 0, std::numeric_limits<double>::quiet_NaN(), 0});
    return out;
}

ScalingPolicy approx3(double b) { return ScalingPolicy::gap_scaled(b, ScalingMode::approx_3db); }

std::vector<ThroughputCurve> figure_miso(const ExperimentSpec &spec) {
    SimConfig cfg = preset_config(spec, "miso4x1", 4, arange(0, 5, 30));
    cfg.users = 1;
    std::vector<ThroughputCurve> out;
    cfg.csit = CsiSource::perfect;
    cfg.curve = "csit";
    out.push_back(miso_feedback_throughput(cfg));
    cfg.csit = CsiSource::quantized;
    cfg.policy = ScalingPolicy::fixed(3);
    cfg.curve = "feedback_B3";
    out.push_back(miso_feedback_throughput(cfg));
    out.push_back(analytic_curve(cfg, "nocsit", "isotropic", [](double power, int antennas) {
        return expected_log2_gamma(power / antennas, antennas);
    }));
    return out;
}

std::vector<ThroughputCurve> figure_fixed5x5(const ExperimentSpec &spec) {
    const SimConfig cfg = preset_config(spec, "fixed5x5", 5, arange(0, 5, 40));
    std::vector<ThroughputCurve> out{perfect_curve(cfg, PrecoderKind::zf)};
    for (int bits : {10, 15, 20})
        out.push_back(quantized_curve(cfg, ScalingPolicy::fixed(bits), PrecoderKind::zf,
                                      "zf_quantized_B" + std::to_string(bits)));
    return out;
}

std::vector<ThroughputCurve> figure_scaled5x5(const ExperimentSpec &spec) {
    const SimConfig cfg = preset_config(spec, "scaled5x5", 5, arange(0, 5, 25));
    std::vector<ThroughputCurve> out{perfect_curve(cfg, PrecoderKind::zf)};
    out.push_back(quantized_curve(cfg, approx3(2.0), PrecoderKind::zf, "zf_quantized_scaled"));
    out.push_back(sum_capacity_reference(out.front()));
    return out;
}

std::vector<ThroughputCurve> figure_scaled6x6(const ExperimentSpec &spec) {
    const SimConfig cfg = preset_config(spec, "scaled6x6", 6, arange(0, 5, 30));
    std::vector<ThroughputCurve> out{perfect_curve(cfg, PrecoderKind::zf)};
    out.push_back(quantized_curve(cfg, approx3(2.0), PrecoderKind::zf, "zf_quantized_b2"));
    out.push_back(quantized_curve(cfg, approx3(4.0), PrecoderKind::zf, "zf_quantized_b4"));
    return out;
}

std::vector<ThroughputCurve> figure_mux4x4(const ExperimentSpec &spec) {
    const SimConfig cfg = preset_config(spec, "mux4x4", 4, arange(0, 5, 40));
    std::vector<ThroughputCurve> out{perfect_curve(cfg, PrecoderKind::zf)};
    for (double factor : {0.5, 1.3}) {
        const double alpha = factor * (cfg.antennas - 1);
        out.push_back(quantized_curve(cfg, ScalingPolicy::log_scaled(alpha), PrecoderKind::zf,
                                      "zf_quantized_alpha" + fmt(alpha, 4)));
    }
    return out;
}

std::vector<ThroughputCurve> figure_reg5x5(const ExperimentSpec &spec) {
    const SimConfig cfg = preset_config(spec, "reg5x5", 5, arange(0, 5, 30));
    return {perfect_curve(cfg, PrecoderKind::zf), perfect_curve(cfg, PrecoderKind::rzf),
            quantized_curve(cfg, approx3(2.0), PrecoderKind::zf, "zf_quantized_scaled"),
            quantized_curve(cfg, approx3(2.0), PrecoderKind::rzf, "rzf_quantized_scaled")};
}

std::vector<ThroughputCurve> figure_compare(const ExperimentSpec &spec, std::string_view id, int antennas,
                                            bool scaled, const std::vector<int> &fixed_bits) {
    const SimConfig cfg = preset_config(spec, id, antennas, arange(0, 5, 30));
    std::vector<ThroughputCurve> out;
    if (scaled)
        out.push_back(quantized_curve(cfg, approx3(2.0), PrecoderKind::rzf, "rzf_quantized_scaled"));
    for (int bits : fixed_bits)
        out.push_back(quantized_curve(cfg, ScalingPolicy::fixed(bits), PrecoderKind::rzf,
                                      "rzf_quantized_B" + std::to_string(bits)));
    out.push_back(baseline_curve(cfg, true));
    out.push_back(baseline_curve(cfg, false));
    return out;
}

void write_quantizer_table(std::ostream &os, const ExperimentSpec &spec) {
    os << "B,expected_error,upper_bound,optimal_lower_mean,neg_log2_mean\n";
    for (int b = spec.bits_lo; b <= spec.bits_hi; ++b) {
        os << b << ',' << fmt(expected_error(spec.antennas, b)) << ',' << fmt(error_upper_bound(spec.antennas, b))
           << ',' << fmt(expected_optimal_error(spec.antennas, b)) << ','
           << fmt(expected_neg_log2_error(spec.antennas, b).value) << '\n';
    }
}

void write_scaling_table(std::ostream &os, const ExperimentSpec &spec) {
    os << "snr_db,bits_exact,bits_approx3,rate_gap_bound_exact,rate_gap_bound_approx3\n";
    for (double snr : spec.snr_grid_db) {
        const double exact = feedback_bits(snr, spec.antennas, spec.gap_b, ScalingMode::exact);
        const double approx = feedback_bits(snr, spec.antennas, spec.gap_b, ScalingMode::approx_3db);
        const double power = db_to_linear(snr);
        os << fmt(snr) << ',' << fmt(exact) << ',' << fmt(approx) << ','
           << fmt(rate_gap_bound(power, spec.antennas, exact)) << ','
           << fmt(rate_gap_bound(power, spec.antennas, approx)) << '\n';
    }
}

void write_offsets_table(std::ostream &os, const ExperimentSpec &spec) {
    os << "M,zf_dpc_offset_db,rvq_bit_penalty,ceiling_exact_form,ceiling_loose\n";
    for (int m = 2; m <= std::max(2, spec.antennas); ++m) {
        const FixedBitsCeiling c = fixed_bits_ceiling(m, spec.bits_hi);
        os << m << ',' << fmt(zf_dpc_power_offset_db(m)) << ',' << fmt(rvq_bit_penalty(m)) << ','
           << fmt(c.exact_form) << ',' << (c.loose ? fmt(*c.loose) : std::string()) << '\n';
    }
}

// Grid check of a deterministic property; reports the first violation.
struct PropertyResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

PropertyResult check_mean_error_bound() {
    PropertyResult r{"mean quantization error below 2^(-B/(M-1)) for M 2..8, B 0..20", true, ""};
    for (int m = 2; m <= 8 && r.passed; ++m)
        for (int b = 0; b <= 20; ++b)
            if (!(expected_error(m, b) < error_upper_bound(m, b))) {
                r.passed = false;
                r.detail = "M=" + std::to_string(m) + " B=" + std::to_string(b);
                break;
            }
    return r;
}

PropertyResult check_neg_log2_bracket() {
    PropertyResult r{"E[-log2 Z] inside [B/(M-1), (B+log2 e)/(M-1)] for M 2..8, B 0..20", true, ""};
    for (int m = 2; m <= 8 && r.passed; ++m)
        for (int b = 0; b <= 20; ++b) {
            const NegLog2Error n = expected_neg_log2_error(m, b);
            if (!(n.lower <= n.value + 1e-12 && n.value <= n.upper + 1e-12)) {
                r.passed = false;
                r.detail = "M=" + std::to_string(m) + " B=" + std::to_string(b);
                break;
            }
        }
    return r;
}

PropertyResult check_envelope_dominance() {
    PropertyResult r{"optimal-quantizer CDF envelope dominates the random codebook CDF", true, ""};
    for (int m = 2; m <= 6 && r.passed; ++m)
        for (int b = 0; b <= 12 && r.passed; ++b)
            for (int k = 0; k <= 100; ++k) {
                const double z = k / 100.0;
                if (optimal_error_cdf(z, m, b) < 1.0 - error_ccdf(z, m, b) - 1e-12) {
                    r.passed = false;
                    r.detail = "M=" + std::to_string(m) + " B=" + std::to_string(b) + " z=" + fmt(z, 3);
                    break;
                }
            }
    return r;
}

PropertyResult check_ceiling_forms() {
    PropertyResult r{"harmonic fixed-B ceiling below the loose ceiling for M 3..8, B 0..20", true, ""};
    for (int m = 3; m <= 8 && r.passed; ++m)
        for (int b = 0; b <= 20; ++b) {
            const FixedBitsCeiling c = fixed_bits_ceiling(m, b);
            if (!(c.exact_form <= *c.loose + 1e-9)) {
                r.passed = false;
                r.detail = "M=" + std::to_string(m) + " B=" + std::to_string(b);
                break;
            }
        }
    return r;
}

PropertyResult check_bit_penalty() {
    PropertyResult r{"random codebook bit penalty below log2 e for M 2..64", true, ""};
    for (int m = 2; m <= 64; ++m)
        if (!(rvq_bit_penalty(m) < kLog2E)) {
            r.passed = false;
            r.detail = "M=" + std::to_string(m);
            break;
        }
    return r;
}

void print_property(std::ostream &os, const PropertyResult &r) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty())
        os << " (first violation: " << r.detail << ')';
    os << '\n';
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read config file '" + path + "'");
    return ss.str();
}

} // namespace

Command parse_command(std::string_view text) {
    if (text == "sweep")
        return Command::sweep;
    if (text == "figure")
        return Command::figure;
    if (text == "table")
        return Command::table;
    if (text == "validate")
        return Command::validate;
    throw ConfigError("command: expected sweep, figure, table or validate, got '" + std::string(text) + "'");
}

SimPath parse_path(std::string_view text) {
    if (text == "brute" || text == "brute_force")
        return SimPath::brute_force;
    if (text == "fast" || text == "fast_decomposition")
        return SimPath::fast_decomposition;
    throw ConfigError("path: expected brute or fast, got '" + std::string(text) + "'");
}

std::vector<double> parse_snr_grid(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i)
        if (i == text.size() || text[i] == ':') {
            parts.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    if (parts.size() == 1)
        return {parse_number(parts[0], "snr")};
    if (parts.size() != 3)
        throw ConfigError("snr: expected lo:step:hi or a single value, got '" + std::string(text) + "'");
    const double lo = parse_number(parts[0], "snr");
    const double step = parse_number(parts[1], "snr");
    const double hi = parse_number(parts[2], "snr");
    if (!(step > 0.0))
        throw ConfigError("snr: step must be positive");
    if (hi < lo)
        throw ConfigError("snr: hi must not be below lo");
    if ((hi - lo) / step > 1e5)
        throw ConfigError("snr: grid has too many points");
    return arange(lo, step, hi);
}

std::pair<int, int> parse_bits_range(std::string_view text) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const int b = parse_int(text, "B");
        if (b < 0)
            throw ConfigError("B: must be non-negative");
        return {b, b};
    }
    const int lo = parse_int(text.substr(0, dots), "B");
    const int hi = parse_int(text.substr(dots + 2), "B");
    if (lo < 0 || hi < lo)
        throw ConfigError("B: expected 0 <= lo <= hi, got '" + std::string(text) + "'");
    return {lo, hi};
}

ScalingPolicy parse_policy(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("policy: expected kind:value, got '" + std::string(text) + "'");
    const std::string_view kind = text.substr(0, colon);
    const std::string_view value = text.substr(colon + 1);
    try {
        if (kind == "fixed")
            return ScalingPolicy::fixed(parse_int(value, "policy"));
        if (kind == "exact")
            return ScalingPolicy::gap_scaled(parse_number(value, "policy"), ScalingMode::exact);
        if (kind == "approx3")
            return ScalingPolicy::gap_scaled(parse_number(value, "policy"), ScalingMode::approx_3db);
        if (kind == "log")
            return ScalingPolicy::log_scaled(parse_number(value, "policy"));
    } catch (const DomainError &e) {
        throw ConfigError(std::string("policy: ") + e.what());
    }
    throw ConfigError("policy: unknown kind '" + std::string(kind) + "' (fixed, exact, approx3, log)");
}

ExperimentSpec parse_config(std::string_view json_text) { return parse_config(json_text, ExperimentSpec{}); }

ExperimentSpec parse_config(std::string_view json_text, ExperimentSpec spec) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("config: top level must be a JSON object");

    // The command decides which target key is legal, so read it first.
    if (auto it = doc.find("command"); it != doc.end())
        spec.command = parse_command(json_string(*it, "command"));

    for (const auto &[key, value] : doc.items()) {
        if (key == "command") {
            continue;
        } else if (key == "figure") {
            set_target(spec, Command::figure, json_string(value, "figure"), "figure");
        } else if (key == "table") {
            set_target(spec, Command::table, json_string(value, "table"), "table");
        } else if (key == "validate") {
            set_target(spec, Command::validate, json_string(value, "validate"), "validate");
        } else if (key == "trials") {
            spec.trials = static_cast<std::size_t>(json_integer(value, "trials", 1));
        } else if (key == "seed") {
            if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<long long>() < 0))
                throw ConfigError("seed: expected a non-negative integer");
            spec.seed = value.get<std::uint64_t>();
        } else if (key == "snr") {
            if (value.is_string()) {
                spec.snr_grid_db = parse_snr_grid(value.get<std::string>());
            } else if (value.is_array()) {
                std::vector<double> grid;
                for (const auto &x : value) {
                    if (!x.is_number())
                        throw ConfigError("snr: array entries must be numbers");
                    grid.push_back(x.get<double>());
                }
                if (grid.empty())
                    throw ConfigError("snr: must not be empty");
                for (std::size_t i = 1; i < grid.size(); ++i)
                    if (!(grid[i] > grid[i - 1]))
                        throw ConfigError("snr: must be strictly increasing");
                spec.snr_grid_db = std::move(grid);
            } else {
                throw ConfigError("snr: expected \"lo:step:hi\" or an array of numbers");
            }
            spec.grid_explicit = true;
        } else if (key == "out") {
            spec.out = json_string(value, "out");
        } else if (key == "path") {
            spec.path = parse_path(json_string(value, "path"));
        } else if (key == "threads") {
            spec.threads = static_cast<unsigned>(json_integer(value, "threads", 0));
        } else if (key == "engine") {
            spec.engine = check_engine(json_string(value, "engine"));
        } else if (key == "M") {
            spec.antennas = static_cast<int>(json_integer(value, "M", 1));
        } else if (key == "K") {
            spec.users = static_cast<int>(json_integer(value, "K", 1));
        } else if (key == "B") {
            const auto [lo, hi] = value.is_string() ? parse_bits_range(value.get<std::string>())
                                                    : parse_bits_range(std::to_string(json_integer(value, "B", 0)));
            spec.bits_lo = lo;
            spec.bits_hi = hi;
        } else if (key == "b") {
            if (!value.is_number() || !(value.get<double>() > 1.0))
                throw ConfigError("b: expected a number above 1");
            spec.gap_b = value.get<double>();
        } else if (key == "policy") {
            spec.policy = json_string(value, "policy");
            parse_policy(spec.policy);
        } else if (key == "precoder") {
            spec.precoder = parse_precoder(json_string(value, "precoder"));
        } else if (key == "csit") {
            spec.csit = parse_csit(json_string(value, "csit"));
        } else if (key == "grid") {
            spec.grid = check_grid_name(json_string(value, "grid"));
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    return spec;
}

void apply_overrides(ExperimentSpec &spec, const Overrides &flags) {
    if (flags.trials) {
        if (*flags.trials < 1)
            throw ConfigError("trials: must be at least 1");
        spec.trials = *flags.trials;
    }
    if (flags.seed)
        spec.seed = *flags.seed;
    if (flags.snr) {
        spec.snr_grid_db = parse_snr_grid(*flags.snr);
        spec.grid_explicit = true;
    }
    if (flags.out)
        spec.out = *flags.out;
    if (flags.path)
        spec.path = parse_path(*flags.path);
    if (flags.threads)
        spec.threads = *flags.threads;
    if (flags.antennas) {
        if (*flags.antennas < 1)
            throw ConfigError("M: must be at least 1");
        spec.antennas = *flags.antennas;
    }
    if (flags.users) {
        if (*flags.users < 1)
            throw ConfigError("K: must be at least 1");
        spec.users = *flags.users;
    }
    if (flags.bits) {
        const auto [lo, hi] = parse_bits_range(*flags.bits);
        spec.bits_lo = lo;
        spec.bits_hi = hi;
        // A single B on a sweep means a fixed budget unless a policy flag says otherwise.
        if (lo == hi && !flags.policy)
            spec.policy = "fixed:" + std::to_string(lo);
    }
    if (flags.policy) {
        parse_policy(*flags.policy);
        spec.policy = *flags.policy;
    }
    if (flags.engine)
        spec.engine = check_engine(*flags.engine);
    if (flags.precoder)
        spec.precoder = parse_precoder(*flags.precoder);
    if (flags.csit)
        spec.csit = parse_csit(*flags.csit);
    if (flags.grid)
        spec.grid = check_grid_name(*flags.grid);
}

void validate_spec(const ExperimentSpec &spec) {
    switch (spec.command) {
    case Command::figure:
        if (spec.target.empty())
            throw ConfigError("figure: a figure id is required");
        if (!is_figure_id(spec.target))
            throw ConfigError("figure: unknown id '" + spec.target + "'");
        break;
    case Command::table:
        if (spec.target != "quantizer" && spec.target != "scaling" && spec.target != "offsets")
            throw ConfigError("table: expected quantizer, scaling or offsets, got '" + spec.target + "'");
        break;
    case Command::validate:
        if (!spec.target.empty() && spec.target != "bounds")
            throw ConfigError("validate: only the 'bounds' suite exists, got '" + spec.target + "'");
        break;
    case Command::sweep:
        if (!spec.target.empty())
            throw ConfigError("sweep: takes no target, got '" + spec.target + "'");
        break;
    }
    if (spec.trials < 1)
        throw ConfigError("trials: must be at least 1");
    if (spec.snr_grid_db.empty())
        throw ConfigError("snr: must not be empty");
}

std::vector<ThroughputCurve> run_figure(const ExperimentSpec &spec) {
    const std::string &id = spec.target;
    if (id == "miso4x1")
        return figure_miso(spec);
    if (id == "fixed5x5")
        return figure_fixed5x5(spec);
    if (id == "scaled5x5")
        return figure_scaled5x5(spec);
    if (id == "scaled6x6")
        return figure_scaled6x6(spec);
    if (id == "mux4x4")
        return figure_mux4x4(spec);
    if (id == "reg5x5")
        return figure_reg5x5(spec);
    if (id == "compare44")
        return figure_compare(spec, id, 4, true, {});
    if (id == "compare44b")
        return figure_compare(spec, id, 4, false, {5, 10, 15, 20});
    if (id == "compare88")
        return figure_compare(spec, id, 8, true, {20});
    throw ConfigError("figure: unknown id '" + id + "'");
}

std::vector<ThroughputCurve> run_sweep(const ExperimentSpec &spec) {
    SimConfig cfg;
    cfg.antennas = spec.antennas;
    cfg.users = spec.users.value_or(spec.engine == "miso" ? 1 : spec.antennas);
    cfg.snr_grid_db = spec.snr_grid_db;
    cfg.policy = parse_policy(spec.policy);
    cfg.precoder = spec.precoder;
    cfg.csit = spec.csit;
    cfg.path = spec.path;
    cfg.trials = spec.trials;
    cfg.seed = spec.seed;
    cfg.threads = spec.threads;
    cfg.experiment = "sweep";
    if (spec.engine == "mu")
        return {mu_throughput(cfg)};
    if (spec.engine == "rate_gap") {
        RateGapResult r = rate_gap(cfg);
        return {std::move(r.perfect), std::move(r.quantized), std::move(r.gap)};
    }
    if (spec.engine == "miso")
        return {miso_feedback_throughput(cfg)};
    if (spec.engine == "tdma")
        return {tdma_throughput(cfg)};
    return {random_bf_throughput(cfg)};
}

void write_csv(std::ostream &os, const std::vector<ThroughputCurve> &curves) {
    os << kCsvHeader << '\n';
    for (const auto &curve : curves) {
        const CurveMeta &m = curve.meta();
        for (const auto &p : curve.points()) {
            os << m.experiment << ',' << m.curve << ',' << m.antennas << ',' << m.users << ',' << m.policy << ','
               << m.precoder << ',' << fmt(p.bits) << ',' << fmt(p.snr_db) << ',' << fmt(p.mean_bps_hz) << ','
               << fmt(p.std_err) << ',' << p.trials << ',' << m.seed << ',' << p.resamples << '\n';
        }
    }
}

void write_table(std::ostream &os, const ExperimentSpec &spec) {
    if (spec.target == "quantizer")
        write_quantizer_table(os, spec);
    else if (spec.target == "scaling")
        write_scaling_table(os, spec);
    else if (spec.target == "offsets")
        write_offsets_table(os, spec);
    else
        throw ConfigError("table: unknown table '" + spec.target + "'");
}

GapGrid bound_grid(std::string_view name) {
    if (name == "default")
        return {{3, 4, 5, 6}, {4, 8, 12}, arange(0, 5, 30)};
    if (name == "quick")
        return {{3, 4}, {4, 8}, {0, 10, 20, 30}};
    throw ConfigError("grid: expected default or quick, got '" + std::string(name) + "'");
}

std::vector<GapCheck> check_gap_bound(const GapGrid &grid, std::size_t trials, std::uint64_t seed, SimPath path,
                                      unsigned threads) {
    std::vector<GapCheck> out;
    for (int m : grid.antennas)
        for (int b : grid.bits) {
            SimConfig cfg;
            cfg.antennas = m;
            cfg.users = m;
            cfg.snr_grid_db = grid.snr_db;
            cfg.policy = ScalingPolicy::fixed(b);
            cfg.path = path;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.experiment = "validate_bounds";
            const RateGapResult r = rate_gap(cfg);
            for (const auto &p : r.gap.points()) {
                const double bound = rate_gap_bound(db_to_linear(p.snr_db), m, b);
                out.push_back({m, b, p.snr_db, p.mean_bps_hz, p.std_err, bound,
                               p.mean_bps_hz <= bound + 3.0 * p.std_err});
            }
        }
    return out;
}

bool run_validation(const ExperimentSpec &spec, std::ostream &os) {
    std::vector<PropertyResult> results{check_mean_error_bound(), check_neg_log2_bracket(), check_envelope_dominance(),
                                        check_ceiling_forms(), check_bit_penalty()};
    const auto checks = check_gap_bound(bound_grid(spec.grid), spec.trials, spec.seed, spec.path, spec.threads);
    PropertyResult gap{"rate-gap bound dominates the simulated per-user gap on the " + spec.grid + " grid (" +
                           std::to_string(checks.size()) + " points, " + std::string(to_string(spec.path)) +
                           " path)",
                       true, ""};
    for (const auto &c : checks)
        if (!c.passed) {
            gap.passed = false;
            gap.detail = "M=" + std::to_string(c.antennas) + " B=" + std::to_string(c.bits) + " P=" +
                         fmt(c.snr_db, 4) + "dB gap=" + fmt(c.gap, 5) + " bound=" + fmt(c.bound, 5);
            break;
        }
    results.push_back(gap);
    bool all = true;
    for (const auto &r : results) {
        print_property(os, r);
        all = all && r.passed;
    }
    return all;
}

int run(const ExperimentSpec &spec, std::ostream &out, std::ostream &log) {
    validate_spec(spec);
    std::ofstream file;
    if (!spec.out.empty()) {
        file.open(spec.out, std::ios::binary | std::ios::trunc);
        if (!file)
            throw IoError("cannot open output file '" + spec.out + "'");
    }
    std::ostream &sink = spec.out.empty() ? out : file;
    int code = 0;
    switch (spec.command) {
    case Command::sweep:
        write_csv(sink, run_sweep(spec));
        break;
    case Command::figure:
        write_csv(sink, run_figure(spec));
        break;
    case Command::table:
        write_table(sink, spec);
        break;
    case Command::validate:
        code = run_validation(spec, sink) ? 0 : 1;
        break;
    }
    sink.flush();
    if (!sink)
        throw IoError("failed writing output" + (spec.out.empty() ? std::string() : " to '" + spec.out + "'"));
    if (!spec.out.empty())
        log << "wrote " << spec.out << '\n';
    return code;
}

int main_entry(int argc, char **argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Multiuser MIMO downlink simulator with finite-rate channel feedback"};
    app.require_subcommand(0, 1);

    std::optional<std::string> config_path;
    Overrides flags;
    app.add_option("--config", config_path, "JSON config file (flags take precedence)");
    app.add_option("--trials", flags.trials, "Monte Carlo trials per SNR point");
    app.add_option("--seed", flags.seed, "Base RNG seed");
    app.add_option("--out", flags.out, "Output CSV path (default: stdout)");
    app.add_option("--snr", flags.snr, "SNR grid lo:step:hi or a single value, in dB");
    app.add_option("--path", flags.path, "Quantization path: brute or fast");
    app.add_option("--threads", flags.threads, "Worker threads (0: automatic)");
    app.add_option("--M", flags.antennas, "Transmit antennas");
    app.add_option("--K", flags.users, "Users");
    app.add_option("--B", flags.bits, "Feedback bits, single value or lo..hi");
    app.add_option("--policy", flags.policy, "Bit policy: fixed:B, exact:b, approx3:b, log:alpha");
    app.add_option("--engine", flags.engine, "Sweep engine: mu, rate_gap, miso, tdma, random_bf");
    app.add_option("--precoder", flags.precoder, "zf or rzf");
    app.add_option("--csit", flags.csit, "perfect or quantized");
    app.add_option("--grid", flags.grid, "Validation grid: default or quick");

    std::string figure_id;
    std::string table_name;
    std::string suite;
    CLI::App *sweep = app.add_subcommand("sweep", "Single configurable throughput sweep");
    CLI::App *figure = app.add_subcommand("figure", "Figure preset");
    figure->add_option("id", figure_id, "Figure id");
    CLI::App *table = app.add_subcommand("table", "Closed-form table");
    table->add_option("name", table_name, "quantizer, scaling or offsets");
    CLI::App *validate = app.add_subcommand("validate", "Bound checks");
    validate->add_option("suite", suite, "bounds");
    for (CLI::App *sub : {sweep, figure, table, validate})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentSpec spec;
        if (config_path)
            spec = parse_config(read_file(*config_path));
        auto choose = [&](Command command, const std::string &target) {
            if (spec.command != command)
                spec.target.clear();
            spec.command = command;
            if (!target.empty())
                spec.target = target;
        };
        if (*sweep)
            choose(Command::sweep, "");
        else if (*figure)
            choose(Command::figure, figure_id);
        else if (*table)
            choose(Command::table, table_name);
        else if (*validate)
            choose(Command::validate, suite);
        if (spec.command == Command::validate && spec.target.empty())
            spec.target = "bounds";
        apply_overrides(spec, flags);
        return run(spec, out, err);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CapacityError &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError &e) {
        err << "I/O error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace fbmimo::cli
