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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fbmimo/bounds.hpp"
#include "fbmimo/simulate.hpp"

namespace fbmimo::cli {

// Output could not be opened or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Command { sweep, figure, table, validate };

inline constexpr std::string_view kFigureIds[] = {"miso4x1", "fixed5x5",   "scaled5x5", "scaled6x6", "mux4x4",
                                                  "reg5x5",  "compare44", "compare44b", "compare88"};

inline constexpr std::string_view kCsvHeader =
    "experiment,curve,M,K,policy,precoder,B_bits,snr_db,throughput_bps_hz,std_err,trials,seed,resamples";

// Fully resolved request. Precedence: built-in defaults < config file < flags.
struct ExperimentSpec {
    Command command = Command::sweep;
    std::string target; // figure id, table name or validation suite
    std::size_t trials = 10000;
    std::uint64_t seed = 42;
    std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
    bool grid_explicit = false; // figures keep their own grid unless set
    std::string out;            // empty: standard output
    SimPath path = SimPath::fast_decomposition;
    unsigned threads = 0;

    // sweep
    std::string engine = "mu"; // mu | rate_gap | miso | tdma | random_bf
    int antennas = 4;
    std::optional<int> users; // defaults to antennas (1 for miso)
    std::string policy = "approx3:2";
    PrecoderKind precoder = PrecoderKind::zf;
    CsiSource csit = CsiSource::quantized;

    // table
    int bits_lo = 0;
    int bits_hi = 16;
    double gap_b = 2.0;

    // validate
    std::string grid = "default"; // default | quick
};

// Flag values; unset fields leave the ExperimentSpec untouched.
struct Overrides {
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> snr;
    std::optional<std::string> out;
    std::optional<std::string> path;
    std::optional<unsigned> threads;
    std::optional<int> antennas;
    std::optional<int> users;
    std::optional<std::string> bits;
    std::optional<std::string> policy;
    std::optional<std::string> engine;
    std::optional<std::string> precoder;
    std::optional<std::string> csit;
    std::optional<std::string> grid;
};

// JSON object mirroring ExperimentSpec. Unknown keys and out-of-range values
// throw ConfigError naming the field.
ExperimentSpec parse_config(std::string_view json_text);
ExperimentSpec parse_config(std::string_view json_text, ExperimentSpec base);

void apply_overrides(ExperimentSpec &spec, const Overrides &flags);

// Cross-field checks, e.g. a figure id must be known. Throws ConfigError.
void validate_spec(const ExperimentSpec &spec);

// "lo:step:hi" inclusive.
std::vector<double> parse_snr_grid(std::string_view text);

// "lo..hi" or a single integer.
std::pair<int, int> parse_bits_range(std::string_view text);

// "fixed:B", "exact:b", "approx3:b" or "log:alpha".
ScalingPolicy parse_policy(std::string_view text);

Command parse_command(std::string_view text);
SimPath parse_path(std::string_view text);

// Curves making up a figure preset.
std::vector<ThroughputCurve> run_figure(const ExperimentSpec &spec);

// Single configurable sweep.
std::vector<ThroughputCurve> run_sweep(const ExperimentSpec &spec);

void write_csv(std::ostream &os, const std::vector<ThroughputCurve> &curves);

// Closed-form tables: quantizer, scaling, offsets.
void write_table(std::ostream &os, const ExperimentSpec &spec);

// One Monte Carlo check of the rate-gap bound at a single (M, B, P).
struct GapCheck {
    int antennas;
    int bits;
    double snr_db;
    double gap;
    double std_err;
    double bound;
    bool passed; // gap <= bound + 3 std_err
};

struct GapGrid {
    std::vector<int> antennas;
    std::vector<int> bits;
    std::vector<double> snr_db;
};

GapGrid bound_grid(std::string_view name);

std::vector<GapCheck> check_gap_bound(const GapGrid &grid, std::size_t trials, std::uint64_t seed, SimPath path,
                                      unsigned threads = 0);

// Prints one PASS/FAIL line per property; returns true when all pass.
bool run_validation(const ExperimentSpec &spec, std::ostream &os);

// Dispatches the spec. Returns 0 on success, 1 on a failed validation.
int run(const ExperimentSpec &spec, std::ostream &out, std::ostream &log);

// Full command-line entry: argv parsing, config loading, exit-code mapping
// (2 configuration, 3 I/O).
int main_entry(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace fbmimo::cli
