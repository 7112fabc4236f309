// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "occupancy/errors.hpp"

namespace occupancy::cli {

enum class Kind { Rate, Path, Classical, Overflow, Coupon, Simulate, Oracle, Verify };
enum class Format { Json, Csv };

const char* to_string(Kind k);
const char* to_string(Format f);

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kParseError = 1;
inline constexpr int kInfeasible = 2;
inline constexpr int kSolverFailure = 3;

class ParseError : public Error {
public:
    using Error::Error;
};

// --help or --version; the message is the text to print.
class HelpRequested : public Error {
public:
    using Error::Error;
};

struct ProblemSpec {
    Kind kind = Kind::Rate;
    Format format = Format::Json;
    std::optional<std::vector<double>> alpha;
    std::optional<std::vector<double>> omega;
    std::optional<double> beta;
    std::optional<std::size_t> capacity;
    std::optional<double> eta;
    std::optional<double> xi;
    std::optional<double> omega0;
    std::optional<std::size_t> n;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    std::optional<std::size_t> grid;
    std::optional<std::size_t> levels;
    std::size_t truncation = 80;
    bool lower_tail = false;
    bool zero_cost = false;

    bool operator==(const ProblemSpec&) const = default;
};

// args excludes the program name; args[0] is the subcommand.
ProblemSpec parse_problem(const std::vector<std::string>& args);

// Config text: a JSON object (optionally nested under "problem") or flat "key = value" lines.
// The config must name the kind unless one is given.
ProblemSpec spec_from_config(const std::string& text, std::optional<Kind> kind = std::nullopt);

// JSON object accepted back by spec_from_config.
std::string spec_to_json(const ProblemSpec& spec);

// Writes results to out and diagnostics to err; returns an exit code.
int run(const ProblemSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace occupancy::cli
