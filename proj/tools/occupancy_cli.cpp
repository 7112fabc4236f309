// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include "occupancy/cli.hpp"

int main(int argc, char** argv) {
    using namespace occupancy::cli;
    const std::vector<std::string> args(argv + 1, argv + argc);
    ProblemSpec spec;
    try {
        spec = parse_problem(args);
    } catch (const HelpRequested& h) {
        std::cout << h.what();
        return kOk;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParseError;
    }
    return run(spec, std::cout, std::cerr);
}
