// runner.hpp
//
// Subcommand execution against a parsed RunConfig.  Artifacts land in the
// output directory; the per-run report embeds the config hash and the
// condition verdicts.

#pragma once

#include "bosejj/config.hpp"

#include <string>
#include <vector>

namespace bosejj {

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> artifacts;  // filenames written under out_dir
    std::string message;                 // one-line outcome
};

// name is one of density, eta, check, currents, epr, evolve, graph-check.
// Exit codes: 0 success; 2 resonance-gap failure; 3 configuration or
// environment error; 4 numerical failure.
RunResult run_subcommand(const std::string& name, const RunConfig& cfg,
                         const std::string& out_dir, const std::string& format);

}  // namespace bosejj
