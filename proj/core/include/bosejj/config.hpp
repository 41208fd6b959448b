// config.hpp
//
// JSON run configuration: strict parsing (unknown keys rejected), errors
// carry field paths, every numeric knob validated before any physics runs.

#pragma once

#include "bosejj/ness.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bosejj {

struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;

    explicit ConfigError(std::vector<std::string> list);
};

struct RunConfig {
    CoupledModel model;
    NessOptions ness;
    int modes_per_reservoir = 2048;
    double channel_threshold = 1e-8;
    double contour_eps0 = 1e-2;
    double evolve_t_max = 0.0;  // 0: defaults to 20 / omega at run time
    int evolve_samples = 201;
    bool seed_given = false;
    std::vector<std::string> warnings;  // non-fatal findings (decoupled limit)
    std::string canonical;              // serialized form whose hash names the run
};

// Throws ConfigError listing every issue with its field path.  A coupling of
// exactly zero parses as the decoupled diagnostic limit and only warns.
RunConfig parse_config(const std::string& text);

// Flag overrides participate in the run identity.
void apply_seed_override(RunConfig& cfg, std::uint64_t seed);
// Threading never changes results, so it stays out of the identity.
void apply_threads_override(RunConfig& cfg, int threads);

std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace bosejj
