#pragma once

// Seed and parameter sweeps. Cells run on worker threads; every (cell, seed)
// job writes to its own slot, so the merged summary does not depend on the
// thread count.

#include "ssurb/codec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ssurb {

struct SweepAxis
{
    std::string key;          // dotted config path
    std::vector<Json> values;
};

struct SweepOptions
{
    std::vector<std::uint64_t> seeds;
    std::vector<SweepAxis> grid; // empty: a single cell
    int threads = 1;
};

/// Parses "key=v1,v2,..." into an axis; each value is JSON when it parses, else a string.
SweepAxis parseAxis(const std::string& spec);

/// Parses "N" (seeds 1..N) or "A..B" (inclusive) or "a,b,c".
std::vector<std::uint64_t> parseSeeds(const std::string& spec);

/// Runs the grid over the base config document. Throws ConfigError naming the
/// cell when a cell's config is invalid.
Json runSweep(const Json& baseDoc, const SweepOptions& opts);

} // namespace ssurb
