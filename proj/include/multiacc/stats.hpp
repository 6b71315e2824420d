#ifndef MULTIACC_STATS_HPP
#define MULTIACC_STATS_HPP

#include <cstdint>
#include <functional>

#include "multiacc/rng.hpp"

namespace multiacc {

struct McSummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double std_error = 0.0;  // sample std dev / sqrt(count)
    double mean_abs = 0.0;
};

// Runs `draw` for `total` observations split into fixed-size chunks, each with
// its own Rng derived from (seed, chunk index). Chunks are combined in index
// order, so the result is identical for any thread count.
McSummary mc_run(std::uint64_t total, std::uint64_t seed, int threads,
                 const std::function<double(Rng&)>& draw);

}  // namespace multiacc

#endif
