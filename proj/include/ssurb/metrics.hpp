#pragma once

#include "ssurb/sim.hpp"

namespace ssurb {

/// Metrics document for one run: per-broadcast message counts and latencies,
/// stabilization cycles, peak buffer sizes, fault counters and the trace digest.
Json computeMetrics(const ExecutionTrace& t, const SimCounters& c);

} // namespace ssurb
