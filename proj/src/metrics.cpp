#include "ssurb/metrics.hpp"

#include "ssurb/checker.hpp"

#include <algorithm>

namespace ssurb {

Json computeMetrics(const ExecutionTrace& t, const SimCounters& c)
{
    Json j;
    j["configHash"] = t.header.configHash;
    j["seed"] = t.header.seed;
    j["endStatus"] = t.endStatus().value_or("truncated");
    j["steps"] = t.events.empty() ? 0 : t.events.back().step;

    std::int64_t cycles = 0;
    for (const auto& e : t.events)
        if (e.type == EventType::Cycle) cycles = e.cycle;
    j["cycles"] = cycles;

    const auto st = stabilization(t);
    const auto stab = stabilizationTime(t, st);
    j["stabilizationCycles"] = stab.verdict == Verdict::Pass ? stab.measured["cycles"] : Json(nullptr);

    std::vector<std::int64_t> peak(static_cast<std::size_t>(t.header.n), 0);
    for (const auto& s : t.snapshots)
        for (const auto& ns : s.nodes) {
            auto& p = peak[static_cast<std::size_t>(ns.id - 1)];
            p = std::max(p, static_cast<std::int64_t>(ns.state.buffer.size()));
        }
    j["peakBuffer"] = peak;

    j["resets"] = c.resets;
    j["omissions"] = c.omissions;
    j["duplications"] = c.duplications;
    j["reorders"] = c.reorders;
    j["overflowDrops"] = c.overflowDrops;

    Json bs = Json::array();
    for (const auto& b : broadcastCosts(t)) {
        Json e;
        e["node"] = b.broadcaster;
        e["epoch"] = b.mid.epoch;
        e["id"] = b.mid.mid.id;
        e["seq"] = b.mid.mid.seq;
        e["msgSends"] = b.msgSends;
        e["ackSends"] = b.ackSends;
        e["latencyCycles"] = b.latencyCycles ? Json(*b.latencyCycles) : Json(nullptr);
        bs.push_back(std::move(e));
    }
    j["broadcasts"] = std::move(bs);
    j["traceDigest"] = traceDigest(t);
    return j;
}

} // namespace ssurb
