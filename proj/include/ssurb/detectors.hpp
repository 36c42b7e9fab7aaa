#pragma once

// Theta (trusted set) and HB (heartbeat) failure detectors.
//
// HB is the self-stabilizing heartbeat variant: every tick bumps the local
// entry and sends HEARTBEAT(hb[self], hb[j]) to each peer; receivers fold both
// fields with max. Theta is backed by the simulator's detectable fail-stop
// oracle and is re-synchronized with it on every iteration.

#include "ssurb/types.hpp"

#include <vector>

namespace ssurb {

struct HbState
{
    NodeId self = 1;
    HbVector hb;

    static HbState initial(NodeId self, int n);

    int n() const noexcept { return static_cast<int>(hb.size()); }
    HbCount& at(NodeId k) { return hb[static_cast<std::size_t>(k - 1)]; }
    HbCount at(NodeId k) const { return hb[static_cast<std::size_t>(k - 1)]; }

    bool operator==(const HbState&) const = default;
};

struct ThetaState
{
    int n = 1;
    NodeSet suspected;

    static ThetaState initial(int n);

    bool operator==(const ThetaState&) const = default;
};

/// hb[self] += 1; one HEARTBEAT to every other node.
std::vector<Outgoing> hbTick(HbState& state);

void onHeartbeat(HbState& state, HbCount senderCount, HbCount dstCount, NodeId from);

void onCrashNotice(ThetaState& state, NodeId crashed);

/// P minus suspected.
NodeSet trustedView(const ThetaState& state);

/// Overwrites the suspected set with the oracle's (delayed) crashed set.
void reconcile(ThetaState& state, const NodeSet& oracleCrashed);

} // namespace ssurb
