#include "ssurb/detectors.hpp"

#include <algorithm>

namespace ssurb {

HbState HbState::initial(NodeId self, int n)
{
    return {self, HbVector(static_cast<std::size_t>(n), 0)};
}

ThetaState ThetaState::initial(int n)
{
    return {n, {}};
}

std::vector<Outgoing> hbTick(HbState& state)
{
    state.at(state.self) = plusOne(state.at(state.self));
    std::vector<Outgoing> out;
    out.reserve(static_cast<std::size_t>(state.n()));
    for (NodeId j = 1; j <= state.n(); ++j) {
        if (j == state.self) continue;
        out.push_back({j, HeartbeatPacket{state.at(state.self), state.at(j)}});
    }
    return out;
}

void onHeartbeat(HbState& state, HbCount senderCount, HbCount dstCount, NodeId from)
{
    state.at(from) = std::max(state.at(from), senderCount);
    state.at(state.self) = std::max(state.at(state.self), dstCount);
}

void onCrashNotice(ThetaState& state, NodeId crashed)
{
    state.suspected.insert(crashed);
}

NodeSet trustedView(const ThetaState& state)
{
    return NodeSet::all(state.n).minus(state.suspected);
}

void reconcile(ThetaState& state, const NodeSet& oracleCrashed)
{
    state.suspected = oracleCrashed & NodeSet::all(state.n);
}

} // namespace ssurb
