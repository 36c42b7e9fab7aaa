#include "ssurb/node.hpp"

#include <algorithm>

namespace ssurb {

namespace {

bool byId(const BufferRecord& a, const BufferRecord& b)
{
    return a.mid() < b.mid();
}

SeqNum saturatingSub(SeqNum a, SeqNum b) noexcept
{
    if (b > 0 && a < std::numeric_limits<SeqNum>::min() + b) return std::numeric_limits<SeqNum>::min();
    return a - b;
}

void clampNext(NodeState& state, NodeId k)
{
    if (state.fifoEnabled) state.nextOf(k) = std::max(state.nextOf(k), plusOne(state.rx(k)));
}

// Records must keep a prevHB of length n; a mismatch can only come from
// outside decoding and is normalized rather than trusted.
void normalizeShape(NodeState& state)
{
    const auto n = static_cast<std::size_t>(state.n());
    for (auto& r : state.buffer)
        if (r.prevHb.size() != n) r.prevHb.resize(n, -1);
}

} // namespace

const char* toString(ResetPhase p) noexcept
{
    switch (p) {
    case ResetPhase::Normal: return "NORMAL";
    case ResetPhase::Disabled: return "DISABLED";
    case ResetPhase::Resetting: return "RESETTING";
    }
    return "?";
}

NodeState NodeState::initial(NodeId self, int n, bool fifoEnabled)
{
    NodeState s;
    s.self = self;
    s.rxObsS.assign(static_cast<std::size_t>(n), 0);
    s.txObsS.assign(static_cast<std::size_t>(n), 0);
    s.next.assign(static_cast<std::size_t>(n), 1);
    s.fifoEnabled = fifoEnabled;
    return s;
}

SeqNum maxSeq(const NodeState& state, NodeId k)
{
    bool any = false;
    SeqNum best = 0;
    for (const auto& r : state.buffer) {
        if (r.id != k) continue;
        best = any ? std::max(best, r.seq) : r.seq;
        any = true;
    }
    if (state.fifoEnabled) {
        const SeqNum fromNext = state.nextOf(k) - 1;
        return any ? std::max(best, fromNext) : fromNext;
    }
    return any ? best : 0;
}

SeqNum minTxObsS(const NodeState& state, const DetectorView& view)
{
    bool any = false;
    SeqNum best = 0;
    for (NodeId k : view.trusted.members()) {
        if (k < 1 || k > state.n()) continue;
        best = any ? std::min(best, state.tx(k)) : state.tx(k);
        any = true;
    }
    return any ? best : state.seq;
}

bool isObsolete(const NodeState& state, const DetectorView& view, const BufferRecord& r)
{
    return plusOne(state.rx(r.id)) == r.seq && view.trusted.isSubsetOf(r.recBy) && r.delivered;
}

void update(NodeState& state, const Payload& m, NodeId j, SeqNum s, NodeId k)
{
    if (s <= state.rx(j)) return;

    auto lo = std::lower_bound(state.buffer.begin(), state.buffer.end(), MessageId{j, s},
                               [](const BufferRecord& r, const MessageId& id) { return r.mid() < id; });
    const bool present = lo != state.buffer.end() && lo->id == j && lo->seq == s;

    if (!present && !m.isNull()) {
        BufferRecord rec;
        rec.msg = m;
        rec.id = j;
        rec.seq = s;
        rec.recBy.insert(j);
        rec.recBy.insert(k);
        rec.prevHb.assign(static_cast<std::size_t>(state.n()), -1);
        state.buffer.insert(lo, std::move(rec));
        return;
    }
    // The existing payload wins when a second MSG for (j, s) differs.
    for (auto it = lo; it != state.buffer.end() && it->id == j && it->seq == s; ++it) {
        it->recBy.insert(j);
        it->recBy.insert(k);
    }
}

BroadcastOutcome urbBroadcast(NodeState& state, const DetectorView& view, const NodeConfig& cfg, Payload m)
{
    if (m.isNull()) return {BroadcastStatus::Rejected, {}};

    const bool windowOpen = state.seq < saturatingAdd(minTxObsS(state, view), cfg.bufferUnitSize);
    if (state.resetPhase != ResetPhase::Normal || !state.pendingBroadcasts.empty() || !windowOpen) {
        state.pendingBroadcasts.push_back(std::move(m));
        return {BroadcastStatus::Deferred, {}};
    }
    state.seq = plusOne(state.seq);
    update(state, m, state.self, state.seq, state.self);
    return {BroadcastStatus::Accepted, {state.self, state.seq}};
}

Outgoing onMsg(NodeState& state, const Payload& m, NodeId j, SeqNum s, NodeId from)
{
    update(state, m, j, s, from);
    return {from, MsgAckPacket{j, s}};
}

void onMsgAck(NodeState& state, NodeId j, SeqNum s, NodeId from)
{
    update(state, Payload::null(), j, s, from);
}

void onGossip(NodeState& state, SeqNum f1, SeqNum f2, SeqNum f3, NodeId from)
{
    state.seq = std::max(f1, state.seq);
    state.tx(from) = std::max(f2, state.tx(from));
    state.rx(from) = std::max(f3, state.rx(from));
}

void cleanupPhase(NodeState& state, const DetectorView& view, const NodeConfig& cfg)
{
    const SeqNum bus = cfg.bufferUnitSize;
    normalizeShape(state);

    // Purge on a bottom payload or a repeated (id, seq).
    std::stable_sort(state.buffer.begin(), state.buffer.end(), byId);
    bool purge = false;
    for (std::size_t i = 0; i < state.buffer.size() && !purge; ++i) {
        purge = state.buffer[i].msg.isNull() ||
                (i > 0 && state.buffer[i].mid() == state.buffer[i - 1].mid());
    }
    if (purge) state.buffer.clear();

    // Sender window: mS <= seq <= mS + B and every seq in (mS, seq] buffered.
    {
        const SeqNum ms = minTxObsS(state, view);
        bool ok = ms <= state.seq && state.seq <= saturatingAdd(ms, bus);
        if (ok) {
            SeqNum own = 0;
            for (const auto& r : state.buffer)
                if (r.id == state.self && r.seq > ms && r.seq <= state.seq) ++own;
            ok = own == state.seq - ms;
        }
        if (!ok) std::fill(state.txObsS.begin(), state.txObsS.end(), state.seq);
    }

    // Receiver window.
    for (NodeId k = 1; k <= state.n(); ++k) {
        state.rx(k) = std::max(state.rx(k), saturatingSub(maxSeq(state, k), bus));
        clampNext(state, k);
    }

    // In FIFO mode everything below next[k] counts as delivered already. A record
    // left behind by a skewed next would otherwise block obsolescence forever.
    if (state.fifoEnabled)
        for (auto& r : state.buffer)
            if (r.seq < state.nextOf(r.id)) r.delivered = true;

    // Obsolete advance; records are in ascending (id, seq) so chains resolve in one pass,
    // the outer loop re-checks until nothing is obsolete.
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : state.buffer) {
            if (isObsolete(state, view, r)) {
                state.rx(r.id) = plusOne(state.rx(r.id));
                clampNext(state, r.id);
                changed = true;
            }
        }
    }

    // Trim.
    {
        const SeqNum ms = minTxObsS(state, view);
        std::vector<SeqNum> maxOf(static_cast<std::size_t>(state.n()));
        for (NodeId k = 1; k <= state.n(); ++k) maxOf[static_cast<std::size_t>(k - 1)] = maxSeq(state, k);

        std::erase_if(state.buffer, [&](const BufferRecord& r) {
            if (r.id == state.self) return !(ms < r.seq);
            const bool inWindow = state.rx(r.id) < r.seq &&
                                  saturatingSub(maxOf[static_cast<std::size_t>(r.id - 1)], bus) <= r.seq;
            return !inWindow;
        });
    }
}

IterationResult processPhase(NodeState& state, const DetectorView& view, const NodeConfig& cfg)
{
    IterationResult out;
    const int n = state.n();

    for (std::size_t idx = 0; idx < state.buffer.size(); ++idx) {
        {
            auto& r = state.buffer[idx];
            const bool inOrder = !state.fifoEnabled || r.seq == state.nextOf(r.id);
            if (view.trusted.isSubsetOf(r.recBy) && !r.delivered && inOrder) {
                r.delivered = true;
                if (state.fifoEnabled) state.nextOf(r.id) = plusOne(state.nextOf(r.id));
                out.delivered.push_back({r.mid(), r.msg});
            }
        }

        const HbVector& u = view.hb;
        for (NodeId k = 1; k <= n; ++k) {
            auto& r = state.buffer[idx];
            const auto ki = static_cast<std::size_t>(k - 1);
            const bool missing = !r.recBy.contains(k);
            const bool txEdge = r.id == state.self && r.seq == plusOne(state.tx(k));
            if (!((missing || txEdge) && r.prevHb[ki] < u[ki])) continue;

            r.prevHb[ki] = u[ki];
            if (k == state.self) {
                // Reliable self-channel: MSG and its MSGack are applied in place.
                const Payload msg = r.msg;
                const NodeId j = r.id;
                const SeqNum s = r.seq;
                update(state, msg, j, s, state.self);
                update(state, Payload::null(), j, s, state.self);
            } else {
                out.outgoing.push_back({k, MsgPacket{r.msg, r.id, r.seq}});
            }
        }
    }

    // Gossip. Field 1 also carries rxObsS[k] so that a receiver-side obsolete
    // counter ahead of the sender's seq pulls that seq forward.
    for (NodeId k = 1; k <= n; ++k) {
        const GossipPacket g{std::max(maxSeq(state, k), state.rx(k)), state.rx(k), state.tx(k)};
        if (k == state.self)
            onGossip(state, g.maxSeq, g.rxObs, g.txObs, state.self);
        else
            out.outgoing.push_back({k, g});
    }

    // Deferred broadcasts that now fit the window.
    while (state.resetPhase == ResetPhase::Normal && !state.pendingBroadcasts.empty() &&
           state.seq < saturatingAdd(minTxObsS(state, view), cfg.bufferUnitSize)) {
        Payload m = std::move(state.pendingBroadcasts.front());
        state.pendingBroadcasts.pop_front();
        state.seq = plusOne(state.seq);
        update(state, m, state.self, state.seq, state.self);
        out.accepted.push_back({{state.self, state.seq}, std::move(m)});
    }
    return out;
}

IterationResult doForeverIteration(NodeState& state, const DetectorView& view, const NodeConfig& cfg)
{
    cleanupPhase(state, view, cfg);
    return processPhase(state, view, cfg);
}

bool checkOverflow(NodeState& state, const NodeConfig& cfg, std::span<const HbCount> hb)
{
    if (!cfg.boundedMode) return false;
    const SeqNum lim = cfg.maxint;
    auto over = [lim](auto v) { return v >= lim; };

    bool hit = over(state.seq) || std::ranges::any_of(state.rxObsS, over) ||
               std::ranges::any_of(state.txObsS, over) || std::ranges::any_of(hb, over) ||
               std::ranges::any_of(state.next, over);
    for (const auto& r : state.buffer) {
        if (hit) break;
        hit = over(r.seq) || std::ranges::any_of(r.prevHb, over);
    }
    if (hit && state.resetPhase == ResetPhase::Normal) state.resetPhase = ResetPhase::Disabled;
    return hit;
}

void performGlobalReset(NodeState& state)
{
    auto pending = std::move(state.pendingBroadcasts);
    state = NodeState::initial(state.self, state.n(), state.fifoEnabled);
    state.pendingBroadcasts = std::move(pending);
}

int undeliveredCount(const NodeState& state) noexcept
{
    return static_cast<int>(std::ranges::count_if(state.buffer, [](const BufferRecord& r) { return !r.delivered; }));
}

} // namespace ssurb
