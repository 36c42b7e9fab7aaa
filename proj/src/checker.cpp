#include "ssurb/checker.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace ssurb {

namespace {

// The checker keeps its own copies of the window arithmetic rather than
// calling into the node implementation it is judging.

SeqNum recordMax(const NodeState& st, NodeId k)
{
    SeqNum best = st.fifoEnabled ? st.next[static_cast<std::size_t>(k - 1)] - 1 : 0;
    bool any = st.fifoEnabled;
    for (const auto& r : st.buffer) {
        if (r.id != k) continue;
        best = any ? std::max(best, r.seq) : r.seq;
        any = true;
    }
    return best;
}

SeqNum minTx(const NodeState& st, const NodeSet& trusted)
{
    std::optional<SeqNum> m;
    for (NodeId k : trusted.members()) {
        if (k > st.n()) continue;
        const SeqNum v = st.txObsS[static_cast<std::size_t>(k - 1)];
        m = m ? std::min(*m, v) : v;
    }
    return m.value_or(st.seq);
}

NodeSet trustedOf(const NodeSnapshot& ns)
{
    return NodeSet::all(ns.theta.n).minus(ns.theta.suspected);
}

NodeSet liveOf(const Snapshot& s)
{
    NodeSet live;
    for (const auto& ns : s.nodes)
        if (ns.alive) live.insert(ns.id);
    return live;
}

std::string describe(const ExecutionTrace& t, std::size_t idx)
{
    const Event& e = t.events[idx];
    std::ostringstream os;
    os << "event " << idx << " (trace line " << traceLine(idx) << "): " << toString(e.type);
    if (e.node) os << " node " << e.node;
    if (e.peer) os << " peer " << e.peer;
    if (e.type == EventType::Send || e.type == EventType::Recv) os << " " << toString(e.kind);
    if (e.mid) os << " (" << e.mid->id << "," << e.mid->seq << ") epoch " << e.epoch;
    return os.str();
}

std::vector<std::size_t> snapshotEvents(const ExecutionTrace& t)
{
    std::vector<std::size_t> out(t.snapshots.size(), 0);
    for (std::size_t i = 0; i < t.events.size(); ++i)
        if (t.events[i].type == EventType::Snapshot) out[static_cast<std::size_t>(t.events[i].snapshot)] = i;
    return out;
}

NodeSet neverCrashed(const ExecutionTrace& t)
{
    NodeSet s = NodeSet::all(t.header.n);
    for (const auto& e : t.events)
        if (e.type == EventType::Crash) s.erase(e.node);
    return s;
}

std::size_t markerOrZero(const StabilizationInfo& st)
{
    return st.markerEvent.value_or(0);
}

CheckReport report(std::string name)
{
    CheckReport r;
    r.property = std::move(name);
    return r;
}

} // namespace

const char* toString(Verdict v) noexcept
{
    switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    case Verdict::Skipped: return "SKIPPED";
    }
    return "?";
}

Json toJson(const CheckReport& r)
{
    Json j;
    j["property"] = r.property;
    j["verdict"] = toString(r.verdict);
    j["witness"] = r.witness;
    j["measured"] = r.measured;
    j["note"] = r.note;
    return j;
}

// ---- snapshot predicates ------------------------------------------------------

ConsistencyResult consistencyCheck(const Snapshot& s, NodeId i, SeqNum B)
{
    const auto& ns = s.node(i);
    if (!ns.alive) return {};
    const int n = static_cast<int>(s.nodes.size());
    const NodeSet trusted = trustedOf(ns);
    const NodeSet live = liveOf(s);

    // Item (i), on the state left by the last cleanup phase.
    if (!ns.afterCleanup) return {false, "i.not-iterated-since-corruption"};
    {
        const NodeState& x = *ns.afterCleanup;
        std::set<MessageId> ids;
        std::set<SeqNum> own;
        for (const auto& r : x.buffer) {
            if (r.msg.isNull()) return {false, "i.null-payload"};
            if (!ids.insert(r.mid()).second) return {false, "i.duplicate-id"};
            if (r.id == i) own.insert(r.seq);
        }
        const SeqNum ms = minTx(x, trusted);
        if (!(ms <= x.seq && x.seq <= saturatingAdd(ms, B))) return {false, "i.flow-window"};
        for (SeqNum q = ms + 1; q <= x.seq; ++q)
            if (!own.contains(q)) return {false, "i.own-window-gap"};
        for (NodeId k = 1; k <= n; ++k)
            if (recordMax(x, k) - x.rxObsS[static_cast<std::size_t>(k - 1)] > B) return {false, "i.rx-window"};
        for (const auto& r : x.buffer) {
            const SeqNum rx = x.rxObsS[static_cast<std::size_t>(r.id - 1)];
            if (plusOne(rx) == r.seq && trusted.isSubsetOf(r.recBy) && r.delivered) return {false, "i.obsolete-record"};
            if (r.id == i) {
                if (!(ms < r.seq)) return {false, "i.own-record-below-window"};
            } else if (!(rx < r.seq && recordMax(x, r.id) - B <= r.seq)) {
                return {false, "i.foreign-record-outside-window"};
            }
        }
    }

    // Item (ii): seq_i dominates every i-related value in the live system.
    const NodeState& me = ns.state;
    const SeqNum seqI = me.seq;
    const auto ii = static_cast<std::size_t>(i - 1);
    for (NodeId k : live.members()) {
        const NodeState& other = s.node(k).state;
        for (const auto& r : other.buffer)
            if (r.id == i && r.seq > seqI) return {false, "ii.peer-record-above-seq"};
        if (other.rxObsS[ii] > seqI) return {false, "ii.peer-rx-above-seq"};
        if (other.fifoEnabled && other.next[ii] - 1 > seqI) return {false, "ii.peer-next-above-seq"};
        if (me.txObsS[static_cast<std::size_t>(k - 1)] > other.rxObsS[ii]) return {false, "ii.tx-not-dominated"};
    }
    for (const auto& ch : s.channels) {
        for (const auto& p : ch.packets) {
            if (p.sentStep < s.lastCorruptStep) continue;
            if (const auto* m = std::get_if<MsgPacket>(&p.msg)) {
                if (m->id == i && m->seq > seqI) return {false, "ii.in-transit-msg-above-seq"};
            } else if (const auto* a = std::get_if<MsgAckPacket>(&p.msg)) {
                if (a->id == i && a->seq > seqI) return {false, "ii.in-transit-ack-above-seq"};
            } else if (const auto* g = std::get_if<GossipPacket>(&p.msg)) {
                if (ch.dst == i && g->maxSeq > seqI) return {false, "ii.in-transit-gossip-above-seq"};
                if (ch.src == i && live.contains(ch.dst) &&
                    g->txObs > s.node(ch.dst).state.rxObsS[ii])
                    return {false, "ii.in-transit-gossip-tx-not-dominated"};
                if (ch.dst == i && live.contains(ch.src) &&
                    g->rxObs > s.node(ch.src).state.rxObsS[ii])
                    return {false, "ii.in-transit-gossip-rx-not-dominated"};
            }
        }
    }

    // Item (iii): per-sender bound at peers and the flow-control bound.
    for (NodeId k : live.members()) {
        if (k == i) continue;
        const auto cnt = std::ranges::count_if(s.node(k).state.buffer, [i](const BufferRecord& r) { return r.id == i; });
        if (cnt > B) return {false, "iii.per-sender-bound"};
    }
    if (seqI > saturatingAdd(minTx(me, trusted), B)) return {false, "iii.seq-above-window"};
    return {};
}

ConsistencyResult allConsistent(const Snapshot& s, SeqNum B)
{
    for (const auto& ns : s.nodes) {
        if (!ns.alive) continue;
        auto r = consistencyCheck(s, ns.id, B);
        if (!r.ok) return {false, "node " + std::to_string(ns.id) + ": " + r.clause};
    }
    return {};
}

bool diffusePredicate(const Snapshot& s, NodeId i, const MessageId& mid)
{
    return std::ranges::any_of(s.node(i).state.buffer,
                               [&](const BufferRecord& r) { return r.mid() == mid && !r.delivered; });
}

bool completelyDelivered(const Snapshot& s, const MessageId& mid)
{
    for (const auto& ch : s.channels)
        for (const auto& p : ch.packets) {
            const auto k = kindOf(p.msg);
            if ((k == PacketKind::Msg || k == PacketKind::MsgAck) && carriedId(p.msg) == mid) return false;
        }
    const NodeSet live = liveOf(s);
    for (const auto& ns : s.nodes) {
        if (!ns.alive) continue;
        for (const auto& r : ns.state.buffer)
            if (r.mid() == mid && (!r.delivered || !live.isSubsetOf(r.recBy))) return false;
    }
    return true;
}

// ---- stabilization marker -----------------------------------------------------

StabilizationInfo stabilization(const ExecutionTrace& t)
{
    StabilizationInfo st;
    for (std::size_t i = 0; i < t.events.size(); ++i)
        if (t.events[i].type == EventType::Corrupt) st.lastCorruptEvent = i;

    const auto snapEvents = snapshotEvents(t);
    std::optional<std::size_t> lastBad;
    bool anyAfter = false;
    for (std::size_t si = 0; si < t.snapshots.size(); ++si) {
        if (st.lastCorruptEvent && snapEvents[si] < *st.lastCorruptEvent) continue;
        anyAfter = true;
        const auto r = allConsistent(t.snapshots[si], t.header.bufferUnitSize);
        if (r.ok) {
            if (!st.markerSnapshot) {
                st.markerSnapshot = si;
                st.markerEvent = snapEvents[si];
            }
        } else {
            lastBad = si;
            st.lastFailure = "snapshot at step " + std::to_string(t.snapshots[si].step) + ", " + r.clause;
        }
    }
    if (anyAfter) {
        const std::size_t from = lastBad ? *lastBad + 1 : 0;
        for (std::size_t si = from; si < t.snapshots.size(); ++si) {
            if (st.lastCorruptEvent && snapEvents[si] < *st.lastCorruptEvent) continue;
            st.settledSnapshot = si;
            break;
        }
    }

    if (st.lastCorruptEvent && st.markerSnapshot) {
        const Snapshot& m = t.snapshots[*st.markerSnapshot];
        for (const auto& ns : m.nodes) {
            for (const auto& r : ns.state.buffer) st.exempt.insert({m.epoch, r.mid()});
            if (ns.afterCleanup)
                for (const auto& r : ns.afterCleanup->buffer) st.exempt.insert({m.epoch, r.mid()});
        }
        for (const auto& ch : m.channels)
            for (const auto& p : ch.packets)
                if (auto id = carriedId(p.msg)) st.exempt.insert({m.epoch, *id});
    }
    return st;
}

// ---- Def. 1 ---------------------------------------------------------------------

CheckReport validityCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("validity");
    if (!t.endStatus()) {
        r.verdict = Verdict::Inconclusive;
        r.note = "truncated trace";
        return r;
    }
    if (!st.markerEvent) {
        r.verdict = Verdict::Inconclusive;
        r.note = "no stabilization marker: " + st.lastFailure;
        return r;
    }
    std::map<EpochId, std::set<std::uint64_t>> broadcasts;
    std::int64_t checked = 0, exempted = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        if (e.type == EventType::Broadcast) broadcasts[{e.epoch, *e.mid}].insert(e.payloadHash);
        if (e.type != EventType::Deliver || i < *st.markerEvent) continue;
        const EpochId key{e.epoch, *e.mid};
        if (st.exempt.contains(key)) {
            ++exempted;
            continue;
        }
        ++checked;
        auto it = broadcasts.find(key);
        if (it == broadcasts.end()) {
            r.verdict = Verdict::Fail;
            r.witness = describe(t, i) + ": no earlier BROADCAST";
            break;
        }
        if (!it->second.contains(e.payloadHash)) {
            r.verdict = Verdict::Fail;
            r.witness = describe(t, i) + ": payload differs from the broadcast one";
            break;
        }
    }
    r.measured = {{"deliveriesChecked", checked}, {"exemptions", exempted}};
    return r;
}

CheckReport integrityCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("integrity");
    const std::size_t from = markerOrZero(st);
    std::set<std::pair<NodeId, EpochId>> seen;
    std::int64_t deliveries = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        if (e.type != EventType::Deliver) continue;
        ++deliveries;
        const EpochId key{e.epoch, *e.mid};
        if (seen.insert({e.node, key}).second) continue;
        if (i < from || st.exempt.contains(key)) continue;
        r.verdict = Verdict::Fail;
        r.witness = describe(t, i) + ": delivered twice";
        break;
    }
    r.measured = {{"deliveries", deliveries}};
    return r;
}

CheckReport terminationCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("termination");
    const auto status = t.endStatus();
    if (!status) {
        r.verdict = Verdict::Inconclusive;
        r.note = "truncated trace";
        return r;
    }
    if (!st.markerEvent) {
        r.verdict = Verdict::Inconclusive;
        r.note = "no stabilization marker: " + st.lastFailure;
        return r;
    }
    const NodeSet correct = neverCrashed(t);
    std::map<EpochId, std::pair<std::size_t, NodeId>> candidates;
    std::map<EpochId, NodeSet> deliveredBy;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        const EpochId key{e.epoch, e.mid.value_or(MessageId{})};
        if (e.type == EventType::Broadcast && i >= *st.markerEvent) candidates.try_emplace(key, i, e.node);
        if (e.type == EventType::Deliver) deliveredBy[key].insert(e.node);
    }
    std::int64_t obligated = 0;
    for (const auto& [key, where] : candidates) {
        const auto& by = deliveredBy[key];
        if (!correct.contains(where.second) && by.empty()) continue;
        ++obligated;
        if (correct.isSubsetOf(by)) continue;
        const NodeSet missing = correct.minus(by);
        if (*status == "max_steps") {
            r.verdict = Verdict::Inconclusive;
            r.note = "run stopped by maxSteps with deliveries outstanding";
        } else {
            r.verdict = Verdict::Fail;
            r.witness = describe(t, where.first) + ": never delivered at node " + std::to_string(missing.members().front());
        }
        break;
    }
    r.measured = {{"obligated", obligated}};
    return r;
}

// ---- quiescence -------------------------------------------------------------------

CheckReport quiescenceCheck(const ExecutionTrace& t, const std::optional<EpochId>& mid)
{
    auto r = report("quiescence");
    if (t.endStatus() != std::optional<std::string>("complete")) {
        r.verdict = Verdict::Inconclusive;
        r.note = "run did not reach its completion window";
        return r;
    }
    const int w = t.header.quiescenceWindowCycles;
    std::int64_t lastCycle = 0;
    for (const auto& e : t.events)
        if (e.type == EventType::Cycle) lastCycle = e.cycle;
    const std::int64_t startCycle = lastCycle - w;
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < t.events.size(); ++i)
        if (t.events[i].type == EventType::Cycle && t.events[i].cycle == startCycle) start = i;
    if (startCycle < 1 || !start) {
        r.verdict = Verdict::Inconclusive;
        r.note = "fewer than " + std::to_string(w + 1) + " cycles in trace";
        return r;
    }

    // The boundary snapshot follows its CYCLE event.
    const Snapshot* snap = nullptr;
    for (std::size_t i = *start; i < t.events.size() && !snap; ++i)
        if (t.events[i].type == EventType::Snapshot) snap = &t.snapshots[static_cast<std::size_t>(t.events[i].snapshot)];
    if (snap) {
        for (std::size_t i = 0; i < *start; ++i) {
            const Event& e = t.events[i];
            if (e.type != EventType::Broadcast || e.epoch != snap->epoch) continue;
            if (mid && !(EpochId{e.epoch, *e.mid} == *mid)) continue;
            if (!completelyDelivered(*snap, *e.mid)) {
                r.verdict = Verdict::Fail;
                r.witness = describe(t, i) + ": not completely delivered when the window opens";
                return r;
            }
        }
    }

    std::int64_t protocol = 0, control = 0;
    std::optional<std::size_t> firstBad;
    for (std::size_t i = *start + 1; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        if (e.type != EventType::Send && e.type != EventType::Recv) continue;
        if (e.kind == PacketKind::Msg || e.kind == PacketKind::MsgAck) {
            if (mid && !(e.mid && EpochId{e.epoch, *e.mid} == *mid)) continue;
            ++protocol;
            if (!firstBad) firstBad = i;
        } else if (e.type == EventType::Send) {
            ++control;
        }
    }
    const int liveAtWindow = snap ? liveOf(*snap).size() : 0;
    r.measured = {{"windowCycles", w}, {"protocolEvents", protocol}, {"controlSends", control}};
    if (firstBad) {
        r.verdict = Verdict::Fail;
        r.witness = describe(t, *firstBad) + ": protocol traffic inside the quiescence window";
    } else if (liveAtWindow >= 2 && control == 0) {
        r.verdict = Verdict::Fail;
        r.witness = "no GOSSIP/HEARTBEAT sent inside the quiescence window";
    }
    return r;
}

// ---- stabilization, closure, buffers ------------------------------------------------

CheckReport stabilizationTime(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("stabilization");
    if (!st.lastCorruptEvent) {
        r.measured = {{"cycles", 0}};
        if (!st.markerEvent || *st.markerSnapshot != 0) {
            r.verdict = Verdict::Fail;
            r.witness = "initial state not consistent: " + st.lastFailure;
        }
        return r;
    }
    if (!st.settledSnapshot) {
        r.verdict = Verdict::Fail;
        r.witness = "never stabilized; last failure " + st.lastFailure;
        return r;
    }
    const auto snapEvents = snapshotEvents(t);
    const std::size_t settledAt = snapEvents[*st.settledSnapshot];
    std::int64_t toMarker = 0, toSettled = 0;
    for (std::size_t i = *st.lastCorruptEvent; i < t.events.size(); ++i) {
        if (t.events[i].type != EventType::Cycle) continue;
        if (st.markerEvent && i < *st.markerEvent) ++toMarker;
        if (i < settledAt) ++toSettled;
    }
    r.measured = {{"cycles", toSettled}, {"cyclesToFirstConsistent", toMarker}};
    return r;
}

CheckReport closureCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("closure");
    if (!st.markerSnapshot) {
        r.verdict = Verdict::Inconclusive;
        r.note = "no consistent snapshot after the last corruption";
        return r;
    }
    std::int64_t checked = 0;
    for (std::size_t si = *st.markerSnapshot; si < t.snapshots.size(); ++si) {
        ++checked;
        const auto res = allConsistent(t.snapshots[si], t.header.bufferUnitSize);
        if (!res.ok) {
            r.verdict = Verdict::Fail;
            r.witness = "snapshot at step " + std::to_string(t.snapshots[si].step) + ": " + res.clause;
            break;
        }
    }
    r.measured = {{"snapshotsChecked", checked}};
    return r;
}

CheckReport bufferBoundCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("buffer-bound");
    if (!st.markerSnapshot) {
        r.verdict = Verdict::Inconclusive;
        r.note = "no consistent snapshot after the last corruption";
        return r;
    }
    const SeqNum B = t.header.bufferUnitSize;
    const int n = t.header.n;
    std::int64_t maxPer = 0, maxTotal = 0, maxPerCurrent = 0;
    for (std::size_t si = *st.markerSnapshot; si < t.snapshots.size() && r.verdict == Verdict::Pass; ++si) {
        const Snapshot& s = t.snapshots[si];
        for (const auto& ns : s.nodes) {
            if (!ns.alive) continue;
            std::vector<std::int64_t> cur(static_cast<std::size_t>(n), 0);
            for (const auto& rec : ns.state.buffer) ++cur[static_cast<std::size_t>(rec.id - 1)];
            maxPerCurrent = std::max(maxPerCurrent, *std::ranges::max_element(cur));
            if (!ns.afterCleanup) continue;
            std::vector<std::int64_t> per(static_cast<std::size_t>(n), 0);
            for (const auto& rec : ns.afterCleanup->buffer) ++per[static_cast<std::size_t>(rec.id - 1)];
            const auto total = static_cast<std::int64_t>(ns.afterCleanup->buffer.size());
            const auto worst = *std::ranges::max_element(per);
            maxPer = std::max(maxPer, worst);
            maxTotal = std::max(maxTotal, total);
            if (worst > B || total > B * n) {
                r.verdict = Verdict::Fail;
                r.witness = "snapshot at step " + std::to_string(s.step) + ", node " + std::to_string(ns.id) +
                            ": " + std::to_string(worst) + " records for one sender, " + std::to_string(total) +
                            " in total";
                break;
            }
        }
    }
    r.measured = {{"maxPerSender", maxPer}, {"maxTotal", maxTotal}, {"maxPerSenderBetweenIterations", maxPerCurrent}};
    return r;
}

CheckReport fifoCheck(const ExecutionTrace& t, const StabilizationInfo& st)
{
    auto r = report("fifo");
    if (!t.header.fifoEnabled) {
        r.verdict = Verdict::Skipped;
        r.note = "fifoEnabled is false";
        return r;
    }
    const std::size_t from = markerOrZero(st);
    std::map<std::tuple<NodeId, int, NodeId>, SeqNum> last;
    for (std::size_t i = from; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        if (e.type != EventType::Deliver || st.exempt.contains({e.epoch, *e.mid})) continue;
        auto [it, fresh] = last.try_emplace({e.node, e.epoch, e.mid->id}, e.mid->seq);
        if (fresh) continue;
        if (e.mid->seq <= it->second) {
            r.verdict = Verdict::Fail;
            r.witness = describe(t, i) + ": after (" + std::to_string(e.mid->id) + "," + std::to_string(it->second) + ")";
            return r;
        }
        it->second = e.mid->seq;
    }
    return r;
}

// ---- cost -----------------------------------------------------------------------------

std::vector<BroadcastCost> broadcastCosts(const ExecutionTrace& t)
{
    const NodeSet correct = neverCrashed(t);
    std::map<EpochId, std::size_t> index;
    std::vector<BroadcastCost> out;
    std::vector<std::int64_t> startCycle;
    std::vector<std::int64_t> lastDeliverCycle;
    std::vector<NodeSet> by;
    std::int64_t cycles = 0;

    for (const auto& e : t.events) {
        switch (e.type) {
        case EventType::Cycle: ++cycles; break;
        case EventType::Broadcast: {
            const EpochId key{e.epoch, *e.mid};
            if (index.contains(key)) break;
            index[key] = out.size();
            out.push_back({key, e.node, 0, 0, std::nullopt});
            startCycle.push_back(cycles);
            lastDeliverCycle.push_back(cycles);
            by.emplace_back();
            break;
        }
        case EventType::Deliver: {
            auto it = index.find({e.epoch, *e.mid});
            if (it == index.end()) break;
            by[it->second].insert(e.node);
            lastDeliverCycle[it->second] = cycles;
            break;
        }
        case EventType::Send: {
            if (!e.mid || (e.kind != PacketKind::Msg && e.kind != PacketKind::MsgAck)) break;
            auto it = index.find({e.epoch, *e.mid});
            if (it == index.end()) break;
            (e.kind == PacketKind::Msg ? out[it->second].msgSends : out[it->second].ackSends)++;
            break;
        }
        default: break;
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        if (correct.isSubsetOf(by[k])) out[k].latencyCycles = lastDeliverCycle[k] - startCycle[k];
    return out;
}

CheckReport messageCost(const ExecutionTrace& t)
{
    auto r = report("message-cost");
    const auto costs = broadcastCosts(t);
    std::int64_t maxMsgs = 0, total = 0, maxLatency = 0;
    for (const auto& c : costs) {
        maxMsgs = std::max(maxMsgs, c.msgSends + c.ackSends);
        total += c.msgSends + c.ackSends;
        if (c.latencyCycles) maxLatency = std::max(maxLatency, *c.latencyCycles);
    }
    const int n = t.header.n;
    r.measured = {{"broadcasts", costs.size()},
                  {"maxPerBroadcast", maxMsgs},
                  {"meanPerBroadcast", costs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(costs.size())},
                  {"maxPerBroadcastOverNSquared", static_cast<double>(maxMsgs) / (n * n)},
                  {"maxLatencyCycles", maxLatency}};
    return r;
}

// ---- aggregate ---------------------------------------------------------------------------

std::vector<CheckReport> runAllChecks(const ExecutionTrace& t)
{
    const auto st = stabilization(t);
    return {validityCheck(t, st),     integrityCheck(t, st),    terminationCheck(t, st),
            quiescenceCheck(t),       fifoCheck(t, st),         closureCheck(t, st),
            stabilizationTime(t, st), bufferBoundCheck(t, st),  messageCost(t)};
}

bool allPassed(const std::vector<CheckReport>& reports)
{
    return std::ranges::none_of(reports, [](const CheckReport& r) { return r.verdict == Verdict::Fail; });
}

Json reportToJson(const ExecutionTrace& t, const std::vector<CheckReport>& reports)
{
    Json j;
    j["configHash"] = t.header.configHash;
    j["seed"] = t.header.seed;
    j["n"] = t.header.n;
    j["endStatus"] = t.endStatus().value_or("truncated");
    j["traceDigest"] = traceDigest(t);
    j["passed"] = allPassed(reports);
    Json props = Json::array();
    for (const auto& r : reports) props.push_back(toJson(r));
    j["properties"] = std::move(props);
    return j;
}

std::string reportSummary(const std::vector<CheckReport>& reports)
{
    std::ostringstream os;
    for (const auto& r : reports) {
        os << r.property;
        for (std::size_t pad = r.property.size(); pad < 14; ++pad) os << ' ';
        os << toString(r.verdict);
        if (!r.measured.empty()) os << "  " << r.measured.dump();
        if (!r.witness.empty()) os << "\n    witness: " << r.witness;
        if (!r.note.empty()) os << "\n    note: " << r.note;
        os << '\n';
    }
    return os.str();
}

} // namespace ssurb
