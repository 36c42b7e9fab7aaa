#include "ssurb/sim.hpp"

#include <algorithm>

namespace ssurb {

namespace {

constexpr std::uint64_t kIterationWeight = 10;
constexpr std::uint64_t kStarvedWeight = 1;
constexpr std::uint64_t kPacketWeight = 10;
constexpr double kHeavyReorder = 0.5;

std::uint64_t payloadHash(const Payload& p)
{
    return p.isNull() ? 0 : fnv1a64(*p.bytes);
}

} // namespace

// ---- Rng --------------------------------------------------------------------

std::uint64_t Rng::below(std::uint64_t bound)
{
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = gen_();
        if (x >= threshold) return x % bound;
    }
}

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi)
{
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(gen_());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span));
}

bool Rng::chance(double p)
{
    if (p <= 0.0) return false;
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p;
}

// ---- setup ------------------------------------------------------------------

Simulator::Simulator(ScenarioConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed)
{
    const int n = cfg_.n;
    for (NodeId k = 1; k <= n; ++k) {
        NodeRuntime nr;
        nr.state = NodeState::initial(k, n, cfg_.fifoEnabled);
        nr.afterCleanup = nr.state;
        nr.hb = HbState::initial(k, n);
        nr.theta = ThetaState::initial(n);
        nodes_.push_back(std::move(nr));
    }
    channels_.resize(static_cast<std::size_t>(n * n));

    for (auto& b : cfg_.expandedBroadcasts()) (b.at ? schedule_ : asap_).push_back(std::move(b));
    std::ranges::stable_sort(schedule_, {}, [](const BroadcastEntry& b) { return *b.at; });
    crashes_ = cfg_.faults.crashes;
    std::ranges::stable_sort(crashes_, {}, &CrashSpec::at);
    corruptions_ = cfg_.faults.corruptions;
    std::ranges::stable_sort(corruptions_, {}, &CorruptionSpec::at);

    auto& h = trace_.header;
    h.configHash = configHash(cfg_);
    h.seed = cfg_.seed;
    h.n = n;
    h.bufferUnitSize = cfg_.bufferUnitSize;
    h.channelCapacity = cfg_.channelCapacity;
    h.maxint = cfg_.maxint;
    h.fifoEnabled = cfg_.fifoEnabled;
    h.boundedMode = cfg_.boundedMode;
    h.quiescenceWindowCycles = cfg_.quiescenceWindowCycles;
    h.config = toJson(cfg_);

    resetCycleTracking();
    takeSnapshot();
}

NodeConfig Simulator::nodeConfig() const
{
    return {cfg_.n, cfg_.bufferUnitSize, cfg_.fifoEnabled, cfg_.boundedMode, cfg_.maxint};
}

NodeSet Simulator::liveSet() const
{
    NodeSet s;
    for (NodeId k = 1; k <= cfg_.n; ++k)
        if (node(k).alive) s.insert(k);
    return s;
}

NodeSet Simulator::oracleCrashed() const
{
    NodeSet s;
    for (NodeId k = 1; k <= cfg_.n; ++k) {
        const auto& nr = node(k);
        if (!nr.alive && nr.crashStep + cfg_.faults.detectionLatency <= step_) s.insert(k);
    }
    return s;
}

std::size_t Simulator::channelSize(NodeId src, NodeId dst) const
{
    return channels_[static_cast<std::size_t>((src - 1) * cfg_.n + (dst - 1))].size();
}

// ---- events -----------------------------------------------------------------

void Simulator::emit(Event e)
{
    e.step = step_;
    trace_.events.push_back(std::move(e));
}

void Simulator::send(NodeId from, NodeId to, WireMessage msg)
{
    Event e;
    e.type = EventType::Send;
    e.node = from;
    e.peer = to;
    e.kind = kindOf(msg);
    e.mid = carriedId(msg);
    e.epoch = epoch_;
    emit(std::move(e));

    if (!node(to).alive) return;
    auto& ch = channel(from, to);
    if (static_cast<int>(ch.size()) >= cfg_.channelCapacity) {
        ++counters_.overflowDrops;
        return;
    }
    ch.push_back({std::move(msg), step_});
}

void Simulator::takeSnapshot()
{
    Snapshot s;
    s.step = step_;
    s.cycle = cycle_;
    s.epoch = epoch_;
    s.lastCorruptStep = lastCorruptStep_;
    for (NodeId k = 1; k <= cfg_.n; ++k) {
        const auto& nr = node(k);
        s.nodes.push_back({k, nr.alive, nr.state, nr.afterCleanup, nr.hb, nr.theta});
    }
    for (NodeId a = 1; a <= cfg_.n; ++a)
        for (NodeId b = 1; b <= cfg_.n; ++b) {
            const auto& ch = channel(a, b);
            if (!ch.empty()) s.channels.push_back({a, b, {ch.begin(), ch.end()}});
        }

    Event e;
    e.type = EventType::Snapshot;
    e.cycle = cycle_;
    e.epoch = epoch_;
    e.snapshot = static_cast<int>(trace_.snapshots.size());
    trace_.snapshots.push_back(std::move(s));
    emit(std::move(e));
}

// ---- main loop --------------------------------------------------------------

void Simulator::run()
{
    while (step()) {
    }
}

bool Simulator::step()
{
    if (finished_) return false;

    auto finish = [this](const char* status) {
        takeSnapshot();
        Event e;
        e.type = EventType::End;
        e.detail = status;
        emit(std::move(e));
        finished_ = true;
        return false;
    };

    if (liveSet().empty()) return finish("halted");
    if (step_ >= cfg_.maxSteps) return finish("max_steps");
    ++step_;

    if (!applyScheduled()) {
        std::uint64_t total = 0;
        for (NodeId k = 1; k <= cfg_.n; ++k) {
            if (!node(k).alive) continue;
            const bool starved = cfg_.schedulerProfile == SchedulerProfile::StarveOne && k == cfg_.starvedNode;
            total += starved ? kStarvedWeight : kIterationWeight;
        }
        for (std::size_t c = 0; c < channels_.size(); ++c)
            if (node(static_cast<NodeId>(c) % cfg_.n + 1).alive) total += kPacketWeight * channels_[c].size();

        std::uint64_t r = rng_.below(total);
        bool done = false;
        for (NodeId k = 1; k <= cfg_.n && !done; ++k) {
            if (!node(k).alive) continue;
            const bool starved = cfg_.schedulerProfile == SchedulerProfile::StarveOne && k == cfg_.starvedNode;
            const std::uint64_t w = starved ? kStarvedWeight : kIterationWeight;
            if (r < w) {
                nodeIteration(k);
                done = true;
            } else {
                r -= w;
            }
        }
        for (std::size_t c = 0; c < channels_.size() && !done; ++c) {
            if (!node(static_cast<NodeId>(c) % cfg_.n + 1).alive) continue;
            const std::uint64_t w = kPacketWeight * channels_[c].size();
            if (r < w) {
                deliverFrom(c);
                done = true;
            } else {
                r -= w;
            }
        }
    }

    barrierProgress();
    cycleProgress();
    if (cfg_.snapshotInterval > 0 && step_ % cfg_.snapshotInterval == 0) takeSnapshot();

    if (stopPredicate()) {
        if (!quietSinceCycle_) quietSinceCycle_ = cycle_;
    } else {
        quietSinceCycle_.reset();
    }
    if (quietSinceCycle_ && cycle_ >= *quietSinceCycle_ + cfg_.quiescenceWindowCycles + 1) return finish("complete");
    return true;
}

bool Simulator::applyScheduled()
{
    while (nextCrash_ < crashes_.size() && crashes_[nextCrash_].at <= step_) {
        const NodeId k = crashes_[nextCrash_++].node;
        if (!node(k).alive) continue;
        doCrash(k);
        return true;
    }
    while (nextCorruption_ < corruptions_.size() && corruptions_[nextCorruption_].at <= step_) {
        const auto c = corruptions_[nextCorruption_++];
        if (!node(c.node).alive) continue;
        injectTransientFault(c.node, c.kind);
        return true;
    }
    while (nextScheduled_ < schedule_.size() && *schedule_[nextScheduled_].at <= step_) {
        const auto& b = schedule_[nextScheduled_++];
        if (!node(b.node).alive) continue;
        doBroadcast(b);
        return true;
    }
    while (nextAsap_ < asap_.size()) {
        const auto& b = asap_[nextAsap_++];
        if (!node(b.node).alive) continue;
        doBroadcast(b);
        return true;
    }
    return false;
}

void Simulator::doBroadcast(const BroadcastEntry& b)
{
    auto& nr = node(b.node);
    const DetectorView view{trustedView(nr.theta), nr.hb.hb};
    const auto out = urbBroadcast(nr.state, view, nodeConfig(), Payload::of(b.payload));
    if (out.status != BroadcastStatus::Accepted) return;

    Event e;
    e.type = EventType::Broadcast;
    e.node = b.node;
    e.mid = out.mid;
    e.epoch = epoch_;
    e.payloadHash = fnv1a64(b.payload);
    emit(std::move(e));
    overflowCheck(b.node);
}

void Simulator::doCrash(NodeId k)
{
    auto& nr = node(k);
    nr.alive = false;
    nr.crashStep = step_;
    for (NodeId src = 1; src <= cfg_.n; ++src) channel(src, k).clear();

    Event e;
    e.type = EventType::Crash;
    e.node = k;
    emit(std::move(e));
}

void Simulator::nodeIteration(NodeId i)
{
    auto& nr = node(i);
    reconcile(nr.theta, oracleCrashed());
    auto heartbeats = hbTick(nr.hb);
    const DetectorView view{trustedView(nr.theta), nr.hb.hb};
    const NodeConfig nc = nodeConfig();

    cleanupPhase(nr.state, view, nc);
    nr.afterCleanup = nr.state;
    auto res = processPhase(nr.state, view, nc);

    const bool tracking = !nr.tracked;
    if (tracking) {
        nr.tracked = true;
        nr.trackedStep = step_;
        nr.pending.clear();
        nr.gossipSeenBy = NodeSet{};
    }

    for (const auto& d : res.delivered) {
        Event e;
        e.type = EventType::Deliver;
        e.node = i;
        e.mid = d.mid;
        e.epoch = epoch_;
        e.payloadHash = payloadHash(d.msg);
        emit(std::move(e));
    }
    for (auto& o : heartbeats) send(i, o.to, std::move(o.msg));
    for (auto& o : res.outgoing) {
        if (tracking && kindOf(o.msg) == PacketKind::Msg) nr.pending.push_back({o.to, *carriedId(o.msg)});
        send(i, o.to, std::move(o.msg));
    }
    for (const auto& a : res.accepted) {
        Event e;
        e.type = EventType::Broadcast;
        e.node = i;
        e.mid = a.mid;
        e.epoch = epoch_;
        e.payloadHash = payloadHash(a.msg);
        emit(std::move(e));
    }
    overflowCheck(i);
}

void Simulator::deliverFrom(std::size_t c)
{
    const NodeId src = static_cast<NodeId>(c) / cfg_.n + 1;
    const NodeId dst = static_cast<NodeId>(c) % cfg_.n + 1;
    auto& ch = channels_[c];

    const double reorder = cfg_.schedulerProfile == SchedulerProfile::ReorderHeavy
                               ? std::max(cfg_.faults.reorderProb, kHeavyReorder)
                               : cfg_.faults.reorderProb;
    std::size_t pos = 0;
    if (ch.size() > 1 && rng_.chance(reorder)) {
        pos = static_cast<std::size_t>(rng_.below(ch.size()));
        if (pos != 0) ++counters_.reorders;
    }
    InTransit pkt = std::move(ch[pos]);
    ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(pos));

    if (rng_.chance(cfg_.faults.omissionProb)) {
        ++counters_.omissions;
        return;
    }
    if (rng_.chance(cfg_.faults.duplicationProb) && static_cast<int>(ch.size()) < cfg_.channelCapacity) {
        ch.push_back(pkt);
        ++counters_.duplications;
    }
    receive(dst, src, pkt.msg, pkt.sentStep);
}

void Simulator::receive(NodeId dst, NodeId src, const WireMessage& msg, Step sentStep)
{
    Event e;
    e.type = EventType::Recv;
    e.node = dst;
    e.peer = src;
    e.kind = kindOf(msg);
    e.mid = carriedId(msg);
    e.epoch = epoch_;
    emit(std::move(e));

    auto& nr = node(dst);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MsgPacket>) {
                auto ack = onMsg(nr.state, p.msg, p.id, p.seq, src);
                send(dst, ack.to, std::move(ack.msg));
            } else if constexpr (std::is_same_v<T, MsgAckPacket>) {
                onMsgAck(nr.state, p.id, p.seq, src);
            } else if constexpr (std::is_same_v<T, GossipPacket>) {
                onGossip(nr.state, p.maxSeq, p.rxObs, p.txObs, src);
                auto& sender = node(src);
                if (sender.tracked && sentStep >= sender.trackedStep) sender.gossipSeenBy.insert(dst);
            } else if constexpr (std::is_same_v<T, HeartbeatPacket>) {
                onHeartbeat(nr.hb, p.senderCount, p.dstCount, src);
            } else {
                if (p.kind == ResetKind::Disable && nr.state.resetPhase == ResetPhase::Normal)
                    nr.state.resetPhase = ResetPhase::Disabled;
            }
        },
        msg);
    overflowCheck(dst);
}

// ---- bounded mode -----------------------------------------------------------

void Simulator::overflowCheck(NodeId i)
{
    if (!cfg_.boundedMode) return;
    auto& nr = node(i);
    checkOverflow(nr.state, nodeConfig(), nr.hb.hb);
}

void Simulator::barrierProgress()
{
    const NodeSet live = liveSet();
    if (!barrierActive_) {
        bool requested = false;
        for (NodeId k : live.members()) requested = requested || node(k).state.resetPhase != ResetPhase::Normal;
        if (!requested) return;

        barrierActive_ = true;
        barrierStartCycle_ = cycle_;
        Event e;
        e.type = EventType::Reset;
        e.detail = "disable";
        e.epoch = epoch_;
        emit(std::move(e));
    }

    bool drained = true;
    for (NodeId k : live.members()) {
        auto& st = node(k).state;
        st.resetPhase = ResetPhase::Disabled;
        drained = drained && undeliveredCount(st) == 0;
    }
    if (drained || cycle_ - barrierStartCycle_ >= cfg_.resetDrainCycles) applyReset();
}

void Simulator::applyReset()
{
    for (NodeId k = 1; k <= cfg_.n; ++k) {
        auto& nr = node(k);
        if (!nr.alive) continue;
        performGlobalReset(nr.state);
        nr.afterCleanup = nr.state;
        nr.hb = HbState::initial(k, cfg_.n);
    }
    for (auto& ch : channels_) ch.clear();
    ++epoch_;
    ++counters_.resets;
    barrierActive_ = false;

    Event e;
    e.type = EventType::Reset;
    e.detail = "apply";
    e.epoch = epoch_;
    emit(std::move(e));
    resetCycleTracking();
    takeSnapshot();
}

// ---- cycles and termination ---------------------------------------------------

void Simulator::resetCycleTracking()
{
    for (auto& nr : nodes_) {
        nr.tracked = false;
        nr.trackedStep = -1;
        nr.pending.clear();
        nr.gossipSeenBy = NodeSet{};
    }
}

void Simulator::cycleProgress()
{
    const NodeSet live = liveSet();
    if (live.empty()) return;
    for (NodeId i : live.members()) {
        auto& nr = node(i);
        if (!nr.tracked) return;

        const NodeSet trusted = trustedView(nr.theta);
        std::erase_if(nr.pending, [&](const NodeRuntime::PendingMsg& p) {
            if (!live.contains(p.to) || !trusted.contains(p.to)) return true;
            const auto& buf = nr.state.buffer;
            auto it = std::ranges::find_if(buf, [&](const BufferRecord& r) { return r.mid() == p.mid; });
            return it == buf.end() || it->recBy.contains(p.to);
        });
        if (!nr.pending.empty()) return;

        NodeSet peers = live;
        peers.erase(i);
        if (!peers.isSubsetOf(nr.gossipSeenBy)) return;
    }

    ++cycle_;
    Event e;
    e.type = EventType::Cycle;
    e.cycle = cycle_;
    emit(std::move(e));
    takeSnapshot();
    resetCycleTracking();
}

bool Simulator::stopPredicate() const
{
    if (barrierActive_) return false;
    if (nextAsap_ < asap_.size() || nextScheduled_ < schedule_.size() || nextCrash_ < crashes_.size() ||
        nextCorruption_ < corruptions_.size())
        return false;

    const NodeSet live = liveSet();
    for (NodeId i : live.members()) {
        const auto& nr = node(i);
        const auto& st = nr.state;
        if (!st.pendingBroadcasts.empty()) return false;
        const NodeSet trusted = trustedView(nr.theta);
        if (minTxObsS(st, {trusted, nr.hb.hb}) < st.seq) return false;
        for (const auto& r : st.buffer)
            if (!r.delivered || !trusted.isSubsetOf(r.recBy)) return false;
        for (NodeId k = 1; k <= cfg_.n; ++k) {
            const auto& ch = channels_[static_cast<std::size_t>((k - 1) * cfg_.n + (i - 1))];
            // A crashed sender's leftovers can still wake retransmissions.
            if (!node(k).alive && !ch.empty()) return false;
            for (const auto& p : ch) {
                const auto kind = kindOf(p.msg);
                if (kind == PacketKind::Msg || kind == PacketKind::MsgAck) return false;
            }
        }
    }
    return true;
}

// ---- transient faults ---------------------------------------------------------

void Simulator::injectTransientFault(NodeId i, CorruptionKind kind)
{
    auto& nr = node(i);
    auto& st = nr.state;
    const int n = cfg_.n;
    const SeqNum bus = cfg_.bufferUnitSize;

    Event e;
    e.type = EventType::Corrupt;
    e.node = i;
    e.detail = toString(kind);
    emit(std::move(e));
    lastCorruptStep_ = step_;

    SeqNum top = 0;
    for (const auto& other : nodes_)
        if (other.alive) top = std::max(top, other.state.seq);
    top = saturatingAdd(top, 2 * bus);

    auto randomMask = [&] {
        return NodeSet::fromMask(rng_.below(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n))) &
               NodeSet::all(n);
    };
    auto freshRecord = [&](Payload m, NodeId id, SeqNum s) {
        BufferRecord r;
        r.msg = std::move(m);
        r.id = id;
        r.seq = s;
        r.recBy.insert(id);
        r.prevHb.assign(static_cast<std::size_t>(n), -1);
        return r;
    };

    switch (kind) {
    case CorruptionKind::RandomizeAll: {
        const SeqNum hi = cfg_.maxint > kSeqCeiling / 2 ? kSeqCeiling : 2 * cfg_.maxint - 1;
        auto v = [&] { return rng_.range(0, hi); };
        st.seq = v();
        for (auto& x : st.rxObsS) x = v();
        for (auto& x : st.txObsS) x = v();
        for (auto& x : st.next) x = v();
        st.buffer.clear();
        const auto count = rng_.range(0, 2 * bus);
        for (std::int64_t c = 0; c < count; ++c) {
            BufferRecord r;
            r.msg = rng_.chance(0.1) ? Payload::null() : Payload::of("rnd" + std::to_string(rng_.below(1000)));
            r.id = static_cast<NodeId>(rng_.range(1, n));
            r.seq = v();
            r.delivered = rng_.chance(0.5);
            r.recBy = randomMask();
            r.prevHb.resize(static_cast<std::size_t>(n));
            for (auto& x : r.prevHb) x = rng_.range(-1, hi);
            st.buffer.push_back(std::move(r));
        }
        st.resetPhase = static_cast<ResetPhase>(rng_.range(0, 2));
        for (auto& x : nr.hb.hb) x = v();
        nr.theta.suspected = randomMask();
        break;
    }
    case CorruptionKind::DuplicateRecord:
        if (st.buffer.empty()) {
            const SeqNum s = plusOne(st.seq);
            st.buffer.push_back(freshRecord(Payload::of("dupA"), i, s));
            st.buffer.push_back(freshRecord(Payload::of("dupB"), i, s));
        } else {
            const auto at = static_cast<std::ptrdiff_t>(rng_.below(st.buffer.size()));
            BufferRecord copy = st.buffer[static_cast<std::size_t>(at)];
            copy.msg = Payload::of("dup" + std::to_string(rng_.below(1000)));
            copy.delivered = rng_.chance(0.5);
            st.buffer.insert(st.buffer.begin() + at + 1, std::move(copy));
        }
        break;
    case CorruptionKind::NullPayload:
        if (st.buffer.empty()) {
            const auto id = static_cast<NodeId>(rng_.range(1, n));
            st.buffer.push_back(freshRecord(Payload::null(), id, plusOne(st.rx(id))));
        } else {
            st.buffer[rng_.below(st.buffer.size())].msg = Payload::null();
        }
        break;
    case CorruptionKind::SeqRegression: {
        SeqNum low = st.seq;
        for (const auto& r : st.buffer)
            if (r.id == i) low = std::min(low, r.seq);
        if (low > 0) st.seq = rng_.range(0, low - 1);
        break;
    }
    case CorruptionKind::WindowSkew:
        for (auto& x : st.rxObsS) x = rng_.range(0, top);
        for (auto& x : st.txObsS) x = rng_.range(0, top);
        break;
    case CorruptionKind::NextSkew: {
        const auto k = static_cast<NodeId>(rng_.range(1, n));
        st.nextOf(k) = saturatingAdd(node(k).state.seq, rng_.range(1, 4 * bus));
        break;
    }
    case CorruptionKind::ChannelGarbage: {
        if (n == 1) break;
        const auto count = rng_.range(1, std::max(1, cfg_.channelCapacity / 2));
        for (std::int64_t c = 0; c < count; ++c) {
            NodeId src = static_cast<NodeId>(rng_.range(1, n - 1));
            if (src >= i) ++src;
            WireMessage m;
            switch (rng_.below(3)) {
            case 0:
                m = MsgPacket{Payload::of("garbage" + std::to_string(c)), static_cast<NodeId>(rng_.range(1, n)),
                              rng_.range(1, top)};
                break;
            case 1: m = MsgAckPacket{static_cast<NodeId>(rng_.range(1, n)), rng_.range(1, top)}; break;
            default: m = GossipPacket{rng_.range(0, top), rng_.range(0, top), rng_.range(0, top)}; break;
            }
            auto& ch = channel(src, i);
            if (static_cast<int>(ch.size()) < cfg_.channelCapacity) ch.push_back({std::move(m), step_});
        }
        return; // node state untouched
    }
    }
    nr.afterCleanup.reset();
}

RunResult runScenario(const ScenarioConfig& cfg)
{
    Simulator sim(cfg);
    sim.run();
    return {sim.takeTrace(), sim.counters()};
}

} // namespace ssurb
