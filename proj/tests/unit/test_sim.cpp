#include "ssurb/node.hpp"
#include "ssurb/sim.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace ssurb;

namespace {

ScenarioConfig fiveBroadcasts()
{
    ScenarioConfig c;
    c.n = 3;
    c.bufferUnitSize = 2;
    c.seed = 3;
    for (int i = 0; i < 5; ++i) {
        BroadcastEntry b;
        b.node = i % 3 + 1;
        if (i % 2 == 0) b.at = 20 * i;
        b.payload = "p" + std::to_string(i);
        c.broadcasts.push_back(b);
    }
    return c;
}

std::int64_t countEvents(const ExecutionTrace& t, EventType type)
{
    return std::ranges::count_if(t.events, [type](const Event& e) { return e.type == type; });
}

std::size_t packetsLeft(const Snapshot& s)
{
    std::size_t n = 0;
    for (const auto& c : s.channels) n += c.packets.size();
    return n;
}

} // namespace

TEST_CASE("five broadcasts reach every node exactly once")
{
    const auto res = runScenario(fiveBroadcasts());
    CHECK(res.trace.endStatus() == "complete");
    CHECK(countEvents(res.trace, EventType::Broadcast) == 5);

    std::map<std::pair<NodeId, MessageId>, int> got;
    for (const auto& e : res.trace.events)
        if (e.type == EventType::Deliver) ++got[{e.node, *e.mid}];
    CHECK(got.size() == 15);
    for (const auto& [key, count] : got) CHECK(count == 1);
}

TEST_CASE("same seed, same trace; different seed, different trace")
{
    auto c = fiveBroadcasts();
    const auto a = traceDigest(runScenario(c).trace);
    CHECK(traceDigest(runScenario(c).trace) == a);
    c.seed = 4;
    CHECK(traceDigest(runScenario(c).trace) != a);
}

TEST_CASE("packet conservation under omission and duplication")
{
    auto c = fiveBroadcasts();
    c.faults.omissionProb = 0.3;
    c.faults.duplicationProb = 0.2;
    c.channelCapacity = 4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        c.seed = seed;
        const auto res = runScenario(c);
        const auto sends = countEvents(res.trace, EventType::Send);
        const auto recvs = countEvents(res.trace, EventType::Recv);
        const auto left = static_cast<std::int64_t>(packetsLeft(res.trace.snapshots.back()));
        const auto& k = res.counters;
        CHECK(k.omissions > 0);
        CHECK(k.duplications > 0);
        CHECK(recvs + k.omissions + k.overflowDrops + left == sends + k.duplications);
    }
}

TEST_CASE("channels never exceed capacity")
{
    auto c = fiveBroadcasts();
    c.channelCapacity = 2;
    c.faults.duplicationProb = 0.5;
    c.snapshotInterval = 7;
    const auto res = runScenario(c);
    CHECK(res.counters.overflowDrops > 0);
    for (const auto& s : res.trace.snapshots)
        for (const auto& ch : s.channels) CHECK(ch.packets.size() <= 2);
}

TEST_CASE("crashed nodes take no further steps")
{
    auto c = fiveBroadcasts();
    c.faults.crashes.push_back({2, 60});
    const auto res = runScenario(c);
    bool crashed = false;
    std::int64_t cyclesAfter = 0;
    for (const auto& e : res.trace.events) {
        if (e.type == EventType::Crash && e.node == 2) crashed = true;
        if (!crashed) continue;
        if (e.type == EventType::Cycle) ++cyclesAfter;
        const bool actsAs2 = (e.type == EventType::Send || e.type == EventType::Deliver ||
                              e.type == EventType::Broadcast || e.type == EventType::Recv) &&
                             e.node == 2;
        CHECK_FALSE(actsAs2);
    }
    CHECK(crashed);
    CHECK(cyclesAfter > 0);
}

TEST_CASE("all nodes crashed halts the run")
{
    ScenarioConfig c;
    c.n = 2;
    c.faults.crashes = {{1, 5}, {2, 6}};
    const auto res = runScenario(c);
    CHECK(res.trace.endStatus() == "halted");
}

TEST_CASE("single node runs alone")
{
    ScenarioConfig c;
    c.n = 1;
    c.broadcasts.push_back({1, std::nullopt, "solo"});
    const auto res = runScenario(c);
    CHECK(res.trace.endStatus() == "complete");
    CHECK(countEvents(res.trace, EventType::Send) == 0);
    CHECK(countEvents(res.trace, EventType::Deliver) == 1);
}

TEST_CASE("cycles advance in a fault-free two-node run")
{
    ScenarioConfig c;
    c.n = 2;
    const auto res = runScenario(c);
    CHECK(countEvents(res.trace, EventType::Cycle) >= c.quiescenceWindowCycles);
}

TEST_CASE("detector contracts over snapshots")
{
    auto c = fiveBroadcasts();
    c.n = 4;
    c.faults.crashes.push_back({3, 40});
    c.faults.detectionLatency = 10;
    c.broadcasts.push_back({4, 200, "late"});
    const auto res = runScenario(c);
    const auto& snaps = res.trace.snapshots;
    REQUIRE(snaps.size() > 3);

    for (const auto& s : snaps) {
        NodeSet live;
        for (const auto& ns : s.nodes)
            if (ns.alive) live.insert(ns.id);
        for (const auto& ns : s.nodes)
            if (ns.alive) CHECK_FALSE((trustedView(ns.theta) & live).empty());
    }

    // Eventually only live nodes are trusted, and the crashed node's heartbeat entry freezes.
    const auto& last = snaps.back();
    const auto& prev = snaps[snaps.size() - 2];
    for (const auto& ns : last.nodes) {
        if (!ns.alive) continue;
        CHECK_FALSE(trustedView(ns.theta).contains(3));
        CHECK(ns.hb.at(3) == prev.node(ns.id).hb.at(3));
    }
}

TEST_CASE("heartbeats grow and counters never decrease without faults")
{
    auto c = fiveBroadcasts();
    c.fifoEnabled = true;
    c.snapshotInterval = 5;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        c.seed = seed;
        const auto res = runScenario(c);
        const auto& snaps = res.trace.snapshots;
        for (std::size_t i = 1; i < snaps.size(); ++i) {
            for (NodeId k = 1; k <= c.n; ++k) {
                const auto& a = snaps[i - 1].node(k);
                const auto& b = snaps[i].node(k);
                CHECK(a.state.seq <= b.state.seq);
                for (NodeId j = 1; j <= c.n; ++j) {
                    CHECK(a.state.rx(j) <= b.state.rx(j));
                    CHECK(a.state.tx(j) <= b.state.tx(j));
                    CHECK(a.state.nextOf(j) <= b.state.nextOf(j));
                    CHECK(a.hb.at(j) <= b.hb.at(j));
                }
                for (const auto& r : b.state.buffer) {
                    for (const auto& q : a.state.buffer) {
                        if (q.mid() != r.mid()) continue;
                        CHECK(q.recBy.isSubsetOf(r.recBy));
                        CHECK((!q.delivered || r.delivered));
                    }
                }
            }
        }
        const auto& first = snaps.front();
        const auto& last = snaps.back();
        for (NodeId k = 1; k <= c.n; ++k) CHECK(last.node(k).hb.at(k) > first.node(k).hb.at(k));
    }
}

TEST_CASE("fifo deliveries follow next")
{
    auto c = fiveBroadcasts();
    c.fifoEnabled = true;
    c.faults.reorderProb = 0.5;
    c.workload.perNode = 4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        c.seed = seed;
        const auto res = runScenario(c);
        std::map<std::pair<NodeId, NodeId>, SeqNum> lastSeq;
        for (const auto& e : res.trace.events) {
            if (e.type != EventType::Deliver) continue;
            auto& prev = lastSeq[{e.node, e.mid->id}];
            CHECK(e.mid->seq == prev + 1);
            prev = e.mid->seq;
        }
    }
}

TEST_CASE("starved node still participates")
{
    auto c = fiveBroadcasts();
    c.schedulerProfile = SchedulerProfile::StarveOne;
    c.starvedNode = 2;
    const auto res = runScenario(c);
    CHECK(res.trace.endStatus() == "complete");
    CHECK(countEvents(res.trace, EventType::Deliver) == 15);
}

TEST_CASE("null payload corruption is purged at the next cleanup")
{
    auto c = fiveBroadcasts();
    Simulator sim(c);
    while (sim.state(1).buffer.empty() && sim.step()) {}
    REQUIRE_FALSE(sim.state(1).buffer.empty());
    sim.injectTransientFault(1, CorruptionKind::NullPayload);
    bool hasNull = false;
    for (const auto& r : sim.state(1).buffer) hasNull |= r.msg.isNull();
    CHECK(hasNull);
    sim.run();

    const auto& t = sim.trace();
    bool after = false;
    for (const auto& e : t.events) {
        if (e.type == EventType::Corrupt) after = true;
        if (after && e.type == EventType::Snapshot) {
            const auto& ns = t.snapshots[static_cast<std::size_t>(e.snapshot)].node(1);
            REQUIRE(ns.afterCleanup.has_value());
            for (const auto& r : ns.afterCleanup->buffer) CHECK_FALSE(r.msg.isNull());
            break;
        }
    }
}

TEST_CASE("gossip pulls a regressed seq forward")
{
    // Peer 2 still buffers (1,9) while node 1 regressed to seq 2.
    const int n = 2;
    auto peer = NodeState::initial(2, n, false);
    BufferRecord r;
    r.msg = Payload::of("m");
    r.id = 1;
    r.seq = 9;
    r.recBy.insert(1);
    r.recBy.insert(2);
    r.prevHb = {-1, -1};
    peer.buffer.push_back(r);
    peer.rx(1) = 8;

    auto self = NodeState::initial(1, n, false);
    self.seq = 2;

    NodeConfig cfg;
    cfg.n = n;
    cfg.bufferUnitSize = 4;
    const DetectorView v{NodeSet::all(n), {0, 0}};
    auto out = processPhase(peer, v, cfg);
    for (const auto& o : out.outgoing)
        if (o.to == 1)
            if (const auto* g = std::get_if<GossipPacket>(&o.msg)) onGossip(self, g->maxSeq, g->rxObs, g->txObs, 2);
    CHECK(self.seq >= 9);
}

TEST_CASE("fifo gossip carries next minus one")
{
    const int n = 2;
    auto peer = NodeState::initial(2, n, true);
    peer.nextOf(1) = 50;
    auto self = NodeState::initial(1, n, true);
    self.seq = 10;

    NodeConfig cfg;
    cfg.n = n;
    cfg.bufferUnitSize = 4;
    cfg.fifoEnabled = true;
    const DetectorView v{NodeSet::all(n), {0, 0}};
    auto out = processPhase(peer, v, cfg);
    for (const auto& o : out.outgoing)
        if (o.to == 1)
            if (const auto* g = std::get_if<GossipPacket>(&o.msg)) onGossip(self, g->maxSeq, g->rxObs, g->txObs, 2);
    CHECK(self.seq >= 49);
}

TEST_CASE("every corruption kind is survivable")
{
    for (auto kind : kAllCorruptionKinds) {
        CAPTURE(toString(kind));
        auto c = fiveBroadcasts();
        c.fifoEnabled = true;
        c.faults.corruptions.push_back({2, 30, kind});
        c.maxSteps = 40000;
        const auto res = runScenario(c);
        CHECK(res.trace.endStatus() == "complete");
        CHECK(countEvents(res.trace, EventType::Corrupt) == 1);
    }
}

TEST_CASE("bounded mode resets on overflow")
{
    auto c = fiveBroadcasts();
    c.boundedMode = true;
    c.maxint = 6;
    c.workload.perNode = 4;
    c.workload.spacing = 30;
    c.maxSteps = 60000;
    const auto res = runScenario(c);
    CHECK(res.counters.resets >= 1);
    CHECK(res.trace.endStatus() == "complete");
    int applies = 0;
    for (const auto& e : res.trace.events)
        if (e.type == EventType::Reset && e.detail == "apply") ++applies;
    CHECK(applies == res.counters.resets);
}
