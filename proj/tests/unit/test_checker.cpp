#include "ssurb/checker.hpp"
#include "ssurb/sim.hpp"

#include <doctest.h>

#include <sstream>

using namespace ssurb;

namespace {

Snapshot freshSnapshot(int n, bool fifo = false)
{
    Snapshot s;
    for (NodeId k = 1; k <= n; ++k) {
        NodeSnapshot ns;
        ns.id = k;
        ns.state = NodeState::initial(k, n, fifo);
        ns.afterCleanup = ns.state;
        ns.hb = HbState::initial(k, n);
        ns.theta = ThetaState::initial(n);
        s.nodes.push_back(ns);
    }
    return s;
}

// Minimal hand-written trace: header, one fresh snapshot, the given events, END.
struct HandTrace
{
    ExecutionTrace t;
    Step step = 1;

    explicit HandTrace(int n, bool fifo = false)
    {
        t.header.n = n;
        t.header.bufferUnitSize = 4;
        t.header.fifoEnabled = fifo;
        t.header.quiescenceWindowCycles = 3;
        snapshot(freshSnapshot(n, fifo));
    }

    HandTrace& snapshot(Snapshot s)
    {
        s.step = step;
        Event e;
        e.type = EventType::Snapshot;
        e.step = step++;
        e.snapshot = static_cast<int>(t.snapshots.size());
        t.snapshots.push_back(std::move(s));
        t.events.push_back(e);
        return *this;
    }

    HandTrace& mid(EventType type, NodeId node, MessageId m, std::uint64_t hash = 7)
    {
        Event e;
        e.type = type;
        e.step = step++;
        e.node = node;
        e.mid = m;
        e.payloadHash = hash;
        t.events.push_back(e);
        return *this;
    }
    HandTrace& broadcast(NodeId node, MessageId m) { return mid(EventType::Broadcast, node, m); }
    HandTrace& deliver(NodeId node, MessageId m) { return mid(EventType::Deliver, node, m); }

    HandTrace& packet(EventType type, NodeId node, NodeId peer, PacketKind kind, std::optional<MessageId> m = {})
    {
        Event e;
        e.type = type;
        e.step = step++;
        e.node = node;
        e.peer = peer;
        e.kind = kind;
        e.mid = m;
        t.events.push_back(e);
        return *this;
    }

    HandTrace& cycle(std::int64_t c)
    {
        Event e;
        e.type = EventType::Cycle;
        e.step = step++;
        e.cycle = c;
        t.events.push_back(e);
        return *this;
    }

    HandTrace& crash(NodeId node)
    {
        Event e;
        e.type = EventType::Crash;
        e.step = step++;
        e.node = node;
        t.events.push_back(e);
        return *this;
    }

    ExecutionTrace end(const char* status = "complete")
    {
        Event e;
        e.type = EventType::End;
        e.step = step++;
        e.detail = status;
        t.events.push_back(e);
        return t;
    }
};

BufferRecord rec(NodeId id, SeqNum seq, bool delivered, NodeSet recBy, int n)
{
    BufferRecord r;
    r.msg = Payload::of("m");
    r.id = id;
    r.seq = seq;
    r.delivered = delivered;
    r.recBy = recBy;
    r.prevHb.assign(static_cast<std::size_t>(n), -1);
    return r;
}

Verdict verdictOf(const std::vector<CheckReport>& rs, const std::string& name)
{
    for (const auto& r : rs)
        if (r.property == name) return r.verdict;
    FAIL("no report named " << name);
    return Verdict::Skipped;
}

} // namespace

TEST_SUITE("validity")
{
    TEST_CASE("broadcast then deliver everywhere")
    {
        auto t = HandTrace(2).broadcast(1, {1, 1}).deliver(1, {1, 1}).deliver(2, {1, 1}).end();
        const auto st = stabilization(t);
        CHECK((validityCheck(t, st).verdict == Verdict::Pass));
    }

    TEST_CASE("delivery of an id that was never broadcast")
    {
        auto t = HandTrace(2).broadcast(1, {1, 1}).deliver(2, {1, 2}).end();
        const auto rep = validityCheck(t, stabilization(t));
        CHECK((rep.verdict == Verdict::Fail));
        CHECK(rep.witness.find("trace line 4") != std::string::npos);
    }

    TEST_CASE("payload mismatch")
    {
        auto t = HandTrace(2).broadcast(1, {1, 1}).mid(EventType::Deliver, 2, {1, 1}, 99).end();
        CHECK((validityCheck(t, stabilization(t)).verdict == Verdict::Fail));
    }

    TEST_CASE("truncated trace")
    {
        HandTrace h(2);
        h.broadcast(1, {1, 1});
        CHECK((validityCheck(h.t, stabilization(h.t)).verdict == Verdict::Inconclusive));
    }

    TEST_CASE("corrupted record delivered after stabilization is exempt")
    {
        // A corruption plants (2,3) at node 1; it is still present at the marker.
        HandTrace h(2);
        Event c;
        c.type = EventType::Corrupt;
        c.step = h.step++;
        c.node = 1;
        c.detail = "DUPLICATE_RECORD";
        h.t.events.push_back(c);
        auto s = freshSnapshot(2);
        s.nodes[0].state.buffer.push_back(rec(2, 3, false, NodeSet::all(2), 2));
        s.nodes[1].state.seq = 3;
        for (SeqNum q = 1; q <= 3; ++q) s.nodes[1].state.buffer.push_back(rec(2, q, false, {}, 2));
        for (auto& ns : s.nodes) ns.afterCleanup = ns.state;
        h.snapshot(s);
        auto t = h.deliver(1, {2, 3}).end();
        const auto st = stabilization(t);
        REQUIRE(st.markerEvent.has_value());
        CHECK(st.exempt.contains(EpochId{0, {2, 3}}));
        const auto rep = validityCheck(t, st);
        CHECK((rep.verdict == Verdict::Pass));
        CHECK(rep.measured["exemptions"] == 1);
    }
}

TEST_SUITE("integrity")
{
    TEST_CASE("each pair once")
    {
        auto t = HandTrace(2).broadcast(1, {1, 4}).deliver(1, {1, 4}).deliver(2, {1, 4}).end();
        CHECK((integrityCheck(t, stabilization(t)).verdict == Verdict::Pass));
    }

    TEST_CASE("duplicate delivery")
    {
        auto t = HandTrace(2).broadcast(1, {1, 4}).deliver(2, {1, 4}).deliver(2, {1, 4}).end();
        const auto rep = integrityCheck(t, stabilization(t));
        CHECK((rep.verdict == Verdict::Fail));
        CHECK(rep.witness.find("DELIVER node 2") != std::string::npos);
    }

    TEST_CASE("empty trace is vacuous")
    {
        ExecutionTrace t;
        CHECK((integrityCheck(t, stabilization(t)).verdict == Verdict::Pass));
    }
}

TEST_SUITE("termination")
{
    TEST_CASE("missing delivery at a completed run")
    {
        auto t = HandTrace(3).broadcast(1, {1, 1}).deliver(1, {1, 1}).deliver(2, {1, 1}).end();
        const auto rep = terminationCheck(t, stabilization(t));
        CHECK((rep.verdict == Verdict::Fail));
        CHECK(rep.witness.find("node 3") != std::string::npos);
    }

    TEST_CASE("the same gap is inconclusive at max_steps")
    {
        auto t = HandTrace(3).broadcast(1, {1, 1}).deliver(1, {1, 1}).end("max_steps");
        CHECK((terminationCheck(t, stabilization(t)).verdict == Verdict::Inconclusive));
    }

    TEST_CASE("crashed broadcaster with no deliveries owes nothing")
    {
        auto t = HandTrace(3).broadcast(1, {1, 1}).crash(1).end();
        CHECK((terminationCheck(t, stabilization(t)).verdict == Verdict::Pass));
    }

    TEST_CASE("one delivery obliges every correct node")
    {
        auto t = HandTrace(3).broadcast(1, {1, 1}).deliver(2, {1, 1}).crash(1).end();
        CHECK((terminationCheck(t, stabilization(t)).verdict == Verdict::Fail));
        auto done = HandTrace(3).broadcast(1, {1, 1}).deliver(2, {1, 1}).crash(1).deliver(3, {1, 1}).end();
        CHECK((terminationCheck(done, stabilization(done)).verdict == Verdict::Pass));
    }
}

TEST_SUITE("quiescence")
{
    HandTrace base()
    {
        HandTrace h(2);
        h.broadcast(1, {1, 1})
            .packet(EventType::Send, 1, 2, PacketKind::Msg, MessageId{1, 1})
            .packet(EventType::Send, 2, 1, PacketKind::MsgAck, MessageId{1, 1})
            .deliver(1, {1, 1})
            .deliver(2, {1, 1});
        return h;
    }

    void delivered(HandTrace& h)
    {
        auto s = freshSnapshot(2);
        for (auto& ns : s.nodes) ns.state.buffer.push_back(rec(1, 1, true, NodeSet::all(2), 2));
        h.snapshot(s);
    }

    TEST_CASE("gossip only in the window")
    {
        auto h = base();
        h.cycle(1);
        delivered(h);
        for (int c = 2; c <= 4; ++c) h.packet(EventType::Send, 1, 2, PacketKind::Gossip).cycle(c);
        const auto rep = quiescenceCheck(h.end());
        CHECK((rep.verdict == Verdict::Pass));
        CHECK(rep.measured["controlSends"] == 3);
    }

    TEST_CASE("MSG inside the window fails")
    {
        auto h = base();
        h.cycle(1);
        delivered(h);
        h.packet(EventType::Send, 1, 2, PacketKind::Gossip).cycle(2);
        h.packet(EventType::Send, 1, 2, PacketKind::Msg, MessageId{1, 1}).cycle(3).cycle(4);
        const auto t = h.end();
        const auto rep = quiescenceCheck(t);
        CHECK((rep.verdict == Verdict::Fail));
        CHECK(rep.witness.find("MSG") != std::string::npos);
        // Filtering on a different id ignores it.
        CHECK((quiescenceCheck(t, EpochId{0, {2, 1}}).verdict == Verdict::Pass));
    }

    TEST_CASE("silent window fails")
    {
        auto h = base();
        h.cycle(1);
        delivered(h);
        h.cycle(2).cycle(3).cycle(4);
        CHECK((quiescenceCheck(h.end()).verdict == Verdict::Fail));
    }

    TEST_CASE("window never reached")
    {
        auto h = base();
        h.cycle(1).cycle(2);
        CHECK((quiescenceCheck(h.end()).verdict == Verdict::Inconclusive));
    }
}

TEST_SUITE("consistency")
{
    TEST_CASE("fresh system")
    {
        const auto s = freshSnapshot(3);
        for (NodeId i = 1; i <= 3; ++i) CHECK(consistencyCheck(s, i, 4).ok);
    }

    TEST_CASE("duplicate id fails item (i)")
    {
        auto s = freshSnapshot(3);
        auto& x = *s.nodes[0].afterCleanup;
        x.buffer = {rec(2, 1, false, {}, 3), rec(2, 1, false, {}, 3)};
        const auto r = consistencyCheck(s, 1, 4);
        CHECK_FALSE(r.ok);
        CHECK(r.clause.rfind("i.", 0) == 0);
    }

    TEST_CASE("peer holding a future id fails item (ii)")
    {
        auto s = freshSnapshot(3);
        s.nodes[0].state.seq = 2;
        s.nodes[0].state.txObsS = {2, 2, 2};
        s.nodes[0].afterCleanup = s.nodes[0].state;
        s.nodes[1].state.buffer = {rec(1, 9, false, {}, 3)};
        const auto r = consistencyCheck(s, 1, 4);
        CHECK_FALSE(r.ok);
        CHECK(r.clause.rfind("ii.", 0) == 0);
    }

    TEST_CASE("never-iterated node after corruption")
    {
        auto s = freshSnapshot(2);
        s.nodes[1].afterCleanup.reset();
        CHECK_FALSE(consistencyCheck(s, 2, 4).ok);
        CHECK(consistencyCheck(s, 1, 4).ok);
    }
}

TEST_SUITE("snapshot predicates")
{
    TEST_CASE("diffuse")
    {
        auto s = freshSnapshot(2);
        CHECK_FALSE(diffusePredicate(s, 1, {1, 1}));
        s.nodes[0].state.buffer = {rec(1, 1, false, {}, 2)};
        CHECK(diffusePredicate(s, 1, {1, 1}));
    }

    TEST_CASE("completely delivered")
    {
        auto s = freshSnapshot(2);
        for (auto& ns : s.nodes) ns.state.buffer = {rec(1, 1, true, NodeSet::all(2), 2)};
        CHECK(completelyDelivered(s, {1, 1}));

        auto partial = s;
        partial.nodes[1].state.buffer[0].recBy.erase(2);
        CHECK_FALSE(completelyDelivered(partial, {1, 1}));

        auto inFlight = s;
        inFlight.channels.push_back({1, 2, {{MsgAckPacket{1, 1}, 0}}});
        CHECK_FALSE(completelyDelivered(inFlight, {1, 1}));
    }
}

TEST_SUITE("fifo")
{
    TEST_CASE("ascending per sender")
    {
        auto t = HandTrace(2, true)
                     .broadcast(1, {1, 1}).broadcast(1, {1, 2}).broadcast(1, {1, 3})
                     .deliver(2, {1, 1}).deliver(2, {1, 2}).deliver(2, {1, 3})
                     .end();
        CHECK((fifoCheck(t, stabilization(t)).verdict == Verdict::Pass));
    }

    TEST_CASE("out of order")
    {
        auto t = HandTrace(2, true).broadcast(1, {1, 1}).broadcast(1, {1, 2}).deliver(2, {1, 2}).deliver(2, {1, 1}).end();
        const auto rep = fifoCheck(t, stabilization(t));
        CHECK((rep.verdict == Verdict::Fail));
        CHECK_FALSE(rep.witness.empty());
    }

    TEST_CASE("interleaving senders")
    {
        auto t = HandTrace(3, true)
                     .broadcast(1, {1, 1}).broadcast(3, {3, 1}).broadcast(1, {1, 2})
                     .deliver(2, {3, 1}).deliver(2, {1, 1}).deliver(2, {1, 2})
                     .end();
        CHECK((fifoCheck(t, stabilization(t)).verdict == Verdict::Pass));
    }

    TEST_CASE("skipped without fifo")
    {
        auto t = HandTrace(2, false).end();
        CHECK((fifoCheck(t, stabilization(t)).verdict == Verdict::Skipped));
    }
}

TEST_SUITE("whole runs")
{
    ScenarioConfig cfg()
    {
        ScenarioConfig c;
        c.n = 2;
        c.bufferUnitSize = 2;
        c.seed = 5;
        c.broadcasts.push_back({1, 10, "a"});
        c.broadcasts.push_back({2, std::nullopt, "b"});
        return c;
    }

    TEST_CASE("clean run has zero stabilization and passes everything")
    {
        const auto res = runScenario(cfg());
        const auto reps = runAllChecks(res.trace);
        CHECK(allPassed(reps));
        for (const auto& r : reps) {
            CAPTURE(r.property);
            CHECK(((r.verdict == Verdict::Pass || r.verdict == Verdict::Skipped)));
            if (r.property == "stabilization") CHECK(r.measured["cycles"] == 0);
        }
    }

    TEST_CASE("message cost matches a direct count")
    {
        const auto res = runScenario(cfg());
        std::map<MessageId, std::int64_t> direct;
        for (const auto& e : res.trace.events)
            if (e.type == EventType::Send && (e.kind == PacketKind::Msg || e.kind == PacketKind::MsgAck))
                ++direct[*e.mid];
        const auto costs = broadcastCosts(res.trace);
        REQUIRE(costs.size() == 2);
        for (const auto& c : costs) {
            CHECK(c.msgSends + c.ackSends == direct[c.mid.mid]);
            // n=2: at least one MSG to the peer and its ack.
            CHECK(c.msgSends >= 1);
            CHECK(c.ackSends >= 1);
            REQUIRE(c.latencyCycles.has_value());
        }
    }

    TEST_CASE("checks are pure")
    {
        const auto res = runScenario(cfg());
        const auto a = reportToJson(res.trace, runAllChecks(res.trace)).dump();
        const auto b = reportToJson(res.trace, runAllChecks(res.trace)).dump();
        CHECK(a == b);
    }

    TEST_CASE("a forged duplicate delivery is caught")
    {
        auto res = runScenario(cfg());
        auto& ev = res.trace.events;
        auto it = std::ranges::find_if(ev, [](const Event& e) { return e.type == EventType::Deliver; });
        REQUIRE(it != ev.end());
        Event dup = *it;
        ev.insert(it + 1, dup);
        const auto reps = runAllChecks(res.trace);
        CHECK((verdictOf(reps, "integrity") == Verdict::Fail));
        CHECK_FALSE(allPassed(reps));
    }

    TEST_CASE("crash after a partial delivery still terminates")
    {
        // Replay a run to find the step at which the first receiver delivers node 1's
        // broadcast, then crash node 1 right after it.
        ScenarioConfig c;
        c.n = 3;
        c.seed = 8;
        c.broadcasts.push_back({1, 5, "x"});
        const auto probe = runScenario(c);
        std::optional<Step> firstRemote;
        for (const auto& e : probe.trace.events)
            if (e.type == EventType::Deliver && e.node != 1) {
                firstRemote = e.step;
                break;
            }
        REQUIRE(firstRemote);
        c.faults.crashes.push_back({1, *firstRemote + 1});
        const auto res = runScenario(c);

        int remoteBeforeCrash = 0;
        bool crashed = false;
        NodeSet deliveredAt;
        for (const auto& e : res.trace.events) {
            if (e.type == EventType::Crash) crashed = true;
            if (e.type == EventType::Deliver) {
                deliveredAt.insert(e.node);
                if (!crashed && e.node != 1) ++remoteBeforeCrash;
            }
        }
        CHECK(crashed);
        CHECK(remoteBeforeCrash >= 1);
        CHECK(deliveredAt.contains(2));
        CHECK(deliveredAt.contains(3));
        CHECK((verdictOf(runAllChecks(res.trace), "termination") == Verdict::Pass));
    }
}
