#include "ssurb/detectors.hpp"

#include <doctest.h>

using namespace ssurb;

TEST_CASE("hbTick bumps self and heartbeats every peer")
{
    auto hb = HbState::initial(1, 2);
    auto out = hbTick(hb);
    CHECK(hb.hb == HbVector{1, 0});
    REQUIRE(out.size() == 1);
    CHECK(out[0].to == 2);
    CHECK(std::get<HeartbeatPacket>(out[0].msg) == HeartbeatPacket{1, 0});
}

TEST_CASE("hbTick from a corrupted negative entry")
{
    auto hb = HbState::initial(1, 2);
    hb.at(1) = -5;
    auto out = hbTick(hb);
    CHECK(hb.at(1) == -4);
    CHECK(out.size() == 1);
}

TEST_CASE("hbTick with a single node sends nothing")
{
    auto hb = HbState::initial(1, 1);
    CHECK(hbTick(hb).empty());
    CHECK(hb.at(1) == 1);
}

TEST_CASE("onHeartbeat folds both fields")
{
    auto hb = HbState::initial(1, 3);
    hb.at(2) = 3;
    hb.at(1) = 2;
    onHeartbeat(hb, 7, 9, 2);
    CHECK(hb.at(2) == 7);
    CHECK(hb.at(1) == 9);

    const auto before = hb;
    onHeartbeat(hb, 1, 1, 2);
    CHECK(hb == before);
}

TEST_CASE("trusted view is the complement of suspected")
{
    auto th = ThetaState::initial(4);
    CHECK(trustedView(th) == NodeSet::all(4));
    onCrashNotice(th, 2);
    NodeSet expect = NodeSet::all(4);
    expect.erase(2);
    CHECK(trustedView(th) == expect);
    onCrashNotice(th, 2);
    CHECK(trustedView(th) == expect);
}

TEST_CASE("reconcile overwrites in both directions")
{
    auto th = ThetaState::initial(4);
    th.suspected.insert(1);
    reconcile(th, {});
    CHECK(th.suspected.empty());

    NodeSet four;
    four.insert(4);
    reconcile(th, four);
    CHECK(th.suspected == four);

    const auto before = th;
    reconcile(th, four);
    CHECK(th == before);
}
