#include "ssurb/scenario.hpp"
#include "ssurb/sweep.hpp"

#include <doctest.h>

#include <string>

using namespace ssurb;

namespace {

std::string errorPath(const std::string& text)
{
    try {
        configFromJson(Json::parse(text));
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

} // namespace

TEST_CASE("defaults from an empty document")
{
    const auto c = configFromJson(Json::object());
    CHECK(c.n == 3);
    CHECK(c.bufferUnitSize == 4);
    CHECK(c.quiescenceWindowCycles == 5);
    CHECK(c.maxint == (SeqNum{1} << 62));
    CHECK(c.expandedBroadcasts().empty());
}

TEST_CASE("invalid configs name the field")
{
    CHECK(errorPath(R"({"faults":{"omissionProb":1.0}})") == "faults.omissionProb");
    CHECK(errorPath(R"({"faults":{"duplicationProb":-0.1}})") == "faults.duplicationProb");
    CHECK(errorPath(R"({"n":0})") == "n");
    CHECK(errorPath(R"({"bufferUnitSize":8,"maxint":8})") == "maxint");
    CHECK(errorPath(R"({"nodes":3})") == "nodes");
    CHECK(errorPath(R"({"n":2,"broadcasts":[{"node":3}]})") == "broadcasts[0].node");
    CHECK(errorPath(R"({"n":3,"faults":{"crashes":[{"node":1,"at":4},{"node":5,"at":9}]}})") ==
          "faults.crashes[1].node");
    CHECK(errorPath(R"({"faults":{"corruptions":[{"node":1,"at":4,"kind":"MELT"}]}})") ==
          "faults.corruptions[0].kind");
    CHECK(errorPath(R"({"schedulerProfile":"chaotic"})") == "schedulerProfile");
    CHECK(errorPath(R"({"broadcasts":[{"node":1,"at":"later"}]})") == "broadcasts[0].at");
    CHECK(errorPath(R"({"fifoEnabled":1})") == "fifoEnabled");
}

TEST_CASE("canonical form round-trips")
{
    auto doc = Json::parse(R"({
        "n": 4, "bufferUnitSize": 3, "fifoEnabled": true, "seed": 99,
        "broadcasts": [{"node": 2, "at": 30, "payload": "x"}, {"node": 1, "payload": "y"}],
        "workload": {"perNode": 2, "nodes": [3], "start": 10, "spacing": 5},
        "faults": {"omissionProb": 0.25, "crashes": [{"node": 4, "at": 100}],
                   "corruptions": [{"node": 2, "at": 50, "kind": "NEXT_SKEW"}]}
    })");
    const auto c = configFromJson(doc);
    const auto again = configFromJson(toJson(c));
    CHECK(toJson(again) == toJson(c));
    CHECK(configHash(again) == configHash(c));

    const auto bs = c.expandedBroadcasts();
    REQUIRE(bs.size() == 4);
    CHECK(bs[1].payload == "y");
    CHECK_FALSE(bs[1].at.has_value());
    CHECK(bs[2].node == 3);
    CHECK(bs[2].at == 10);
    CHECK(bs[3].at == 15);
}

TEST_CASE("config hash depends on content")
{
    auto a = configFromJson(Json::object());
    auto b = a;
    b.seed = 2;
    CHECK(configHash(a) != configHash(b));
}

TEST_CASE("overrides")
{
    Json doc = Json::parse(R"({"n":3,"faults":{"crashes":[{"node":1,"at":4}]}})");
    applyOverride(doc, "n=5");
    applyOverride(doc, "faults.omissionProb=0.2");
    applyOverride(doc, "faults.crashes.0.at=70");
    applyOverride(doc, "schedulerProfile=starve-one");
    CHECK(doc["n"] == 5);
    CHECK(doc["faults"]["omissionProb"] == 0.2);
    CHECK(doc["faults"]["crashes"][0]["at"] == 70);
    CHECK(doc["schedulerProfile"] == "starve-one");
    CHECK_THROWS_AS(applyOverride(doc, "novalue"), ConfigError);
}

TEST_CASE("sweep argument parsing")
{
    CHECK(parseSeeds("3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(parseSeeds("5..7") == std::vector<std::uint64_t>{5, 6, 7});
    CHECK(parseSeeds("9,2") == std::vector<std::uint64_t>{9, 2});

    const auto ax = parseAxis("bufferUnitSize=1,2,4");
    CHECK(ax.key == "bufferUnitSize");
    REQUIRE(ax.values.size() == 3);
    CHECK(ax.values[2] == 4);

    const auto names = parseAxis("schedulerProfile=uniform,reorder-heavy");
    CHECK(names.values[1] == "reorder-heavy");
}
