#include "ssurb/trace.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace ssurb {

namespace {

constexpr EventType kAllTypes[] = {EventType::Broadcast, EventType::Deliver, EventType::Send,
                                   EventType::Recv,      EventType::Crash,   EventType::Corrupt,
                                   EventType::Cycle,     EventType::Snapshot, EventType::Reset,
                                   EventType::End};

template <typename T>
T get(const Json& j, const char* key, std::size_t line)
{
    auto it = j.find(key);
    if (it == j.end()) throw TraceFormatError(line, std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw TraceFormatError(line, std::string("bad type for field '") + key + "'");
    }
}

std::uint64_t parseHex(const std::string& s, std::size_t line)
{
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used, 16);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw TraceFormatError(line, "bad hash '" + s + "'");
    }
}

} // namespace

const char* toString(EventType t) noexcept
{
    switch (t) {
    case EventType::Broadcast: return "BROADCAST";
    case EventType::Deliver: return "DELIVER";
    case EventType::Send: return "SEND";
    case EventType::Recv: return "RECV";
    case EventType::Crash: return "CRASH";
    case EventType::Corrupt: return "CORRUPT";
    case EventType::Cycle: return "CYCLE";
    case EventType::Snapshot: return "SNAPSHOT";
    case EventType::Reset: return "RESET";
    case EventType::End: return "END";
    }
    return "?";
}

std::optional<EventType> eventTypeFromString(const std::string& s)
{
    for (auto t : kAllTypes)
        if (s == toString(t)) return t;
    return std::nullopt;
}

std::optional<std::string> ExecutionTrace::endStatus() const
{
    if (events.empty() || events.back().type != EventType::End) return std::nullopt;
    return events.back().detail;
}

Json toJson(const Snapshot& s)
{
    Json j;
    j["step"] = s.step;
    j["cycle"] = s.cycle;
    j["epoch"] = s.epoch;
    j["lastCorruptStep"] = s.lastCorruptStep;
    Json nodes = Json::array();
    for (const auto& ns : s.nodes) {
        Json nj;
        nj["id"] = ns.id;
        nj["alive"] = ns.alive;
        nj["state"] = toJson(ns.state);
        nj["afterCleanup"] = ns.afterCleanup ? toJson(*ns.afterCleanup) : Json(nullptr);
        nj["hb"] = toJson(ns.hb);
        nj["theta"] = toJson(ns.theta);
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    Json chans = Json::array();
    for (const auto& c : s.channels) {
        if (c.packets.empty()) continue;
        Json cj;
        cj["src"] = c.src;
        cj["dst"] = c.dst;
        Json pk = Json::array();
        for (const auto& p : c.packets) {
            Json pj = toJson(p.msg);
            pj["sentStep"] = p.sentStep;
            pk.push_back(std::move(pj));
        }
        cj["packets"] = std::move(pk);
        chans.push_back(std::move(cj));
    }
    j["channels"] = std::move(chans);
    return j;
}

Snapshot snapshotFromJson(const Json& j, int n)
{
    Snapshot s;
    s.step = j.at("step").get<Step>();
    s.cycle = j.at("cycle").get<std::int64_t>();
    s.epoch = j.at("epoch").get<int>();
    s.lastCorruptStep = j.at("lastCorruptStep").get<Step>();
    for (const auto& nj : j.at("nodes")) {
        NodeSnapshot ns;
        ns.id = nj.at("id").get<NodeId>();
        ns.alive = nj.at("alive").get<bool>();
        ns.state = nodeStateFromJson(nj.at("state"));
        if (!nj.at("afterCleanup").is_null()) ns.afterCleanup = nodeStateFromJson(nj.at("afterCleanup"));
        ns.hb = hbStateFromJson(nj.at("hb"));
        ns.theta = thetaStateFromJson(nj.at("theta"));
        s.nodes.push_back(std::move(ns));
    }
    if (static_cast<int>(s.nodes.size()) != n) throw DecodeError("snapshot node count differs from header n");
    for (const auto& cj : j.at("channels")) {
        ChannelSnapshot c;
        c.src = cj.at("src").get<NodeId>();
        c.dst = cj.at("dst").get<NodeId>();
        for (const auto& pj : cj.at("packets")) c.packets.push_back({wireFromJson(pj, n), pj.at("sentStep").get<Step>()});
        s.channels.push_back(std::move(c));
    }
    return s;
}

std::string snapshotDigest(const Snapshot& s)
{
    return hex64(fnv1a64(toJson(s).dump()));
}

Json headerToJson(const TraceHeader& h)
{
    Json j;
    j["type"] = "HEADER";
    j["configHash"] = h.configHash;
    j["seed"] = h.seed;
    j["n"] = h.n;
    j["bufferUnitSize"] = h.bufferUnitSize;
    j["channelCapacity"] = h.channelCapacity;
    j["maxint"] = h.maxint;
    j["fifoEnabled"] = h.fifoEnabled;
    j["boundedMode"] = h.boundedMode;
    j["quiescenceWindowCycles"] = h.quiescenceWindowCycles;
    j["config"] = h.config;
    return j;
}

Json eventToJson(const Event& e, const ExecutionTrace& trace)
{
    Json j;
    j["type"] = toString(e.type);
    j["step"] = e.step;
    switch (e.type) {
    case EventType::Broadcast:
    case EventType::Deliver:
        j["node"] = e.node;
        j["epoch"] = e.epoch;
        j["id"] = e.mid->id;
        j["seq"] = e.mid->seq;
        j["hash"] = hex64(e.payloadHash);
        break;
    case EventType::Send:
    case EventType::Recv:
        j["node"] = e.node;
        j["peer"] = e.peer;
        j["kind"] = toString(e.kind);
        j["epoch"] = e.epoch;
        if (e.mid) {
            j["id"] = e.mid->id;
            j["seq"] = e.mid->seq;
        }
        break;
    case EventType::Crash: j["node"] = e.node; break;
    case EventType::Corrupt:
        j["node"] = e.node;
        j["corruption"] = e.detail;
        break;
    case EventType::Cycle: j["cycle"] = e.cycle; break;
    case EventType::Snapshot: {
        const auto& snap = trace.snapshots.at(static_cast<std::size_t>(e.snapshot));
        j["cycle"] = e.cycle;
        j["digest"] = snapshotDigest(snap);
        j["snapshot"] = toJson(snap);
        break;
    }
    case EventType::Reset:
        j["phase"] = e.detail;
        j["epoch"] = e.epoch;
        break;
    case EventType::End: j["status"] = e.detail; break;
    }
    return j;
}

void writeTrace(std::ostream& os, const ExecutionTrace& trace)
{
    os << headerToJson(trace.header).dump() << '\n';
    for (const auto& e : trace.events) os << eventToJson(e, trace).dump() << '\n';
}

std::string traceDigest(const ExecutionTrace& trace)
{
    std::uint64_t h = fnv1a64(headerToJson(trace.header).dump());
    for (const auto& e : trace.events) h = fnv1a64(eventToJson(e, trace).dump(), h);
    return hex64(h);
}

ExecutionTrace readTrace(std::istream& is)
{
    ExecutionTrace trace;
    std::string text;
    std::size_t line = 0;
    bool haveHeader = false;

    while (std::getline(is, text)) {
        ++line;
        if (text.empty()) continue;
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::exception& ex) {
            throw TraceFormatError(line, std::string("not JSON: ") + ex.what());
        }
        const auto type = get<std::string>(j, "type", line);

        if (!haveHeader) {
            if (type != "HEADER") throw TraceFormatError(line, "first record must be HEADER");
            auto& h = trace.header;
            h.configHash = get<std::string>(j, "configHash", line);
            h.seed = get<std::uint64_t>(j, "seed", line);
            h.n = get<int>(j, "n", line);
            h.bufferUnitSize = get<SeqNum>(j, "bufferUnitSize", line);
            h.channelCapacity = get<int>(j, "channelCapacity", line);
            h.maxint = get<SeqNum>(j, "maxint", line);
            h.fifoEnabled = get<bool>(j, "fifoEnabled", line);
            h.boundedMode = get<bool>(j, "boundedMode", line);
            h.quiescenceWindowCycles = get<int>(j, "quiescenceWindowCycles", line);
            h.config = j.contains("config") ? j["config"] : Json::object();
            if (h.n < 1 || h.n > kMaxNodes) throw TraceFormatError(line, "header n out of range");
            haveHeader = true;
            continue;
        }

        const auto et = eventTypeFromString(type);
        if (!et) throw TraceFormatError(line, "unknown event type '" + type + "'");
        Event e;
        e.type = *et;
        e.step = get<Step>(j, "step", line);
        const int n = trace.header.n;
        auto nodeField = [&](const char* key) {
            const auto k = get<NodeId>(j, key, line);
            if (k < 1 || k > n) throw TraceFormatError(line, std::string("node id out of range in '") + key + "'");
            return k;
        };
        try {
            switch (e.type) {
            case EventType::Broadcast:
            case EventType::Deliver:
                e.node = nodeField("node");
                e.epoch = get<int>(j, "epoch", line);
                e.mid = MessageId{nodeField("id"), get<SeqNum>(j, "seq", line)};
                e.payloadHash = parseHex(get<std::string>(j, "hash", line), line);
                break;
            case EventType::Send:
            case EventType::Recv: {
                e.node = nodeField("node");
                e.peer = nodeField("peer");
                const auto k = packetKindFromString(get<std::string>(j, "kind", line));
                if (!k) throw TraceFormatError(line, "unknown packet kind");
                e.kind = *k;
                e.epoch = get<int>(j, "epoch", line);
                if (j.contains("id")) e.mid = MessageId{nodeField("id"), get<SeqNum>(j, "seq", line)};
                break;
            }
            case EventType::Crash: e.node = nodeField("node"); break;
            case EventType::Corrupt:
                e.node = nodeField("node");
                e.detail = get<std::string>(j, "corruption", line);
                break;
            case EventType::Cycle: e.cycle = get<std::int64_t>(j, "cycle", line); break;
            case EventType::Snapshot: {
                e.cycle = get<std::int64_t>(j, "cycle", line);
                Snapshot snap = snapshotFromJson(j.at("snapshot"), n);
                if (j.contains("digest") && j["digest"].get<std::string>() != snapshotDigest(snap))
                    throw TraceFormatError(line, "snapshot digest mismatch");
                e.snapshot = static_cast<int>(trace.snapshots.size());
                trace.snapshots.push_back(std::move(snap));
                break;
            }
            case EventType::Reset:
                e.detail = get<std::string>(j, "phase", line);
                e.epoch = get<int>(j, "epoch", line);
                break;
            case EventType::End: e.detail = get<std::string>(j, "status", line); break;
            }
        } catch (const DecodeError& ex) {
            throw TraceFormatError(line, ex.what());
        } catch (const nlohmann::json::exception& ex) {
            throw TraceFormatError(line, ex.what());
        }
        if (!trace.events.empty() && e.step < trace.events.back().step)
            throw TraceFormatError(line, "event steps go backwards");
        trace.events.push_back(std::move(e));
    }
    if (!haveHeader) throw TraceFormatError(line == 0 ? 1 : line, "empty trace");
    return trace;
}

} // namespace ssurb
