#include "ssurb/codec.hpp"

#include <cstdio>

namespace ssurb {

namespace {

bool validId(NodeId k, int n) noexcept { return k >= 1 && k <= n; }

template <typename T>
T field(const Json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw DecodeError(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DecodeError(std::string("bad type for field '") + key + "'");
    }
}

std::vector<SeqNum> seqVector(const Json& j, const char* key)
{
    return field<std::vector<SeqNum>>(j, key);
}

} // namespace

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool isWellFormed(const WireMessage& m, int n) noexcept
{
    return std::visit(
        [n](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MsgPacket>) return validId(p.id, n) && !p.msg.isNull();
            else if constexpr (std::is_same_v<P, MsgAckPacket>) return validId(p.id, n);
            else return true;
        },
        m);
}

Json toJson(const Payload& p)
{
    return p.isNull() ? Json(nullptr) : Json(*p.bytes);
}

Payload payloadFromJson(const Json& j)
{
    if (j.is_null()) return Payload::null();
    if (!j.is_string()) throw DecodeError("payload must be a string or null");
    return Payload::of(j.get<std::string>());
}

Json toJson(const WireMessage& m)
{
    Json j;
    j["kind"] = toString(kindOf(m));
    std::visit(
        [&j](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MsgPacket>) {
                j["m"] = toJson(p.msg);
                j["id"] = p.id;
                j["seq"] = p.seq;
            } else if constexpr (std::is_same_v<P, MsgAckPacket>) {
                j["id"] = p.id;
                j["seq"] = p.seq;
            } else if constexpr (std::is_same_v<P, GossipPacket>) {
                j["maxSeq"] = p.maxSeq;
                j["rxObs"] = p.rxObs;
                j["txObs"] = p.txObs;
            } else if constexpr (std::is_same_v<P, HeartbeatPacket>) {
                j["senderCount"] = p.senderCount;
                j["dstCount"] = p.dstCount;
            } else {
                j["phase"] = p.kind == ResetKind::Disable ? "DISABLE" : "APPLY";
            }
        },
        m);
    return j;
}

WireMessage wireFromJson(const Json& j, int n)
{
    const auto kind = packetKindFromString(field<std::string>(j, "kind"));
    if (!kind) throw DecodeError("unknown packet kind");
    WireMessage m;
    switch (*kind) {
    case PacketKind::Msg:
        if (!j.contains("m")) throw DecodeError("missing field 'm'");
        m = MsgPacket{payloadFromJson(j["m"]), field<NodeId>(j, "id"), field<SeqNum>(j, "seq")};
        break;
    case PacketKind::MsgAck: m = MsgAckPacket{field<NodeId>(j, "id"), field<SeqNum>(j, "seq")}; break;
    case PacketKind::Gossip:
        m = GossipPacket{field<SeqNum>(j, "maxSeq"), field<SeqNum>(j, "rxObs"), field<SeqNum>(j, "txObs")};
        break;
    case PacketKind::Heartbeat:
        m = HeartbeatPacket{field<HbCount>(j, "senderCount"), field<HbCount>(j, "dstCount")};
        break;
    case PacketKind::Reset: {
        const auto phase = field<std::string>(j, "phase");
        if (phase != "DISABLE" && phase != "APPLY") throw DecodeError("unknown reset phase");
        m = ResetPacket{phase == "DISABLE" ? ResetKind::Disable : ResetKind::Apply};
        break;
    }
    }
    if (!isWellFormed(m, n)) throw DecodeError("malformed packet");
    return m;
}

Json toJson(const NodeSet& s)
{
    return Json(s.members());
}

NodeSet nodeSetFromJson(const Json& j)
{
    NodeSet s;
    for (const auto& v : j) {
        const int k = v.get<int>();
        if (k < 1 || k > kMaxNodes) throw DecodeError("node id out of range");
        s.insert(k);
    }
    return s;
}

Json toJson(const BufferRecord& r)
{
    Json j;
    j["msg"] = toJson(r.msg);
    j["id"] = r.id;
    j["seq"] = r.seq;
    j["delivered"] = r.delivered;
    j["recBy"] = toJson(r.recBy);
    j["prevHB"] = r.prevHb;
    return j;
}

BufferRecord recordFromJson(const Json& j)
{
    BufferRecord r;
    r.msg = payloadFromJson(j.at("msg"));
    r.id = field<NodeId>(j, "id");
    r.seq = field<SeqNum>(j, "seq");
    r.delivered = field<bool>(j, "delivered");
    r.recBy = nodeSetFromJson(j.at("recBy"));
    r.prevHb = field<HbVector>(j, "prevHB");
    return r;
}

Json toJson(const NodeState& s)
{
    Json j;
    j["self"] = s.self;
    j["seq"] = s.seq;
    Json buf = Json::array();
    for (const auto& r : s.buffer) buf.push_back(toJson(r));
    j["buffer"] = std::move(buf);
    j["rxObsS"] = s.rxObsS;
    j["txObsS"] = s.txObsS;
    j["next"] = s.next;
    j["fifoEnabled"] = s.fifoEnabled;
    Json pending = Json::array();
    for (const auto& p : s.pendingBroadcasts) pending.push_back(toJson(p));
    j["pendingBroadcasts"] = std::move(pending);
    j["resetPhase"] = toString(s.resetPhase);
    return j;
}

NodeState nodeStateFromJson(const Json& j)
{
    NodeState s;
    s.self = field<NodeId>(j, "self");
    s.seq = field<SeqNum>(j, "seq");
    for (const auto& r : j.at("buffer")) s.buffer.push_back(recordFromJson(r));
    s.rxObsS = seqVector(j, "rxObsS");
    s.txObsS = seqVector(j, "txObsS");
    s.next = seqVector(j, "next");
    s.fifoEnabled = field<bool>(j, "fifoEnabled");
    for (const auto& p : j.at("pendingBroadcasts")) s.pendingBroadcasts.push_back(payloadFromJson(p));
    const auto phase = field<std::string>(j, "resetPhase");
    if (phase == "NORMAL") s.resetPhase = ResetPhase::Normal;
    else if (phase == "DISABLED") s.resetPhase = ResetPhase::Disabled;
    else if (phase == "RESETTING") s.resetPhase = ResetPhase::Resetting;
    else throw DecodeError("unknown reset phase '" + phase + "'");
    if (s.rxObsS.size() != s.txObsS.size() || s.next.size() != s.rxObsS.size())
        throw DecodeError("node state vectors disagree on n");
    return s;
}

Json toJson(const HbState& s)
{
    Json j;
    j["self"] = s.self;
    j["hb"] = s.hb;
    return j;
}

HbState hbStateFromJson(const Json& j)
{
    return {field<NodeId>(j, "self"), field<HbVector>(j, "hb")};
}

Json toJson(const ThetaState& s)
{
    Json j;
    j["n"] = s.n;
    j["suspected"] = toJson(s.suspected);
    return j;
}

ThetaState thetaStateFromJson(const Json& j)
{
    return {field<int>(j, "n"), nodeSetFromJson(j.at("suspected"))};
}

} // namespace ssurb
