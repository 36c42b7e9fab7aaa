#include "ssurb/types.hpp"

namespace ssurb {

const char* toString(PacketKind k) noexcept
{
    switch (k) {
    case PacketKind::Msg: return "MSG";
    case PacketKind::MsgAck: return "MSGACK";
    case PacketKind::Gossip: return "GOSSIP";
    case PacketKind::Heartbeat: return "HEARTBEAT";
    case PacketKind::Reset: return "RESET";
    }
    return "?";
}

std::optional<PacketKind> packetKindFromString(const std::string& s)
{
    for (auto k : {PacketKind::Msg, PacketKind::MsgAck, PacketKind::Gossip, PacketKind::Heartbeat, PacketKind::Reset})
        if (s == toString(k)) return k;
    return std::nullopt;
}

std::optional<MessageId> carriedId(const WireMessage& m) noexcept
{
    if (const auto* p = std::get_if<MsgPacket>(&m)) return MessageId{p->id, p->seq};
    if (const auto* p = std::get_if<MsgAckPacket>(&m)) return MessageId{p->id, p->seq};
    return std::nullopt;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) noexcept
{
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace ssurb
