#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ssurb {

// Node identifiers are 1-based, matching the protocol's P = {p_1..p_n}.
using NodeId = int;
using SeqNum = std::int64_t;
using HbCount = std::int64_t;

inline constexpr int kMaxNodes = 64;
inline constexpr SeqNum kSeqCeiling = std::numeric_limits<SeqNum>::max();

/// Saturating increment. Corrupted counters may sit next to the int64 ceiling.
constexpr SeqNum plusOne(SeqNum v) noexcept { return v == kSeqCeiling ? v : v + 1; }

constexpr SeqNum saturatingAdd(SeqNum a, SeqNum b) noexcept
{
    if (b > 0 && a > kSeqCeiling - b) return kSeqCeiling;
    return a + b;
}

struct MessageId
{
    NodeId id = 0;
    SeqNum seq = 0;

    auto operator<=>(const MessageId&) const = default;
};

/// Set of node ids, stored as a bitmask over [1, kMaxNodes].
class NodeSet
{
public:
    constexpr NodeSet() = default;

    static constexpr NodeSet fromMask(std::uint64_t mask) noexcept
    {
        NodeSet s;
        s.bits_ = mask;
        return s;
    }

    /// {1, ..., n}
    static constexpr NodeSet all(int n) noexcept
    {
        return fromMask(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
    }

    constexpr void insert(NodeId k) noexcept { bits_ |= bit(k); }
    constexpr void erase(NodeId k) noexcept { bits_ &= ~bit(k); }
    constexpr bool contains(NodeId k) const noexcept { return (bits_ & bit(k)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr int size() const noexcept { return std::popcount(bits_); }
    constexpr std::uint64_t mask() const noexcept { return bits_; }

    constexpr bool isSubsetOf(const NodeSet& other) const noexcept
    {
        return (bits_ & ~other.bits_) == 0;
    }

    constexpr NodeSet operator|(const NodeSet& o) const noexcept { return fromMask(bits_ | o.bits_); }
    constexpr NodeSet operator&(const NodeSet& o) const noexcept { return fromMask(bits_ & o.bits_); }
    constexpr NodeSet minus(const NodeSet& o) const noexcept { return fromMask(bits_ & ~o.bits_); }

    /// Members in ascending order.
    std::vector<NodeId> members() const
    {
        std::vector<NodeId> out;
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
        return out;
    }

    constexpr bool operator==(const NodeSet&) const = default;

private:
    static constexpr std::uint64_t bit(NodeId k) noexcept { return std::uint64_t{1} << (k - 1); }

    std::uint64_t bits_ = 0;
};

/// Opaque application data. The disengaged state is the protocol's bottom value.
struct Payload
{
    std::optional<std::string> bytes;

    static Payload null() { return {}; }
    static Payload of(std::string s) { return Payload{std::move(s)}; }

    bool isNull() const noexcept { return !bytes.has_value(); }
    bool operator==(const Payload&) const = default;
};

/// One counter per node, index k-1 for node k. Entries may be -1 (never sampled).
using HbVector = std::vector<HbCount>;

struct BufferRecord
{
    Payload msg;
    NodeId id = 0;
    SeqNum seq = 0;
    bool delivered = false;
    NodeSet recBy;
    HbVector prevHb;

    MessageId mid() const noexcept { return {id, seq}; }
    bool operator==(const BufferRecord&) const = default;
};

// ---- wire messages -------------------------------------------------------

struct MsgPacket
{
    Payload msg;
    NodeId id = 0;
    SeqNum seq = 0;
    bool operator==(const MsgPacket&) const = default;
};

struct MsgAckPacket
{
    NodeId id = 0;
    SeqNum seq = 0;
    bool operator==(const MsgAckPacket&) const = default;
};

/// Fields are from the sender's perspective toward the destination k:
/// (maxSeq(k), rxObsS[k], txObsS[k]).
struct GossipPacket
{
    SeqNum maxSeq = 0;
    SeqNum rxObs = 0;
    SeqNum txObs = 0;
    bool operator==(const GossipPacket&) const = default;
};

struct HeartbeatPacket
{
    HbCount senderCount = 0;
    HbCount dstCount = 0;
    bool operator==(const HeartbeatPacket&) const = default;
};

enum class ResetKind { Disable, Apply };

struct ResetPacket
{
    ResetKind kind = ResetKind::Disable;
    bool operator==(const ResetPacket&) const = default;
};

using WireMessage = std::variant<MsgPacket, MsgAckPacket, GossipPacket, HeartbeatPacket, ResetPacket>;

enum class PacketKind { Msg, MsgAck, Gossip, Heartbeat, Reset };

inline PacketKind kindOf(const WireMessage& m) noexcept
{
    return static_cast<PacketKind>(m.index());
}

const char* toString(PacketKind k) noexcept;
std::optional<PacketKind> packetKindFromString(const std::string& s);

/// Message id carried by MSG / MSGack packets, if any.
std::optional<MessageId> carriedId(const WireMessage& m) noexcept;

struct Outgoing
{
    NodeId to = 0;
    WireMessage msg;
};

/// Stable 64-bit FNV-1a, used for payload hashes and trace digests.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

} // namespace ssurb
