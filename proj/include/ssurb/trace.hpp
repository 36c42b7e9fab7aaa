#pragma once

// Append-only execution trace: the single substrate the checker reads.
//
// On disk a trace is newline-delimited JSON. Line 1 is the header; every
// following line is one event in simulation order. SNAPSHOT events embed the
// full per-node state and all channel contents.

#include "ssurb/codec.hpp"
#include "ssurb/detectors.hpp"
#include "ssurb/node.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssurb {

using Step = std::int64_t;

enum class EventType { Broadcast, Deliver, Send, Recv, Crash, Corrupt, Cycle, Snapshot, Reset, End };

const char* toString(EventType t) noexcept;
std::optional<EventType> eventTypeFromString(const std::string& s);

/// Message identity across global resets: the epoch counts completed resets.
struct EpochId
{
    int epoch = 0;
    MessageId mid;

    auto operator<=>(const EpochId&) const = default;
};

struct Event
{
    EventType type = EventType::End;
    Step step = 0;
    NodeId node = 0;  // actor: broadcaster, deliverer, sender, receiver, crashed/corrupted node
    NodeId peer = 0;  // SEND: destination; RECV: source
    PacketKind kind = PacketKind::Gossip;
    std::optional<MessageId> mid;
    int epoch = 0;
    std::uint64_t payloadHash = 0;
    std::int64_t cycle = 0;    // CYCLE: ordinal; SNAPSHOT: cycles completed so far
    int snapshot = -1;         // SNAPSHOT: index into ExecutionTrace::snapshots
    std::string detail;        // CORRUPT kind, RESET phase, END status
};

struct InTransit
{
    WireMessage msg;
    Step sentStep = 0;
};

struct ChannelSnapshot
{
    NodeId src = 0;
    NodeId dst = 0;
    std::vector<InTransit> packets;
};

struct NodeSnapshot
{
    NodeId id = 0;
    bool alive = true;
    NodeState state;
    /// State right after the node's last cleanup phase; absent if the node
    /// was corrupted after its last iteration.
    std::optional<NodeState> afterCleanup;
    HbState hb;
    ThetaState theta;
};

struct Snapshot
{
    Step step = 0;
    std::int64_t cycle = 0;
    int epoch = 0;
    Step lastCorruptStep = -1;
    std::vector<NodeSnapshot> nodes;
    std::vector<ChannelSnapshot> channels;

    const NodeSnapshot& node(NodeId k) const { return nodes[static_cast<std::size_t>(k - 1)]; }
};

struct TraceHeader
{
    std::string configHash;
    std::uint64_t seed = 0;
    int n = 1;
    SeqNum bufferUnitSize = 1;
    int channelCapacity = 1;
    SeqNum maxint = 0;
    bool fifoEnabled = false;
    bool boundedMode = false;
    int quiescenceWindowCycles = 0;
    Json config; // the full effective scenario config
};

struct ExecutionTrace
{
    TraceHeader header;
    std::vector<Event> events;
    std::vector<Snapshot> snapshots;

    /// Status recorded by the END event ("complete", "max_steps", "halted"),
    /// or nullopt for a truncated trace.
    std::optional<std::string> endStatus() const;
};

Json toJson(const Snapshot& s);
Snapshot snapshotFromJson(const Json& j, int n);

/// Stable digest of a snapshot's canonical JSON form.
std::string snapshotDigest(const Snapshot& s);

Json headerToJson(const TraceHeader& h);
Json eventToJson(const Event& e, const ExecutionTrace& trace);

void writeTrace(std::ostream& os, const ExecutionTrace& trace);

/// Digest over the serialized trace; identical runs give identical digests.
std::string traceDigest(const ExecutionTrace& trace);

class TraceFormatError : public std::runtime_error
{
public:
    TraceFormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Throws TraceFormatError with the 1-based line number of the offending record.
ExecutionTrace readTrace(std::istream& is);

} // namespace ssurb
