#pragma once

// Self-stabilizing quiescent uniform reliable broadcast, one node.
//
// Every operation here is a deterministic transition over a NodeState. Set
// iterations (buffer scans, obsolete advance, send loops) run in ascending
// (id, seq) / ascending node-id order so that seeded runs replay exactly.

#include "ssurb/types.hpp"

#include <deque>
#include <span>
#include <vector>

namespace ssurb {

struct NodeConfig
{
    int n = 1;
    SeqNum bufferUnitSize = 1;
    bool fifoEnabled = false;
    bool boundedMode = false;
    SeqNum maxint = SeqNum{1} << 62;
};

enum class ResetPhase { Normal, Disabled, Resetting };

const char* toString(ResetPhase p) noexcept;

struct NodeState
{
    NodeId self = 1;
    SeqNum seq = 0;
    std::vector<BufferRecord> buffer;
    std::vector<SeqNum> rxObsS;
    std::vector<SeqNum> txObsS;
    std::vector<SeqNum> next;
    bool fifoEnabled = false;
    std::deque<Payload> pendingBroadcasts;
    ResetPhase resetPhase = ResetPhase::Normal;

    static NodeState initial(NodeId self, int n, bool fifoEnabled);

    int n() const noexcept { return static_cast<int>(rxObsS.size()); }

    SeqNum& rx(NodeId k) { return rxObsS[static_cast<std::size_t>(k - 1)]; }
    SeqNum rx(NodeId k) const { return rxObsS[static_cast<std::size_t>(k - 1)]; }
    SeqNum& tx(NodeId k) { return txObsS[static_cast<std::size_t>(k - 1)]; }
    SeqNum tx(NodeId k) const { return txObsS[static_cast<std::size_t>(k - 1)]; }
    SeqNum& nextOf(NodeId k) { return next[static_cast<std::size_t>(k - 1)]; }
    SeqNum nextOf(NodeId k) const { return next[static_cast<std::size_t>(k - 1)]; }

    bool operator==(const NodeState&) const = default;
};

/// Read-only failure detector snapshot handed to one iteration.
struct DetectorView
{
    NodeSet trusted;
    HbVector hb;
};

struct Delivery
{
    MessageId mid;
    Payload msg;
};

struct AcceptedBroadcast
{
    MessageId mid;
    Payload msg;
};

struct IterationResult
{
    std::vector<Outgoing> outgoing;
    std::vector<Delivery> delivered;
    std::vector<AcceptedBroadcast> accepted;
};

enum class BroadcastStatus { Accepted, Deferred, Rejected };

struct BroadcastOutcome
{
    BroadcastStatus status = BroadcastStatus::Rejected;
    MessageId mid; // valid when Accepted
};

// ---- macros ---------------------------------------------------------------

/// Highest buffered seq for sender k (0 when none); FIFO mode also folds in next[k]-1.
SeqNum maxSeq(const NodeState& state, NodeId k);

/// Minimum txObsS over trusted nodes; seq when nothing is trusted.
SeqNum minTxObsS(const NodeState& state, const DetectorView& view);

bool isObsolete(const NodeState& state, const DetectorView& view, const BufferRecord& r);

// ---- operation, procedure, handlers ----------------------------------------

/// The flow-controlled broadcast. A payload that does not fit the window is queued
/// and drained by later iterations, so nothing ever blocks.
BroadcastOutcome urbBroadcast(NodeState& state, const DetectorView& view, const NodeConfig& cfg, Payload m);

void update(NodeState& state, const Payload& m, NodeId j, SeqNum s, NodeId k);

/// MSG(m, j, s) from `from`; returns the MSGack addressed back to `from`.
Outgoing onMsg(NodeState& state, const Payload& m, NodeId j, SeqNum s, NodeId from);

void onMsgAck(NodeState& state, NodeId j, SeqNum s, NodeId from);

void onGossip(NodeState& state, SeqNum f1, SeqNum f2, SeqNum f3, NodeId from);

// ---- do-forever loop ------------------------------------------------------

/// Stale-information removal: purge, tx-window repair, rx-window clamp,
/// obsolete advance and trim. Total on arbitrary states.
void cleanupPhase(NodeState& state, const DetectorView& view, const NodeConfig& cfg);

/// Delivery and (re)transmission, gossip, then draining deferred broadcasts.
IterationResult processPhase(NodeState& state, const DetectorView& view, const NodeConfig& cfg);

/// One full iteration of the do-forever loop: cleanupPhase then processPhase.
IterationResult doForeverIteration(NodeState& state, const DetectorView& view, const NodeConfig& cfg);

// ---- bounded counters -----------------------------------------------------

/// True when any counter has reached MAXINT; moves the node to Disabled.
/// Heartbeat entries (when supplied) and record prevHB vectors are included.
bool checkOverflow(NodeState& state, const NodeConfig& cfg, std::span<const HbCount> hb = {});

/// Reinitializes every protocol variable; the deferred broadcast queue survives.
void performGlobalReset(NodeState& state);

/// Records with delivered = false.
int undeliveredCount(const NodeState& state) noexcept;

} // namespace ssurb
