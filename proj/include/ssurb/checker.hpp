#pragma once

// Trace and snapshot oracles. Every check is a pure function of the trace.
//
// Runs with transient faults are judged on their suffix: the stabilization
// marker is the first snapshot after the last CORRUPT event at which every
// live node passes the consistency predicate. Message ids present anywhere in
// that snapshot are exempt from validity; liveness obligations start there.

#include "ssurb/trace.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ssurb {

enum class Verdict { Pass, Fail, Inconclusive, Skipped };

const char* toString(Verdict v) noexcept;

struct CheckReport
{
    std::string property;
    Verdict verdict = Verdict::Pass;
    std::string witness; // always set on Fail
    Json measured = Json::object();
    std::string note;
};

Json toJson(const CheckReport& r);

// ---- snapshot predicates ------------------------------------------------------

struct ConsistencyResult
{
    bool ok = true;
    std::string clause; // first failing clause, e.g. "i.no-null"
};

/// Consistency of node i: buffer and window clauses on the node's post-cleanup
/// state, seq dominance over every i-related value in the system, and the
/// per-sender and flow-control bounds on current states.
ConsistencyResult consistencyCheck(const Snapshot& s, NodeId i, SeqNum bufferUnitSize);

/// Every live node consistent; on failure names the node and clause.
ConsistencyResult allConsistent(const Snapshot& s, SeqNum bufferUnitSize);

/// Some record for mid at node i is still undelivered.
bool diffusePredicate(const Snapshot& s, NodeId i, const MessageId& mid);

/// No MSG/MSGack for mid in transit, and every live node's record for mid is
/// delivered with recBy covering the live nodes.
bool completelyDelivered(const Snapshot& s, const MessageId& mid);

// ---- trace-level ----------------------------------------------------------------

struct StabilizationInfo
{
    std::optional<std::size_t> lastCorruptEvent;
    /// Event index of the first all-consistent snapshot after the last CORRUPT.
    std::optional<std::size_t> markerEvent;
    std::optional<std::size_t> markerSnapshot;
    /// Ids present in the marker snapshot (buffers and channels), tagged with its epoch.
    std::set<EpochId> exempt;
    /// First snapshot after the last CORRUPT from which every later snapshot is consistent.
    std::optional<std::size_t> settledSnapshot;
    std::string lastFailure;
};

StabilizationInfo stabilization(const ExecutionTrace& t);

CheckReport validityCheck(const ExecutionTrace& t, const StabilizationInfo& st);
CheckReport integrityCheck(const ExecutionTrace& t, const StabilizationInfo& st);
CheckReport terminationCheck(const ExecutionTrace& t, const StabilizationInfo& st);
/// All messages when mid is empty.
CheckReport quiescenceCheck(const ExecutionTrace& t, const std::optional<EpochId>& mid = std::nullopt);
CheckReport stabilizationTime(const ExecutionTrace& t, const StabilizationInfo& st);
CheckReport closureCheck(const ExecutionTrace& t, const StabilizationInfo& st);
CheckReport bufferBoundCheck(const ExecutionTrace& t, const StabilizationInfo& st);
CheckReport fifoCheck(const ExecutionTrace& t, const StabilizationInfo& st);

struct BroadcastCost
{
    EpochId mid;
    NodeId broadcaster = 0;
    std::int64_t msgSends = 0;
    std::int64_t ackSends = 0;
    /// CYCLE events between the BROADCAST and the last delivery at a never-crashed node.
    std::optional<std::int64_t> latencyCycles;
};

std::vector<BroadcastCost> broadcastCosts(const ExecutionTrace& t);

/// Totals and maxima over broadcastCosts; always Pass (the scaling bounds are acceptance criteria).
CheckReport messageCost(const ExecutionTrace& t);

/// Every applicable property, in a fixed order.
std::vector<CheckReport> runAllChecks(const ExecutionTrace& t);

Json reportToJson(const ExecutionTrace& t, const std::vector<CheckReport>& reports);
std::string reportSummary(const std::vector<CheckReport>& reports);

/// True when no report is Fail.
bool allPassed(const std::vector<CheckReport>& reports);

/// 1-based line of event index e in the NDJSON trace (the header is line 1).
inline std::size_t traceLine(std::size_t eventIndex) { return eventIndex + 2; }

} // namespace ssurb
