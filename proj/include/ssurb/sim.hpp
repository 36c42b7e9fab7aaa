#pragma once

// Seeded discrete-event network simulator.
//
// One scheduler step applies exactly one action: a scheduled broadcast, crash
// or corruption when one is due, otherwise a weighted random pick among node
// iterations and packet deliveries. The simulator also does the bookkeeping
// the checker needs: asynchronous-cycle boundaries, snapshots, and the
// coordinated global reset used in bounded mode.

#include "ssurb/detectors.hpp"
#include "ssurb/node.hpp"
#include "ssurb/scenario.hpp"
#include "ssurb/trace.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace ssurb {

struct SimCounters
{
    std::int64_t omissions = 0;
    std::int64_t duplications = 0;
    std::int64_t overflowDrops = 0;
    std::int64_t reorders = 0;
    int resets = 0;
};

/// Deterministic integer/probability draws on top of mt19937_64.
/// (The standard distributions are implementation-defined, so they are avoided.)
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform in [lo, hi].
    std::int64_t range(std::int64_t lo, std::int64_t hi);
    bool chance(double p);

private:
    std::mt19937_64 gen_;
};

class Simulator
{
public:
    explicit Simulator(ScenarioConfig cfg);

    /// Applies one scheduler step. Returns false once the run has ended.
    bool step();

    /// Steps until the END event.
    void run();

    const ExecutionTrace& trace() const noexcept { return trace_; }
    ExecutionTrace takeTrace() { return std::move(trace_); }
    const SimCounters& counters() const noexcept { return counters_; }
    const ScenarioConfig& config() const noexcept { return cfg_; }

    Step now() const noexcept { return step_; }
    std::int64_t cycles() const noexcept { return cycle_; }
    bool finished() const noexcept { return finished_; }
    bool alive(NodeId k) const { return node(k).alive; }
    const NodeState& state(NodeId k) const { return node(k).state; }
    int epoch() const noexcept { return epoch_; }

    /// Mutates node i (or the channels into i) per the corruption kind.
    void injectTransientFault(NodeId i, CorruptionKind kind);

    /// Number of packets currently in the channel src -> dst.
    std::size_t channelSize(NodeId src, NodeId dst) const;

private:
    struct NodeRuntime
    {
        NodeState state;
        std::optional<NodeState> afterCleanup;
        HbState hb;
        ThetaState theta;
        bool alive = true;
        Step crashStep = -1;

        // Cycle bookkeeping for the current cycle.
        bool tracked = false;
        Step trackedStep = -1;
        struct PendingMsg
        {
            NodeId to;
            MessageId mid;
        };
        std::vector<PendingMsg> pending;
        NodeSet gossipSeenBy;
    };

    NodeRuntime& node(NodeId k) { return nodes_[static_cast<std::size_t>(k - 1)]; }
    const NodeRuntime& node(NodeId k) const { return nodes_[static_cast<std::size_t>(k - 1)]; }
    std::deque<InTransit>& channel(NodeId src, NodeId dst)
    {
        return channels_[static_cast<std::size_t>((src - 1) * cfg_.n + (dst - 1))];
    }

    NodeConfig nodeConfig() const;
    NodeSet liveSet() const;
    NodeSet oracleCrashed() const;

    void emit(Event e);
    void send(NodeId from, NodeId to, WireMessage msg);
    void takeSnapshot();

    bool applyScheduled();
    void doBroadcast(const BroadcastEntry& b);
    void doCrash(NodeId k);
    void nodeIteration(NodeId i);
    void deliverFrom(std::size_t channelIndex);
    void receive(NodeId dst, NodeId src, const WireMessage& msg, Step sentStep);

    void overflowCheck(NodeId i);
    void barrierProgress();
    void applyReset();

    void resetCycleTracking();
    void cycleProgress();
    bool stopPredicate() const;

    ScenarioConfig cfg_;
    Rng rng_;
    std::vector<NodeRuntime> nodes_;
    std::vector<std::deque<InTransit>> channels_;
    ExecutionTrace trace_;
    SimCounters counters_;

    Step step_ = 0;
    std::int64_t cycle_ = 0;
    int epoch_ = 0;
    Step lastCorruptStep_ = -1;
    bool finished_ = false;

    std::vector<BroadcastEntry> schedule_; // scheduled by step, stable
    std::vector<BroadcastEntry> asap_;
    std::size_t nextScheduled_ = 0;
    std::size_t nextAsap_ = 0;
    std::vector<CrashSpec> crashes_;
    std::size_t nextCrash_ = 0;
    std::vector<CorruptionSpec> corruptions_;
    std::size_t nextCorruption_ = 0;

    bool barrierActive_ = false;
    std::int64_t barrierStartCycle_ = 0;

    std::optional<std::int64_t> quietSinceCycle_;
};

struct RunResult
{
    ExecutionTrace trace;
    SimCounters counters;
};

RunResult runScenario(const ScenarioConfig& cfg);

} // namespace ssurb
