#pragma once

// Scenario configuration: one JSON document plus a seed fully determines a run.

#include "ssurb/codec.hpp"
#include "ssurb/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssurb {

enum class CorruptionKind {
    RandomizeAll,
    DuplicateRecord,
    NullPayload,
    SeqRegression,
    WindowSkew,
    NextSkew,
    ChannelGarbage,
};

inline constexpr CorruptionKind kAllCorruptionKinds[] = {
    CorruptionKind::RandomizeAll, CorruptionKind::DuplicateRecord, CorruptionKind::NullPayload,
    CorruptionKind::SeqRegression, CorruptionKind::WindowSkew,     CorruptionKind::NextSkew,
    CorruptionKind::ChannelGarbage,
};

const char* toString(CorruptionKind k) noexcept;
std::optional<CorruptionKind> corruptionKindFromString(const std::string& s);

enum class SchedulerProfile { Uniform, StarveOne, ReorderHeavy };

const char* toString(SchedulerProfile p) noexcept;
std::optional<SchedulerProfile> schedulerProfileFromString(const std::string& s);

struct BroadcastEntry
{
    NodeId node = 1;
    std::optional<std::int64_t> at; // nullopt: as soon as allowed
    std::string payload;
};

/// Extra broadcasts generated per node, appended after the explicit schedule.
struct Workload
{
    int perNode = 0;
    std::vector<NodeId> nodes; // empty: every node
    std::int64_t start = 0;
    std::int64_t spacing = 0;  // 0: all entries as soon as allowed
};

struct CrashSpec
{
    NodeId node = 1;
    std::int64_t at = 0;
};

struct CorruptionSpec
{
    NodeId node = 1;
    std::int64_t at = 0;
    CorruptionKind kind = CorruptionKind::WindowSkew;
};

struct FaultPlan
{
    double omissionProb = 0.0;
    double duplicationProb = 0.0;
    double reorderProb = 0.0;
    std::int64_t detectionLatency = 20;
    std::vector<CrashSpec> crashes;
    std::vector<CorruptionSpec> corruptions;
};

struct ScenarioConfig
{
    int n = 3;
    SeqNum bufferUnitSize = 4;
    int channelCapacity = 64;
    bool fifoEnabled = false;
    bool boundedMode = false;
    SeqNum maxint = SeqNum{1} << 62;
    std::uint64_t seed = 1;
    std::int64_t maxSteps = 10000;
    SchedulerProfile schedulerProfile = SchedulerProfile::Uniform;
    NodeId starvedNode = 1;
    std::int64_t snapshotInterval = 0; // 0: snapshots only at cycle boundaries
    int quiescenceWindowCycles = 5;
    int resetDrainCycles = 20;
    std::vector<BroadcastEntry> broadcasts;
    Workload workload;
    FaultPlan faults;

    /// Explicit schedule followed by the workload expansion.
    std::vector<BroadcastEntry> expandedBroadcasts() const;
};

/// Config error; path names the offending field, e.g. "faults.crashes[0].node".
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error((path.empty() ? std::string("config") : path) + ": " + what), path_(path)
    {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Strict parse: unknown keys, wrong types and violated invariants all throw ConfigError.
ScenarioConfig configFromJson(const Json& j);

/// Canonical form with every field present; its digest is the trace header's config hash.
Json toJson(const ScenarioConfig& c);

std::string configHash(const ScenarioConfig& c);

/// Applies "a.b.c=value". The value is parsed as JSON when possible, else taken as a string.
void applyOverride(Json& doc, const std::string& assignment);

ScenarioConfig loadConfigFile(const std::string& path, const std::vector<std::string>& overrides = {});

} // namespace ssurb
