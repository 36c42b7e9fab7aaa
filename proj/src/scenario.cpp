#include "ssurb/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ssurb {

namespace {

struct Field
{
    const Json& obj;
    std::string path;
    std::set<std::string> seen;

    Field(const Json& o, std::string p) : obj(o), path(std::move(p))
    {
        if (!obj.is_object()) throw ConfigError(path, "expected an object");
    }

    std::string sub(const std::string& key) const { return path.empty() ? key : path + "." + key; }

    const Json* find(const std::string& key)
    {
        seen.insert(key);
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    template <typename T>
    void integer(const std::string& key, T& out, std::int64_t lo, std::int64_t hi)
    {
        const Json* v = find(key);
        if (!v) return;
        if (!v->is_number_integer()) throw ConfigError(sub(key), "expected an integer");
        if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
            throw ConfigError(sub(key), "must be at most " + std::to_string(hi));
        const auto x = v->get<std::int64_t>();
        if (x < lo || x > hi)
            throw ConfigError(sub(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        out = static_cast<T>(x);
    }

    void boolean(const std::string& key, bool& out)
    {
        const Json* v = find(key);
        if (!v) return;
        if (!v->is_boolean()) throw ConfigError(sub(key), "expected true or false");
        out = v->get<bool>();
    }

    void probability(const std::string& key, double& out)
    {
        const Json* v = find(key);
        if (!v) return;
        if (!v->is_number()) throw ConfigError(sub(key), "expected a number");
        out = v->get<double>();
        if (!(out >= 0.0 && out < 1.0)) throw ConfigError(sub(key), "must be in [0, 1)");
    }

    void finish() const
    {
        for (const auto& [k, v] : obj.items())
            if (!seen.contains(k)) throw ConfigError(sub(k), "unknown field");
    }
};

constexpr std::int64_t kI64Max = std::numeric_limits<std::int64_t>::max();

std::string at(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

std::optional<std::int64_t> parseWhen(const Json& v, const std::string& path)
{
    if (v.is_string() && v.get<std::string>() == "asap") return std::nullopt;
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::int64_t>();
    throw ConfigError(path, "expected a step >= 0 or \"asap\"");
}

const Json& arrayField(Field& f, const std::string& key, const Json& empty)
{
    const Json* v = f.find(key);
    if (!v) return empty;
    if (!v->is_array()) throw ConfigError(f.sub(key), "expected an array");
    return *v;
}

void checkNode(NodeId k, int n, const std::string& path)
{
    if (k < 1 || k > n) throw ConfigError(path, "node id must be in [1, " + std::to_string(n) + "]");
}

} // namespace

const char* toString(CorruptionKind k) noexcept
{
    switch (k) {
    case CorruptionKind::RandomizeAll: return "RANDOMIZE_ALL";
    case CorruptionKind::DuplicateRecord: return "DUPLICATE_RECORD";
    case CorruptionKind::NullPayload: return "NULL_PAYLOAD";
    case CorruptionKind::SeqRegression: return "SEQ_REGRESSION";
    case CorruptionKind::WindowSkew: return "WINDOW_SKEW";
    case CorruptionKind::NextSkew: return "NEXT_SKEW";
    case CorruptionKind::ChannelGarbage: return "CHANNEL_GARBAGE";
    }
    return "?";
}

std::optional<CorruptionKind> corruptionKindFromString(const std::string& s)
{
    for (auto k : kAllCorruptionKinds)
        if (s == toString(k)) return k;
    return std::nullopt;
}

const char* toString(SchedulerProfile p) noexcept
{
    switch (p) {
    case SchedulerProfile::Uniform: return "uniform";
    case SchedulerProfile::StarveOne: return "starve-one";
    case SchedulerProfile::ReorderHeavy: return "reorder-heavy";
    }
    return "?";
}

std::optional<SchedulerProfile> schedulerProfileFromString(const std::string& s)
{
    for (auto p : {SchedulerProfile::Uniform, SchedulerProfile::StarveOne, SchedulerProfile::ReorderHeavy})
        if (s == toString(p)) return p;
    return std::nullopt;
}

std::vector<BroadcastEntry> ScenarioConfig::expandedBroadcasts() const
{
    std::vector<BroadcastEntry> out = broadcasts;
    std::vector<NodeId> who = workload.nodes;
    if (who.empty())
        for (NodeId k = 1; k <= n; ++k) who.push_back(k);
    for (int j = 0; j < workload.perNode; ++j) {
        for (NodeId k : who) {
            BroadcastEntry e;
            e.node = k;
            if (workload.spacing > 0) e.at = workload.start + j * workload.spacing;
            e.payload = "w" + std::to_string(k) + "." + std::to_string(j);
            out.push_back(std::move(e));
        }
    }
    return out;
}

ScenarioConfig configFromJson(const Json& j)
{
    ScenarioConfig c;
    Field f(j, "");
    const Json empty = Json::array();

    f.integer("n", c.n, 1, kMaxNodes);
    f.integer("bufferUnitSize", c.bufferUnitSize, 1, 1 << 20);
    f.integer("channelCapacity", c.channelCapacity, 1, 1 << 20);
    f.boolean("fifoEnabled", c.fifoEnabled);
    f.boolean("boundedMode", c.boundedMode);
    f.integer("maxint", c.maxint, 1, kI64Max);
    if (const Json* v = f.find("seed")) {
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
            throw ConfigError("seed", "expected a non-negative 64-bit integer");
        c.seed = v->get<std::uint64_t>();
    }
    f.integer("maxSteps", c.maxSteps, 0, kI64Max / 2);
    if (const Json* v = f.find("schedulerProfile")) {
        const auto p = v->is_string() ? schedulerProfileFromString(v->get<std::string>()) : std::nullopt;
        if (!p) throw ConfigError("schedulerProfile", "expected one of uniform, starve-one, reorder-heavy");
        c.schedulerProfile = *p;
    }
    f.integer("starvedNode", c.starvedNode, 1, kMaxNodes);
    f.integer("snapshotInterval", c.snapshotInterval, 0, kI64Max / 2);
    f.integer("quiescenceWindowCycles", c.quiescenceWindowCycles, 1, 1 << 20);
    f.integer("resetDrainCycles", c.resetDrainCycles, 0, 1 << 20);

    const auto& bs = arrayField(f, "broadcasts", empty);
    for (std::size_t i = 0; i < bs.size(); ++i) {
        Field e(bs[i], at("broadcasts", i));
        BroadcastEntry b;
        e.integer("node", b.node, 1, kMaxNodes);
        if (const Json* v = e.find("at")) b.at = parseWhen(*v, e.sub("at"));
        if (const Json* v = e.find("payload")) {
            if (!v->is_string()) throw ConfigError(e.sub("payload"), "expected a string");
            b.payload = v->get<std::string>();
        } else {
            b.payload = "m" + std::to_string(i);
        }
        e.finish();
        c.broadcasts.push_back(std::move(b));
    }

    if (const Json* w = f.find("workload")) {
        Field e(*w, "workload");
        e.integer("perNode", c.workload.perNode, 0, 1 << 20);
        e.integer("start", c.workload.start, 0, kI64Max / 4);
        e.integer("spacing", c.workload.spacing, 0, 1 << 30);
        const auto& ns = arrayField(e, "nodes", empty);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (!ns[i].is_number_integer()) throw ConfigError(at("workload.nodes", i), "expected an integer");
            c.workload.nodes.push_back(ns[i].get<NodeId>());
        }
        e.finish();
    }

    if (const Json* fp = f.find("faults")) {
        Field e(*fp, "faults");
        e.probability("omissionProb", c.faults.omissionProb);
        e.probability("duplicationProb", c.faults.duplicationProb);
        e.probability("reorderProb", c.faults.reorderProb);
        e.integer("detectionLatency", c.faults.detectionLatency, 0, kI64Max / 4);
        const auto& cr = arrayField(e, "crashes", empty);
        for (std::size_t i = 0; i < cr.size(); ++i) {
            Field x(cr[i], at("faults.crashes", i));
            CrashSpec s;
            x.integer("node", s.node, 1, kMaxNodes);
            x.integer("at", s.at, 0, kI64Max / 4);
            x.finish();
            c.faults.crashes.push_back(s);
        }
        const auto& co = arrayField(e, "corruptions", empty);
        for (std::size_t i = 0; i < co.size(); ++i) {
            Field x(co[i], at("faults.corruptions", i));
            CorruptionSpec s;
            x.integer("node", s.node, 1, kMaxNodes);
            x.integer("at", s.at, 0, kI64Max / 4);
            const Json* k = x.find("kind");
            const auto kind = (k && k->is_string()) ? corruptionKindFromString(k->get<std::string>()) : std::nullopt;
            if (!kind) throw ConfigError(x.sub("kind"), "unknown corruption kind");
            s.kind = *kind;
            x.finish();
            c.faults.corruptions.push_back(s);
        }
        e.finish();
    }
    f.finish();

    // Cross-field invariants.
    if (c.maxint <= c.bufferUnitSize) throw ConfigError("maxint", "must exceed bufferUnitSize");
    checkNode(c.starvedNode, c.n, "starvedNode");
    for (std::size_t i = 0; i < c.broadcasts.size(); ++i) checkNode(c.broadcasts[i].node, c.n, at("broadcasts", i) + ".node");
    for (std::size_t i = 0; i < c.workload.nodes.size(); ++i) checkNode(c.workload.nodes[i], c.n, at("workload.nodes", i));
    for (std::size_t i = 0; i < c.faults.crashes.size(); ++i)
        checkNode(c.faults.crashes[i].node, c.n, at("faults.crashes", i) + ".node");
    for (std::size_t i = 0; i < c.faults.corruptions.size(); ++i)
        checkNode(c.faults.corruptions[i].node, c.n, at("faults.corruptions", i) + ".node");
    return c;
}

Json toJson(const ScenarioConfig& c)
{
    Json j;
    j["n"] = c.n;
    j["bufferUnitSize"] = c.bufferUnitSize;
    j["channelCapacity"] = c.channelCapacity;
    j["fifoEnabled"] = c.fifoEnabled;
    j["boundedMode"] = c.boundedMode;
    j["maxint"] = c.maxint;
    j["seed"] = c.seed;
    j["maxSteps"] = c.maxSteps;
    j["schedulerProfile"] = toString(c.schedulerProfile);
    j["starvedNode"] = c.starvedNode;
    j["snapshotInterval"] = c.snapshotInterval;
    j["quiescenceWindowCycles"] = c.quiescenceWindowCycles;
    j["resetDrainCycles"] = c.resetDrainCycles;
    Json bs = Json::array();
    for (const auto& b : c.broadcasts) {
        Json e;
        e["node"] = b.node;
        e["at"] = b.at ? Json(*b.at) : Json("asap");
        e["payload"] = b.payload;
        bs.push_back(std::move(e));
    }
    j["broadcasts"] = std::move(bs);
    j["workload"] = {{"perNode", c.workload.perNode},
                     {"nodes", c.workload.nodes},
                     {"start", c.workload.start},
                     {"spacing", c.workload.spacing}};
    Json f;
    f["omissionProb"] = c.faults.omissionProb;
    f["duplicationProb"] = c.faults.duplicationProb;
    f["reorderProb"] = c.faults.reorderProb;
    f["detectionLatency"] = c.faults.detectionLatency;
    f["crashes"] = Json::array();
    for (const auto& s : c.faults.crashes) f["crashes"].push_back({{"node", s.node}, {"at", s.at}});
    f["corruptions"] = Json::array();
    for (const auto& s : c.faults.corruptions)
        f["corruptions"].push_back({{"node", s.node}, {"at", s.at}, {"kind", toString(s.kind)}});
    j["faults"] = std::move(f);
    return j;
}

std::string configHash(const ScenarioConfig& c)
{
    return hex64(fnv1a64(toJson(c).dump()));
}

void applyOverride(Json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::exception&) {
        value = text;
    }

    if (!doc.is_object()) throw ConfigError("", "expected an object at top level");
    Json* cur = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError(key, "empty path segment");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const bool last = i + 1 == parts.size();
        const auto& p = parts[i];
        if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(p);
            } catch (const std::exception&) {
                throw ConfigError(key, "segment '" + p + "' must index an array");
            }
            if (idx >= cur->size()) throw ConfigError(key, "index " + p + " out of range");
            cur = &(*cur)[idx];
        } else {
            if (cur->is_null()) *cur = Json::object();
            if (!cur->is_object()) throw ConfigError(key, "segment '" + p + "' is not inside an object");
            cur = &(*cur)[p];
        }
        if (last) *cur = value;
    }
}

ScenarioConfig loadConfigFile(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("", std::string("not valid JSON: ") + ex.what());
    }
    for (const auto& o : overrides) applyOverride(doc, o);
    return configFromJson(doc);
}

} // namespace ssurb
