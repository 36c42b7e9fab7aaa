#include "ssurb/sweep.hpp"

#include "ssurb/checker.hpp"
#include "ssurb/metrics.hpp"
#include "ssurb/scenario.hpp"
#include "ssurb/sim.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

namespace ssurb {

namespace {

Json parseValue(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception&) {
        return text;
    }
}

std::string assignment(const std::string& key, const Json& v)
{
    return key + "=" + v.dump();
}

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::ranges::sort(v);
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

struct Job
{
    std::size_t cell;
    std::uint64_t seed;
};

} // namespace

SweepAxis parseAxis(const std::string& spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(spec, "expected key=v1,v2,...");
    SweepAxis a;
    a.key = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) a.values.push_back(parseValue(item));
    if (a.values.empty()) throw ConfigError(a.key, "no values given");
    return a;
}

std::vector<std::uint64_t> parseSeeds(const std::string& spec)
{
    std::vector<std::uint64_t> out;
    try {
        if (auto dots = spec.find(".."); dots != std::string::npos) {
            const auto a = std::stoull(spec.substr(0, dots));
            const auto b = std::stoull(spec.substr(dots + 2));
            if (b < a) throw ConfigError("seeds", "empty range");
            for (auto s = a; s <= b; ++s) out.push_back(s);
        } else if (spec.find(',') != std::string::npos) {
            std::stringstream ss(spec);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
        } else {
            const auto n = std::stoull(spec);
            for (std::uint64_t s = 1; s <= n; ++s) out.push_back(s);
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("seeds", "cannot parse '" + spec + "'");
    } catch (const std::out_of_range&) {
        throw ConfigError("seeds", "out of range '" + spec + "'");
    }
    if (out.empty()) throw ConfigError("seeds", "no seeds");
    return out;
}

Json runSweep(const Json& baseDoc, const SweepOptions& opts)
{
    // Cartesian product of the grid, last axis varying fastest.
    std::vector<std::vector<std::string>> cells{{}};
    for (const auto& axis : opts.grid) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : cells)
            for (const auto& v : axis.values) {
                auto d = c;
                d.push_back(assignment(axis.key, v));
                next.push_back(std::move(d));
            }
        cells = std::move(next);
    }

    std::vector<ScenarioConfig> base;
    for (const auto& overrides : cells) {
        Json doc = baseDoc;
        try {
            for (const auto& o : overrides) applyOverride(doc, o);
            base.push_back(configFromJson(doc));
        } catch (const ConfigError& e) {
            Json echo = overrides;
            throw ConfigError("cell " + echo.dump(), e.what());
        }
    }

    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (auto s : opts.seeds) jobs.push_back({c, s});
    std::vector<Json> rows(jobs.size());

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= jobs.size() || failed) return;
            try {
                ScenarioConfig cfg = base[jobs[k].cell];
                cfg.seed = jobs[k].seed;
                auto res = runScenario(cfg);
                const auto reports = runAllChecks(res.trace);
                Json row;
                row["seed"] = cfg.seed;
                row["passed"] = allPassed(reports);
                Json verdicts;
                for (const auto& r : reports) verdicts[r.property] = toString(r.verdict);
                row["verdicts"] = std::move(verdicts);
                row["metrics"] = computeMetrics(res.trace, res.counters);
                rows[k] = std::move(row);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    const int threads = std::max(1, opts.threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    Json out;
    out["seeds"] = opts.seeds;
    Json table = Json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        Json cell;
        cell["overrides"] = cells[c];
        std::vector<double> stab, msgs;
        std::int64_t failures = 0, unstabilized = 0;
        Json runs = Json::array();
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (jobs[k].cell != c) continue;
            const Json& row = rows[k];
            if (!row["passed"].get<bool>()) ++failures;
            const Json& m = row["metrics"];
            if (m["stabilizationCycles"].is_null())
                ++unstabilized;
            else
                stab.push_back(m["stabilizationCycles"].get<double>());
            std::int64_t worst = 0;
            for (const auto& b : m["broadcasts"])
                worst = std::max(worst, b["msgSends"].get<std::int64_t>() + b["ackSends"].get<std::int64_t>());
            msgs.push_back(static_cast<double>(worst));
            runs.push_back({{"seed", row["seed"]},
                            {"passed", row["passed"]},
                            {"verdicts", row["verdicts"]},
                            {"stabilizationCycles", m["stabilizationCycles"]},
                            {"maxMessagesPerBroadcast", worst},
                            {"endStatus", m["endStatus"]},
                            {"traceDigest", m["traceDigest"]}});
        }
        cell["failures"] = failures;
        cell["unstabilized"] = unstabilized;
        cell["stabilizationCyclesMedian"] = median(stab);
        cell["stabilizationCyclesMax"] = stab.empty() ? 0.0 : *std::ranges::max_element(stab);
        cell["messagesPerBroadcastMedian"] = median(msgs);
        cell["messagesPerBroadcastMax"] = msgs.empty() ? 0.0 : *std::ranges::max_element(msgs);
        cell["runs"] = std::move(runs);
        table.push_back(std::move(cell));
    }
    out["cells"] = std::move(table);
    return out;
}

} // namespace ssurb
