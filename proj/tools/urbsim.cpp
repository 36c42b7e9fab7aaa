// urbsim: run scenarios, sweep seeds and parameters, re-check saved traces.
//
// Exit status: 0 all checks pass, 1 a property failed, 2 usage or config error.

#include "ssurb/checker.hpp"
#include "ssurb/metrics.hpp"
#include "ssurb/scenario.hpp"
#include "ssurb/sim.hpp"
#include "ssurb/sweep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace ssurb;

namespace {

constexpr int kPass = 0;
constexpr int kPropertyFailure = 1;
constexpr int kUsageError = 2;

struct CommonOptions
{
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::int64_t> maxSteps;
    std::vector<std::string> sets;
    std::string profile;
};

void addCommon(CLI::App* app, CommonOptions& o, bool withSeed)
{
    app->add_option("--scenario", o.scenario, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    if (withSeed) app->add_option("--seed", o.seed, "Override the config seed");
    app->add_option("--out", o.out, "Output directory");
    app->add_option("--max-steps", o.maxSteps, "Override maxSteps");
    app->add_option("--set", o.sets, "Override a config field: key=value (dotted path)");
    app->add_option("--profile", o.profile, "Scheduler profile: uniform, starve-one, reorder-heavy");
}

Json loadDoc(const CommonOptions& o)
{
    std::ifstream in(o.scenario);
    if (!in) throw ConfigError("", "cannot read " + o.scenario);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("", std::string("not valid JSON: ") + e.what());
    }
    for (const auto& s : o.sets) applyOverride(doc, s);
    if (o.seed) doc["seed"] = *o.seed;
    if (o.maxSteps) doc["maxSteps"] = *o.maxSteps;
    if (!o.profile.empty()) doc["schedulerProfile"] = o.profile;
    return doc;
}

void writeJson(const fs::path& p, const Json& j)
{
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << j.dump(2) << '\n';
}

fs::path ensureDir(const std::string& dir)
{
    fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(p);
    return p;
}

int cmdRun(const CommonOptions& o)
{
    const ScenarioConfig cfg = configFromJson(loadDoc(o));
    auto res = runScenario(cfg);
    const auto reports = runAllChecks(res.trace);

    const fs::path dir = ensureDir(o.out);
    {
        std::ofstream os(dir / "trace.ndjson");
        if (!os) throw std::runtime_error("cannot write trace");
        writeTrace(os, res.trace);
    }
    writeJson(dir / "metrics.json", computeMetrics(res.trace, res.counters));
    writeJson(dir / "report.json", reportToJson(res.trace, reports));
    std::cout << reportSummary(reports);
    return allPassed(reports) ? kPass : kPropertyFailure;
}

int cmdSweep(const CommonOptions& o, const std::string& seeds, const std::vector<std::string>& vary, int threads)
{
    const Json doc = loadDoc(o);
    configFromJson(doc); // reject a bad base config before any cell runs

    SweepOptions opts;
    opts.seeds = parseSeeds(seeds);
    for (const auto& v : vary) opts.grid.push_back(parseAxis(v));
    opts.threads = threads;
    const Json summary = runSweep(doc, opts);

    if (!o.out.empty()) writeJson(ensureDir(o.out) / "sweep.json", summary);
    bool ok = true;
    for (const auto& cell : summary["cells"]) {
        std::cout << cell["overrides"].dump() << "  failures=" << cell["failures"]
                  << "  stab.median=" << cell["stabilizationCyclesMedian"]
                  << "  stab.max=" << cell["stabilizationCyclesMax"]
                  << "  msgs.median=" << cell["messagesPerBroadcastMedian"]
                  << "  msgs.max=" << cell["messagesPerBroadcastMax"] << '\n';
        ok = ok && cell["failures"].get<std::int64_t>() == 0;
    }
    return ok ? kPass : kPropertyFailure;
}

int cmdCheck(const std::string& tracePath, const std::string& out)
{
    std::ifstream in(tracePath);
    if (!in) {
        std::cerr << "error: cannot read " << tracePath << '\n';
        return kUsageError;
    }
    ExecutionTrace trace;
    try {
        trace = readTrace(in);
    } catch (const TraceFormatError& e) {
        if (e.line() <= 1) {
            std::cerr << "error: bad trace header: " << e.what() << '\n';
            return kUsageError;
        }
        CheckReport r;
        r.property = "trace-format";
        r.verdict = Verdict::Fail;
        r.witness = e.what();
        std::cout << reportSummary({r});
        return kPropertyFailure;
    }
    const auto reports = runAllChecks(trace);
    if (!out.empty()) writeJson(ensureDir(out) / "report.json", reportToJson(trace, reports));
    std::cout << reportSummary(reports);
    return allPassed(reports) ? kPass : kPropertyFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-stabilizing quiescent URB simulator and checker"};
    app.require_subcommand(1);

    CommonOptions runOpts;
    auto* run = app.add_subcommand("run", "Run one scenario and check it");
    addCommon(run, runOpts, true);

    CommonOptions sweepOpts;
    std::string seeds = "1";
    std::vector<std::string> vary;
    int threads = 1;
    auto* sweep = app.add_subcommand("sweep", "Run a grid of configs over a range of seeds");
    addCommon(sweep, sweepOpts, false);
    sweep->add_option("--seeds", seeds, "N, A..B or a,b,c");
    sweep->add_option("--vary", vary, "Grid axis key=v1,v2,...");
    sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string tracePath, checkOut;
    auto* check = app.add_subcommand("check", "Re-run all checks on a saved trace");
    check->add_option("trace", tracePath, "Trace file (NDJSON)")->required();
    check->add_option("--out", checkOut, "Directory for report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsageError;
    }

    try {
        if (*run) return cmdRun(runOpts);
        if (*sweep) return cmdSweep(sweepOpts, seeds, vary, threads);
        return cmdCheck(tracePath, checkOut);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
}
