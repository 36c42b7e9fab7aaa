#include "ssurb/checker.hpp"
#include "ssurb/metrics.hpp"
#include "ssurb/scenario.hpp"
#include "ssurb/sim.hpp"
#include "ssurb/sweep.hpp"
#include "ssurb/trace.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ssurb;

namespace {

std::string canonicalConfig(const std::string& text)
{
    return toJson(configFromJson(Json::parse(text))).dump();
}

// Returns (trace text, metrics json, report json, all passed).
py::tuple run(const std::string& configText)
{
    const ScenarioConfig cfg = configFromJson(Json::parse(configText));
    RunResult res;
    {
        py::gil_scoped_release nogil;
        res = runScenario(cfg);
    }
    const auto reports = runAllChecks(res.trace);
    std::ostringstream os;
    writeTrace(os, res.trace);
    return py::make_tuple(os.str(), computeMetrics(res.trace, res.counters).dump(),
                          reportToJson(res.trace, reports).dump(), allPassed(reports));
}

py::tuple check(const std::string& traceText)
{
    std::istringstream in(traceText);
    const ExecutionTrace trace = readTrace(in);
    const auto reports = runAllChecks(trace);
    return py::make_tuple(reportToJson(trace, reports).dump(), allPassed(reports));
}

std::string sweep(const std::string& baseText, const std::string& seeds, const std::vector<std::string>& vary,
                  int threads)
{
    const Json doc = Json::parse(baseText);
    configFromJson(doc);
    SweepOptions opts;
    opts.seeds = parseSeeds(seeds);
    for (const auto& v : vary) opts.grid.push_back(parseAxis(v));
    opts.threads = threads;
    py::gil_scoped_release nogil;
    return runSweep(doc, opts).dump();
}

std::string digest(const std::string& traceText)
{
    std::istringstream in(traceText);
    return traceDigest(readTrace(in));
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Self-stabilizing uniform reliable broadcast: simulator and checker";

    static py::exception<ConfigError> configError(m, "ConfigError", PyExc_ValueError);
    static py::exception<TraceFormatError> traceError(m, "TraceFormatError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::object err = py::reinterpret_borrow<py::object>(configError)(e.what());
            err.attr("path") = e.path();
            PyErr_SetObject(configError.ptr(), err.ptr());
        } catch (const TraceFormatError& e) {
            py::object err = py::reinterpret_borrow<py::object>(traceError)(e.what());
            err.attr("line") = e.line();
            PyErr_SetObject(traceError.ptr(), err.ptr());
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("canonical_config", &canonicalConfig, py::arg("config_json"));
    m.def("run", &run, py::arg("config_json"));
    m.def("check", &check, py::arg("trace_text"));
    m.def("sweep", &sweep, py::arg("base_json"), py::arg("seeds"), py::arg("vary"), py::arg("threads") = 1);
    m.def("trace_digest", &digest, py::arg("trace_text"));
}
