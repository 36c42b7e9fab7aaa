"""Python access to the ssurb simulator and trace checker."""

import json

from ._core import ConfigError, TraceFormatError
from . import _core

__all__ = ["ConfigError", "TraceFormatError", "RunOutput", "parse_config", "run", "check", "sweep", "trace_digest"]


class RunOutput:
    def __init__(self, trace, metrics, report, passed):
        self.trace = trace
        self.metrics = metrics
        self.report = report
        self.passed = passed

    @property
    def digest(self):
        return self.report["traceDigest"]


def _dump(config):
    return config if isinstance(config, str) else json.dumps(config)


def parse_config(config):
    """Validate a scenario (dict or JSON text) and return its canonical form."""
    return json.loads(_core.canonical_config(_dump(config)))


def run(config):
    trace, metrics, report, passed = _core.run(_dump(config))
    return RunOutput(trace, json.loads(metrics), json.loads(report), passed)


def check(trace_text):
    """Re-check a trace; returns (report dict, passed)."""
    report, passed = _core.check(trace_text)
    return json.loads(report), passed


def sweep(base, seeds="1", vary=(), threads=1):
    return json.loads(_core.sweep(_dump(base), str(seeds), list(vary), threads))


def trace_digest(trace_text):
    return _core.trace_digest(trace_text)
