import functools
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multigraphon import MultiGraphonSpec
from multigraphon.bench import Scenario, run_scenario

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# criterion number -> list of (label, passed, detail)
ACCEPTANCE = {}


def record(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        for label, ok, detail in ACCEPTANCE[k]:
            tr.write_line(f"criterion {k} [{'PASS' if ok else 'FAIL'}] {label}: {detail}")


# -- benchmark runs shared between test modules -------------------------------


def _timed(scn):
    t0 = time.perf_counter()
    records, raw = run_scenario(scn, return_raw=True)
    return records, raw, time.perf_counter() - t0


# each returns (records, per-replication raw values, wall seconds)
@functools.lru_cache(maxsize=None)
def replicated_run(kind):
    scn = Scenario(MultiGraphonSpec(kind, 0.0), n=150, m=150, mode="replicated",
                   arms=("proposed", "oracle_rep", "nbs"), replications=5, seed=0)
    return _timed(scn)


@functools.lru_cache(maxsize=None)
def heterogeneous_f2_run():
    scn = Scenario(MultiGraphonSpec("f2", 0.5), n=150, m=150, mode="cross_section",
                   sigma_cov=0.28, arms=("oracle1", "oracle2", "proposed", "usvt"),
                   replications=5, seed=0)
    return _timed(scn)


def by_arm(records):
    return {r.arm: r for r in records}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
