"""Shared fixtures.

Two tiers are used throughout:

* small tier: n = 8 mesh, 21 snapshots. Cheap; used by the unit tests.
* benchmark tier: n = 64 mesh, 101 snapshots over [0, 1]. Expensive;
  built once per session and shared by the acceptance tests.
"""

import zlib
from types import SimpleNamespace

import numpy as np
import pytest

from romlab import (AnalyticSolution, assemble_mass, assemble_stiffness,
                    build_pod_basis, build_space, collect_snapshots)
from romlab.pod import default_times
from romlab.study import StudyConfig, build_context


def _bundle(n, snap_dt):
    space = build_space(n)
    m_op = assemble_mass(space)
    s_op = assemble_stiffness(space)
    solution = AnalyticSolution()
    times = default_times(snap_dt, 1.0)
    snapshots = collect_snapshots(space, solution, times)
    basis = build_pod_basis(snapshots, m_op, s_op)
    return SimpleNamespace(n=n, space=space, m_op=m_op, s_op=s_op,
                           solution=solution, times=times,
                           snapshots=snapshots, basis=basis)


@pytest.fixture(scope="session")
def small():
    return _bundle(8, 0.05)


@pytest.fixture(scope="session")
def bench_ctx():
    """Benchmark-tier study context (n = 64, 101 snapshots)."""
    return build_context(StudyConfig(kind="lrom-dt"))


@pytest.fixture
def rng(request):
    # stable per-test seed (hash() is salted per process)
    seed = zlib.crc32(request.node.nodeid.encode())
    return np.random.default_rng(seed)
