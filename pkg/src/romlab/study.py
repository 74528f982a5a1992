"""Parameter-sweep studies: filtering errors, L-ROM final-time errors,
log-log convergence rates, CSV and plot-data emission.

Five study kinds are provided, mirroring the benchmark protocol:

==============  =======================  =========================
kind            swept parameter          regression abscissa
==============  =======================  =========================
filter-delta    filter radius delta      delta
filter-r        retained modes r         H1 truncation error
lrom-dt         time step dt             dt
lrom-delta      filter radius delta      delta
lrom-r          retained modes r         H1 truncation error
==============  =======================  =========================

The regression ordinate is the average squared filtering error (filter
studies, L2 and H1) or the final-time L2 error (lrom studies).
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import pod as pod_mod
from .exact import AnalyticSolution
from .fe import (SymmetricOperator, assemble_mass, assemble_stiffness,
                 build_space, interpolate)
from .filtering import apply_filter, build_filter
from .pod import (PODBasis, SnapshotSet, build_pod_basis, cache_path,
                  collect_snapshots, default_times, load_pod_cache,
                  project_Pr, rom_stiffness, save_pod_cache,
                  truncation_errors)
from .rom import (LROMConfig, StepDivergenceError, build_trilinear_tensor,
                  project_forcing, ROMOperators, run, stability_check)

__all__ = [
    "STUDY_KINDS",
    "StudyConfig",
    "StudyResult",
    "SweepRecord",
    "avg_filter_errors",
    "final_time_error",
    "loglog_regression",
    "run_study",
    "CSV_HEADER",
]

STUDY_KINDS = ("filter-delta", "filter-r", "lrom-dt", "lrom-delta", "lrom-r")

CSV_HEADER = "param,value,e_l2,e_h1,lambda_l2,lambda_h1,slope_running"

# Default sweep grids, copied from the benchmark tables.
DEFAULT_SWEEPS = {
    "filter-delta": [1e-2, 5e-3, 2.5e-3, 2e-3, 1.67e-3, 1.25e-3],
    "filter-r": [30, 40, 50, 60, 70, 80],
    "lrom-dt": [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4],
    "lrom-delta": [5e-1, 2.5e-1, 1.25e-1, 6.25e-2, 3.125e-2, 1.5625e-2],
    "lrom-r": [10, 20, 30, 40, 50],
}

# Fixed parameters per kind (None = irrelevant for that kind).
DEFAULT_FIXED = {
    "filter-delta": dict(r=95, delta=None, dt=1e-4),
    "filter-r": dict(r=None, delta=1e-3, dt=1e-4),
    "lrom-dt": dict(r=99, delta=1e-4, dt=None),
    "lrom-delta": dict(r=99, delta=None, dt=1e-4),
    "lrom-r": dict(r=None, delta=1e-2, dt=1e-4),
}


@dataclass
class StudyConfig:
    kind: str
    mesh_n: int = 64
    snap_dt: float = 1e-2
    t_final: float = 1.0
    nu: float = 1e-3
    r: int | None = None
    delta: float | None = None
    dt: float | None = None
    sweep: list | None = None
    out: str | None = None
    cache_dir: str | None = None
    linearization: str = "picard-implicit"
    final_error_variant: str = "rom"
    h1_seminorm: bool = False

    def __post_init__(self):
        if self.kind not in STUDY_KINDS:
            raise ValueError(f"unknown study kind {self.kind!r}")
        defaults = DEFAULT_FIXED[self.kind]
        if self.r is None:
            self.r = defaults["r"]
        if self.delta is None:
            self.delta = defaults["delta"]
        if self.dt is None:
            self.dt = defaults["dt"]
        if self.sweep is None:
            self.sweep = list(DEFAULT_SWEEPS[self.kind])
        if len(self.sweep) == 0:
            raise ValueError("sweep list is empty")
        diffs = np.diff(np.asarray(self.sweep, dtype=float))
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
        for name in ("mesh_n", "snap_dt", "t_final", "nu"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def param_name(self) -> str:
        return {"filter-delta": "delta", "filter-r": "r", "lrom-dt": "dt",
                "lrom-delta": "delta", "lrom-r": "r"}[self.kind]


@dataclass
class SweepRecord:
    value: float
    e_l2: float | None = None
    e_h1: float | None = None
    lambda_l2: float | None = None
    lambda_h1: float | None = None
    picard_mean: float | None = None
    picard_max: int | None = None
    stability_max: float | None = None
    regression_x: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class StudyResult:
    config: StudyConfig
    records: list
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    slope_h1: float | None = None
    r_squared_h1: float | None = None

    @property
    def n_failed(self) -> int:
        return sum(not rec.ok for rec in self.records)

    @property
    def status(self) -> str:
        if self.n_failed:
            return "sweep-failures"
        if self.slope is None:
            return "no-regression"
        return "ok"


def loglog_regression(xs, ys):
    """Ordinary least squares on (ln x, ln y); returns (slope, intercept, R^2)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError("regression needs at least 2 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("regression requires positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fit = slope * lx + intercept
    ss_res = float(np.sum((ly - fit) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def avg_filter_errors(basis: PODBasis, r: int, delta: float,
                      snapshots: SnapshotSet, m_op: SymmetricOperator,
                      s_op: SymmetricOperator, s_r=None):
    """Average squared filtering errors over all snapshots.

    Returns (E_L2, E_H1): the mean of |u_k - filt(u_k)|^2 in the L2 norm
    and in the H1 seminorm.
    """
    if s_r is None:
        s_r = rom_stiffness(basis, r)
    filt = build_filter(s_r, delta)
    u = snapshots.matrix
    coords = basis.modes[:, :r].T @ (m_op.mat @ u)
    abar = apply_filter(filt, coords)
    err = u - basis.modes[:, :r] @ abar
    e_l2 = float(np.mean(np.sum(err * (m_op.mat @ err), axis=0)))
    e_h1 = float(np.mean(np.sum(err * (s_op.mat @ err), axis=0)))
    return e_l2, e_h1


def final_time_error(traj, solution, basis: PODBasis, r: int,
                     m_op: SymmetricOperator, space, t_final: float,
                     variant: str = "rom", filt=None) -> float:
    """L2 error at the final time.

    variant="rom" measures |u(T) - u_r(T)|; variant="filtered-snapshot"
    measures |u(T) - filt(P_r u(T))| instead (the literal filtered-
    snapshot definition), which needs a FilterOperator.
    """
    u_exact = interpolate(space, solution.velocity, t_final).coeffs
    if variant == "rom":
        approx = basis.modes[:, :r] @ traj.final_state
    elif variant == "filtered-snapshot":
        if filt is None:
            raise ValueError("filtered-snapshot variant needs a filter")
        coords = project_Pr(basis, r, m_op, u_exact)
        approx = basis.modes[:, :r] @ apply_filter(filt, coords)
    else:
        raise ValueError(f"unknown final-error variant {variant!r}")
    diff = u_exact - approx
    return float(np.sqrt(max(diff @ (m_op.mat @ diff), 0.0)))


@dataclass
class StudyContext:
    """Shared, read-only objects reused across sweep points."""

    space: object
    m_op: SymmetricOperator
    s_op: SymmetricOperator
    snapshots: SnapshotSet
    basis: PODBasis
    solution: AnalyticSolution
    # lazy caches, shared across run_study calls on the same context
    tensor_cache: dict = field(default_factory=dict)
    forcing_cache: dict = field(default_factory=dict)
    a0_cache: dict = field(default_factory=dict)

    def tensor(self, r: int) -> np.ndarray:
        """Leading (r, r, r) block of the advection tensor, cached at the
        largest r requested so far (blocks are nested)."""
        have = [rr for rr in self.tensor_cache if rr >= r]
        if have:
            return self.tensor_cache[min(have)][:r, :r, :r]
        t = build_trilinear_tensor(self.basis, r, self.space)
        self.tensor_cache.clear()
        self.tensor_cache[r] = t
        return t

    def forcing(self, dt: float, t_final: float, r: int) -> np.ndarray:
        key = (dt, t_final)
        if key not in self.forcing_cache or \
                self.forcing_cache[key].shape[1] < r:
            times = np.linspace(0.0, t_final, round(t_final / dt) + 1)
            self.forcing_cache[key] = project_forcing(
                self.basis, max(r, self.basis.d), self.m_op, self.solution,
                times, self.space)
        return self.forcing_cache[key][:, :r]

    def a0(self, r: int) -> np.ndarray:
        if "a0" not in self.a0_cache:
            u0 = interpolate(self.space, self.solution.velocity, 0.0).coeffs
            self.a0_cache["a0"] = project_Pr(
                self.basis, self.basis.d, self.m_op, u0)
        return self.a0_cache["a0"][:r]


def build_context(cfg: StudyConfig) -> StudyContext:
    solution = AnalyticSolution(nu=cfg.nu)
    space = build_space(cfg.mesh_n)
    m_op = assemble_mass(space)
    s_op = assemble_stiffness(space)
    times = default_times(cfg.snap_dt, cfg.t_final)
    snaps = collect_snapshots(space, solution, times)
    m = times.size - 1
    basis = None
    cpath = None
    if cfg.cache_dir is not None:
        cpath = cache_path(cfg.cache_dir, cfg.mesh_n, cfg.snap_dt, m)
        basis = load_pod_cache(cpath, cfg.mesh_n, cfg.snap_dt, m)
        if basis is not None and basis.modes.shape[0] != space.n_dofs:
            basis = None
    if basis is None:
        basis = build_pod_basis(snaps, m_op, s_op, h1_seminorm=cfg.h1_seminorm)
        if cpath is not None:
            save_pod_cache(cpath, basis, cfg.mesh_n, cfg.snap_dt, m)
    return StudyContext(space=space, m_op=m_op, s_op=s_op, snapshots=snaps,
                        basis=basis, solution=solution)


def _run_filter_study(cfg: StudyConfig, ctx: StudyContext):
    records = []
    if cfg.kind == "filter-delta":
        s_r = rom_stiffness(ctx.basis, cfg.r)
        lam_l2, lam_h1 = truncation_errors(ctx.basis, cfg.r)
        for delta in cfg.sweep:
            rec = SweepRecord(value=float(delta), lambda_l2=lam_l2,
                              lambda_h1=lam_h1, regression_x=float(delta))
            try:
                rec.e_l2, rec.e_h1 = avg_filter_errors(
                    ctx.basis, cfg.r, float(delta), ctx.snapshots,
                    ctx.m_op, ctx.s_op, s_r=s_r)
            except Exception as exc:
                rec.error = str(exc)
            records.append(rec)
    else:  # filter-r
        for r in cfg.sweep:
            r = int(r)
            lam_l2, lam_h1 = truncation_errors(ctx.basis, r)
            rec = SweepRecord(value=float(r), lambda_l2=lam_l2,
                              lambda_h1=lam_h1, regression_x=lam_h1)
            try:
                rec.e_l2, rec.e_h1 = avg_filter_errors(
                    ctx.basis, r, cfg.delta, ctx.snapshots,
                    ctx.m_op, ctx.s_op)
            except Exception as exc:
                rec.error = str(exc)
            records.append(rec)
    return records


def _run_lrom_study(cfg: StudyConfig, ctx: StudyContext):
    records = []
    r_values = ([int(v) for v in cfg.sweep] if cfg.kind == "lrom-r"
                else [cfg.r])
    r_max = max(r_values)
    tensor = ctx.tensor(r_max)

    for value in cfg.sweep:
        if cfg.kind == "lrom-dt":
            r, delta, dt = cfg.r, cfg.delta, float(value)
        elif cfg.kind == "lrom-delta":
            r, delta, dt = cfg.r, float(value), cfg.dt
        else:
            r, delta, dt = int(value), cfg.delta, cfg.dt
        lam_l2, lam_h1 = truncation_errors(ctx.basis, r)
        rec = SweepRecord(value=float(value), lambda_l2=lam_l2,
                          lambda_h1=lam_h1,
                          regression_x=(lam_h1 if cfg.kind == "lrom-r"
                                        else float(value)))
        try:
            rom_cfg = LROMConfig(r=r, delta=delta, dt=dt,
                                 t_final=cfg.t_final, nu=cfg.nu,
                                 linearization=cfg.linearization)
            s_r = rom_stiffness(ctx.basis, r)
            ops = ROMOperators(r=r, s_r=s_r, tensor=tensor[:r, :r, :r],
                               forcing=ctx.forcing(dt, cfg.t_final, r),
                               a0=ctx.a0(r))
            filt = build_filter(s_r, delta)
            traj = run(ops, filt, rom_cfg)
            report = stability_check(traj, ops, rom_cfg)
            if not report.bounded:
                raise StepDivergenceError("stability ledger is non-finite")
            rec.stability_max = report.max_bound
            rec.e_l2 = final_time_error(
                traj, ctx.solution, ctx.basis, r, ctx.m_op, ctx.space,
                cfg.t_final, variant=cfg.final_error_variant, filt=filt)
            rec.picard_mean = float(traj.iter_counts.mean())
            rec.picard_max = int(traj.iter_counts.max())
        except (StepDivergenceError, ValueError, np.linalg.LinAlgError) as exc:
            rec.error = str(exc)
        records.append(rec)
    return records


def _fmt(x) -> str:
    return "" if x is None else f"{x:.17g}"


def write_csv(path, cfg: StudyConfig, records):
    """CSV with the fixed header; running slope uses surviving rows only."""
    lines = [CSV_HEADER]
    xs, ys = [], []
    for rec in records:
        slope_running = ""
        if rec.ok and rec.e_l2 is not None and rec.e_l2 > 0:
            xs.append(rec.regression_x)
            ys.append(rec.e_l2)
            if len(xs) >= 2:
                slope_running = _fmt(loglog_regression(xs, ys)[0])
        lines.append(",".join([
            cfg.param_name, _fmt(rec.value), _fmt(rec.e_l2), _fmt(rec.e_h1),
            _fmt(rec.lambda_l2), _fmt(rec.lambda_h1), slope_running,
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(path, result: "StudyResult"):
    """log10(param) log10(error) pairs plus a fitted-line sample."""
    recs = [r for r in result.records
            if r.ok and r.e_l2 is not None and r.e_l2 > 0]
    lines = ["# log10(param) log10(e_l2)"]
    for rec in recs:
        lines.append(f"{math.log10(rec.regression_x):.17g} "
                     f"{math.log10(rec.e_l2):.17g}")
    if result.slope is not None:
        lines.append("")
        lines.append("# fitted line")
        for rec in recs:
            ly = result.slope * math.log(rec.regression_x) + result.intercept
            lines.append(f"{math.log10(rec.regression_x):.17g} "
                         f"{ly / math.log(10.0):.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_study(cfg: StudyConfig, ctx: StudyContext | None = None) -> StudyResult:
    """Build the pipeline, sweep the parameter, regress, and emit files."""
    if ctx is None:
        ctx = build_context(cfg)
    if cfg.kind.startswith("filter"):
        records = _run_filter_study(cfg, ctx)
    else:
        records = _run_lrom_study(cfg, ctx)

    result = StudyResult(config=cfg, records=records)
    good = [r for r in records if r.ok and r.e_l2 is not None and r.e_l2 > 0]
    if len(good) >= 2:
        xs = [r.regression_x for r in good]
        result.slope, result.intercept, result.r_squared = loglog_regression(
            xs, [r.e_l2 for r in good])
        if all(r.e_h1 is not None and r.e_h1 > 0 for r in good):
            result.slope_h1, _, result.r_squared_h1 = loglog_regression(
                xs, [r.e_h1 for r in good])
    if cfg.out is not None:
        out = Path(cfg.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv(out, cfg, records)
        write_plot_data(out.with_suffix(out.suffix + ".plot"), result)
    return result
