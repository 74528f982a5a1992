"""Reduced operators and the G-ROM / Leray-ROM backward-Euler steppers.

The fully implicit step solves
    (a_{k+1} - a_k)/dt + nu S_r a_{k+1} + N(abar_{k+1}, a_{k+1}) = F_{k+1}
with N_m(abar, a) = sum_ij abar_i a_j T_ijm, by Picard iteration on the
(filtered) advecting field. The G-ROM is the same scheme with the filter
replaced by the identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .fe import SymmetricOperator, VelocitySpace, interpolate, quad_point_data
from .filtering import FilterOperator, apply_filter
from .pod import PODBasis, RomStiffness, project_Pr, rom_stiffness

__all__ = [
    "ROMOperators",
    "LROMConfig",
    "ROMTrajectory",
    "StepDivergenceError",
    "build_trilinear_tensor",
    "project_forcing",
    "lrom_step",
    "grom_step",
    "run",
    "stability_check",
]


class StepDivergenceError(RuntimeError):
    """Raised when a time step fails to converge or blows up."""

    def __init__(self, message, residual=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


def build_trilinear_tensor(basis: PODBasis, r: int, space: VelocitySpace,
                           block_bytes: int = 256 * 2 ** 20) -> np.ndarray:
    """Tensor T_ijk = b*(phi_i, phi_j, phi_k), streamed over element blocks.

    Per block the mode values V[q,i,a] and gradients G[q,j,c,a] are
    evaluated at the quadrature points and contracted; the skew
    symmetrization T_ijk = -T_ikj is exact by construction.
    """
    if not 1 <= r <= basis.d:
        raise ValueError(f"r={r} outside [1, d={basis.d}]")
    phi = basis.modes[:, :r]
    nel = space.edofs.shape[0]
    nq = len(space.rule.weights)
    # dominant intermediate: D (qb, r, 2, r) float64
    per_el = nq * (2 * r * r + 6 * r) * 8
    el_block = max(2, min(nel, int(block_bytes // per_el)))
    el_block += el_block % 2  # keep both orientations per block

    t1 = np.zeros((r, r, r))
    for start in range(0, nel, el_block):
        els = np.arange(start, min(start + el_block, nel))
        vals, grads, wdet = quad_point_data(space, phi, els)
        vw = vals * wdet[:, None, None]                       # (q, i, a)
        d = np.einsum("qjca,qkc->qjak", grads, vals)          # (q, j, a, k)
        qb = len(wdet)
        vwf = vw.transpose(1, 0, 2).reshape(r, qb * 2)
        df = d.transpose(0, 2, 1, 3).reshape(qb * 2, r * r)
        t1 += (vwf @ df).reshape(r, r, r)
    return 0.5 * (t1 - t1.transpose(0, 2, 1))


def project_forcing(basis: PODBasis, r: int, m_op: SymmetricOperator,
                    solution, times, space: VelocitySpace,
                    chunk: int = 64) -> np.ndarray:
    """Forcing coordinates F_k,i = (f_h(t_k), phi_i) for each time level.

    f_h is the nodal interpolant of the analytic forcing, consistent
    with the snapshot convention.
    """
    times = np.asarray(times, dtype=float)
    q = m_op.mat @ basis.modes[:, :r]                 # (N, r)
    x = space.dof_coords[:, 0][None, :]
    y = space.dof_coords[:, 1][None, :]
    out = np.empty((times.size, r))
    for start in range(0, times.size, chunk):
        tt = times[start:start + chunk, None]
        f1, f2 = solution.forcing(x, y, tt)
        fh = np.hstack([f1, f2])                      # (chunk, N)
        if not np.all(np.isfinite(fh)):
            raise ValueError("non-finite forcing values")
        out[start:start + chunk] = fh @ q
    return out


@dataclass(frozen=True)
class ROMOperators:
    """Everything the steppers need, in ROM coordinates."""

    r: int
    s_r: RomStiffness
    tensor: np.ndarray        # (r, r, r), T_ijk = b*(phi_i, phi_j, phi_k)
    forcing: np.ndarray       # (M+1, r) forcing coordinates at the t_k
    a0: np.ndarray            # initial coordinates, L2 projection of u0


def build_rom_operators(basis: PODBasis, r: int, space: VelocitySpace,
                        m_op: SymmetricOperator, solution, times,
                        tensor: np.ndarray | None = None) -> ROMOperators:
    if tensor is None:
        tensor = build_trilinear_tensor(basis, r, space)
    elif tensor.shape[0] > r:
        tensor = tensor[:r, :r, :r]  # nested: leading block of a larger build
    u0 = interpolate(space, solution.velocity, float(times[0]))
    a0 = project_Pr(basis, r, m_op, u0)
    forcing = project_forcing(basis, r, m_op, solution, times, space)
    return ROMOperators(r=r, s_r=rom_stiffness(basis, r), tensor=tensor,
                        forcing=forcing, a0=a0)


@dataclass(frozen=True)
class LROMConfig:
    r: int
    delta: float
    dt: float
    t_final: float = 1.0
    nu: float = 1e-3
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    linearization: str = "picard-implicit"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.picard_tol <= 0:
            raise ValueError("picard_tol must be positive")
        steps = round(self.t_final / self.dt)
        if steps < 0 or abs(self.t_final / self.dt - steps) > 1e-9:
            raise ValueError("t_final must be an integer multiple of dt")
        if self.linearization not in ("picard-implicit", "semi-implicit"):
            raise ValueError(f"unknown linearization {self.linearization!r}")

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.dt)


@dataclass
class ROMTrajectory:
    states: np.ndarray        # (M+1, r)
    iter_counts: np.ndarray   # (M,) Picard iterations per step
    dt: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _advection_matrix(tensor: np.ndarray, abar: np.ndarray) -> np.ndarray:
    # B_mj = sum_i abar_i T_ijm
    return np.tensordot(abar, tensor, axes=(0, 0)).T


def _step(ops: ROMOperators, filt: FilterOperator | None, cfg: LROMConfig,
          a_k: np.ndarray, f_next: np.ndarray):
    a_k = np.asarray(a_k, dtype=float)
    if not np.all(np.isfinite(a_k)):
        raise StepDivergenceError("non-finite state entering step")
    dt, nu = cfg.dt, cfg.nu
    core = np.eye(ops.r) / dt + nu * ops.s_r.matrix
    rhs = a_k / dt + f_next
    denom = np.linalg.norm(rhs)
    if denom == 0.0:
        denom = 1.0

    def smooth(a):
        return apply_filter(filt, a) if filt is not None else a

    if cfg.linearization == "semi-implicit":
        a_new = np.linalg.solve(core + _advection_matrix(ops.tensor, smooth(a_k)), rhs)
        if not np.all(np.isfinite(a_new)):
            raise StepDivergenceError("semi-implicit solve produced non-finite state")
        return a_new, 1

    a = a_k
    residual = np.inf
    for it in range(1, cfg.picard_max_iters + 1):
        a_new = np.linalg.solve(core + _advection_matrix(ops.tensor, smooth(a)), rhs)
        res_vec = core @ a_new + _advection_matrix(ops.tensor, smooth(a_new)) @ a_new - rhs
        residual = np.linalg.norm(res_vec) / denom
        if not np.isfinite(residual):
            raise StepDivergenceError("non-finite Picard residual",
                                      residual=residual)
        a = a_new
        if residual <= cfg.picard_tol:
            return a, it
    raise StepDivergenceError(
        f"Picard failed to converge in {cfg.picard_max_iters} iterations "
        f"(relative residual {residual:.3e})", residual=residual)


def lrom_step(ops: ROMOperators, filt: FilterOperator, cfg: LROMConfig,
              a_k: np.ndarray, f_next: np.ndarray):
    """One implicit Leray-ROM step; returns (a_next, picard_iterations)."""
    return _step(ops, filt, cfg, a_k, f_next)


def grom_step(ops: ROMOperators, cfg: LROMConfig, a_k: np.ndarray,
              f_next: np.ndarray):
    """One implicit Galerkin-ROM step (unfiltered advecting field)."""
    return _step(ops, None, cfg, a_k, f_next)


def run(ops: ROMOperators, filt: FilterOperator | None,
        cfg: LROMConfig) -> ROMTrajectory:
    """March from the projected initial condition to t_final."""
    m = cfg.n_steps
    if ops.forcing.shape[0] < m + 1:
        raise ValueError("forcing series shorter than the number of time levels")
    states = np.empty((m + 1, ops.r))
    iters = np.zeros(m, dtype=int)
    states[0] = ops.a0
    blowup = 1e6 * (1.0 + np.linalg.norm(ops.a0))
    for k in range(m):
        try:
            a_next, it = _step(ops, filt, cfg, states[k], ops.forcing[k + 1])
        except StepDivergenceError as exc:
            exc.step = k
            raise
        if not np.all(np.isfinite(a_next)) or np.linalg.norm(a_next) > blowup:
            raise StepDivergenceError(
                f"trajectory blow-up at step {k + 1}", step=k)
        states[k + 1] = a_next
        iters[k] = it
    return ROMTrajectory(states=states, iter_counts=iters, dt=cfg.dt)


@dataclass(frozen=True)
class StabilityReport:
    bound_series: np.ndarray  # value of the stability quantity at each M~
    max_bound: float
    bounded: bool


def stability_check(traj: ROMTrajectory, ops: ROMOperators,
                    cfg: LROMConfig) -> StabilityReport:
    """Discrete energy ledger:
    q(M~) = |a_{M~}|^2 + dt * sum_{k<M~} a_{k+1}^T S_r a_{k+1}.
    """
    a = traj.states
    grad_energy = np.einsum("ki,ij,kj->k", a[1:], ops.s_r.matrix, a[1:])
    cum = cfg.dt * np.concatenate([[0.0], np.cumsum(grad_energy)])
    series = np.sum(a * a, axis=1) + cum
    max_bound = float(series.max()) if series.size else 0.0
    return StabilityReport(bound_series=series, max_bound=max_bound,
                           bounded=bool(np.all(np.isfinite(series))))
