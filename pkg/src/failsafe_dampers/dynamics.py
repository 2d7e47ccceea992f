"""Newmark time integration and ground-motion handling."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .errors import InputError
from .model import StructuralModel

STANDARD_GRAVITY = 9.80665

_SUPPORTED_BETAS = (0.25, 1.0 / 6.0)


@dataclass(frozen=True)
class GroundMotion:
    """Uniformly sampled ground acceleration record.

    ``accel`` holds N+1 samples in m/s^2 at spacing ``dt``; ``scale`` is an
    amplitude multiplier applied when the record is used.
    """

    name: str
    dt: float
    accel: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        accel = np.atleast_1d(np.asarray(self.accel, dtype=float))
        if accel.ndim != 1 or accel.size < 2:
            raise ValueError("record needs at least two acceleration samples")
        if not np.all(np.isfinite(accel)):
            raise ValueError(f"record '{self.name}' contains non-finite samples")
        accel.setflags(write=False)
        object.__setattr__(self, "accel", accel)

    @property
    def n_steps(self) -> int:
        return self.accel.size - 1

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.accel.size) * self.dt

    @property
    def scaled_accel(self) -> np.ndarray:
        return self.scale * self.accel

    def rescaled(self, scale: float) -> "GroundMotion":
        return GroundMotion(name=self.name, dt=self.dt, accel=self.accel, scale=scale)


@dataclass(frozen=True)
class ResponseHistory:
    """Displacement, velocity, and acceleration trajectories.

    Rows are time samples (N+1 of them), columns degrees of freedom; all
    responses are relative to the ground. Row 0 equals the prescribed
    initial conditions. ``beta``/``gamma`` record the integrator settings
    the trajectories satisfy.
    """

    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    dt: float
    u0: np.ndarray
    v0: np.ndarray
    beta: float = 0.25
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("u", "v", "a"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.u.shape == self.v.shape == self.a.shape):
            raise ValueError("u, v, a must share one shape")
        u0 = np.asarray(self.u0, dtype=float)
        v0 = np.asarray(self.v0, dtype=float)
        if not (np.array_equal(self.u[0], u0) and np.array_equal(self.v[0], v0)):
            raise ValueError("row 0 of the history must equal the initial conditions")
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "v0", v0)

    @property
    def n_steps(self) -> int:
        return self.u.shape[0] - 1

    @property
    def n_dof(self) -> int:
        return self.u.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.u.shape[0]) * self.dt


def _integrate(M, C, K, load, dt, u0, v0, beta, gamma):
    """Core Newmark recurrence on raw matrices. ``load`` is (N+1, n)."""
    n = M.shape[0]
    n_samples = load.shape[0]
    c0 = 1.0 / (beta * dt * dt)
    c1 = gamma / (beta * dt)
    c2 = 1.0 / (beta * dt)
    c3 = 1.0 / (2.0 * beta) - 1.0
    c4 = gamma / beta - 1.0
    c5 = dt * (gamma / (2.0 * beta) - 1.0)

    K_eff = K + c0 * M + c1 * C
    try:
        factor = la.cho_factor(K_eff, lower=True)
    except la.LinAlgError:
        raise la.LinAlgError(
            "effective stiffness matrix is singular or indefinite"
        ) from None

    U = np.empty((n_samples, n))
    V = np.empty((n_samples, n))
    A = np.empty((n_samples, n))
    U[0] = u0
    V[0] = v0
    A[0] = np.linalg.solve(M, load[0] - C @ v0 - K @ u0)

    # Inputs were validated by the caller; skipping the per-step finite
    # checks roughly halves the cost of long runs on small systems.
    cho_solve = la.cho_solve
    u, v, a = U[0], V[0], A[0]
    for i in range(n_samples - 1):
        rhs = load[i + 1] + M @ (c0 * u + c2 * v + c3 * a) + C @ (c1 * u + c4 * v + c5 * a)
        u_next = cho_solve(factor, rhs, check_finite=False)
        a_next = c0 * (u_next - u) - c2 * v - c3 * a
        v_next = v + dt * ((1.0 - gamma) * a + gamma * a_next)
        U[i + 1], V[i + 1], A[i + 1] = u_next, v_next, a_next
        u, v, a = u_next, v_next, a_next
    return U, V, A


def newmark_solve(
    model: StructuralModel,
    C_d: np.ndarray,
    gm: GroundMotion,
    *,
    beta: float = 0.25,
    gamma: float = 0.5,
    u0: np.ndarray | None = None,
    v0: np.ndarray | None = None,
) -> ResponseHistory:
    """Integrate the damped equations of motion under a ground motion.

    Parameters
    ----------
    model : StructuralModel
        Supplies mass, stiffness, inherent damping, and influence vector.
    C_d : (n, n) array
        Added damping matrix, symmetric positive semidefinite.
    gm : GroundMotion
        Record integrated at its native time step.
    beta, gamma : float
        Newmark parameters. beta=1/4 (average acceleration, unconditionally
        stable, the default) and beta=1/6 (linear acceleration) are
        supported, both with gamma=1/2.
    u0, v0 : arrays, optional
        Initial displacement and velocity; zero when omitted.

    The effective stiffness is factorized once and reused for every step,
    so each step satisfies the discrete equilibrium to solver precision.
    """
    if not any(abs(beta - b) < 1e-12 for b in _SUPPORTED_BETAS):
        raise ValueError(f"beta must be 1/4 or 1/6, got {beta}")
    if abs(gamma - 0.5) > 1e-12:
        raise ValueError(f"gamma must be 1/2, got {gamma}")
    n = model.n_dof
    C_d = np.asarray(C_d, dtype=float)
    if C_d.shape != (n, n):
        raise ValueError(f"C_d shape {C_d.shape} does not match {n} DOFs")
    scale = np.abs(C_d).max()
    if scale > 0 and np.abs(C_d - C_d.T).max() > 1e-8 * scale:
        raise ValueError("C_d must be symmetric")

    u0 = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float)
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
    if u0.shape != (n,) or v0.shape != (n,):
        raise ValueError("initial conditions must match the DOF count")

    C = model.inherent_damping + C_d
    load = -np.outer(gm.scaled_accel, model.mass @ model.influence)
    U, V, A = _integrate(
        model.mass, C, model.stiffness, load, gm.dt, u0, v0, beta, gamma
    )
    return ResponseHistory(u=U, v=V, a=A, dt=gm.dt, u0=u0, v0=v0, beta=beta, gamma=gamma)


def equilibrium_residual(
    model: StructuralModel,
    C_d: np.ndarray,
    gm: GroundMotion,
    history: ResponseHistory,
) -> float:
    """Worst relative residual of M a + C v + K u = load over all steps."""
    C = model.inherent_damping + np.asarray(C_d, dtype=float)
    load = -np.outer(gm.scaled_accel, model.mass @ model.influence)
    res = (
        history.a @ model.mass.T
        + history.v @ C.T
        + history.u @ model.stiffness.T
        - load
    )
    res_norm = np.linalg.norm(res, axis=1).max()
    ref = max(
        np.linalg.norm(load, axis=1).max(),
        np.linalg.norm(history.u @ model.stiffness.T, axis=1).max(),
        np.linalg.norm(history.a @ model.mass.T, axis=1).max(),
        1e-300,
    )
    return float(res_norm / ref)


def spectral_displacement(gm: GroundMotion, period: float, zeta: float) -> float:
    """Peak displacement of a unit-mass oscillator under the record.

    Integrates a single-DOF system with natural period ``period`` and
    damping ratio ``zeta`` using the average-acceleration scheme and
    returns max |u(t)|. Used to rank records by severity.
    """
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    w = 2.0 * np.pi / period
    M = np.array([[1.0]])
    C = np.array([[2.0 * zeta * w]])
    K = np.array([[w * w]])
    load = -gm.scaled_accel[:, None]
    U, _, _ = _integrate(M, C, K, load, gm.dt, np.zeros(1), np.zeros(1), 0.25, 0.5)
    return float(np.abs(U).max())


def select_dominant_record(
    records: list[GroundMotion], period: float, zeta: float = 0.05
) -> GroundMotion:
    """Record with the largest spectral displacement at the given period."""
    if not records:
        raise ValueError("record ensemble is empty")
    sd = [spectral_displacement(gm, period, zeta) for gm in records]
    return records[int(np.argmax(sd))]


_DT_HEADER = re.compile(r"^\s*dt\s*=\s*([0-9eE+.\-]+)\s*$")


def load_ground_motion(
    path: str | Path,
    *,
    units: str = "m/s2",
    scale: float = 1.0,
    name: str | None = None,
) -> GroundMotion:
    """Parse a ground-motion file.

    Two layouts are accepted: two whitespace-separated columns of time and
    acceleration with uniform spacing, or a ``dt=<seconds>`` header line
    followed by one acceleration per line. Lines starting with ``#`` or
    ``%`` are comments. ``units="g"`` converts samples to m/s^2.
    """
    path = Path(path)
    if units not in ("m/s2", "g"):
        raise InputError(f"unknown acceleration units '{units}' (use m/s2 or g)")
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read record file {path}: {exc}") from exc

    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.lstrip().startswith(("#", "%"))
    ]
    if not lines:
        raise InputError(f"record file {path} holds no data")

    header = _DT_HEADER.match(lines[0])
    if header:
        dt = float(header.group(1))
        try:
            accel = np.array([float(ln.split()[0]) for ln in lines[1:]])
        except ValueError as exc:
            raise InputError(f"bad acceleration sample in {path}: {exc}") from exc
    else:
        rows = []
        for i, ln in enumerate(lines):
            parts = ln.split()
            if len(parts) < 2:
                raise InputError(
                    f"{path}, data line {i + 1}: expected 'time accel' columns"
                )
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise InputError(f"{path}, data line {i + 1}: {exc}") from exc
        t = np.array([r[0] for r in rows])
        accel = np.array([r[1] for r in rows])
        if t.size < 2:
            raise InputError(f"record file {path} needs at least two samples")
        steps = np.diff(t)
        dt = float(steps[0])
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-6 * max(dt, 1e-12)):
            raise InputError(f"record file {path} is not uniformly sampled")

    if units == "g":
        accel = accel * STANDARD_GRAVITY
    try:
        return GroundMotion(
            name=name or path.stem, dt=dt, accel=accel, scale=scale
        )
    except ValueError as exc:
        raise InputError(f"record file {path}: {exc}") from exc
