"""Time evolution under the non-Hermitian model and observable trajectories.

Raw states carry the decay (no renormalization during propagation);
observables are evaluated on unit-normalized copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import StateIndexer
from .observables import StateVector, density_profile, mean_position
from .operators import OperatorMatrix
from .spectral import condition_number, eigensystem

COND_THRESHOLD = 1e8
DEFAULT_INTERNAL_DT = 0.05


@dataclass
class Trajectory:
    basis: StateIndexer
    times: np.ndarray
    states: np.ndarray          # (dim, n_times), raw (decaying) amplitudes
    method_used: str
    norms: np.ndarray = field(init=False)

    def __post_init__(self):
        self.norms = np.linalg.norm(self.states, axis=0) ** 2

    def raw_state(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def normalized_state(self, i: int) -> StateVector:
        return StateVector.normalized(self.basis, self.states[:, i])


def _validate_times(times) -> np.ndarray:
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or len(ts) == 0:
        raise ValueError("times must be a non-empty 1-d grid")
    if abs(ts[0]) > 1e-12:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("times must be strictly ascending")
    return ts


def propagate(H: OperatorMatrix, psi0: StateVector, times, method: str = "eig",
              cond_threshold: float = COND_THRESHOLD,
              internal_dt: float = DEFAULT_INTERNAL_DT,
              force: bool = False) -> Trajectory:
    """Evolve exp(-i H tau) psi0 over the time grid.

    method='eig' diagonalizes once and propagates spectrally while cond(V)
    stays below the threshold, otherwise it falls back to repeated
    scaling-and-squaring steps of size ``internal_dt`` (method='expm-step'
    selects that path directly; force=True turns the fallback into an error).
    """
    ts = _validate_times(times)
    if method not in ("eig", "expm-step"):
        raise ValueError(f"method must be 'eig' or 'expm-step', got {method!r}")
    A = H.toarray()
    psi = np.asarray(psi0.amplitudes, dtype=complex)
    used = method
    if method == "eig":
        es = eigensystem(H)
        cond = condition_number(es)
        if cond >= cond_threshold:
            if force:
                raise ArithmeticError(
                    f"cond(V) = {cond:.3e} exceeds threshold {cond_threshold:.1e}; "
                    "spectral propagation refused")
            used = "expm-step"
        else:
            coeff = np.linalg.solve(es.right, psi)
            phases = np.exp(-1j * np.outer(es.eigenvalues, ts))
            states = es.right @ (phases * coeff[:, None])
            _check_finite(states, ts)
            return Trajectory(basis=psi0.basis, times=ts, states=states, method_used="eig")
    # expm-step path
    U = sla.expm(-1j * A * internal_dt)
    partial: dict[float, np.ndarray] = {}
    states = np.empty((len(psi), len(ts)), dtype=complex)
    cur = psi.copy()
    t_cur = 0.0
    for idx, t in enumerate(ts):
        span = t - t_cur
        nfull = int(np.floor(span / internal_dt + 1e-9))
        for _ in range(nfull):
            cur = U @ cur
        rem = span - nfull * internal_dt
        if rem > 1e-12:
            key = round(rem, 12)
            if key not in partial:
                partial[key] = sla.expm(-1j * A * rem)
            cur = partial[key] @ cur
        t_cur = t
        if not np.all(np.isfinite(cur)):
            raise ArithmeticError(f"nonfinite amplitudes at tau = {t}")
        states[:, idx] = cur
    return Trajectory(basis=psi0.basis, times=ts, states=states, method_used=used)


def _check_finite(states: np.ndarray, ts: np.ndarray):
    bad = ~np.all(np.isfinite(states), axis=0)
    if np.any(bad):
        raise ArithmeticError(f"nonfinite amplitudes at tau = {ts[bad][0]}")


@dataclass
class ObservableSeries:
    times: np.ndarray
    norms: np.ndarray
    x_up: np.ndarray
    x_dn: np.ndarray
    density_up: np.ndarray      # (n_times, L)
    density_dn: np.ndarray


def trajectory_observables(traj: Trajectory) -> ObservableSeries:
    """Mean positions, densities, and norms along a trajectory; observables
    are taken on the normalized state at each time."""
    n = len(traj.times)
    L = traj.basis.L
    x_up = np.empty(n)
    x_dn = np.empty(n)
    dup = np.empty((n, L))
    ddn = np.empty((n, L))
    for i in range(n):
        psi = traj.normalized_state(i)
        dup[i] = density_profile(psi, "up")
        ddn[i] = density_profile(psi, "dn")
        x_up[i] = mean_position(psi, "up")
        x_dn[i] = mean_position(psi, "dn")
    return ObservableSeries(times=traj.times, norms=traj.norms.copy(),
                            x_up=x_up, x_dn=x_dn, density_up=dup, density_dn=ddn)


def time_averaged_density(traj: Trajectory, window: tuple[float, float],
                          species: str) -> np.ndarray:
    """Mean normalized-state density profile over grid points in [ta, tb]."""
    ta, tb = window
    mask = (traj.times >= ta - 1e-12) & (traj.times <= tb + 1e-12)
    if not np.any(mask):
        raise ValueError(f"no grid points fall inside the window [{ta}, {tb}]")
    idx = np.flatnonzero(mask)
    acc = np.zeros(traj.basis.L)
    for i in idx:
        acc += density_profile(traj.normalized_state(i), species)
    return acc / len(idx)
