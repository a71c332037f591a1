"""Model parameters for the two-species dissipative SSH chain with a
density-dependent gauge hop.

Site convention: sites are numbered 1..L, cells j=1..L/2 hold the pair
(2j-1, 2j).  Intra-cell hopping amplitude is ``u``, inter-cell is ``v``,
per species.  Loss ``gamma`` acts on even sites, the gauge hop strength
is ``t`` (the energy unit of the model is 2t=1, i.e. t=0.5 by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace, field

import numpy as np

OPEN = "open"
PERIODIC = "periodic"
_BCS = (OPEN, PERIODIC)


@dataclass(frozen=True)
class ModelParams:
    L: int
    u_up: float = 0.0
    u_dn: float = 0.0
    v_up: float = 0.0
    v_dn: float = 0.0
    gamma_up: float = 0.0
    gamma_dn: float = 0.0
    t: float = 0.5
    bc_up: str = OPEN
    bc_dn: str = OPEN
    disorder_lambda: float = 0.0
    disorder_seed: int = 0
    disorder_shared: bool = False
    nrh_strength: float = 0.0
    include_dgf: bool = True

    def __post_init__(self):
        if self.L % 2 != 0 or self.L < 4:
            raise ValueError(f"L must be even and >= 4, got {self.L}")
        for name in ("u_up", "u_dn", "v_up", "v_dn", "gamma_up", "gamma_dn",
                     "t", "disorder_lambda", "nrh_strength"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")
        if self.gamma_up < 0 or self.gamma_dn < 0:
            raise ValueError("loss rates must be >= 0")
        if self.include_dgf and not self.t > 0:
            raise ValueError("t must be > 0 when the gauge hop is enabled")
        if self.disorder_lambda < 0:
            raise ValueError("disorder strength must be >= 0")
        if self.nrh_strength < 0:
            raise ValueError("nrh_strength must be >= 0")
        if self.bc_up not in _BCS or self.bc_dn not in _BCS:
            raise ValueError(f"boundary conditions must be one of {_BCS}")

    # -- per-species accessors ------------------------------------------------

    def u(self, species: str) -> float:
        return self.u_up if species == "up" else self.u_dn

    def v(self, species: str) -> float:
        return self.v_up if species == "up" else self.v_dn

    def gamma(self, species: str) -> float:
        return self.gamma_up if species == "up" else self.gamma_dn

    def bc(self, species: str) -> str:
        return self.bc_up if species == "up" else self.bc_dn

    def replace(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)

    # -- angle parametrization ------------------------------------------------

    def theta(self, species: str) -> float:
        """Hopping angle arg(u + i v) of one species."""
        return math.atan2(self.v(species), self.u(species))

    def r(self, species: str) -> float:
        """Hopping magnitude |u + i v| of one species."""
        return math.hypot(self.u(species), self.v(species))

    @staticmethod
    def from_angles(L: int, theta_up: float, theta_dn: float,
                    r: float = math.sqrt(2.0), **kwargs) -> "ModelParams":
        """Build parameters from (theta, r) pairs: u = r cos(theta), v = r sin(theta)."""
        return ModelParams(
            L=L,
            u_up=r * math.cos(theta_up), v_up=r * math.sin(theta_up),
            u_dn=r * math.cos(theta_dn), v_dn=r * math.sin(theta_dn),
            **kwargs,
        )

    def disorder_fields(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-site disorder drawn uniformly from [-1, 1].

        One reproducible array per (seed, L); species share the draw only
        when ``disorder_shared`` is set.  The returned arrays are the bare
        epsilon values; the Hamiltonian scales them by ``disorder_lambda``.
        """
        rng = np.random.default_rng(self.disorder_seed)
        eps_up = rng.uniform(-1.0, 1.0, self.L)
        eps_dn = eps_up if self.disorder_shared else rng.uniform(-1.0, 1.0, self.L)
        return eps_up, eps_dn


@dataclass(frozen=True)
class GaugeTransform:
    """Diagonal +/-1 unitary flipping the sign of inter-cell hops.

    ``signs_up[j-1]``/``signs_dn[j-1]`` hold the sign applied to site j of
    each species; ``momentum_shifted`` lists species whose momentum labels
    are relabeled k -> k + pi by the transform.
    """
    signs_up: tuple[int, ...]
    signs_dn: tuple[int, ...]
    momentum_shifted: tuple[str, ...]

    def site_sign(self, species: str, j: int) -> int:
        signs = self.signs_up if species == "up" else self.signs_dn
        return signs[j - 1]


def _cell_staggered_signs(L: int) -> tuple[int, ...]:
    # cell j (sites 2j-1, 2j) carries (-1)^(j-1)
    return tuple(1 if ((s - 1) // 2) % 2 == 0 else -1 for s in range(1, L + 1))


def apply_gauge_transform(params: ModelParams) -> tuple[ModelParams, GaugeTransform]:
    """Map v_sigma -> |v_sigma| via a cell-staggered sign flip.

    Returns the transformed parameters and the diagonal unitary U with
    U H(params) U^-1 = H(params').  Under periodic boundaries the identity
    requires L % 4 == 0 for a flipped species (odd cell count cannot absorb
    the boundary sign).
    """
    L = params.L
    identity = tuple([1] * L)
    staggered = _cell_staggered_signs(L)
    new = {}
    shifted = []
    signs = {"up": identity, "dn": identity}
    for sp in ("up", "dn"):
        v = params.v(sp)
        if v < 0:
            new[f"v_{sp}"] = -v
            signs[sp] = staggered
            shifted.append(sp)
            if params.bc(sp) == PERIODIC and L % 4 != 0:
                raise ValueError(
                    "gauge transform with periodic boundaries needs L % 4 == 0 "
                    f"(got L={L} for species {sp})")
    return params.replace(**new), GaugeTransform(
        signs_up=signs["up"], signs_dn=signs["dn"],
        momentum_shifted=tuple(shifted))
