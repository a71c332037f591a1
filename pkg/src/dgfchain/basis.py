"""Occupation bases for one or two particles per species.

A configuration is a sorted tuple of occupied sites (1-based).  Bosonic
pairs may repeat a site, fermionic pairs are strictly increasing.  The
combined basis is ordered lexicographically: the up-species configuration
is the major index, the down-species the minor one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

BOSON = "boson"
FERMION = "fermion"
_STATS = (BOSON, FERMION)


@dataclass(frozen=True)
class BasisSpec:
    n_up: int = 1
    n_dn: int = 1
    stat_up: str = BOSON
    stat_dn: str = BOSON

    def __post_init__(self):
        if self.n_up not in (1, 2) or self.n_dn not in (1, 2):
            raise ValueError("particle counts per species must be 1 or 2")
        if self.stat_up not in _STATS or self.stat_dn not in _STATS:
            raise ValueError(f"statistics must be one of {_STATS}")

    def n(self, species: str) -> int:
        return self.n_up if species == "up" else self.n_dn

    def stat(self, species: str) -> str:
        return self.stat_up if species == "up" else self.stat_dn


def species_dimension(n: int, stat: str, L: int) -> int:
    if n == 1:
        return L
    return L * (L + 1) // 2 if stat == BOSON else L * (L - 1) // 2


def _species_configs(n: int, stat: str, L: int) -> tuple[tuple[int, ...], ...]:
    sites = range(1, L + 1)
    if n == 1:
        return tuple((s,) for s in sites)
    if stat == BOSON:
        return tuple(itertools.combinations_with_replacement(sites, 2))
    return tuple(itertools.combinations(sites, 2))


class StateIndexer:
    """Bijection between two-species configurations and dense indices."""

    def __init__(self, spec: BasisSpec, L: int):
        if L % 2 != 0 or L < 4:
            raise ValueError(f"L must be even and >= 4, got {L}")
        self.spec = spec
        self.L = L
        self.up_configs = _species_configs(spec.n_up, spec.stat_up, L)
        self.dn_configs = _species_configs(spec.n_dn, spec.stat_dn, L)
        self.dim_up = len(self.up_configs)
        self.dim_dn = len(self.dn_configs)
        self.dim = self.dim_up * self.dim_dn
        self._up_index = {c: i for i, c in enumerate(self.up_configs)}
        self._dn_index = {c: i for i, c in enumerate(self.dn_configs)}
        self._occ_cache: dict[str, np.ndarray] = {}

    def index(self, up: tuple[int, ...], dn: tuple[int, ...]) -> int:
        return self._up_index[up] * self.dim_dn + self._dn_index[dn]

    def config(self, i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        a, b = divmod(i, self.dim_dn)
        return self.up_configs[a], self.dn_configs[b]

    def species_index(self, species: str, config: tuple[int, ...]) -> int:
        table = self._up_index if species == "up" else self._dn_index
        return table[config]

    def occupation_counts(self, species: str) -> np.ndarray:
        """(dim, L) matrix of per-site occupation numbers for one species."""
        if species not in self._occ_cache:
            if species == "up":
                per = self._species_counts(self.up_configs)
                full = np.repeat(per, self.dim_dn, axis=0)
            else:
                per = self._species_counts(self.dn_configs)
                full = np.tile(per, (self.dim_up, 1))
            full.setflags(write=False)
            self._occ_cache[species] = full
        return self._occ_cache[species]

    def _species_counts(self, configs) -> np.ndarray:
        out = np.zeros((len(configs), self.L), dtype=np.float64)
        for i, cfg in enumerate(configs):
            for s in cfg:
                out[i, s - 1] += 1.0
        return out


def build_basis(spec: BasisSpec, L: int) -> StateIndexer:
    """Enumerate the combined basis; dimension follows the counting formulas
    L^2, (L^2+L)^2/4, (L^2-L)^2/4, or (L^2+L)(L^2-L)/4 depending on counts
    and statistics."""
    return StateIndexer(spec, L)
