"""Second-quantized operator assembly on the two-species occupation basis.

All matrices are built as sparse COO triplets and stored in CSR form.
Fermionic hops carry the sign from counting occupied sites between the
annihilation and creation positions within the species; the two species
commute (non-identical particles), so no inter-species sign arises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import BOSON, FERMION, StateIndexer
from .params import PERIODIC, ModelParams

HERMITIAN = "hermitian"
ANTI_HERMITIAN = "anti-hermitian"
GENERAL = "general"


@dataclass
class OperatorMatrix:
    """Complex square matrix with a Hermiticity tag."""

    dim: int
    matrix: sp.csr_matrix
    kind: str = GENERAL

    @staticmethod
    def from_triplets(dim, rows, cols, vals) -> "OperatorMatrix":
        m = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
        m = m.tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        op = OperatorMatrix(dim=dim, matrix=m)
        op.kind = op._classify()
        return op

    @staticmethod
    def zeros(dim) -> "OperatorMatrix":
        return OperatorMatrix(dim=dim, matrix=sp.csr_matrix((dim, dim), dtype=complex),
                              kind=HERMITIAN)

    def _classify(self, tol: float = 1e-14) -> str:
        scale = max(1.0, self.max_abs())
        anti = self.matrix - self.matrix.getH()
        if _max_abs(anti) <= tol * scale:
            return HERMITIAN
        herm = self.matrix + self.matrix.getH()
        if _max_abs(herm) <= tol * scale:
            return ANTI_HERMITIAN
        return GENERAL

    def entries(self):
        coo = self.matrix.tocoo()
        return zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def max_abs(self) -> float:
        return _max_abs(self.matrix)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        out = OperatorMatrix(dim=self.dim, matrix=(self.matrix + other.matrix).tocsr())
        out.kind = out._classify()
        return out


def _max_abs(m: sp.spmatrix) -> float:
    return float(np.abs(m.data).max()) if m.nnz else 0.0


# ---------------------------------------------------------------------------
# single-species ladder action


def _hop_on_config(cfg: tuple[int, ...], p: int, q: int, stat: str):
    """Apply a†_p a_q to one species configuration.

    Returns (new_config, factor) or None when the term annihilates the state.
    """
    if stat == FERMION:
        if q not in cfg:
            return None
        if p != q and p in cfg:
            return None
        pos = cfg.index(q)
        sign = -1 if pos % 2 else 1
        rest = cfg[:pos] + cfg[pos + 1:]
        before = sum(1 for s in rest if s < p)
        if before % 2:
            sign = -sign
        new = tuple(sorted(rest + (p,)))
        return new, float(sign)
    # bosons (n=1 reduces to the same rule with unit factors)
    nq = cfg.count(q)
    if nq == 0:
        return None
    rest = list(cfg)
    rest.remove(q)
    np_after = rest.count(p)
    new = tuple(sorted(rest + [p]))
    return new, math.sqrt(nq * (np_after + 1))


def _species_hops(basis: StateIndexer, species: str, p: int, q: int):
    """All (src_species_idx, dst_species_idx, factor) for a†_p a_q."""
    configs = basis.up_configs if species == "up" else basis.dn_configs
    stat = basis.spec.stat(species)
    out = []
    for i, cfg in enumerate(configs):
        res = _hop_on_config(cfg, p, q, stat)
        if res is None:
            continue
        new, fac = res
        out.append((i, basis.species_index(species, new), fac))
    return out


class _Builder:
    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add_diagonal(self, diag: np.ndarray):
        idx = np.arange(self.dim)
        self.rows.append(idx)
        self.cols.append(idx)
        self.vals.append(np.asarray(diag, dtype=complex))

    def add_hop(self, basis: StateIndexer, species: str, p: int, q: int,
                amp: complex, weight: np.ndarray | None = None):
        """amp * a†_p a_q on ``species``; ``weight`` is an optional diagonal
        factor indexed by the other species' configuration."""
        d_dn = basis.dim_dn
        for src, dst, fac in _species_hops(basis, species, p, q):
            if species == "up":
                other = np.arange(d_dn)
                rows = dst * d_dn + other
                cols = src * d_dn + other
            else:
                other = np.arange(basis.dim_up)
                rows = other * d_dn + dst
                cols = other * d_dn + src
            vals = np.full(other.shape, amp * fac, dtype=complex)
            if weight is not None:
                vals = vals * weight
            self.rows.append(rows)
            self.cols.append(cols)
            self.vals.append(vals)

    def build(self) -> OperatorMatrix:
        if not self.rows:
            return OperatorMatrix.zeros(self.dim)
        return OperatorMatrix.from_triplets(
            self.dim,
            np.concatenate(self.rows),
            np.concatenate(self.cols),
            np.concatenate(self.vals),
        )


def _species_site_counts(basis: StateIndexer, species: str) -> np.ndarray:
    """(dim_species, L) occupation counts of one species' own configs."""
    configs = basis.up_configs if species == "up" else basis.dn_configs
    out = np.zeros((len(configs), basis.L), dtype=np.float64)
    for i, cfg in enumerate(configs):
        for s in cfg:
            out[i, s - 1] += 1.0
    return out


# ---------------------------------------------------------------------------
# model pieces


def _check_compatible(params: ModelParams, basis: StateIndexer):
    if params.L != basis.L:
        raise ValueError(f"params.L={params.L} does not match basis.L={basis.L}")


def build_species_hamiltonian(params: ModelParams, basis: StateIndexer,
                              species: str) -> OperatorMatrix:
    """Hermitian staggered-hopping chain of one species."""
    _check_compatible(params, basis)
    L = params.L
    u, v = params.u(species), params.v(species)
    b = _Builder(basis.dim)
    for j in range(1, L // 2 + 1):
        o, e = 2 * j - 1, 2 * j
        if u != 0.0:
            b.add_hop(basis, species, o, e, u)
            b.add_hop(basis, species, e, o, u)
        nxt = e + 1
        if nxt > L:
            if params.bc(species) != PERIODIC:
                continue
            nxt = 1
        if v != 0.0:
            b.add_hop(basis, species, e, nxt, v)
            b.add_hop(basis, species, nxt, e, v)
    return b.build()


def build_loss(params: ModelParams, basis: StateIndexer) -> OperatorMatrix:
    """-i gamma_sigma * (occupation of even sites), anti-Hermitian diagonal."""
    _check_compatible(params, basis)
    even = slice(1, basis.L, 2)
    diag = (-1j * params.gamma_up * basis.occupation_counts("up")[:, even].sum(axis=1)
            - 1j * params.gamma_dn * basis.occupation_counts("dn")[:, even].sum(axis=1))
    b = _Builder(basis.dim)
    b.add_diagonal(diag)
    return b.build()


def build_dgf(params: ModelParams, basis: StateIndexer) -> OperatorMatrix:
    """Density-dependent gauge hop: t (n_{other,2j-1} - n_{other,2j}) moves the
    partner species within the cell; the Hermitian conjugate of the whole sum
    enters with a minus sign."""
    _check_compatible(params, basis)
    t = params.t
    counts = {"up": _species_site_counts(basis, "up"),
              "dn": _species_site_counts(basis, "dn")}
    b = _Builder(basis.dim)
    for species, other in (("up", "dn"), ("dn", "up")):
        w_all = counts[other]
        for j in range(1, params.L // 2 + 1):
            o, e = 2 * j - 1, 2 * j
            w = w_all[:, o - 1] - w_all[:, e - 1]
            b.add_hop(basis, species, o, e, +t, weight=w)
            b.add_hop(basis, species, e, o, -t, weight=w)
    return b.build()


def build_nrh(params: ModelParams, basis: StateIndexer) -> OperatorMatrix:
    """Uniform intra-cell non-reciprocal hop used as a comparison model."""
    _check_compatible(params, basis)
    s = params.nrh_strength
    b = _Builder(basis.dim)
    for species in ("up", "dn"):
        for j in range(1, params.L // 2 + 1):
            o, e = 2 * j - 1, 2 * j
            b.add_hop(basis, species, o, e, +s)
            b.add_hop(basis, species, e, o, -s)
    return b.build()


def build_disorder(params: ModelParams, basis: StateIndexer) -> OperatorMatrix:
    """lambda * sum of eps_{sigma,j} n_{sigma,j} with eps drawn from the seed."""
    _check_compatible(params, basis)
    eps_up, eps_dn = params.disorder_fields()
    lam = params.disorder_lambda
    diag = (lam * basis.occupation_counts("up") @ eps_up
            + lam * basis.occupation_counts("dn") @ eps_dn)
    b = _Builder(basis.dim)
    b.add_diagonal(diag.astype(complex))
    return b.build()


def build_hamiltonian(params: ModelParams, basis: StateIndexer) -> OperatorMatrix:
    """Full model: both species' chains, even-site loss, the gauge hop, and
    the optional disorder and non-reciprocal comparison terms."""
    _check_compatible(params, basis)
    total = build_species_hamiltonian(params, basis, "up").matrix
    total = total + build_species_hamiltonian(params, basis, "dn").matrix
    if params.gamma_up != 0.0 or params.gamma_dn != 0.0:
        total = total + build_loss(params, basis).matrix
    if params.include_dgf:
        total = total + build_dgf(params, basis).matrix
    if params.disorder_lambda != 0.0:
        total = total + build_disorder(params, basis).matrix
    if params.nrh_strength != 0.0:
        total = total + build_nrh(params, basis).matrix
    out = OperatorMatrix(dim=basis.dim, matrix=total.tocsr())
    out.matrix.sum_duplicates()
    out.kind = out._classify()
    return out


def build_number_operator(species: str, j: int, basis: StateIndexer) -> OperatorMatrix:
    """Diagonal occupation count of one species at site j (1-based)."""
    if not 1 <= j <= basis.L:
        raise ValueError(f"site {j} out of range 1..{basis.L}")
    b = _Builder(basis.dim)
    b.add_diagonal(basis.occupation_counts(species)[:, j - 1].astype(complex))
    return b.build()


# ---------------------------------------------------------------------------
# lattice symmetries


def site_permutation_operator(basis: StateIndexer, site_map) -> sp.csr_matrix:
    """Unitary relabeling sites via ``site_map`` on both species.

    Fermionic configurations pick up the parity sign of re-sorting the
    mapped tuple.
    """
    rows, cols, vals = [], [], []
    per_species = {}
    for species, configs in (("up", basis.up_configs), ("dn", basis.dn_configs)):
        stat = basis.spec.stat(species)
        maps = []
        for cfg in configs:
            mapped = tuple(site_map(s) for s in cfg)
            sign = 1.0
            if stat == FERMION and len(mapped) == 2 and mapped[0] > mapped[1]:
                sign = -1.0
            maps.append((basis.species_index(species, tuple(sorted(mapped))), sign))
        per_species[species] = maps
    for a, (na, sa) in enumerate(per_species["up"]):
        for bdx, (nb, sb) in enumerate(per_species["dn"]):
            rows.append(na * basis.dim_dn + nb)
            cols.append(a * basis.dim_dn + bdx)
            vals.append(sa * sb)
    return sp.coo_matrix((vals, (rows, cols)),
                         shape=(basis.dim, basis.dim), dtype=complex).tocsr()


def reversal_operator(basis: StateIndexer) -> sp.csr_matrix:
    """Simultaneous site reversal j -> L+1-j of both species."""
    L = basis.L
    return site_permutation_operator(basis, lambda s: L + 1 - s)


def translation_operator(basis: StateIndexer) -> sp.csr_matrix:
    """Translation by one unit cell (two sites) with wrap-around."""
    L = basis.L
    return site_permutation_operator(basis, lambda s: (s + 2 - 1) % L + 1)


def gauge_sign_operator(basis: StateIndexer, transform) -> sp.csr_matrix:
    """Diagonal unitary of per-site signs from a gauge transform."""
    diag = np.ones(basis.dim)
    for species in ("up", "dn"):
        counts = basis.occupation_counts(species)
        signs = np.array([transform.site_sign(species, j)
                          for j in range(1, basis.L + 1)], dtype=float)
        # (-1)^(number of particles on flipped sites)
        flipped = counts[:, signs < 0].sum(axis=1)
        diag = diag * np.where(flipped % 2 == 1, -1.0, 1.0)
    return sp.diags(diag.astype(complex)).tocsr()
