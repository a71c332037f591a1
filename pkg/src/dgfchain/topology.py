"""Analytic momentum-space machinery: Bloch phases, band-inversion
indicators, inter-species invariants, the gauge-hop matrix in the
conserved-momentum sectors, bound-state energies, phase classification,
and two-mode ansatz projections.

Momentum grid: k_m = 4*pi*m/L for m = 0..L/2-1 (one point per unit cell).
The K = pi sector exists on the grid only when L % 4 == 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .basis import BasisSpec, StateIndexer, build_basis
from .operators import build_dgf, build_hamiltonian
from .params import PERIODIC, ModelParams


class CriticalParameterError(ValueError):
    """Raised when u +/- v vanishes and a band-inversion sign is undefined."""


_CRIT_TOL = 1e-12


def momentum_grid(L: int) -> np.ndarray:
    return 4.0 * np.pi * np.arange(L // 2) / L


def bloch_phase(u: float, v: float, k) -> np.ndarray:
    """phi(k) = arg(u + v e^{-ik})."""
    return np.angle(u + v * np.exp(-1j * np.asarray(k, dtype=float)))


def band_energy(u: float, v: float, k) -> np.ndarray:
    """Positive-band dispersion |u + v e^{-ik}|."""
    return np.abs(u + v * np.exp(-1j * np.asarray(k, dtype=float)))


def bloch_state(u: float, v: float, k: float, band: int) -> np.ndarray:
    """Cell-periodic part of the Bloch state, band = +1 or -1."""
    ph = bloch_phase(u, v, k)
    return np.array([np.exp(1j * ph / 2), band * np.exp(-1j * ph / 2)]) / math.sqrt(2)


@dataclass(frozen=True)
class BlochData:
    species: str
    momenta: np.ndarray
    phases: np.ndarray
    energies: np.ndarray  # positive band


def bloch_data(params: ModelParams, species: str) -> BlochData:
    ks = momentum_grid(params.L)
    u, v = params.u(species), params.v(species)
    return BlochData(species=species, momenta=ks,
                     phases=bloch_phase(u, v, ks),
                     energies=band_energy(u, v, ks))


# ---------------------------------------------------------------------------
# invariants


def single_particle_indicators(params: ModelParams, species: str) -> tuple[int, int, int]:
    """Inversion indicators (I_0, I_pi, I_sin) of one species' lower band."""
    u, v = params.u(species), params.v(species)
    scale = max(abs(u), abs(v), 1.0)
    if abs(u + v) <= _CRIT_TOL * scale or abs(u - v) <= _CRIT_TOL * scale:
        raise CriticalParameterError(
            f"gap closes for species {species}: u={u}, v={v}")
    i0 = -int(math.copysign(1.0, u + v))
    ipi = -int(math.copysign(1.0, u - v))
    return i0, ipi, i0 * ipi


def _sigma_x_expectation(u: float, v: float, k: float) -> float:
    """<sigma_x> on the lower band eigenstate of the 2x2 Bloch matrix."""
    off = u + v * cmath.exp(-1j * k)
    h = np.array([[0.0, off], [off.conjugate(), 0.0]])
    w, vecs = np.linalg.eigh(h)
    lower = vecs[:, 0]
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return float(np.real(np.vdot(lower, sx @ lower)))


@dataclass
class PhaseLabel:
    """Inter-species invariant triple and derived quantities.

    Signs use the order (I_00, I_pipi, I_0pi); ``label`` renders them as a
    string like '---' or '++-'.  PT predictor flags are attached by
    classify_phase and are None otherwise.
    """
    I_00: int
    I_pipi: int
    I_0pi: int
    indicators_up: tuple[int, int, int]
    indicators_dn: tuple[int, int, int]
    bulk_bound_pt_broken: bool | None = None
    sp_pt_broken_up: bool | None = None
    sp_pt_broken_dn: bool | None = None
    edge_confined_possible: bool | None = None

    @property
    def I_pi0(self) -> int:
        return self.I_00 * self.I_pipi * self.I_0pi

    @property
    def I_ext(self) -> int:
        return self.I_00 * self.I_pipi

    @property
    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in (self.I_00, self.I_pipi, self.I_0pi))


def interspecies_invariants(params: ModelParams) -> PhaseLabel:
    """Joint band-inversion invariants on the high-symmetric momentum pairs.

    Evaluates <sigma_x (x) sigma_x> on the product of lower-band states and
    cross-checks the factorization into single-species indicators.
    """
    ind_up = single_particle_indicators(params, "up")
    ind_dn = single_particle_indicators(params, "dn")
    out = {}
    for ku, iu in ((0.0, ind_up[0]), (math.pi, ind_up[1])):
        for kd, idn in ((0.0, ind_dn[0]), (math.pi, ind_dn[1])):
            direct = (_sigma_x_expectation(params.u_up, params.v_up, ku)
                      * _sigma_x_expectation(params.u_dn, params.v_dn, kd))
            factored = iu * idn
            if abs(direct - factored) > 1e-9:
                raise AssertionError(
                    f"invariant factorization failed at (k_up={ku}, k_dn={kd}): "
                    f"{direct} vs {factored}")
            out[(ku, kd)] = factored
    return PhaseLabel(
        I_00=out[(0.0, 0.0)],
        I_pipi=out[(math.pi, math.pi)],
        I_0pi=out[(0.0, math.pi)],
        indicators_up=ind_up,
        indicators_dn=ind_dn,
    )


def classify_phase(params: ModelParams) -> PhaseLabel:
    """Invariant triple plus PT-transition predictors.

    Bulk-bound predictor thresholds follow the effective two-level models:
    |u_up+u_dn| < 2t for '---'/'++-', |u_up - v_up/2 +/- (u_dn/2 - v_dn)| < t
    for '+--'/'-++', and the species-swapped form for '+-+'/'-+-'.
    """
    lab = interspecies_invariants(params)
    t = params.t
    uu, vu, ud, vd = params.u_up, params.v_up, params.u_dn, params.v_dn
    name = lab.label
    if name in ("---", "++-"):
        bulk = abs(uu + ud) < 2 * t
    elif name == "+--":
        bulk = abs(uu - vu / 2 + (ud / 2 - vd)) < t
    elif name == "-++":
        bulk = abs(uu - vu / 2 - (ud / 2 - vd)) < t
    elif name == "+-+":
        bulk = abs(ud - vd / 2 + (uu / 2 - vu)) < t
    elif name == "-+-":
        bulk = abs(ud - vd / 2 - (uu / 2 - vu)) < t
    else:  # '+++' has no bulk-bound channel
        bulk = False
    lab.bulk_bound_pt_broken = bulk
    lab.sp_pt_broken_up = params.gamma_up ** 2 > 4 * (uu ** 2 + vu ** 2 - 2 * abs(uu * vu))
    lab.sp_pt_broken_dn = params.gamma_dn ** 2 > 4 * (ud ** 2 + vd ** 2 - 2 * abs(ud * vd))
    lab.edge_confined_possible = lab.I_ext == -1
    return lab


# ---------------------------------------------------------------------------
# gauge-hop matrix in the K sectors


def _canonical_sector(K: float) -> float:
    if abs(K) <= 1e-12:
        return 0.0
    if abs(K - math.pi) <= 1e-12:
        return math.pi
    raise ValueError(f"K must be 0 or pi (high-symmetric sectors), got {K}")


def _check_sector(params: ModelParams, K: float) -> float:
    K = _canonical_sector(K)
    if K == math.pi and params.L % 4 != 0:
        raise ValueError("K=pi sector needs L % 4 == 0 so pi lies on the grid")
    return K


def m_matrix(params: ModelParams, K: float) -> np.ndarray:
    """Gauge-hop matrix [M] in the total-momentum-K sector.

    Basis order: [(alpha=+, beta=-) at k_0..k_{L/2-1}] then [(alpha=-, beta=+)].
    Real antisymmetric by construction; loss is omitted (it only shifts the
    sector diagonally).
    """
    K = _check_sector(params, K)
    L, t = params.L, params.t
    n = L // 2
    ks = momentum_grid(L)
    pu = bloch_phase(params.u_up, params.v_up, ks)
    pd = bloch_phase(params.u_dn, params.v_dn, K - ks)
    cu, su = np.cos(pu / 2), np.sin(pu / 2)
    cd, sd = np.cos(pd / 2), np.sin(pd / 2)
    M = np.zeros((L, L))
    pref = 4 * t / L
    # rows are the bra (primed) index, columns the ket
    same = pref * (np.outer(su, cu) * np.outer(cd, sd) - np.outer(cu, su) * np.outer(sd, cd))
    cross = pref * (np.outer(su, su) * np.outer(cd, cd) - np.outer(cu, cu) * np.outer(sd, sd))
    M[:n, :n] = +same
    M[n:, n:] = -same
    # cross blocks carry the sign of the bra band
    M[:n, n:] = +cross
    M[n:, :n] = -cross
    return M


def _a2_terms(params: ModelParams, K: float):
    u1, v1 = params.u_up, params.v_up
    u2, v2 = params.u_dn, params.v_dn

    def one_minus_cc(k):
        return 1.0 - np.cos(bloch_phase(u1, v1, k)) * np.cos(bloch_phase(u2, v2, K - k))

    def ss(k):
        return np.sin(bloch_phase(u1, v1, k)) * np.sin(bloch_phase(u2, v2, K - k))

    return one_minus_cc, ss


def bbs_a2(params: ModelParams, K: float, mode: str = "sum") -> float:
    """Squared bound-state energy a2 in the K sector.

    mode='sum' evaluates the double grid sum (separable into two single
    sums); mode='integral' uses the thermodynamic-limit double integral via
    adaptive quadrature to relative 1e-8.
    """
    K = _check_sector(params, K) if mode == "sum" else _canonical_sector(K)
    t = params.t
    f1, f2 = _a2_terms(params, K)
    if mode == "sum":
        ks = momentum_grid(params.L)
        s1 = float(np.sum(f1(ks)))
        s2 = float(np.sum(f2(ks)))
        a2 = 4 * t ** 2 / params.L ** 2 * (s1 ** 2 - s2 ** 2)
    elif mode == "integral":
        i1, _ = quad(f1, -math.pi, math.pi, epsabs=0.0, epsrel=1e-8, limit=400)
        i2, _ = quad(f2, -math.pi, math.pi, epsabs=0.0, epsrel=1e-8, limit=400)
        a2 = t ** 2 / (4 * math.pi ** 2) * (i1 ** 2 - i2 ** 2)
    else:
        raise ValueError(f"mode must be 'sum' or 'integral', got {mode!r}")
    if a2 < -1e-12 * max(t ** 2, 1.0):
        raise ArithmeticError(
            f"a2 = {a2} < 0 violates the sum-of-squares identity")
    return max(a2, 0.0)


def bbs_energy(params: ModelParams, K: float, mode: str = "sum") -> tuple[complex, complex]:
    """Bound-state energy pair +/- i sqrt(a2) in the K sector."""
    root = math.sqrt(bbs_a2(params, K, mode))
    return 1j * root, -1j * root


def dgf_magnitude(params: ModelParams) -> float:
    """Sum of squared gauge-hop matrix elements over both K sectors."""
    total = 0.0
    for K in (0.0, math.pi):
        M = m_matrix(params, K)
        total += float(np.sum(M * M))
    return total


# ---------------------------------------------------------------------------
# two-mode ansatz projections

_FAMILIES = ("mmm", "ppm", "pmm", "mpp")
_FAMILY_PHASE = {"mmm": "---", "ppm": "++-", "pmm": "+--", "mpp": "-++"}


def _wrap(site: int, L: int) -> int:
    return (site - 1) % L + 1


def ansatz_states(family: str, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Trial vectors (psi_plus, psi_minus) as L x L amplitude matrices
    A[up_site-1, dn_site-1] on the one-particle-per-species ring."""
    if family not in _FAMILIES:
        raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")
    out = []
    for s in (+1, -1):
        A = np.zeros((L, L))
        for j in range(1, L // 2 + 1):
            o, e = 2 * j - 1, 2 * j
            if family == "mmm":
                amp = 1.0 / math.sqrt(2 * L)
                for mu, cm in ((o, 1.0), (e, float(s))):
                    for nu, cn in ((o, 1.0), (e, float(s))):
                        A[mu - 1, nu - 1] += amp * cm * cn
            elif family == "ppm":
                amp = 1.0 / (2 * math.sqrt(L))
                w = _wrap(e + 3, L)
                A[o - 1, o - 1] += amp * math.sqrt(2)
                A[e - 1, e - 1] += amp * math.sqrt(2)
                for mu, nu in ((o, e), (e, o), (e, w), (w, e)):
                    A[mu - 1, nu - 1] += amp * s
            else:
                amp = 1.0 / math.sqrt(2 * L)
                up = {o: 1.0 / math.sqrt(2), e: s / math.sqrt(2)}
                if family == "pmm":
                    dn = {_wrap(e - 2, L): 1.0, o: -s, e: -1.0, _wrap(e + 1, L): s}
                else:  # mpp
                    dn = {_wrap(e - 2, L): 1.0, o: s, e: -1.0, _wrap(e + 1, L): -s}
                for mu, cm in up.items():
                    for nu, cn in dn.items():
                        A[mu - 1, nu - 1] += amp * cm * cn
        out.append(A)
    return out[0], out[1]


@dataclass
class AnsatzProjection:
    family: str
    projected: np.ndarray
    predicted: np.ndarray
    overlap: np.ndarray
    family_matches_phase: bool
    pt_broken_predicted: bool


def _predicted_two_level(family: str, params: ModelParams) -> np.ndarray:
    t = params.t
    uu, vu, ud, vd = params.u_up, params.v_up, params.u_dn, params.v_dn
    if family == "mmm":
        d, c = uu + ud, 2 * t
        return np.array([[d, -c], [c, -d]], dtype=complex)
    if family == "ppm":
        d, c = (uu + ud) / math.sqrt(2), math.sqrt(2) * t
        return np.array([[d, -c], [c, -d]], dtype=complex)
    if family == "pmm":
        d = uu - vu / 2 + (ud / 2 - vd)
        return np.array([[d, t], [-t, -d]], dtype=complex)
    # mpp: only the PT boundary is fixed by the derivation; coupling mirrors pmm
    d = uu - vu / 2 - (ud / 2 - vd)
    return np.array([[d, t], [-t, -d]], dtype=complex)


def ansatz_two_level(params: ModelParams, family: str) -> AnsatzProjection:
    """Project the lossless periodic Hamiltonian onto the family's trial pair.

    Returns the numerically projected 2x2 matrix alongside the closed-form
    prediction.  A family/phase mismatch is flagged, not corrected.
    """
    loc = params.replace(gamma_up=0.0, gamma_dn=0.0, bc_up=PERIODIC,
                         bc_dn=PERIODIC, disorder_lambda=0.0, nrh_strength=0.0)
    basis = build_basis(BasisSpec(), loc.L)
    H = build_hamiltonian(loc, basis).toarray()
    Ap, Am = ansatz_states(family, loc.L)
    vecs = [Ap.reshape(-1), Am.reshape(-1)]
    overlap = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    projected = np.array([[np.vdot(a, H @ b) for b in vecs] for a in vecs])
    try:
        matches = classify_phase(loc).label == _FAMILY_PHASE[family]
    except CriticalParameterError:
        matches = False
    ev = np.linalg.eigvals(_predicted_two_level(family, params))
    return AnsatzProjection(
        family=family,
        projected=projected,
        predicted=_predicted_two_level(family, params),
        overlap=overlap,
        family_matches_phase=matches,
        pt_broken_predicted=bool(np.max(np.abs(ev.imag)) > 1e-12),
    )
