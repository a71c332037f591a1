"""State functionals: densities, edge imbalance, inter-species entanglement
entropy, two-particle correlations, and mean positions.

Expectation values use right-normalized states; the biorthogonal variants
take an explicit left partner and report complex values as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import StateIndexer

RIGHT_UNIT = "right-unit"
BIORTHOGONAL = "biorthogonal-pair"
_NORM_TOL = 1e-12
_BIORTHO_TOL = 1e-8


@dataclass
class StateVector:
    basis: StateIndexer
    amplitudes: np.ndarray
    normalization: str = RIGHT_UNIT

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude length {self.amplitudes.shape} != basis dim {self.basis.dim}")
        if self.normalization == RIGHT_UNIT:
            nrm = np.linalg.norm(self.amplitudes)
            if abs(nrm - 1.0) > _NORM_TOL:
                raise ValueError(f"right-unit state has norm {nrm}, not 1")
        elif self.normalization != BIORTHOGONAL:
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @staticmethod
    def from_product(basis: StateIndexer, up: tuple[int, ...], dn: tuple[int, ...]) -> "StateVector":
        """Basis (product occupation) state."""
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.index(tuple(sorted(up)), tuple(sorted(dn)))] = 1.0
        return StateVector(basis, amps)

    @staticmethod
    def normalized(basis: StateIndexer, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        return StateVector(basis, amps / np.linalg.norm(amps))


def _require_right_unit(psi: StateVector):
    if psi.normalization != RIGHT_UNIT:
        raise ValueError("a right-unit normalized state is required")


def _weights(psi: StateVector) -> np.ndarray:
    return np.abs(psi.amplitudes) ** 2


def density_profile(psi: StateVector, species: str) -> np.ndarray:
    """<n_{sigma,j}> for j = 1..L; sums to the particle count."""
    _require_right_unit(psi)
    return _weights(psi) @ psi.basis.occupation_counts(species)


def biorthogonal_density(psi_left: StateVector, psi_right: StateVector,
                         species: str, j: int) -> complex:
    """<L| n_{sigma,j} |R> for a biorthonormal pair (<L|R> = 1)."""
    return complex(biorthogonal_profile(psi_left, psi_right, species)[j - 1])


def biorthogonal_profile(psi_left: StateVector, psi_right: StateVector,
                         species: str) -> np.ndarray:
    overlap = np.vdot(psi_left.amplitudes, psi_right.amplitudes)
    if abs(overlap - 1.0) > _BIORTHO_TOL:
        raise ValueError(f"pair is not biorthonormal: <L|R> = {overlap}")
    w = psi_left.amplitudes.conj() * psi_right.amplitudes
    return w @ psi_left.basis.occupation_counts(species)


def edge_imbalance(psi: StateVector) -> float:
    """<n_{dn,1} - n_{dn,L}> on a right-normalized state."""
    _require_right_unit(psi)
    prof = density_profile(psi, "dn")
    return float(prof[0] - prof[-1])


def reduced_density_dn(psi: StateVector) -> np.ndarray:
    """Down-species reduced density matrix (one particle per species only)."""
    basis = psi.basis
    if basis.spec.n_up != 1 or basis.spec.n_dn != 1:
        raise ValueError("reduced density matrix is defined for one particle per species")
    A = psi.amplitudes.reshape(basis.dim_up, basis.dim_dn)
    return A.T @ A.conj()


def entanglement_entropy(psi: StateVector) -> float:
    """Inter-species entropy -Tr(rho_dn log2 rho_dn), in [0, log2 L]."""
    _require_right_unit(psi)
    rho = reduced_density_dn(psi)
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 1e-15]
    return float(-np.sum(lam * np.log2(lam)))


def interspecies_correlation(psi: StateVector,
                             biorthogonal_left: StateVector | None = None
                             ) -> tuple[np.ndarray, np.ndarray]:
    """(Gamma, normalized Gamma) with Gamma_{j,j'} = <n_{up,j} n_{dn,j'}>.

    With a left partner the biorthogonal expectation is used and entries may
    be complex; normalization always divides by the largest magnitude.
    """
    basis = psi.basis
    cu = basis.occupation_counts("up")
    cd = basis.occupation_counts("dn")
    if biorthogonal_left is None:
        _require_right_unit(psi)
        w = _weights(psi)
    else:
        overlap = np.vdot(biorthogonal_left.amplitudes, psi.amplitudes)
        if abs(overlap - 1.0) > _BIORTHO_TOL:
            raise ValueError(f"pair is not biorthonormal: <L|R> = {overlap}")
        w = biorthogonal_left.amplitudes.conj() * psi.amplitudes
    gamma = (cu * w[:, None]).T @ cd
    peak = np.abs(gamma).max()
    if peak == 0.0:
        raise ArithmeticError("correlation matrix vanished for a normalized state")
    if biorthogonal_left is None:
        gamma = gamma.real
    return gamma, gamma / peak


def intraspecies_correlation(psi: StateVector, species: str
                             ) -> tuple[np.ndarray, np.ndarray]:
    """(G, normalized G) with G_{j,j'} = <a†_j a†_j' a_j' a_j> of one species."""
    _require_right_unit(psi)
    basis = psi.basis
    if basis.spec.n(species) != 2:
        raise ValueError("intra-species correlation needs two particles of the species")
    c = basis.occupation_counts(species)
    w = _weights(psi)
    g = (c * w[:, None]).T @ c
    # the diagonal <n_j (n_j - 1)> is formed directly so Pauli-blocked
    # entries vanish exactly rather than to rounding
    np.fill_diagonal(g, w @ (c * (c - 1.0)))
    g = g.real
    peak = np.abs(g).max()
    if peak == 0.0:
        raise ArithmeticError("correlation matrix vanished for a normalized state")
    return g, g / peak


def mean_position(psi: StateVector, species: str) -> float:
    """Density-weighted mean site, in [1, L]."""
    _require_right_unit(psi)
    prof = density_profile(psi, species)
    sites = np.arange(1, psi.basis.L + 1)
    return float(sites @ prof / psi.basis.spec.n(species))


def diagonal_mass(gamma_normalized: np.ndarray, band: int = 2) -> float:
    """Fraction of total |Gamma| weight within |j - j'| <= band."""
    g = np.abs(gamma_normalized)
    L = g.shape[0]
    jj = np.abs(np.subtract.outer(np.arange(L), np.arange(L)))
    total = g.sum()
    if total == 0.0:
        return 0.0
    return float(g[jj <= band].sum() / total)
