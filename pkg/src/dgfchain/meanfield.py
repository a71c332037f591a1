"""Mean-field treatment of the edge-localized up species: the analytic left
edge state and the single-particle down-species model with exponentially
decaying non-reciprocal intra-cell hops."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .operators import OperatorMatrix
from .params import PERIODIC, ModelParams


@dataclass(frozen=True)
class MeanFieldModel:
    L: int
    kappa: float            # u_up / v_up
    eta: float              # kappa^2
    t_prime: float          # t * (1 - eta)
    t_nr: np.ndarray        # per-cell non-reciprocal amplitudes, length L/2
    bc: str

    @staticmethod
    def from_params(params: ModelParams, bc: str | None = None) -> "MeanFieldModel":
        if abs(params.u_up) >= abs(params.v_up):
            raise ValueError("mean-field model needs |u_up| < |v_up| (|kappa| < 1)")
        kappa = params.u_up / params.v_up
        eta = kappa ** 2
        t_prime = params.t * (1.0 - eta)
        cells = params.L // 2
        t_nr = t_prime * eta ** np.arange(cells)
        return MeanFieldModel(L=params.L, kappa=kappa, eta=eta, t_prime=t_prime,
                              t_nr=t_nr, bc=bc if bc is not None else params.bc_dn)


def left_edge_state(params: ModelParams) -> np.ndarray:
    """Normalized zero-mode of the up chain, supported on odd sites.

    Amplitude ratio between successive odd sites is -u_up/v_up; the decay of
    the density is kappa^2 per cell.
    """
    if abs(params.u_up) >= abs(params.v_up):
        raise ValueError("edge state normalizable only for |u_up| < |v_up|")
    L = params.L
    kappa = params.u_up / params.v_up
    psi = np.zeros(L)
    psi[0::2] = (-kappa) ** np.arange(L // 2)
    return psi / np.linalg.norm(psi)


def _single_particle_chain(L: int, u: float, v: float, bc: str) -> np.ndarray:
    h = np.zeros((L, L), dtype=complex)
    for j in range(1, L // 2 + 1):
        o, e = 2 * j - 1, 2 * j
        h[o - 1, e - 1] += u
        h[e - 1, o - 1] += u
        nxt = e + 1
        if nxt > L:
            if bc != PERIODIC:
                continue
            nxt = 1
        h[e - 1, nxt - 1] += v
        h[nxt - 1, e - 1] += v
    return h


def effective_down_hamiltonian(params: ModelParams, bc: str | None = None) -> OperatorMatrix:
    """Down-species L x L chain plus the gauge-induced anti-Hermitian hops
    t_nr_j (a†_{2j-1} a_{2j} - h.c.) with t_nr_j = t(1-eta) eta^(j-1)."""
    model = MeanFieldModel.from_params(params, bc)
    h = _single_particle_chain(params.L, params.u_dn, params.v_dn, model.bc)
    for j in range(1, params.L // 2 + 1):
        o, e = 2 * j - 1, 2 * j
        h[o - 1, e - 1] += model.t_nr[j - 1]
        h[e - 1, o - 1] -= model.t_nr[j - 1]
    op = OperatorMatrix(dim=params.L, matrix=sp.csr_matrix(h))
    op.kind = op._classify()
    return op


@dataclass
class MeanFieldReport:
    model: MeanFieldModel
    obc_eigenvalues: np.ndarray
    pbc_eigenvalues: np.ndarray
    obc_profiles: np.ndarray        # (L, n_states): |psi_j|^2 columns
    average_profile: np.ndarray
    edge_imbalance: np.ndarray      # per OBC eigenstate


def meanfield_report(params: ModelParams) -> MeanFieldReport:
    """OBC/PBC spectra and OBC density profiles of the effective model."""
    model = MeanFieldModel.from_params(params)
    h_obc = effective_down_hamiltonian(params, bc="open").toarray()
    h_pbc = effective_down_hamiltonian(params, bc=PERIODIC).toarray()
    w_obc, v_obc = np.linalg.eig(h_obc)
    order = np.lexsort((w_obc.imag, w_obc.real))
    w_obc, v_obc = w_obc[order], v_obc[:, order]
    v_obc = v_obc / np.linalg.norm(v_obc, axis=0, keepdims=True)
    w_pbc = np.linalg.eigvals(h_pbc)
    w_pbc = w_pbc[np.lexsort((w_pbc.imag, w_pbc.real))]
    profiles = np.abs(v_obc) ** 2
    return MeanFieldReport(
        model=model,
        obc_eigenvalues=w_obc,
        pbc_eigenvalues=w_pbc,
        obc_profiles=profiles,
        average_profile=profiles.mean(axis=1),
        edge_imbalance=profiles[0, :] - profiles[-1, :],
    )
