"""Non-Hermitian eigendecomposition with left/right eigenvectors,
conjugate-pair bookkeeping, and non-normality diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .operators import OperatorMatrix, reversal_operator
from .params import ModelParams
from .basis import StateIndexer

DEFAULT_DIM_CAP = 8192
GROUP_TOL = 1e-8
DEFECT_OVERLAP_TOL = 1e-10


def spectral_norm_estimate(A: np.ndarray, iters: int = 60, seed: int = 0) -> float:
    """Largest singular value via power iteration on A^H A."""
    n = A.shape[0]
    if n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    s = 0.0
    for _ in range(iters):
        y = A @ x
        x = A.conj().T @ y
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return 0.0
        x /= nrm
        s = np.sqrt(nrm)
    return float(s)


@dataclass
class EigenSystem:
    """Right (columns of V) and optional left (rows of W) eigenvectors.

    Eigenvalues are sorted lexicographically by (Re, Im); V columns have unit
    2-norm; W rows are biorthonormalized against V inside each degeneracy
    group unless the group is flagged defective.
    """
    dim: int
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray | None = None
    groups: list[np.ndarray] = field(default_factory=list)
    defective_groups: list[int] = field(default_factory=list)
    matrix_norm: float = 0.0

    def right_vector(self, m: int) -> np.ndarray:
        return self.right[:, m]

    def left_vector(self, m: int) -> np.ndarray:
        """Left eigenvector of pair m in ket form: <L_m| X |R_m> = vdot(L_m, X R_m)."""
        if self.left is None:
            raise ValueError("left eigenvectors were not requested")
        return self.left[m, :].conj()


def _degeneracy_groups(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Cluster sorted eigenvalues whose pairwise gap stays below tol."""
    groups = []
    current = [0]
    for i in range(1, len(w)):
        if abs(w[i] - w[current[-1]]) <= tol:
            current.append(i)
        else:
            groups.append(np.array(current))
            current = [i]
    groups.append(np.array(current))
    return groups


def eigensystem(H: OperatorMatrix | np.ndarray, want_left: bool = False,
                dim_cap: int = DEFAULT_DIM_CAP) -> EigenSystem:
    """Dense general eigendecomposition.

    Left vectors come from the adjoint problem (the same LAPACK call) and are
    rescaled so that W V = I within each degeneracy group; defective-within-
    tolerance groups are flagged instead of being force-biorthogonalized.
    """
    A = H.toarray() if isinstance(H, OperatorMatrix) else np.asarray(H, dtype=complex)
    n = A.shape[0]
    if n > dim_cap:
        raise ValueError(f"dimension {n} exceeds the configured cap {dim_cap}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains nonfinite entries")
    if want_left:
        w, vl, vr = sla.eig(A, left=True, right=True)
    else:
        w, vr = sla.eig(A)
        vl = None
    if not np.all(np.isfinite(w)):
        bad = int(np.flatnonzero(~np.isfinite(w))[0])
        raise ArithmeticError(f"eigensolver returned nonfinite eigenvalue at index {bad}")
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    vr = vr[:, order]
    vr = vr / np.linalg.norm(vr, axis=0, keepdims=True)
    norm = spectral_norm_estimate(A)
    es = EigenSystem(dim=n, eigenvalues=w, right=vr, matrix_norm=norm)
    es.groups = _degeneracy_groups(w, GROUP_TOL * max(norm, 1.0))
    if vl is None:
        return es
    W = vl[:, order].conj().T  # rows satisfy W A = diag(w) W
    for gi, g in enumerate(es.groups):
        overlap = W[g] @ vr[:, g]
        smin = np.linalg.svd(overlap, compute_uv=False)[-1]
        if smin < DEFECT_OVERLAP_TOL:
            es.defective_groups.append(gi)
            continue
        W[g] = np.linalg.solve(overlap, W[g])
    es.left = W
    return es


@dataclass
class PairingReport:
    n_real: int
    n_pairs: int
    n_unpaired: int
    max_defect: float


def pt_pairing_report(eigenvalues, shift: complex = 0.0, tol: float = 1e-8) -> PairingReport:
    """Partition shifted eigenvalues into conjugate pairs and real singletons."""
    es = np.asarray(eigenvalues, dtype=complex) + shift
    real_mask = np.abs(es.imag) <= tol
    n_real = int(real_mask.sum())
    upper = sorted(np.flatnonzero(~real_mask & (es.imag > 0)),
                   key=lambda i: (es[i].real, es[i].imag))
    lower = list(np.flatnonzero(~real_mask & (es.imag < 0)))
    n_pairs = 0
    max_defect = 0.0
    for i in upper:
        if not lower:
            break
        j = min(lower, key=lambda j: abs(es[j] - es[i].conjugate()))
        defect = abs(es[j] - es[i].conjugate())
        if defect <= tol:
            lower.remove(j)
            n_pairs += 1
            max_defect = max(max_defect, defect)
    n_unpaired = len(es) - n_real - 2 * n_pairs
    return PairingReport(n_real=n_real, n_pairs=n_pairs,
                         n_unpaired=n_unpaired, max_defect=max_defect)


def condition_number(es: EigenSystem) -> float:
    """cond(V) = ||V|| * ||V^-1|| with unit-normalized right eigenvectors."""
    s = np.linalg.svd(es.right, compute_uv=False)
    if s[-1] == 0.0 or not np.isfinite(s[-1]):
        warnings.warn("eigenvector matrix numerically singular; cond = inf")
        return float("inf")
    return float(s[0] / s[-1])


def petermann_factor(es: EigenSystem, m: int, overlap_floor: float = 1e-13) -> float:
    """K_m = <L|L><R|R> / |<L|R>|^2 for eigenpair m (>= 1 up to roundoff)."""
    r = es.right_vector(m)
    l = es.left_vector(m)
    rr = float(np.real(np.vdot(r, r)))
    ll = float(np.real(np.vdot(l, l)))
    lr = abs(np.vdot(l, r))
    floor = overlap_floor * np.sqrt(ll * rr)
    if lr < floor:
        warnings.warn(f"near-defective eigenpair {m}: |<L|R>| = {lr:.3e}; "
                      "Petermann factor capped")
        lr = floor
    return ll * rr / lr ** 2


def top_im_eigenpair(H: OperatorMatrix, method: str = "auto", seed: int = 0,
                     max_steps: int = 400, step: float = 2.0,
                     residual_tol: float = 1e-9) -> tuple[complex, np.ndarray, float, str]:
    """Eigenpair with the largest imaginary eigenvalue.

    method='power' filters a random vector through exp(-i H tau) (the
    fastest-growing direction is the top-Im eigenvector) and polishes with
    shift-inverted iteration; method='dense' takes eigenvalues without
    vectors and inverse-iterates at the winner.  'auto' tries power first
    and falls back to dense.  Returns (eigenvalue, unit vector, relative
    residual, method_used); the residual certifies the pair regardless of
    the route taken.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    A = H.matrix.tocsc()
    n = A.shape[0]
    scale = max(float(np.abs(A.data).max()) if A.nnz else 1.0, 1.0)
    rng = np.random.default_rng(seed)

    def _polish(E_guess: complex):
        shift = E_guess + 1e-8 * scale * (1 + 1j)
        try:
            lu = spla.splu(A - shift * sp.identity(n, dtype=complex, format="csc"))
        except RuntimeError:
            return None
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        E = E_guess
        for _ in range(8):
            x = lu.solve(x)
            x /= np.linalg.norm(x)
            Ax = A @ x
            E = complex(np.vdot(x, Ax))
            res = float(np.linalg.norm(Ax - E * x) / scale)
            if res < residual_tol:
                return E, x, res
        return (E, x, res) if res < 1e-6 else None

    if method in ("power", "auto"):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        E_prev = None
        for k in range(max_steps):
            v = spla.expm_multiply(-1j * A * step, v)
            v /= np.linalg.norm(v)
            if k % 5 == 4:
                E = complex(np.vdot(v, A @ v))
                if E_prev is not None and abs(E - E_prev) < 1e-10 * scale:
                    break
                E_prev = E
        E = complex(np.vdot(v, A @ v))
        out = _polish(E)
        if out is not None:
            return out[0], out[1], out[2], "power"
        if method == "power":
            raise ArithmeticError("power iteration failed to converge to an eigenpair")
    # dense route
    w = np.linalg.eigvals(A.toarray())
    E0 = w[int(np.argmax(w.imag))]
    out = _polish(complex(E0))
    if out is None:
        raise ArithmeticError(f"inverse iteration failed at E = {E0}")
    return out[0], out[1], out[2], "dense"


def pt_defect(H: OperatorMatrix, params: ModelParams, basis: StateIndexer) -> float:
    """Max-entry norm of P conj(H_s) P - H_s with H_s the loss-shifted matrix.

    Exactly zero for the disorder-free model under any boundary conditions.
    """
    A = H.toarray()
    shift = 0.5j * (params.gamma_up * basis.spec.n_up
                    + params.gamma_dn * basis.spec.n_dn)
    Hs = A + shift * np.eye(basis.dim)
    P = reversal_operator(basis).toarray().real
    D = P @ Hs.conj() @ P - Hs
    return float(np.abs(D).max())
