import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgfchain import (BasisSpec, ModelParams, apply_gauge_transform,
                      build_basis, build_hamiltonian, gauge_sign_operator)


@given(st.floats(0.01, math.pi - 0.01), st.floats(0.2, 3.0))
@settings(max_examples=50, deadline=None)
def test_angle_roundtrip(theta, r):
    p = ModelParams.from_angles(8, theta, theta / 2 + 0.01, r)
    assert p.theta("up") == pytest.approx(theta, abs=1e-12)
    assert p.r("up") == pytest.approx(r, abs=1e-12)
    assert p.u("up") == r * math.cos(theta)
    assert p.v("up") == r * math.sin(theta)


def test_validation():
    with pytest.raises(ValueError):
        ModelParams(L=5)
    with pytest.raises(ValueError):
        ModelParams(L=8, gamma_up=-0.1)
    with pytest.raises(ValueError):
        ModelParams(L=8, t=0.0, include_dgf=True)
    with pytest.raises(ValueError):
        ModelParams(L=8, u_up=float("nan"))
    with pytest.raises(ValueError):
        ModelParams(L=8, bc_up="twisted")
    ModelParams(L=8, t=0.0, include_dgf=False)  # fine without the gauge hop


def test_disorder_fields_reproducible():
    p = ModelParams(L=8, disorder_lambda=0.2, disorder_seed=11)
    e1 = p.disorder_fields()
    e2 = p.disorder_fields()
    assert np.array_equal(e1[0], e2[0]) and np.array_equal(e1[1], e2[1])
    assert not np.array_equal(e1[0], e1[1])  # independent by default
    shared = p.replace(disorder_shared=True).disorder_fields()
    assert np.array_equal(shared[0], shared[1])
    assert np.all(np.abs(e1[0]) <= 1.0)


def test_gauge_sign_pattern():
    p = ModelParams(L=8, u_up=1.0, v_up=-3.0, u_dn=0.5, v_dn=0.5)
    p2, tr = apply_gauge_transform(p)
    assert p2.v_up == 3.0 and p2.v_dn == 0.5
    assert tr.signs_up == (1, 1, -1, -1, 1, 1, -1, -1)
    assert tr.signs_dn == (1,) * 8
    assert tr.momentum_shifted == ("up",)


def test_gauge_identity_when_nonnegative():
    p = ModelParams(L=8, u_up=1.0, v_up=3.0, u_dn=0.5, v_dn=0.5)
    p2, tr = apply_gauge_transform(p)
    assert p2 == p
    assert tr.signs_up == (1,) * 8 and tr.momentum_shifted == ()


@pytest.mark.parametrize("bc", ["open", "periodic"])
def test_gauge_spectra_agree(bc):
    p = ModelParams(L=8, u_up=1.3, v_up=-2.1, u_dn=0.4, v_dn=-0.9,
                    gamma_up=0.5, t=0.5, bc_up=bc, bc_dn=bc)
    p2, tr = apply_gauge_transform(p)
    basis = build_basis(BasisSpec(), 8)
    H1 = build_hamiltonian(p, basis).toarray()
    H2 = build_hamiltonian(p2, basis).toarray()
    U = gauge_sign_operator(basis, tr).toarray()
    assert np.abs(U @ H1 @ U - H2).max() < 1e-12
    e1 = np.linalg.eigvals(H1)
    e2 = np.linalg.eigvals(H2)
    # spectra agree as sets; sorting complex values is not stable enough
    dist = np.abs(e1[:, None] - e2[None, :])
    assert dist.min(axis=1).max() < 1e-10
    assert dist.min(axis=0).max() < 1e-10


def test_gauge_periodic_needs_multiple_of_four():
    p = ModelParams(L=6, u_up=1.0, v_up=-2.0, bc_up="periodic",
                    include_dgf=False, t=0.5)
    with pytest.raises(ValueError):
        apply_gauge_transform(p)
