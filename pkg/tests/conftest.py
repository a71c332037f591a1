import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dgfchain import BasisSpec, ModelParams, build_basis

SQRT2 = float(np.sqrt(2.0))


def fig2_params(L=32, sign=+1, **kw):
    """Edge (anti-)confined parameter set; sign flips u of both species."""
    base = dict(L=L, u_up=2.0 * sign, v_up=5.0, u_dn=1.0 * sign, v_dn=0.5,
                gamma_up=0.5, t=0.5)
    base.update(kw)
    return ModelParams(**base)


def fig3a_params(L=32, **kw):
    """Bulk-bound parameter set (all invariants inverted)."""
    base = dict(gamma_up=0.5, t=0.5, bc_up="periodic", bc_dn="periodic")
    base.update(kw)
    return ModelParams.from_angles(L, 0.1 * np.pi, 0.9 * np.pi, SQRT2, **base)


@pytest.fixture(scope="session")
def basis11_32():
    return build_basis(BasisSpec(), 32)


@pytest.fixture(scope="session")
def basis11_8():
    return build_basis(BasisSpec(), 8)
