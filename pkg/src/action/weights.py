"""Single-configuration evaluation of the kinetic term and action weights."""

from typing import Sequence

import numpy as np

from src.lattice.geometry import TorusLattice
from src.lattice.types import FaceIndex
from src.sitespace.types import SiteSpace

from .actions import FaceCouplingAction, ScalarAction
from .exceptions import ActionPositivityError
from .types import ScalarActionParams


def codifferential(lattice: TorusLattice, u: Sequence[float], face: FaceIndex) -> float:
    """*d*u(Γ) = u(Δ₁) − u(Δ₀) along the positive axis of ``face``."""
    tail, head = lattice.face_incidence(face)
    values = np.asarray(u, dtype=float)
    return float(values[lattice.index_of(head)] - values[lattice.index_of(tail)])


def scalar_action(lattice: TorusLattice, params: ScalarActionParams, u: Sequence[float]) -> float:
    """s_λ(u) for one configuration."""
    return float(ScalarAction(params).action_value(lattice, np.asarray(u, dtype=float))[0])


def face_coupling_weight(
    lattice: TorusLattice, site: SiteSpace, action: FaceCouplingAction, u: Sequence[float]
) -> float:
    """v[w](u) = ∏_Γ w(u(Δ₀(Γ)), u(Δ₁(Γ))).

    Raises:
        ActionPositivityError: On the first face with a non-positive factor
    """
    configs = np.asarray(u, dtype=float)[None, :]
    factors = action.face_values(lattice, site, configs, np.arange(lattice.face_count))[0]
    bad = np.flatnonzero(factors <= 0)
    if bad.size:
        position = int(bad[0])
        face = FaceIndex(lattice.cube_at(position // lattice.d), position % lattice.d + 1)
        raise ActionPositivityError(
            f"Face {face} has non-positive factor {factors[position]}",
            face=face,
            value=float(factors[position]),
        )
    return float(np.prod(factors))
