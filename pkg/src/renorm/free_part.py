"""Quadratic (free) part of an effective action around a constant configuration."""

import logging
from typing import Optional

import numpy as np

from src.action.actions import LatticeAction
from src.action.exceptions import ActionPositivityError
from src.lattice.geometry import TorusLattice
from src.lattice.types import LatticeSpec
from src.sitespace.types import SiteSpace

from .exceptions import FreePartError
from .types import FreePart

logger = logging.getLogger(__name__)


def _neg_log_weight(
    action: LatticeAction, lattice: TorusLattice, site: SiteSpace, configs: np.ndarray
) -> np.ndarray:
    try:
        log_values = np.real(action.log_weight(lattice, site, configs))
    except ActionPositivityError as e:
        raise FreePartError(f"{action.name} is negative near the expansion point") from e
    bad = ~np.isfinite(log_values)
    if np.any(bad):
        raise FreePartError(f"{action.name} is not positive near the expansion point")
    return -log_values


def free_part_quadratic(
    action: Optional[LatticeAction],
    spec: LatticeSpec,
    site: SiteSpace,
    base_point: float = 0.0,
    fd_step: float = 1e-4,
) -> FreePart:
    """A_n with ⟨φ, A_n φ⟩ = ½ Σ_(i,j) φ_i φ_j ∂_i∂_j s_n(u_o), s_n = −ln v_n.

    The Hessian is taken by central differences at the constant configuration
    u_o ≡ ``base_point`` and symmetrized.

    Args:
        action: Weight v_n; ``None`` is the unit weight
        spec: Lattice at scale n
        site: Continuous single-site space
        base_point: Constant value of the expansion point
        fd_step: Finite-difference step

    Returns:
        Matrix A_n with the expansion point and the step used

    Raises:
        FreePartError: On a finite spin space or if v_n ≤ 0 near u_o
    """
    lattice = TorusLattice(spec)
    tau = lattice.tau
    if site.is_discrete:
        raise FreePartError(f"Free part needs a continuous site space, got {site.kind.value}")
    if fd_step <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {fd_step}")
    if action is None:
        return FreePart(np.zeros((tau, tau)), base_point, fd_step)

    h = fd_step
    eye = np.eye(tau) * h
    center = np.full(tau, base_point, dtype=float)
    # Stencil rows: u+h e_i+h e_j, u+h e_i−h e_j, u−h e_i+h e_j, u−h e_i−h e_j for all (i, j)
    plus = eye[:, None, :] + eye[None, :, :]
    minus = eye[:, None, :] - eye[None, :, :]
    stencil = np.concatenate(
        [
            center + plus.reshape(-1, tau),
            center + minus.reshape(-1, tau),
            center - minus.reshape(-1, tau),
            center - plus.reshape(-1, tau),
        ]
    )
    s = _neg_log_weight(action, lattice, site, stencil)
    pp, pm, mp, mm = (part.reshape(tau, tau) for part in np.split(s, 4))
    hessian = (pp - pm - mp + mm) / (4.0 * h * h)
    hessian = 0.5 * (hessian + hessian.T)
    logger.debug(f"Free part of {action.name} at u_o={base_point}: trace {np.trace(hessian):.6g}")
    return FreePart(0.5 * hessian, base_point, fd_step)
