"""Euclidean-time reflections and reflexion-positivity Gram tests."""

import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh

from src.common.types import Verdict
from src.gibbs.state import GibbsState
from src.gibbs.types import LatticeObservable
from src.sitespace import observables
from src.sitespace.types import SiteObservable, SiteSpace

from .exceptions import ReflectionError, ReflectionSupportError
from .types import GramCheck, Layer, ReflectionStructure

logger = logging.getLogger(__name__)

MAX_BASIS = 256
PSD_TOLERANCE = 1e-10


def time_reflection(reflection: ReflectionStructure, obs: LatticeObservable) -> LatticeObservable:
    """j_μ: each factor (Δ, a) ↦ (θ_μΔ, a*), coefficient conjugated."""
    factors = tuple((reflection.reflect_cube(cube), a.conjugate()) for cube, a in obs.factors)
    return LatticeObservable(factors, complex(obs.coefficient).conjugate())


def _site_generators(site: SiteSpace) -> List[SiteObservable]:
    if site.is_discrete:
        return [observables.projection_onto([value]) for value in site.nodes[:-1]]
    return [observables.field(), observables.power(2)]


def default_rp_basis(
    reflection: ReflectionStructure, site: SiteSpace, cap: int = MAX_BASIS
) -> List[LatticeObservable]:
    """𝟙, single factors on layers 0 ∪ +, and pair products inside +, truncated at ``cap``."""
    local = _site_generators(site)
    support = reflection.layer_cubes(Layer.ZERO) + reflection.layer_cubes(Layer.PLUS)
    plus = reflection.layer_cubes(Layer.PLUS)
    basis = [LatticeObservable.unit()]
    basis += [LatticeObservable.single(cube, a) for cube in support for a in local]
    basis += [
        LatticeObservable.single(first, a) * LatticeObservable.single(second, b)
        for i, first in enumerate(plus)
        for second in plus[i + 1 :]
        for a in local
        for b in local
    ]
    if len(basis) > cap:
        logger.warning(f"RP basis truncated from {len(basis)} to {cap} elements")
        basis = basis[:cap]
    return basis


def _check_support(reflection: ReflectionStructure, basis: Sequence[LatticeObservable]) -> None:
    for obs in basis:
        for cube in obs.cubes:
            if reflection.layer_of(cube) is Layer.MINUS:
                raise ReflectionSupportError(
                    f"{obs.name} has a factor at {cube} in the negative half", obs.name
                )


def rp_gram_check(
    state: GibbsState,
    reflection: ReflectionStructure,
    basis: Optional[Sequence[LatticeObservable]] = None,
    tolerance: float = PSD_TOLERANCE,
) -> GramCheck:
    """Assemble M_ij = ⟨η, j_μ(a_i)·a_j⟩ and test it for positive semi-definiteness.

    Args:
        state: Gibbs state on the reflection's lattice
        reflection: Reflection θ_μ
        basis: Observables supported on layers 0 ∪ +; defaults to :func:`default_rp_basis`
        tolerance: PSD if the smallest eigenvalue is ≥ −tolerance·‖M‖

    Returns:
        Gram matrix, smallest eigenvalue of its Hermitian part and verdict

    Raises:
        ReflectionSupportError: If a basis element touches the negative half
        ReflectionError: If the basis exceeds the size cap
    """
    if state.spec != reflection.spec:
        raise ReflectionError(f"State lives on {state.spec}, reflection on {reflection.spec}")
    basis = list(basis) if basis is not None else default_rp_basis(reflection, state.site)
    if len(basis) > MAX_BASIS:
        raise ReflectionError(f"Basis of {len(basis)} elements exceeds {MAX_BASIS}")
    _check_support(reflection, basis)

    size = len(basis)
    reflected = [time_reflection(reflection, obs) for obs in basis]
    matrix = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(size):
            matrix[i, j] = complex(state.expectation(reflected[i] * basis[j]).value)

    hermiticity_defect = float(np.max(np.abs(matrix - matrix.conj().T)))
    eigenvalues = eigvalsh(0.5 * (matrix + matrix.conj().T))
    norm = float(np.max(np.abs(eigenvalues)))
    min_eigenvalue = float(eigenvalues[0])
    verdict = Verdict.PASS if min_eigenvalue >= -tolerance * max(norm, 1.0) else Verdict.FAIL
    logger.info(
        f"RP Gram check on axis {reflection.axis}: {size} elements, "
        f"min eigenvalue {min_eigenvalue:.3g}, verdict {verdict.value}"
    )
    if not np.any(np.imag(matrix)):
        matrix = np.real(matrix)
    return GramCheck(
        matrix=matrix,
        labels=[obs.name for obs in basis],
        min_eigenvalue=min_eigenvalue,
        norm=norm,
        hermiticity_defect=hermiticity_defect,
        verdict=verdict,
    )
