"""Independent transfer-matrix oracles for periodic Ising chains.

Used only by tests; shares no code with the library.
"""

import numpy as np

SPINS = np.array([-1.0, 1.0])


def transfer_matrix(coupling: float, base_weights=(0.5, 0.5)) -> np.ndarray:
    root = np.sqrt(np.asarray(base_weights, dtype=float))
    return root[:, None] * np.exp(coupling * np.outer(SPINS, SPINS)) * root[None, :]


def ising_partition(coupling: float, length: int, base_weights=(0.5, 0.5)) -> float:
    """Tr T^L with the base weights folded into T."""
    return float(np.trace(np.linalg.matrix_power(transfer_matrix(coupling, base_weights), length)))


def ising_insertion(
    coupling: float, length: int, inserted: dict, base_weights=(0.5, 0.5)
) -> float:
    """⟨∏_i a_i(σ_i)⟩ for ``inserted`` mapping site → values on (−1, +1)."""
    transfer = transfer_matrix(coupling, base_weights)
    product = np.eye(2)
    for site in range(length):
        values = np.asarray(inserted.get(site, (1.0, 1.0)), dtype=float)
        product = product @ np.diag(values) @ transfer
    return float(np.trace(product)) / ising_partition(coupling, length, base_weights)


def ising_two_point(coupling: float, length: int, distance: int) -> float:
    """⟨σ₀σ_r⟩ on a periodic chain of ``length`` sites."""
    inserted = {0: SPINS, distance % length: SPINS} if distance % length else {}
    return ising_insertion(coupling, length, inserted)


def ising_correlation_length(coupling: float) -> float:
    return float(-1.0 / np.log(np.tanh(coupling)))
