"""Dense exact diagonalization and time evolution of the full Hamiltonian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericalError
from .fock import FockTruncation, ModelParams, annihilation_matrix

__all__ = [
    "ExactSpectrum",
    "build_hamiltonian",
    "diagonalize",
    "default_n_max",
    "solve_exact",
    "evolve",
    "population_minus_x",
]

CONVERGENCE_STEP = 50
CONVERGENCE_TOL = 1e-8

_SZ = np.diag([1.0, -1.0])
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
# i*sigma_y is real: [[0, 1], [-1, 0]]
_ISY = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class ExactSpectrum:
    energies: np.ndarray
    vectors: np.ndarray
    n_max_used: int
    converged_count: int

    def converged_energies(self) -> np.ndarray:
        return self.energies[: self.converged_count]


def build_hamiltonian(params: ModelParams, trunc: FockTruncation) -> np.ndarray:
    """Real symmetric matrix of
    ``D/2 sz + w a^dag a + alpha (a^dag + a) sx + gamma i sy (a^dag - a)``
    on the blocked basis."""
    a = annihilation_matrix(trunc)
    ad = a.T
    eye = np.eye(trunc.size)
    return (
        0.5 * params.delta * np.kron(_SZ, eye)
        + params.omega * np.kron(np.eye(2), ad @ a)
        + params.alpha * np.kron(_SX, ad + a)
        + params.gamma * np.kron(_ISY, ad - a)
    )


def diagonalize(h: np.ndarray, n_max: int | None = None) -> ExactSpectrum:
    """Full eigen-decomposition without a truncation check.

    ``converged_count`` is set to the full dimension; use `solve_exact` to
    get a truncation-checked spectrum.
    """
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if n_max is None:
        n_max = h.shape[0] // 2 - 1
    return ExactSpectrum(energies, vectors, n_max, len(energies))


def default_n_max(params: ModelParams) -> int:
    ratio = params.g / params.omega
    if ratio <= 1.0:
        return 120
    if ratio <= 2.0:
        return 200
    return 300


def solve_exact(
    params: ModelParams,
    n_max: int | None = None,
    levels: int = 10,
    max_n_max: int = 1600,
) -> ExactSpectrum:
    """Diagonalize at ``n_max`` and compare against ``n_max + 50``.

    Levels moving by more than ``1e-8 * omega`` are not counted as
    converged.  ``n_max`` is doubled until at least ``levels`` low levels
    are converged; `ConvergenceError` is raised past ``max_n_max``.
    """
    n_max = default_n_max(params) if n_max is None else n_max
    tol = CONVERGENCE_TOL * params.omega
    while True:
        spec = diagonalize(build_hamiltonian(params, FockTruncation(n_max)), n_max)
        ref = np.linalg.eigvalsh(
            build_hamiltonian(params, FockTruncation(n_max + CONVERGENCE_STEP))
        )
        moved = np.abs(ref[: len(spec.energies)] - spec.energies) > tol
        count = int(np.argmax(moved)) if moved.any() else len(spec.energies)
        if count >= levels:
            return ExactSpectrum(spec.energies, spec.vectors, n_max, count)
        if 2 * n_max > max_n_max:
            raise ConvergenceError(
                f"only {count} of {levels} levels converged at n_max={n_max}"
            )
        n_max *= 2


def evolve(spectrum: ExactSpectrum, psi0: np.ndarray, times) -> np.ndarray:
    """States ``exp(-iHt) psi0`` for each time; shape ``(len(times), dim)``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coeffs = spectrum.vectors.T @ psi0
    phases = np.exp(-1j * np.outer(times, spectrum.energies))
    return (phases * coeffs) @ spectrum.vectors.T


def population_minus_x(psi: np.ndarray) -> np.ndarray | float:
    """Reduced spin population ``<-x| rho_spin |-x>``.

    Accepts one blocked state vector or a stack of them (last axis).
    """
    psi = np.asarray(psi)
    half = psi.shape[-1] // 2
    # <-x, n| = (-<+z, n| + <-z, n|)/sqrt(2)
    proj = (psi[..., half:] - psi[..., :half]) / np.sqrt(2.0)
    pop = np.sum(np.abs(proj) ** 2, axis=-1)
    return float(pop) if pop.ndim == 0 else pop
