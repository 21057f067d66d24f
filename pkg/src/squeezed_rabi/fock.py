"""Model parameters, truncated Fock-space operators and reference states.

State vectors on the spin-oscillator product space use a *blocked* layout:
indices ``0..n_max`` hold the ``|+z, n>`` amplitudes and
``n_max+1..2*n_max+1`` hold ``|-z, n>``.  This is exactly
``np.kron(spin, oscillator)`` with spin vectors written as ``(up, down)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError, TruncationWarning

__all__ = [
    "ModelParams",
    "FockTruncation",
    "laguerre",
    "annihilation_matrix",
    "number_matrix",
    "displacement_matrix",
    "squeeze_matrix",
    "coherent_state",
    "parity_matrix",
    "product_state",
    "tail_mass",
    "PLUS_Z",
    "MINUS_Z",
    "PLUS_X",
    "MINUS_X",
]

PLUS_Z = np.array([1.0, 0.0])
MINUS_Z = np.array([0.0, 1.0])
PLUS_X = np.array([1.0, 1.0]) / math.sqrt(2.0)
MINUS_X = np.array([-1.0, 1.0]) / math.sqrt(2.0)

# matrix exponentials are trusted while the top levels carry less than this
_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the anisotropic Rabi Hamiltonian.

    ``g`` is the rotating-wave coupling and ``g * tau`` the
    counter-rotating one.  ``alpha`` and ``gamma`` are derived on access so
    they can never drift out of sync with ``g`` and ``tau``.
    """

    delta: float
    omega: float = 1.0
    g: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ("delta", "omega", "g", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    @property
    def alpha(self) -> float:
        return self.g * (self.tau + 1.0) / 2.0

    @property
    def gamma(self) -> float:
        return self.g * (self.tau - 1.0) / 2.0

    def with_g(self, g: float) -> "ModelParams":
        return ModelParams(self.delta, self.omega, g, self.tau)


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff; the oscillator keeps ``|0>..|n_max>``."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be an integer >= 1")

    @property
    def size(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


def laguerre(n: int, k: int, x):
    """Generalized Laguerre polynomial ``L_n^k(x)`` by upward recurrence.

    Uses ``(m+1) L_{m+1} = (2m + 1 + k - x) L_m - (m + k) L_{m-1}``, which is
    stable for the small orders and ``x >= 0`` used here.  ``x`` may be an
    array.
    """
    if n < 0:
        raise ValueError("order n must be non-negative")
    if isinstance(x, (int, float)):
        # scalar path: plain floats avoid numpy overhead in the block loops
        prev, cur = 1.0, 1.0 + k - x
        if n == 0:
            return 1.0
        for m in range(1, n):
            prev, cur = cur, ((2 * m + 1 + k - x) * cur - (m + k) * prev) / (m + 1)
        return cur
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + k - x) * cur - (m + k) * prev) / (m + 1)
    return cur if cur.ndim else float(cur)


def annihilation_matrix(trunc: FockTruncation) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, trunc.size, dtype=float)), 1)


def number_matrix(trunc: FockTruncation) -> np.ndarray:
    return np.diag(np.arange(trunc.size, dtype=float))


def _expm_antisymmetric(gen: np.ndarray) -> np.ndarray:
    # i*gen is Hermitian, so exp(gen) = V exp(-i w) V^H with real result
    w, v = np.linalg.eigh(1j * gen)
    return ((v * np.exp(-1j * w)) @ v.conj().T).real


def _guard_tail(mat: np.ndarray, what: str) -> None:
    # the columns we rely on are the low ones; their weight in the top
    # levels measures how much the truncation distorts the exponential
    size = mat.shape[0]
    top = max(1, size // 10)
    probe = mat[-top:, : max(1, size // 2)]
    leak = float(np.max(np.sum(probe**2, axis=0)))
    if leak > _TAIL_TOL:
        warnings.warn(
            f"{what}: {leak:.2e} of the low-column weight sits in the top "
            f"{top} Fock levels; raise n_max",
            TruncationWarning,
            stacklevel=3,
        )


def displacement_matrix(beta: float, trunc: FockTruncation) -> np.ndarray:
    """``exp[beta (a^dag - a)]`` in the truncated basis (real ``beta``).

    The result is exactly orthogonal; a `TruncationWarning` is emitted when
    the lower half of the columns leaks noticeably into the top tenth of
    the levels, which is where the truncation error lives.
    """
    if beta == 0.0:
        return np.eye(trunc.size)
    a = annihilation_matrix(trunc)
    mat = _expm_antisymmetric(beta * (a.T - a))
    _guard_tail(mat, "displacement")
    return mat


def squeeze_matrix(lam: float, trunc: FockTruncation) -> np.ndarray:
    """``exp[lam (a^2 - a^dag^2)]``; preserves photon-number parity."""
    if lam == 0.0:
        return np.eye(trunc.size)
    a = annihilation_matrix(trunc)
    a2 = a @ a
    gen = lam * (a2 - a2.T)
    # the generator never mixes even and odd photon numbers; exponentiating
    # each sector keeps the forbidden entries exactly zero
    mat = np.zeros_like(gen)
    for start in (0, 1):
        idx = np.arange(start, trunc.size, 2)
        mat[np.ix_(idx, idx)] = _expm_antisymmetric(gen[np.ix_(idx, idx)])
    _guard_tail(mat, "squeeze")
    return mat


def coherent_state(amp: float, trunc: FockTruncation) -> np.ndarray:
    """Real-amplitude coherent state, renormalized after truncation.

    Raises `TruncationError` if more than 1e-8 of the probability lies
    above ``n_max``.
    """
    n = np.arange(trunc.size)
    if amp == 0.0:
        vec = np.zeros(trunc.size)
        vec[0] = 1.0
        return vec
    lg = np.array([math.lgamma(k + 1.0) for k in n])
    logmag = -0.5 * amp * amp + n * math.log(abs(amp)) - 0.5 * lg
    vec = np.exp(logmag) * np.sign(amp) ** n
    kept = float(vec @ vec)
    if 1.0 - kept > 1e-8:
        raise TruncationError(
            f"coherent state amp={amp} loses {1.0 - kept:.2e} above n_max={trunc.n_max}"
        )
    return vec / math.sqrt(kept)


def parity_matrix(trunc: FockTruncation) -> np.ndarray:
    """``sigma_z (x) exp(i pi a^dag a)`` on the blocked product basis."""
    osc = (-1.0) ** np.arange(trunc.size)
    return np.diag(np.concatenate([osc, -osc]))


def product_state(spin: np.ndarray, osc: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(spin), np.asarray(osc))


def tail_mass(vec: np.ndarray, trunc: FockTruncation, levels: int = 5) -> float:
    """Weight of an oscillator or blocked product vector in its top levels."""
    vec = np.asarray(vec)
    if vec.shape == (trunc.dim,):
        parts = vec.reshape(2, trunc.size)
    elif vec.shape == (trunc.size,):
        parts = vec.reshape(1, trunc.size)
    else:
        raise ValueError(f"vector of shape {vec.shape} does not match n_max={trunc.n_max}")
    return float(np.sum(np.abs(parts[:, -levels:]) ** 2))
