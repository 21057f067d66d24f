"""Squeezing rotating-wave approximation for the anisotropic Rabi model.

After the spin-conditional displacement ``U = exp[beta sx (a^dag - a)]``
and the squeeze ``S = exp[lam (a^2 - a^dag^2)]`` the Hamiltonian is cut
down to an RWA-like form that only couples ``|+z, n>`` with
``|-z, n+1>``.  This module provides the frame coefficients, the
variational choices of ``(beta, lam)``, the resulting 2x2 blocks and
their eigenstates mapped back to the lab frame.

``method`` tags used throughout: ``"gsrwa"`` (closed-form beta and lam),
``"gsrwa-full"`` (numerical root of the elimination conditions),
``"gvm"`` (variational beta, lam = 0) and ``"grwa"`` (beta = g/omega,
lam = 0, isotropic only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DegenerateDenominator, TruncationError
from .fock import (
    MINUS_X,
    PLUS_X,
    FockTruncation,
    ModelParams,
    displacement_matrix,
    laguerre,
    squeeze_matrix,
    tail_mass,
)

METHODS = ("gsrwa", "gsrwa-full", "gvm", "grwa")


@dataclass(frozen=True)
class VariationalParams:
    beta: float
    lam: float
    method: str
    n: int | None = None  # block the full solve targeted
    iterations: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method in ("gvm", "grwa") and self.lam != 0.0:
            raise ValueError(f"{self.method} has no squeezing; lam must be 0")


class EtaCoefficients(NamedTuple):
    eta0: float
    eta1: float
    eta2: float
    eta3: float
    eta: float


def eta_coeffs(beta: float, lam: float, params: ModelParams) -> EtaCoefficients:
    """Scalars produced by squeezing the displaced Hamiltonian."""
    c, s = math.cosh(2 * lam), math.sinh(2 * lam)
    w = params.omega
    return EtaCoefficients(
        eta0=w * s * s + w * beta * beta - 2 * beta * params.alpha,
        eta1=c * c + s * s,
        eta2=c * s,
        eta3=math.exp(2 * lam),
        eta=math.exp(-2 * lam),
    )


# --- Fock matrix elements of cosh/sinh[x (a^dag - a)], x = 2 beta eta ---------

def _x(beta: float, lam: float) -> float:
    return 2.0 * beta * math.exp(-2.0 * lam)


def coeff_G0(n: int, beta: float, lam: float) -> float:
    """``<n| cosh[x(a^dag - a)] |n>``."""
    x2 = _x(beta, lam) ** 2
    return math.exp(-x2 / 2) * laguerre(n, 0, x2)


def coeff_G2(n: int, beta: float, lam: float) -> float:
    """``<n+2| cosh[x(a^dag - a)] |n> / sqrt((n+1)(n+2))``."""
    x2 = _x(beta, lam) ** 2
    return x2 * math.exp(-x2 / 2) * laguerre(n, 2, x2) / ((n + 1) * (n + 2))


def coeff_F(n: int, beta: float, lam: float) -> float:
    """``<n+1| sinh[x(a^dag - a)] |n> / sqrt(n+1)``."""
    x = _x(beta, lam)
    return x * math.exp(-x * x / 2) * laguerre(n, 1, x * x) / (n + 1)


def coeff_F3(n: int, beta: float, lam: float) -> float:
    """``<n+3| sinh[x(a^dag - a)] |n>`` (no normalizing factor)."""
    x = _x(beta, lam)
    return x**3 * math.exp(-x * x / 2) * laguerre(n, 3, x * x) / math.sqrt(
        (n + 1) * (n + 2) * (n + 3)
    )


def coeff_T(n: int, beta: float, lam: float) -> float:
    """``<n+1| (a^dag - a) cosh[x(a^dag - a)] |n> / sqrt(n+1)``."""
    return coeff_G0(n, beta, lam) - (n + 2) * coeff_G2(n, beta, lam)


def coeff_D0(n: int, beta: float, lam: float) -> float:
    """``<n| (a^dag - a) sinh[x(a^dag - a)] |n>``.

    Written with the normalized one-photon coefficients as
    ``-n F(n-1) - (n+1) F(n)``; sinh of an antisymmetric generator is
    antisymmetric, which fixes the sign of the ``<n-1|...|n>`` term.
    """
    lower = n * coeff_F(n - 1, beta, lam) if n > 0 else 0.0
    return -lower - (n + 1) * coeff_F(n, beta, lam)


def coeff_D2(n: int, beta: float, lam: float) -> float:
    """``<n+2| (a^dag - a) sinh[x(a^dag - a)] |n> / sqrt((n+1)(n+2))``."""
    return coeff_F(n, beta, lam) - math.sqrt(n + 3) / math.sqrt(
        (n + 1) * (n + 2)
    ) * coeff_F3(n, beta, lam)


class Coefficients(NamedTuple):
    G0: float
    G2: float
    F: float
    T: float
    D0: float
    D2: float
    F3: float


def coefficients(n: int, beta: float, lam: float) -> Coefficients:
    return Coefficients(
        coeff_G0(n, beta, lam),
        coeff_G2(n, beta, lam),
        coeff_F(n, beta, lam),
        coeff_T(n, beta, lam),
        coeff_D0(n, beta, lam),
        coeff_D2(n, beta, lam),
        coeff_F3(n, beta, lam),
    )


# --- variational parameters ---------------------------------------------------

def kappa(params: ModelParams) -> float:
    denom = params.omega + params.delta
    if denom <= 0:
        raise DegenerateDenominator("omega + delta must be positive")
    return (params.alpha + params.gamma) / denom


def lambda_closed(params: ModelParams) -> float:
    """Small-parameter squeezing estimate."""
    k = kappa(params)
    num = (params.delta * k * k - 2 * params.gamma * k) * (1 - 2 * k * k)
    denom = 2 * params.omega + 4 * num
    if abs(denom) < 1e-12:
        raise DegenerateDenominator(f"lambda denominator {denom:.3e}")
    return num / denom


def beta_closed(params: ModelParams, lam: float) -> float:
    k = kappa(params)
    q = math.exp(-4 * lam) * math.exp(-2 * k * k * math.exp(-4 * lam))
    return (params.alpha + params.gamma * q) / (params.omega + params.delta * q)


def beta_gvm(params: ModelParams) -> float:
    return beta_closed(params, 0.0)


def beta_grwa(params: ModelParams) -> float:
    if params.tau != 1.0:
        raise ValueError("GRWA is defined for the isotropic model (tau = 1) only")
    return params.g / params.omega


def elimination_residuals(
    params: ModelParams, vp: VariationalParams, n: int = 0
) -> tuple[float, float]:
    """Left-hand sides of the CRW and two-photon elimination conditions.

    The first vanishes when ``<n+1,+z|H|n,-z>`` does, the second when
    ``<n+2,-z|H|n,-z>`` does (the squeeze term is ``omega * eta2``).
    """
    eta = eta_coeffs(vp.beta, vp.lam, params)
    c = coefficients(n, vp.beta, vp.lam)
    d, gm = params.delta, params.gamma
    crw = (params.alpha - params.omega * vp.beta) * eta.eta3 - d / 2 * c.F + gm * eta.eta * c.T
    two = params.omega * eta.eta2 - (d / 2 * c.G2 - gm * eta.eta * c.D2)
    return crw, two


def simplified_residuals(
    params: ModelParams, vp: VariationalParams, n: int = 0
) -> tuple[float, float]:
    """The elimination conditions with the small-argument Laguerre limits
    ``L_n^k -> binom(n+k, k)`` substituted, in their printed normalization."""
    b, lam = vp.beta, vp.lam
    d, gm, w = params.delta, params.gamma, params.omega
    eta2b2 = (b * math.exp(-2 * lam)) ** 2
    e = math.exp(-2 * eta2b2)
    q = math.exp(-4 * lam)
    r1 = (params.alpha - w * b) - d * b * q * e + gm * q * (1 - 2 * (n + 2) * eta2b2) * e
    r2 = (
        w * (math.exp(4 * lam) - q)
        - 4 * d * b * b * q * e
        + 4 * gm * q * (2 * b - 4.0 / 3.0 * (n + 4) * b**3 * q) * e
    )
    return r1, r2


def solve_variational_full(
    params: ModelParams,
    n: int = 0,
    init: VariationalParams | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> VariationalParams:
    """Damped Newton root of both elimination conditions for block ``n``.

    Seeds from the closed forms unless ``init`` is given.  The Jacobian is
    taken by central differences.  Only the root reached from the seed is
    returned; other roots are not searched for.
    """
    if init is None:
        init = closed_form_params(params)
    v = np.array([init.beta, init.lam], dtype=float)

    def resid(p):
        return np.array(
            elimination_residuals(params, VariationalParams(p[0], p[1], "gsrwa-full"), n)
        )

    r = resid(v)
    for it in range(max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            return VariationalParams(float(v[0]), float(v[1]), "gsrwa-full", n, it)
        if it == max_iter:
            break
        h = 1e-7
        jac = np.empty((2, 2))
        for j in range(2):
            step = np.zeros(2)
            step[j] = h
            jac[:, j] = (resid(v + step) - resid(v - step)) / (2 * h)
        try:
            dv = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian", residuals=tuple(r)) from exc
        # backtrack until the residual norm drops
        t = 1.0
        norm = np.linalg.norm(r)
        while t > 1e-4:
            trial = v + t * dv
            rt = resid(trial)
            if np.linalg.norm(rt) < norm:
                break
            t *= 0.5
        v, r = trial, rt
    raise ConvergenceError(
        f"no root after {max_iter} Newton steps (|r|={np.max(np.abs(r)):.2e})",
        residuals=tuple(r),
    )


def closed_form_params(params: ModelParams) -> VariationalParams:
    lam = lambda_closed(params)
    return VariationalParams(beta_closed(params, lam), lam, "gsrwa")


def variational_params(params: ModelParams, method: str, n: int = 0) -> VariationalParams:
    """Frame parameters for ``method``; ``n`` only matters for gsrwa-full."""
    if method == "gsrwa":
        return closed_form_params(params)
    if method == "gsrwa-full":
        return solve_variational_full(params, n)
    if method == "gvm":
        return VariationalParams(beta_gvm(params), 0.0, "gvm")
    if method == "grwa":
        return VariationalParams(beta_grwa(params), 0.0, "grwa")
    raise ValueError(f"unknown method {method!r}")


# --- block spectrum -----------------------------------------------------------

@dataclass(frozen=True)
class BlockSpectrum:
    """2x2 block coupling ``|+z, n>`` and ``|-z, n+1>``.

    ``R`` is the bare coupling; the matrix element is ``R * sqrt(n+1)``.
    """

    n: int
    f_n: float
    f_n1: float
    R: float
    delta_n: float
    theta_n: float
    E_plus: float
    E_minus: float
    matrix: np.ndarray

    def vector(self, branch: str) -> np.ndarray:
        """Block eigenvector in the ``(|+z,n>, |-z,n+1>)`` basis."""
        c, s = math.cos(self.theta_n / 2), math.sin(self.theta_n / 2)
        if branch == "+":
            return np.array([c, s])
        if branch == "-":
            return np.array([s, -c])
        raise ValueError("branch must be '+' or '-'")

    def energy(self, branch: str) -> float:
        return self.E_plus if branch == "+" else self.E_minus


def dressing(params: ModelParams, vp: VariationalParams, n: int) -> float:
    """Diagonal spin splitting ``f(n) = D/2 G0 - gamma eta D0``."""
    eta = math.exp(-2 * vp.lam)
    return params.delta / 2 * coeff_G0(n, vp.beta, vp.lam) - params.gamma * eta * coeff_D0(
        n, vp.beta, vp.lam
    )


def block_spectrum(params: ModelParams, vp: VariationalParams, n: int) -> BlockSpectrum:
    eta = eta_coeffs(vp.beta, vp.lam, params)
    c = coefficients(n, vp.beta, vp.lam)
    w = params.omega
    r = (
        (params.alpha - w * vp.beta) * eta.eta3
        + params.delta / 2 * c.F
        - params.gamma * eta.eta * c.T
    )
    f_n, f_n1 = dressing(params, vp, n), dressing(params, vp, n + 1)
    top = w * eta.eta1 * n + eta.eta0 + f_n
    bottom = w * eta.eta1 * (n + 1) + eta.eta0 - f_n1
    off = r * math.sqrt(n + 1)
    mat = np.array([[top, off], [off, bottom]])
    delta_n = top - bottom
    split = math.hypot(delta_n, 2 * off)
    theta = math.pi / 2 if split == 0.0 else math.atan2(2 * off, delta_n)
    mean = 0.5 * (top + bottom)
    return BlockSpectrum(
        n=n,
        f_n=f_n,
        f_n1=f_n1,
        R=r,
        delta_n=delta_n,
        theta_n=theta,
        E_plus=mean + 0.5 * split,
        E_minus=mean - 0.5 * split,
        matrix=mat,
    )


def ground_energy(params: ModelParams, vp: VariationalParams) -> float:
    """Energy of ``|0, -z>`` in the transformed frame."""
    return eta_coeffs(vp.beta, vp.lam, params).eta0 - dressing(params, vp, 0)


class Level(NamedTuple):
    energy: float
    branch: str  # "0" for the ground level, else "+" or "-"
    n: int | None


def full_spectrum(params: ModelParams, vp: VariationalParams, n_levels: int) -> list[Level]:
    """Ground level plus both branches of blocks ``0..n_levels``, sorted."""
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    levels = [Level(ground_energy(params, vp), "0", None)]
    for n in range(n_levels + 1):
        blk = block_spectrum(params, vp, n)
        levels.append(Level(blk.E_minus, "-", n))
        levels.append(Level(blk.E_plus, "+", n))
    return sorted(levels, key=lambda lv: lv.energy)


def lowest_levels(params: ModelParams, vp: VariationalParams, count: int) -> list[Level]:
    """The ``count`` lowest levels, adding blocks until the set is stable."""
    # block n sits near omega*n, so this many blocks reach past the count
    n_blocks = count + int(math.ceil(abs(params.delta) / params.omega)) + 2
    while True:
        levels = full_spectrum(params, vp, n_blocks)[:count]
        extra = full_spectrum(params, vp, n_blocks + 4)[:count]
        if [lv.energy for lv in levels] == [lv.energy for lv in extra]:
            return levels
        n_blocks += 4


def lowest_energies(params: ModelParams, vp: VariationalParams, count: int) -> np.ndarray:
    return np.array([lv.energy for lv in lowest_levels(params, vp, count)])


# --- lab-frame states ---------------------------------------------------------

def frame_transform(vp: VariationalParams, trunc: FockTruncation) -> np.ndarray:
    """Matrix of ``U^dag S^dag`` on the blocked product basis.

    ``U^dag`` displaces the ``+x`` spin component by ``-beta`` and the
    ``-x`` component by ``+beta``.
    """
    s_dag = squeeze_matrix(-vp.lam, trunc)
    plus = np.outer(PLUS_X, PLUS_X)
    minus = np.outer(MINUS_X, MINUS_X)
    u_dag = np.kron(plus, displacement_matrix(-vp.beta, trunc)) + np.kron(
        minus, displacement_matrix(vp.beta, trunc)
    )
    return u_dag @ np.kron(np.eye(2), s_dag)


def frame_state(block: BlockSpectrum | None, branch: str, trunc: FockTruncation) -> np.ndarray:
    """Transformed-frame eigenvector on the blocked product basis."""
    phi = np.zeros(trunc.dim)
    if block is None:
        phi[trunc.size] = 1.0  # |-z, 0>
        return phi
    if block.n + 1 > trunc.n_max:
        raise TruncationError(f"block {block.n} does not fit in n_max={trunc.n_max}")
    top, bottom = block.vector(branch)
    phi[block.n] = top
    phi[trunc.size + block.n + 1] = bottom
    return phi


def _check_state(psi: np.ndarray, trunc: FockTruncation) -> np.ndarray:
    leak = tail_mass(psi, trunc)
    if leak > 1e-6:
        raise TruncationError(f"state has {leak:.2e} weight in the top Fock levels")
    return psi / np.linalg.norm(psi)


def eigenstate_original_frame(
    params: ModelParams,
    vp: VariationalParams,
    block: BlockSpectrum | None,
    branch: str,
    trunc: FockTruncation,
    transform: np.ndarray | None = None,
) -> np.ndarray:
    """Lab-frame dressed state ``U^dag S^dag |phi>``.

    Pass ``block=None`` (branch ignored) for the ground state built on
    ``|0, -z>``.  A precomputed `frame_transform` may be supplied when many
    states share the same frame.
    """
    if transform is None:
        transform = frame_transform(vp, trunc)
    return _check_state(transform @ frame_state(block, branch, trunc), trunc)


def ground_state(params: ModelParams, vp: VariationalParams, trunc: FockTruncation) -> np.ndarray:
    return eigenstate_original_frame(params, vp, None, "0", trunc)


def displaced_squeezed_state(
    n: int, sign: int, vp: VariationalParams, trunc: FockTruncation
) -> np.ndarray:
    """Oscillator state ``exp[-sign beta (a^dag - a)] S^dag |n>``.

    ``sign=+1`` is the ``+x`` branch, ``sign=-1`` the ``-x`` branch.
    """
    vec = np.zeros(trunc.size)
    vec[n] = 1.0
    vec = squeeze_matrix(-vp.lam, trunc) @ vec
    return displacement_matrix(-sign * vp.beta, trunc) @ vec


# --- ground-state quadratures -------------------------------------------------

def mean_a(vp: VariationalParams) -> float:
    """``<a>`` in the ``+x``-branch displaced-squeezed vacuum."""
    return -vp.beta


def mean_n(vp: VariationalParams) -> float:
    return math.sinh(2 * vp.lam) ** 2 + vp.beta**2


def momentum_variance(params: ModelParams, vp: VariationalParams) -> float:
    return params.omega / 2 * math.exp(-4 * vp.lam)


def position_variance(params: ModelParams, vp: VariationalParams) -> float:
    """Branch position variance; the full ground state adds ``2 beta^2 / omega``."""
    return math.exp(4 * vp.lam) / (2 * params.omega)
