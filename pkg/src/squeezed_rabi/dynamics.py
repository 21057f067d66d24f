"""Spin population ``P_-x(t)`` from dressed-state expansions and the oracle.

The initial state is ``|-x> (x) exp[b (a^dag - a)] |amp>`` with a real
seed amplitude ``amp`` and frame displacement ``b``.  Its ``-x``
component at time ``t`` is expanded over the displaced-squeezed basis
``|m>_{-,ds} = exp[beta (a^dag - a)] S^dag |m>`` as
``C(t) = sum_m sum_k kappa[k, m] exp(-i E_k t) |m>_{-,ds}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import exact, gsrwa
from .errors import CrossCheckWarning, IncompleteBasis
from .fock import (
    MINUS_X,
    FockTruncation,
    ModelParams,
    coherent_state,
    product_state,
    squeeze_matrix,
)

COMPLETENESS_TOL = 1e-6


@dataclass(frozen=True)
class InitialStateSpec:
    coherent_amp: float = 0.0
    frame_displacement: float = 0.0


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    method: str

    def scaled_times(self, delta: float) -> np.ndarray:
        """Times in units of ``2 pi / delta``."""
        return self.times * delta / (2 * math.pi)


def initial_state(spec: InitialStateSpec, trunc: FockTruncation) -> np.ndarray:
    # real displacements compose additively on real coherent states
    osc = coherent_state(spec.coherent_amp + spec.frame_displacement, trunc)
    return product_state(MINUS_X, osc)


def overlap_polynomial(n: int, lam: float, amp: float) -> float:
    """Closed-form ``<n| S(lam) |-amp>`` as a finite sum over pair creations."""
    t = math.tanh(2 * lam)
    log_sech = math.log(1.0 / math.cosh(2 * lam))
    chi = math.sqrt(math.factorial(n)) * math.exp(-amp * amp / 2 + amp * amp * t / 2)
    total = 0.0
    for i in range(n // 2 + 1):
        total += (
            (-0.5 * t) ** i
            / (math.factorial(i) * math.factorial(n - 2 * i))
            * math.exp((n - 2 * i + 0.5) * log_sech)
            * (-amp) ** (n - 2 * i)
        )
    return chi * total


def overlap_ds_coherent(
    n: int, lam: float, coherent_amp: float, trunc: FockTruncation | None = None
) -> float:
    """``_{-,ds}<n| alpha_-1>`` when the frame displacement equals beta.

    The displacements cancel, leaving ``<n| S(lam) |amp>``, evaluated
    numerically.  The closed-form polynomial is checked alongside it and a
    `CrossCheckWarning` is issued if they differ by more than 1e-6.
    """
    if trunc is None:
        trunc = FockTruncation(max(60, n + 40, int(4 * coherent_amp**2) + 40))
    numeric = float((squeeze_matrix(lam, trunc) @ coherent_state(coherent_amp, trunc))[n])
    analytic = overlap_polynomial(n, lam, -coherent_amp)
    if abs(numeric - analytic) > 1e-6:
        warnings.warn(
            f"overlap n={n}: numeric {numeric:.10g} vs polynomial {analytic:.10g}",
            CrossCheckWarning,
            stacklevel=2,
        )
    return numeric


@dataclass(frozen=True)
class ExpansionTable:
    """Dressed-state expansion of one initial state.

    ``kappa[k, m]`` is the weight of level ``k`` on ``|m>_{-,ds}`` in the
    ``-x`` spin component, i.e. ``f_k`` times the level's own projection.
    """

    levels: list
    energies: np.ndarray
    f: np.ndarray
    kappa: np.ndarray
    completeness: float


def _minus_x_projections(blocks, n_terms: int) -> np.ndarray:
    # rows follow the level order: ground, then (-, n), (+, n) per block
    proj = np.zeros((1 + 2 * len(blocks), n_terms + 1))
    r2 = math.sqrt(2.0)
    proj[0, 0] = 1.0 / r2
    for blk in blocks:
        c, s = math.cos(blk.theta_n / 2), math.sin(blk.theta_n / 2)
        i_minus, i_plus = 1 + 2 * blk.n, 2 + 2 * blk.n
        # <-x| = (-<+z| + <-z|)/sqrt(2) applied to the block eigenvectors
        proj[i_plus, blk.n] = -c / r2
        proj[i_plus, blk.n + 1] = s / r2
        proj[i_minus, blk.n] = -s / r2
        proj[i_minus, blk.n + 1] = -c / r2
    return proj


def expansion_coeffs(
    params: ModelParams,
    vp: gsrwa.VariationalParams,
    spec: InitialStateSpec,
    n_terms: int = 40,
    trunc: FockTruncation | None = None,
    max_terms: int = 320,
) -> ExpansionTable:
    """Overlaps ``f_k`` of the initial state with the lab-frame dressed
    states of blocks ``0..n_terms-1`` (plus the ground state).

    ``n_terms`` is doubled until ``sum f_k^2 >= 1 - 1e-6``; past
    ``max_terms`` (or the supplied truncation) `IncompleteBasis` is raised.
    """
    fixed = trunc is not None
    while True:
        tr = trunc if fixed else FockTruncation(n_terms + 60)
        if n_terms + 1 > tr.n_max:
            raise IncompleteBasis(f"n_terms={n_terms} does not fit in n_max={tr.n_max}")
        blocks = [gsrwa.block_spectrum(params, vp, n) for n in range(n_terms)]
        levels = [gsrwa.Level(gsrwa.ground_energy(params, vp), "0", None)]
        for blk in blocks:
            levels.append(gsrwa.Level(blk.E_minus, "-", blk.n))
            levels.append(gsrwa.Level(blk.E_plus, "+", blk.n))
        transform = gsrwa.frame_transform(vp, tr)
        psi0 = initial_state(spec, tr)
        states = np.empty((tr.dim, len(levels)))
        states[:, 0] = gsrwa.eigenstate_original_frame(params, vp, None, "0", tr, transform)
        for blk in blocks:
            for branch, col in (("-", 1 + 2 * blk.n), ("+", 2 + 2 * blk.n)):
                states[:, col] = gsrwa.eigenstate_original_frame(
                    params, vp, blk, branch, tr, transform
                )
        f = states.T @ psi0
        completeness = float(f @ f)
        if completeness >= 1.0 - COMPLETENESS_TOL:
            kappa = f[:, None] * _minus_x_projections(blocks, n_terms)
            return ExpansionTable(
                levels, np.array([lv.energy for lv in levels]), f, kappa, completeness
            )
        if fixed or 2 * n_terms > max_terms:
            raise IncompleteBasis(
                f"dressed states capture only {completeness:.8f} of the initial state"
            )
        n_terms *= 2


def population_amplitude(table: ExpansionTable, times) -> np.ndarray:
    """``sum_m |C_m(t)|^2`` from the complex amplitudes."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    amps = np.exp(-1j * np.outer(times, table.energies)) @ table.kappa
    return np.sum(np.abs(amps) ** 2, axis=1)


def population_cosine_sum(table: ExpansionTable, times) -> np.ndarray:
    """The same population written as a constant plus beat cosines.

    Only level pairs sharing a basis state ``|m>_{-,ds}`` contribute, at
    the beat frequencies ``E_k - E_k'``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    weights = table.kappa @ table.kappa.T
    const = float(np.trace(weights))
    rows, cols = np.nonzero(np.triu(weights, 1))
    gaps = table.energies[rows] - table.energies[cols]
    return const + np.cos(np.outer(times, gaps)) @ (2.0 * weights[rows, cols])


def population_analytic(
    params: ModelParams,
    vp: gsrwa.VariationalParams,
    spec: InitialStateSpec,
    times,
    n_terms: int = 40,
) -> TimeSeries:
    table = expansion_coeffs(params, vp, spec, n_terms)
    times = np.asarray(times, dtype=float)
    return TimeSeries(times, population_cosine_sum(table, times), vp.method)


def population_exact(
    params: ModelParams,
    spec: InitialStateSpec,
    times,
    trunc: FockTruncation | None = None,
) -> TimeSeries:
    n_max = trunc.n_max if trunc is not None else None
    spectrum = exact.solve_exact(params, n_max)
    tr = FockTruncation(spectrum.n_max_used)
    times = np.asarray(times, dtype=float)
    states = exact.evolve(spectrum, initial_state(spec, tr), times)
    return TimeSeries(times, exact.population_minus_x(states), "exact")


def rms_difference(a: TimeSeries, b: TimeSeries) -> float:
    if not np.array_equal(a.times, b.times):
        raise ValueError("time grids differ")
    return float(np.sqrt(np.mean((a.values - b.values) ** 2)))
