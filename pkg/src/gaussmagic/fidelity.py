"""Gaussian fidelity estimation and the covering-net bound machinery.

The fidelity of a target with the Gaussian family is maximized over chart
coordinates: complete the chart, normalize, take the squared overlap.  The
objective is invariant under rescaling the chart (completion is homogeneous
of degree one), so the optimization runs unconstrained over the free complex
chart entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import _pool
from .labels import even_label_array, hamming_weight
from .states import (
    EvenParityState,
    PIVOT_TOL,
    chart_labels,
    lambda_residual_norm,
    random_gaussian,
    _complete_batch,
    _complete_vector,
)

WITNESS_TOL = 1e-9
GRAD_STEP = 1e-6
RECENTER_RATIO = 0.1
MAX_RECENTERS = 2


@dataclass(frozen=True, eq=False)
class FidelityResult:
    """Best found squared overlap with a Gaussian state, plus the maximizer."""

    value: float
    witness: EvenParityState
    restarts_used: int
    converged: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0 + 1e-12:
            raise ValueError(f"fidelity value {self.value} outside [0, 1]")
        if lambda_residual_norm(self.witness) > WITNESS_TOL:
            raise ValueError("fidelity witness fails the Gaussianity check")


def haar_random_even_state(
    n: int, seed: int | np.random.Generator | np.random.SeedSequence
) -> EvenParityState:
    """Uniform random unit vector on the even sector."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dim = 1 << (n - 1)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return EvenParityState(n, vec / np.linalg.norm(vec), normalized=True)


def _objective_values(
    n: int, favored: int, target_conj: np.ndarray, charts: np.ndarray
) -> np.ndarray:
    amps = _complete_batch(n, favored, charts)
    overlaps = amps @ target_conj
    norms = np.einsum("ij,ij->i", amps.real, amps.real) + np.einsum(
        "ij,ij->i", amps.imag, amps.imag
    )
    return -(np.abs(overlaps) ** 2) / norms


def _optimize_chart(
    n: int,
    favored: int,
    start: np.ndarray,
    target_amps: np.ndarray,
    maxiter: int,
) -> tuple[np.ndarray, int, bool]:
    """L-BFGS over real/imaginary chart coordinates with batched gradients."""
    target_conj = np.conj(target_amps)
    labels = even_label_array(n)

    for attempt in range(MAX_RECENTERS + 1):
        k = len(chart_labels(n, favored))
        eye = np.eye(k)

        def fun_and_grad(theta, _favored=favored, _k=k, _eye=eye):
            c = theta[:_k] + 1j * theta[_k:]
            charts = np.vstack(
                [
                    c[None, :],
                    c[None, :] + GRAD_STEP * _eye,
                    c[None, :] - GRAD_STEP * _eye,
                    c[None, :] + 1j * GRAD_STEP * _eye,
                    c[None, :] - 1j * GRAD_STEP * _eye,
                ]
            )
            vals = _objective_values(n, _favored, target_conj, charts)
            grad_re = (vals[1 : 1 + _k] - vals[1 + _k : 1 + 2 * _k]) / (2 * GRAD_STEP)
            grad_im = (vals[1 + 2 * _k : 1 + 3 * _k] - vals[1 + 3 * _k :]) / (
                2 * GRAD_STEP
            )
            return vals[0], np.concatenate([grad_re, grad_im])

        theta0 = np.concatenate([start.real, start.imag])
        res = minimize(
            fun_and_grad, theta0, jac=True, method="L-BFGS-B",
            options={"maxiter": maxiter},
        )
        c = res.x[:k] + 1j * res.x[k:]
        pivot_pos = chart_labels(n, favored).index(favored)
        if (
            abs(c[pivot_pos]) >= RECENTER_RATIO * np.max(np.abs(c))
            or attempt == MAX_RECENTERS
        ):
            return _complete_vector(n, favored, c), favored, bool(res.success)
        # pivot collapsed: re-center the chart on the current largest amplitude
        amps = _complete_vector(n, favored, c)
        favored = int(labels[int(np.argmax(np.abs(amps)))])
        index = {z: i for i, z in enumerate(labels)}
        start = amps[[index[z] for z in chart_labels(n, favored)]]
    raise AssertionError("unreachable")


def _restrict_to_chart(state: EvenParityState, favored: int) -> np.ndarray:
    return np.array(
        [state.amplitude(z) for z in chart_labels(state.n, favored)],
        dtype=np.complex128,
    )


def gaussian_fidelity(
    target: EvenParityState,
    restarts: int = 50,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
    maxiter: int = 300,
) -> FidelityResult:
    """Multi-start estimate of the best squared overlap with a Gaussian state.

    Restart 0 starts from the target's own chart restriction at its largest
    amplitude; later restarts alternate random charts with charts of random
    Gaussian states.  The result is a certified lower bound on the true
    maximum (each witness is an exact Gaussian state).
    """
    nrm = target.norm()
    if nrm == 0.0:
        raise ValueError("target state is zero")
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("target state must be normalized")
    n = target.n
    labels = even_label_array(n)
    favored0 = int(labels[int(np.argmax(np.abs(target.amplitudes)))])
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    children = master.spawn(max(restarts, 1))
    target_amps = target.amplitudes

    def one_restart(i: int) -> tuple[float, np.ndarray, int, bool]:
        if i == 0:
            favored = favored0
            start = _restrict_to_chart(target, favored)
        else:
            rng = np.random.default_rng(children[i])
            if i % 2 == 1:
                favored = favored0
                k = len(chart_labels(n, favored))
                start = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)
                pivot_pos = chart_labels(n, favored).index(favored)
                while abs(start[pivot_pos]) < 0.05:
                    start[pivot_pos] = complex(
                        rng.standard_normal() + 1j * rng.standard_normal()
                    ) / np.sqrt(2)
            else:
                g = random_gaussian(n, rng)
                favored = int(labels[int(np.argmax(np.abs(g.amplitudes)))])
                start = _restrict_to_chart(g, favored)
        amps, favored_final, success = _optimize_chart(
            n, favored, start, target_amps, maxiter
        )
        witness = amps / np.linalg.norm(amps)
        value = abs(np.vdot(target_amps, witness)) ** 2
        return value, witness, favored_final, success

    results = _pool.run_indexed(one_restart, max(restarts, 1), threads)
    best = max(range(len(results)), key=lambda i: results[i][0])
    value, witness_amps, _, success = results[best]
    witness = EvenParityState(n, witness_amps, normalized=True)
    return FidelityResult(
        value=float(min(value, 1.0)),
        witness=witness,
        restarts_used=len(results),
        converged=success,
    )


# ---------------------------------------------------------------------------
# Covering-net bounds


def fidelity_upper_bound(n: int, delta: float) -> float:
    """The generic-state bound 2^(2-n) (1+delta) n^4, returned unclamped."""
    if n < 1:
        raise ValueError("n must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 2.0 ** (2 - n) * (1 + delta) * n**4


def delta_recursion(n: int, w: int, eta: float) -> float:
    """Propagated amplitude deviation at weight w from chart spacing eta.

    Delta_2 = eta and Delta_w = 2^n (2w - 1) Delta_{w-2}.
    """
    if w % 2 != 0:
        raise ValueError("deviation recursion is defined for even weights only")
    if not 2 <= w <= n:
        raise ValueError(f"weight {w} outside 2..{n}")
    value = eta
    for step in range(4, w + 1, 2):
        value *= 2.0**n * (2 * step - 1)
    return value


def delta_closed_form(n: int, w: int, eta: float) -> float:
    """Closed form of the deviation recursion, for cross-checking."""
    if w % 2 != 0:
        raise ValueError("deviation recursion is defined for even weights only")
    return (
        (1.0 / 3.0)
        * 2.0 ** ((n + 2) * w / 2 - n)
        * math.gamma(w / 2 + 0.75)
        / math.gamma(0.75)
        * eta
    )


class NetCardinality(NamedTuple):
    total_log2: float
    region_log2: float


def net_cardinality_bound(n: int, l: int) -> NetCardinality:
    """log2 cardinality bounds for the covering net at precision 2^(-l).

    total is n^4 + 2n^2 + n + l n^2; region is the per-chart-region bound
    2n^2 + 1 - n^2 log2(eta) at the canonical spacing eta = 2^(-n^2 - l).
    """
    total = n**4 + 2 * n**2 + n + l * n**2
    region = 2 * n**2 + 1 + n**2 * (n**2 + l)
    return NetCardinality(float(total), float(region))


@dataclass(frozen=True)
class NetSpec:
    """Covering-net parameters; the grid itself is only accessed pointwise.

    Materializing the net is hopeless at the canonical spacing, so regions
    are exposed through snap_chart (nearest grid point of a chart vector).
    """

    n: int
    l: int
    eta: float = 0.0
    cardinality_log2_bound: float = field(init=False)

    def __post_init__(self) -> None:
        if self.eta == 0.0:
            object.__setattr__(self, "eta", 2.0 ** -(self.n**2 + self.l))
        object.__setattr__(
            self, "cardinality_log2_bound", net_cardinality_bound(self.n, self.l).total_log2
        )

    def region_log2_bound(self) -> float:
        return 2 * self.n**2 + 1 - self.n**2 * math.log2(self.eta)

    def snap_chart(self, chart_vec: np.ndarray) -> np.ndarray:
        """Round each chart coordinate to the nearest grid point."""
        return (
            np.round(chart_vec.real / self.eta) * self.eta
            + 1j * np.round(chart_vec.imag / self.eta) * self.eta
        )


def perturbation_propagation_check(
    n: int,
    eta: float,
    trials: int,
    seed: int | np.random.SeedSequence = 0,
) -> dict:
    """Empirical check that chart perturbations stay controlled after completion.

    Samples Gaussian states with their largest amplitude at the zero label,
    perturbs every chart coordinate by at most eta, completes both charts,
    and compares the 1-norm distance against 2^(n^2) eta and the weight-4
    deviations against the recursion value.
    """
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    rng = np.random.default_rng(master)
    labels = even_label_array(n)
    weight4 = np.array([hamming_weight(int(x)) == 4 for x in labels])
    delta4 = delta_recursion(n, 4, eta) if n >= 4 else float("nan")
    denom = eta if eta > 0 else 1.0
    max_ratio = 0.0
    max_w4_ratio = 0.0
    for _ in range(trials):
        while True:
            state = random_gaussian(n, rng, method="chart")
            if int(np.argmax(np.abs(state.amplitudes))) == 0:
                break
        chart = _restrict_to_chart(state, 0)
        radii = eta * rng.random(chart.size)
        angles = 2 * np.pi * rng.random(chart.size)
        perturbed = chart + radii * np.exp(1j * angles)
        if abs(perturbed[0]) <= PIVOT_TOL:
            raise ValueError("perturbation invalidated the chart pivot")
        base = _complete_vector(n, 0, chart)
        moved = _complete_vector(n, 0, perturbed)
        dist = float(np.sum(np.abs(moved - base)))
        max_ratio = max(max_ratio, dist / denom)
        if n >= 4 and eta > 0:
            w4_dev = float(np.max(np.abs((moved - base)[weight4])))
            max_w4_ratio = max(max_w4_ratio, w4_dev / delta4)
    return {
        "n": n,
        "eta": eta,
        "trials": trials,
        "max_ratio": max_ratio,
        "ratio_bound": 2.0 ** (n * n),
        "max_weight4_ratio": max_w4_ratio,
        "ok": max_ratio <= 2.0 ** (n * n) and max_w4_ratio <= 1.0,
    }


def empirical_fidelity_survey(
    n: int,
    samples: int,
    seed: int | np.random.SeedSequence = 0,
    restarts: int = 8,
    threads: int | None = None,
) -> dict:
    """Fidelity estimates over Haar-random targets, with the analytic bound."""
    if n > 10:
        raise ValueError("survey supported up to n = 10")
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    children = master.spawn(2 * samples)
    values = []
    for i in range(samples):
        target = haar_random_even_state(n, children[2 * i])
        result = gaussian_fidelity(
            target, restarts=restarts, seed=children[2 * i + 1], threads=threads
        )
        values.append(result.value)
    bound = fidelity_upper_bound(n, 1.0)
    top = max(values) if values else 0.0
    if top > min(1.0, bound):
        raise AssertionError(
            f"observed fidelity {top} exceeds the claimed bound {bound}"
        )
    return {
        "n": n,
        "samples": samples,
        "values": values,
        "max": top,
        "bound": bound,
        "bound_vacuous": bound >= 1.0,
    }
