"""Linearly dependent triples of Gaussian states.

Weight <= 2 states are Gaussian exactly when the quadratic relations over
their pair amplitudes vanish.  Anchoring one nonzero pair amplitude a_x
solves the whole system in closed form, leaving a_0 plus the 2n-3 pair
amplitudes that share an index with the anchor as free parameters.  Any
such solution splits the vacuum into two Gaussian pieces, giving a triple
psi0 = alpha psi1 + beta psi2 with all three states Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .labels import hamming_weight, label_from_positions, set_positions
from .states import (
    EvenParityState,
    MatchgateCircuit,
    PIVOT_TOL,
    apply_circuit,
    lambda_residual_norm,
)

TRIPLE_TOL = 1e-9
SOLVE_TOL = 1e-10
RANK_CUT = 1e-8
RANK_GAP = 1e3


def pair_label(n: int, i: int, j: int) -> int:
    """Label with set bits at 1-indexed positions i and j."""
    if i == j:
        raise ValueError("pair positions must be distinct")
    return label_from_positions((i, j), n)


def sign_s(b0: int, b1: int, c0: int, c1: int, which: int) -> int:
    """Sign attached to the two product terms when solving for a disjoint pair.

    which=0 signs a_{[b0,c0]} a_{[b1,c1]}, which=1 signs a_{[b0,c1]} a_{[b1,c0]}.
    """
    if len({b0, b1, c0, c1}) != 4:
        raise ValueError("index sets overlap")
    if not (b0 < b1 and c0 < c1):
        raise ValueError("pairs must be ordered b0<b1, c0<c1")
    if which == 0:
        nested = (b0 < c0 < c1 < b1) or (c0 < b0 < b1 < c1)
        return -1 if nested else 1
    if which == 1:
        disjoint = (b0 < b1 < c0 < c1) or (c0 < c1 < b0 < b1)
        return -1 if disjoint else 1
    raise ValueError("which must be 0 or 1")


def sign_t(bk: int, d0: int, d1: int, d2: int, which: int) -> int:
    """Signs of the three terms of an equation with one anchored index."""
    if len({bk, d0, d1, d2}) != 4:
        raise ValueError("index sets overlap")
    if not d0 < d1 < d2:
        raise ValueError("d positions must be ascending")
    if which == 0:
        return -1 if d0 < d1 < bk < d2 else 1
    if which == 1:
        return -1 if (bk < d0 < d1 < d2) or (d0 < d1 < d2 < bk) else 1
    if which == 2:
        return -1 if d0 < bk < d1 < d2 else 1
    raise ValueError("which must be 0, 1 or 2")


@lru_cache(maxsize=None)
def _pair_positions(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(1, n + 1), 2))


@lru_cache(maxsize=None)
def _quadruples(n: int) -> tuple[tuple[int, int, int, int], ...]:
    return tuple(combinations(range(1, n + 1), 4))


def _pair_amplitudes(state: EvenParityState) -> dict[tuple[int, int], complex]:
    n = state.n
    return {pq: state.amplitude(pair_label(n, *pq)) for pq in _pair_positions(n)}


def quad_relation(a: Mapping[tuple[int, int], complex], quad: Sequence[int]) -> complex:
    """The three-term relation at positions k1<k2<k3<k4 over pair amplitudes."""
    k1, k2, k3, k4 = quad
    return (
        a[(k1, k2)] * a[(k3, k4)]
        - a[(k1, k3)] * a[(k2, k4)]
        + a[(k1, k4)] * a[(k2, k3)]
    )


def pair_system_residuals(state: EvenParityState) -> dict[tuple[int, int, int, int], complex]:
    """Residuals of every quadruple relation on a weight <= 2 state."""
    amps = _pair_amplitudes(state)
    return {quad: quad_relation(amps, quad) for quad in _quadruples(state.n)}


def free_pair_labels(n: int, anchor: int) -> list[int]:
    """The 2n-3 pair labels sharing an index with the anchor, anchor first."""
    b0, b1 = _anchor_positions(n, anchor)
    out = [anchor]
    for pq in _pair_positions(n):
        if pq == (b0, b1):
            continue
        if b0 in pq or b1 in pq:
            out.append(pair_label(n, *pq))
    return out


def _anchor_positions(n: int, anchor: int) -> tuple[int, int]:
    if hamming_weight(anchor) != 2:
        raise ValueError(f"anchor label {anchor} does not have weight 2")
    pos = set_positions(anchor, n)
    return pos[0], pos[1]


def solve_triple_chart(
    n: int, free: Mapping[int, complex], anchor: int
) -> EvenParityState:
    """Fill in the pair amplitudes disjoint from the anchor.

    free maps labels (0 and pair labels meeting the anchor) to values;
    missing labels default to zero.  The returned weight <= 2 state is not
    normalized.  All quadruple relations are re-checked to SOLVE_TOL.
    """
    b0, b1 = _anchor_positions(n, anchor)
    allowed = set(free_pair_labels(n, anchor)) | {0}
    for label in free:
        if label not in allowed:
            raise ValueError(
                f"label {label} is not free for anchor {anchor} (weight-2 "
                "labels must share an index with the anchor)"
            )
    a_x = complex(free.get(anchor, 0.0))
    if abs(a_x) <= PIVOT_TOL:
        raise ValueError("anchor amplitude is zero or below pivot tolerance")

    a: dict[tuple[int, int], complex] = {}
    for pq in _pair_positions(n):
        if b0 in pq or b1 in pq:
            a[pq] = complex(free.get(pair_label(n, *pq), 0.0))
    for pq in _pair_positions(n):
        if b0 in pq or b1 in pq:
            continue
        c0, c1 = pq
        s0 = sign_s(b0, b1, c0, c1, 0)
        s1 = sign_s(b0, b1, c0, c1, 1)
        a[pq] = (
            s0 * a[_ordered(b0, c0)] * a[_ordered(b1, c1)]
            + s1 * a[_ordered(b0, c1)] * a[_ordered(b1, c0)]
        ) / a_x

    values = {0: complex(free.get(0, 0.0))}
    for pq, value in a.items():
        values[pair_label(n, *pq)] = value
    state = EvenParityState.from_amplitude_map(n, values)

    worst = max(abs(r) for r in pair_system_residuals(state).values())
    scale = max(max(abs(v) for v in a.values()), 1.0)
    if worst > SOLVE_TOL * scale * scale:
        raise ValueError(f"anchored solve left residual {worst:.3e}")
    return state


def _ordered(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class GaussianTriple:
    """Three normalized Gaussian states with psi0 = alpha psi1 + beta psi2."""

    psi0: EvenParityState
    psi1: EvenParityState
    psi2: EvenParityState
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        combo = (
            self.psi0.amplitudes
            - self.alpha * self.psi1.amplitudes
            - self.beta * self.psi2.amplitudes
        )
        if np.linalg.norm(combo) > TRIPLE_TOL:
            raise ValueError("triple is not linearly dependent to tolerance")
        for name, st in (("psi0", self.psi0), ("psi1", self.psi1), ("psi2", self.psi2)):
            if lambda_residual_norm(st) > TRIPLE_TOL:
                raise ValueError(f"component {name} fails the Gaussianity check")


def build_triple(
    n: int,
    circuit: MatchgateCircuit | None,
    free: Mapping[int, complex],
    anchor: int,
) -> GaussianTriple:
    """Assemble the triple (U|0>, U psi1/alpha, U psi2/beta) from a chart.

    psi1 is the anchored solution including its vacuum amplitude, psi2 the
    complementary piece (1 - a_0)|0> minus the pair amplitudes, so that
    psi1 + psi2 is exactly the vacuum.
    """
    if circuit is not None and circuit.n != n:
        raise ValueError("circuit qubit count differs from n")
    psi1_t = solve_triple_chart(n, free, anchor)
    amps2 = -psi1_t.amplitudes.copy()
    amps2[0] += 1.0
    psi2_t = EvenParityState(n, amps2)
    alpha = psi1_t.norm()
    beta = psi2_t.norm()
    if alpha == 0.0 or beta == 0.0:
        raise ValueError("degenerate chart: one component vanishes")
    vac = EvenParityState.basis_state(n, 0)
    states = [vac, psi1_t.rescaled_to_unit(), psi2_t.rescaled_to_unit()]
    if circuit is not None:
        states = [apply_circuit(s, circuit) for s in states]
    return GaussianTriple(states[0], states[1], states[2], alpha, beta)


# ---------------------------------------------------------------------------
# Manifold dimension


def _pair_vector_state(n: int, vec: np.ndarray) -> dict[tuple[int, int], complex]:
    return {pq: complex(v) for pq, v in zip(_pair_positions(n), vec)}


def _system_values(n: int, vec: np.ndarray) -> np.ndarray:
    amps = _pair_vector_state(n, vec)
    return np.array([quad_relation(amps, q) for q in _quadruples(n)])


def pair_system_jacobian(n: int, vec: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Complex Jacobian of the quadruple relations at a point, by central
    differences along real directions (the relations are holomorphic)."""
    m = len(_pair_positions(n))
    rows = len(_quadruples(n))
    jac = np.empty((rows, m), dtype=np.complex128)
    for j in range(m):
        bump = np.zeros(m, dtype=np.complex128)
        bump[j] = step
        jac[:, j] = (_system_values(n, vec + bump) - _system_values(n, vec - bump)) / (
            2 * step
        )
    return jac


def _random_solution_point(n: int, rng: np.random.Generator) -> np.ndarray:
    anchor = pair_label(n, 1, 2)
    labels = free_pair_labels(n, anchor)
    while True:
        values = {
            lab: complex(rng.standard_normal() + 1j * rng.standard_normal())
            for lab in labels
        }
        if abs(values[anchor]) > 10 * PIVOT_TOL:
            break
    state = solve_triple_chart(n, values, anchor)
    return np.array(
        [state.amplitude(pair_label(n, *pq)) for pq in _pair_positions(n)]
    )


def triple_manifold_dimension(n: int, seed: int) -> int:
    """Complex dimension of the solution manifold at a random smooth point."""
    if n < 4:
        raise ValueError("manifold dimension needs n >= 4")
    rng = np.random.default_rng(seed)
    vec = _random_solution_point(n, rng)
    jac = pair_system_jacobian(n, vec)
    sv = np.linalg.svd(jac, compute_uv=False)
    cut = RANK_CUT * sv[0]
    rank = int(np.sum(sv > cut))
    if rank < len(sv) and sv[rank] > 0 and sv[rank - 1] / sv[rank] < RANK_GAP:
        raise ValueError("singular value gap too small for a stable rank estimate")
    return len(_pair_positions(n)) - rank
