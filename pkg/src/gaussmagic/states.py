"""Even-parity states, matchgate circuits, Gaussianity tests, and completion.

A state is a dense complex vector over the 2^(n-1) even-weight labels in
ascending order.  Gaussianity is tested two ways: the quadratic residual
built from all 2n Majorana generators, and the polynomial constraint family
f(u, v) over even label pairs at Hamming distance >= 4.  Any state with a
nonzero amplitude at some label y is determined by its chart (the amplitudes
within distance 2 of y) through an explicit recursive completion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .labels import (
    MAX_QUBITS,
    diff_positions,
    even_index,
    even_index_table,
    even_label_array,
    flip_bits,
    hamming_distance,
    hamming_weight,
    odd_index_table,
)

GAUSSIAN_TOL = 1e-10
PIVOT_TOL = 1e-8
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12


@dataclass(eq=False)
class EvenParityState:
    """Complex amplitudes over the even-weight labels of n qubits."""

    n: int
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.n} outside supported range 1..{MAX_QUBITS}")
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << (self.n - 1),):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({1 << (self.n - 1)},)"
            )
        self.amplitudes = amps
        if self.normalized and abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise ValueError("normalized flag set but norm differs from 1")

    @classmethod
    def basis_state(cls, n: int, label: int) -> "EvenParityState":
        amps = np.zeros(1 << (n - 1), dtype=np.complex128)
        amps[even_index(n, label)] = 1.0
        return cls(n, amps, normalized=True)

    @classmethod
    def from_amplitude_map(cls, n: int, values: Mapping[int, complex]) -> "EvenParityState":
        amps = np.zeros(1 << (n - 1), dtype=np.complex128)
        for label, value in values.items():
            amps[even_index(n, label)] = value
        return cls(n, amps)

    def amplitude(self, label: int) -> complex:
        return complex(self.amplitudes[even_index(self.n, label)])

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def rescaled_to_unit(self) -> "EvenParityState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return EvenParityState(self.n, self.amplitudes / nrm, normalized=True)

    def nonzero_items(self, tol: float = 0.0) -> list[tuple[int, complex]]:
        labels = even_label_array(self.n)
        out = []
        for idx in np.nonzero(np.abs(self.amplitudes) > tol)[0]:
            out.append((int(labels[idx]), complex(self.amplitudes[idx])))
        return out


def overlap(s1: EvenParityState, s2: EvenParityState) -> complex:
    """Inner product <s1|s2>, conjugating s1."""
    if s1.n != s2.n:
        raise ValueError("overlap requires states on the same qubit count")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


@lru_cache(maxsize=None)
def _tensor_index_map(n1: int, n2: int) -> np.ndarray:
    labels1 = even_label_array(n1)
    labels2 = even_label_array(n2)
    index = even_index_table(n1 + n2)
    return index[(labels1[:, None] << n2) | labels2[None, :]]


def tensor_product(s1: EvenParityState, s2: EvenParityState) -> EvenParityState:
    """Tensor product, with s1 on the leading (leftmost) qubits."""
    n = s1.n + s2.n
    if n > MAX_QUBITS:
        raise ValueError(f"tensor product exceeds {MAX_QUBITS} qubits")
    amps = np.zeros(1 << (n - 1), dtype=np.complex128)
    amps[_tensor_index_map(s1.n, s2.n)] = np.outer(s1.amplitudes, s2.amplitudes)
    return EvenParityState(n, amps)


def tensor_power(s: EvenParityState, k: int) -> EvenParityState:
    if k < 1:
        raise ValueError("tensor power requires k >= 1")
    out = s
    for _ in range(k - 1):
        out = tensor_product(out, s)
    return out


def state_to_dict(state: EvenParityState) -> dict:
    """JSON-ready form: {"n": ..., "amplitudes": [[label, re, im], ...]}, nonzero only."""
    return {
        "n": state.n,
        "amplitudes": [
            [label, value.real, value.imag] for label, value in state.nonzero_items()
        ],
    }


def state_from_dict(data: Mapping) -> EvenParityState:
    """Load a state from the JSON form, rejecting malformed entries."""
    try:
        n = int(data["n"])
        entries = list(data["amplitudes"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state object: {exc}") from exc
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")
    amps = np.zeros(1 << (n - 1), dtype=np.complex128)
    seen: set[int] = set()
    for entry in entries:
        if len(entry) != 3:
            raise ValueError(f"amplitude entry {entry!r} is not [label, re, im]")
        label, re, im = int(entry[0]), float(entry[1]), float(entry[2])
        if not 0 <= label < (1 << n):
            raise ValueError(f"label {label} out of range for n={n}")
        if hamming_weight(label) % 2 != 0:
            raise ValueError(f"label {label} has odd weight")
        if label in seen:
            raise ValueError(f"duplicate label {label}")
        seen.add(label)
        amps[even_index(n, label)] = complex(re, im)
    return EvenParityState(n, amps)


# ---------------------------------------------------------------------------
# Matchgates


def _check_unitary(mat: np.ndarray, name: str) -> None:
    dev = np.max(np.abs(mat @ mat.conj().T - np.eye(2)))
    if dev > UNITARY_TOL:
        raise ValueError(f"{name} is not unitary to tolerance (deviation {dev:.3e})")


@dataclass(frozen=True, eq=False)
class Matchgate:
    """Two-qubit gate acting as A on span(|00>,|11>) and B on span(|01>,|10>).

    Requires det A = det B, which is what keeps the gate inside the
    matchgate group.
    """

    A: np.ndarray
    B: np.ndarray
    site: int

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=np.complex128)
        B = np.asarray(self.B, dtype=np.complex128)
        if A.shape != (2, 2) or B.shape != (2, 2):
            raise ValueError("matchgate blocks must be 2x2")
        _check_unitary(A, "A block")
        _check_unitary(B, "B block")
        if abs(np.linalg.det(A) - np.linalg.det(B)) > UNITARY_TOL:
            raise ValueError("matchgate blocks must have equal determinants")
        if self.site < 1:
            raise ValueError("site index is 1-based")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True, eq=False)
class MatchgateCircuit:
    n: int
    gates: tuple[Matchgate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if not 1 <= gate.site <= self.n - 1:
                raise ValueError(f"gate site {gate.site} out of range for n={self.n}")


@lru_cache(maxsize=None)
def _site_index_pairs(n: int, site: int):
    """Even-sector index pairs mixed by a gate at (site, site+1).

    Returns (a00, a11, b01, b10): positions of the 00/11 and 01/10 label
    pairs in the even enumeration.
    """
    labels = even_label_array(n)
    index = even_index_table(n)
    hi = 1 << (n - site)
    lo = 1 << (n - site - 1)
    both0 = ((labels & hi) == 0) & ((labels & lo) == 0)
    lhs_a = labels[both0]
    mid01 = ((labels & hi) == 0) & ((labels & lo) != 0)
    lhs_b = labels[mid01]
    return (
        index[lhs_a],
        index[lhs_a | hi | lo],
        index[lhs_b],
        index[(lhs_b ^ lo) | hi],
    )


def _apply_blocks(
    amps: np.ndarray, n: int, site: int, A: np.ndarray, B: np.ndarray
) -> np.ndarray:
    a00, a11, b01, b10 = _site_index_pairs(n, site)
    out = amps.copy()
    x0, x1 = amps[a00], amps[a11]
    out[a00] = A[0, 0] * x0 + A[0, 1] * x1
    out[a11] = A[1, 0] * x0 + A[1, 1] * x1
    y0, y1 = amps[b01], amps[b10]
    out[b01] = B[0, 0] * y0 + B[0, 1] * y1
    out[b10] = B[1, 0] * y0 + B[1, 1] * y1
    return out


def apply_matchgate(state: EvenParityState, gate: Matchgate) -> EvenParityState:
    if not 1 <= gate.site <= state.n - 1:
        raise ValueError(f"gate site {gate.site} out of range for n={state.n}")
    return EvenParityState(
        state.n, _apply_blocks(state.amplitudes, state.n, gate.site, gate.A, gate.B)
    )


def apply_circuit(state: EvenParityState, circuit: MatchgateCircuit) -> EvenParityState:
    if circuit.n != state.n:
        raise ValueError("circuit and state qubit counts differ")
    amps = state.amplitudes
    for gate in circuit.gates:
        amps = _apply_blocks(amps, state.n, gate.site, gate.A, gate.B)
    return EvenParityState(state.n, amps)


def run_circuit(circuit: MatchgateCircuit, input_label: int = 0) -> EvenParityState:
    """Apply the circuit to a basis state and renormalize."""
    if hamming_weight(input_label) % 2 != 0:
        raise ValueError(f"input label {input_label} has odd weight")
    state = EvenParityState.basis_state(circuit.n, input_label)
    return apply_circuit(state, circuit).rescaled_to_unit()


# ---------------------------------------------------------------------------
# Gaussianity tests


class ConstraintId(NamedTuple):
    u: int
    v: int


def constraint_f(state: EvenParityState, cid: ConstraintId) -> complex:
    """Residual of the constraint attached to an even pair at distance >= 4.

    f(u, v) = a_u a_v - sum_{i=2..d} (-1)^i a_{u flipped at k1,ki} a_{v flipped at k1,ki}
    with k1 < ... < kd the differing positions.
    """
    n = state.n
    u, v = cid
    D = diff_positions(u, v, n)
    if len(D) < 4:
        raise ValueError(f"constraint ({u},{v}) is trivial below distance 4")
    k1 = D[0]
    a = state.amplitude
    total = a(u) * a(v)
    sign = 1.0
    for ki in D[1:]:
        total -= sign * a(flip_bits(u, (k1, ki), n)) * a(flip_bits(v, (k1, ki), n))
        sign = -sign
    return total


@lru_cache(maxsize=None)
def _all_constraint_pairs(n: int) -> tuple[tuple[int, int], ...]:
    labels = _even_labels_list(n)
    return tuple(
        (u, v)
        for u, v in combinations(labels, 2)
        if hamming_distance(u, v) >= 4
    )


def _even_labels_list(n: int) -> list[int]:
    return [int(x) for x in even_label_array(n)]


def all_constraints(n: int) -> list[ConstraintId]:
    """Every unordered even pair at distance >= 4."""
    return [ConstraintId(u, v) for u, v in _all_constraint_pairs(n)]


def independent_constraints(n: int, y: int) -> list[ConstraintId]:
    """The pairs (y, w) with d(y, w) >= 4; sufficient given the chart at y."""
    if hamming_weight(y) % 2 != 0:
        raise ValueError(f"label {y} has odd weight")
    return [
        ConstraintId(y, w)
        for w in _even_labels_list(n)
        if hamming_distance(y, w) >= 4
    ]


@lru_cache(maxsize=None)
def _constraint_plan(n: int, pairs: tuple[tuple[int, int], ...]):
    """Group constraints by distance into index arrays for batched evaluation."""
    index = even_index_table(n)
    groups: dict[int, list] = {}
    for u, v in pairs:
        D = diff_positions(u, v, n)
        k1 = D[0]
        z_row = []
        p_row = []
        for ki in D[1:]:
            z_row.append(index[flip_bits(u, (k1, ki), n)])
            p_row.append(index[flip_bits(v, (k1, ki), n)])
        groups.setdefault(len(D), []).append((index[u], index[v], z_row, p_row))
    plans = []
    for d in sorted(groups):
        rows = groups[d]
        U = np.array([r[0] for r in rows], dtype=np.int64)
        V = np.array([r[1] for r in rows], dtype=np.int64)
        Z = np.array([r[2] for r in rows], dtype=np.int64)
        P = np.array([r[3] for r in rows], dtype=np.int64)
        signs = np.array([(-1.0) ** i for i in range(2, d + 1)])
        plans.append((U, V, Z, P, signs))
    return tuple(plans)


def _residual_vector(state: EvenParityState, pairs: tuple[tuple[int, int], ...]):
    amps = state.amplitudes
    parts = []
    for U, V, Z, P, signs in _constraint_plan(state.n, pairs):
        parts.append(amps[U] * amps[V] - (amps[Z] * amps[P]) @ signs)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.complex128)


def _pairs_for(state: EvenParityState, ids: Sequence[ConstraintId] | None):
    if ids is None:
        return _all_constraint_pairs(state.n)
    return tuple((cid[0], cid[1]) for cid in ids)


@lru_cache(maxsize=None)
def _ordered_pairs_by_distance(pairs: tuple[tuple[int, int], ...]):
    # matches the evaluation order of _constraint_plan: ascending distance,
    # original order within each distance group (sorted is stable)
    return tuple(sorted(pairs, key=lambda uv: bin(uv[0] ^ uv[1]).count("1")))


def constraint_residuals(
    state: EvenParityState, ids: Sequence[ConstraintId] | None = None
) -> dict[ConstraintId, complex]:
    """Residuals of the given constraints (all of them by default)."""
    pairs = _pairs_for(state, ids)
    values = _residual_vector(state, pairs)
    ordered = _ordered_pairs_by_distance(pairs)
    return {ConstraintId(u, v): complex(val) for (u, v), val in zip(ordered, values)}


def max_constraint_residual(
    state: EvenParityState, ids: Sequence[ConstraintId] | None = None
) -> float:
    values = _residual_vector(state, _pairs_for(state, ids))
    return float(np.max(np.abs(values))) if values.size else 0.0


def worst_constraint(
    state: EvenParityState, ids: Sequence[ConstraintId] | None = None
) -> tuple[ConstraintId, complex]:
    """The constraint with the largest residual magnitude, with its value."""
    residuals = constraint_residuals(state, ids)
    if not residuals:
        raise ValueError("no nontrivial constraints at this qubit count")
    cid = max(residuals, key=lambda c: abs(residuals[c]))
    return cid, residuals[cid]


@lru_cache(maxsize=None)
def _majorana_tables(n: int):
    """Permutation and phase tables for all 2n generators on the even sector.

    perm[k-1, j] is the odd-sector index of c_k applied to the j-th even
    label; phase[k-1, j] the accompanying unit phase.
    """
    labels = even_label_array(n)
    odd_index = odd_index_table(n)
    dim = 1 << (n - 1)
    perm = np.empty((2 * n, dim), dtype=np.int64)
    phase = np.empty((2 * n, dim), dtype=np.complex128)
    for k in range(1, 2 * n + 1):
        m = (k + 1) // 2
        bit = 1 << (n - m)
        flipped = labels ^ bit
        perm[k - 1] = odd_index[flipped]
        prefix = labels >> (n - m + 1)
        signs = 1.0 - 2.0 * (_popcount_array(prefix) & 1)
        if k % 2 == 0:
            signs = signs * np.where((labels & bit) == 0, 1j, -1j)
        phase[k - 1] = signs
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


def _popcount_array(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    work = arr.copy()
    while np.any(work):
        out += work & 1
        work >>= 1
    return out


def lambda_residual_norm(state: EvenParityState) -> float:
    """Norm of the two-copy Majorana residual; zero exactly on Gaussian states.

    The residual tensor is T = M^T M with M stacking the 2n generator images
    of the state.  T is formed explicitly: the rank-one Gram shortcut for
    ||T||_F loses half the mantissa to cancellation, and genuine Gaussians
    must land well below the verdict tolerance.
    """
    n = state.n
    perm, phase = _majorana_tables(n)
    M = np.zeros((2 * n, 1 << (n - 1)), dtype=np.complex128)
    rows = np.arange(2 * n)[:, None]
    M[rows, perm] = phase * state.amplitudes[None, :]
    return float(np.linalg.norm(M.T @ M))


def is_gaussian(state: EvenParityState, tol: float = GAUSSIAN_TOL) -> bool:
    return lambda_residual_norm(state) <= tol


# ---------------------------------------------------------------------------
# Charts and completion


@lru_cache(maxsize=None)
def chart_labels(n: int, favored: int) -> tuple[int, ...]:
    """The C(n,2)+1 even labels within distance 2 of the favored label, ascending."""
    if hamming_weight(favored) % 2 != 0:
        raise ValueError(f"favored label {favored} has odd weight")
    return tuple(
        w for w in _even_labels_list(n) if hamming_distance(favored, w) <= 2
    )


@dataclass(frozen=True)
class FreeChart:
    """Free amplitudes {a_z : d(y, z) <= 2} around a favored label y.

    Missing chart labels default to zero; labels outside the chart are
    rejected.  The pivot a_y must stay above PIVOT_TOL for the completion
    to be well conditioned.
    """

    n: int
    favored: int
    values: dict[int, complex]

    def __post_init__(self) -> None:
        allowed = chart_labels(self.n, self.favored)
        allowed_set = set(allowed)
        for label in self.values:
            if label not in allowed_set:
                raise ValueError(
                    f"label {label} lies outside the chart around {self.favored}"
                )
        filled = {z: complex(self.values.get(z, 0.0)) for z in allowed}
        if abs(filled[self.favored]) <= PIVOT_TOL:
            raise ValueError("chart pivot amplitude is zero or below tolerance")
        object.__setattr__(self, "values", filled)

    def vector(self) -> np.ndarray:
        return np.array(
            [self.values[z] for z in chart_labels(self.n, self.favored)],
            dtype=np.complex128,
        )


@lru_cache(maxsize=None)
def _completion_plan(n: int, favored: int):
    """Shell-by-shell index plan for completing amplitudes around a pivot.

    Labels at distance d >= 4 are solved in increasing d (ties by ascending
    label); each row references only chart entries and the previous shell.
    """
    index = even_index_table(n)
    chart = chart_labels(n, favored)
    chart_idx = np.array([index[z] for z in chart], dtype=np.int64)
    pivot_pos = chart.index(favored)
    shells: dict[int, list] = {}
    for w in _even_labels_list(n):
        d = hamming_distance(favored, w)
        if d < 4:
            continue
        D = diff_positions(favored, w, n)
        k1 = D[0]
        z_row = []
        p_row = []
        for ki in D[1:]:
            z_row.append(index[flip_bits(favored, (k1, ki), n)])
            p_row.append(index[flip_bits(w, (k1, ki), n)])
        shells.setdefault(d, []).append((index[w], z_row, p_row))
    plans = []
    for d in sorted(shells):
        rows = shells[d]
        W = np.array([r[0] for r in rows], dtype=np.int64)
        Z = np.array([r[1] for r in rows], dtype=np.int64)
        P = np.array([r[2] for r in rows], dtype=np.int64)
        signs = np.array([(-1.0) ** i for i in range(2, d + 1)])
        plans.append((W, Z, P, signs))
    return chart_idx, pivot_pos, tuple(plans)


def _complete_vector(n: int, favored: int, chart_vec: np.ndarray) -> np.ndarray:
    chart_idx, pivot_pos, plans = _completion_plan(n, favored)
    amps = np.zeros(1 << (n - 1), dtype=np.complex128)
    amps[chart_idx] = chart_vec
    ay = chart_vec[pivot_pos]
    for W, Z, P, signs in plans:
        amps[W] = (amps[Z] * amps[P]) @ signs / ay
    return amps


def _complete_batch(n: int, favored: int, chart_mat: np.ndarray) -> np.ndarray:
    """Vectorized completion of a batch of charts (rows of chart_mat)."""
    chart_idx, pivot_pos, plans = _completion_plan(n, favored)
    batch = chart_mat.shape[0]
    amps = np.zeros((batch, 1 << (n - 1)), dtype=np.complex128)
    amps[:, chart_idx] = chart_mat
    ay = chart_mat[:, pivot_pos][:, None]
    for W, Z, P, signs in plans:
        amps[:, W] = (amps[:, Z] * amps[:, P]) @ signs / ay
    return amps


def complete_amplitudes(chart: FreeChart) -> EvenParityState:
    """Solve f(y, w) = 0 outward from the chart.  Output is not normalized."""
    return EvenParityState(
        chart.n, _complete_vector(chart.n, chart.favored, chart.vector())
    )


def chart_from_state(state: EvenParityState, favored: int | None = None) -> FreeChart:
    """Restrict a state to the chart around a label (its largest one by default)."""
    labels = even_label_array(state.n)
    if favored is None:
        favored = int(labels[int(np.argmax(np.abs(state.amplitudes)))])
    values = {z: state.amplitude(z) for z in chart_labels(state.n, favored)}
    return FreeChart(state.n, favored, values)


# ---------------------------------------------------------------------------
# Random generation

def haar_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_matchgate(site: int, rng: np.random.Generator) -> Matchgate:
    """Haar A and B blocks with B rephased so the determinants match."""
    A = haar_unitary(rng)
    B = haar_unitary(rng)
    delta = np.angle(np.linalg.det(A) / np.linalg.det(B)) / 2.0
    return Matchgate(A, B * np.exp(1j * delta), site)


def brickwork_site_list(n: int, depth: int | None = None) -> tuple[int, ...]:
    """Gate sites of a brickwork pattern, depth 2n layers by default."""
    if depth is None:
        depth = 2 * n
    sites = []
    for layer in range(depth):
        start = 1 if layer % 2 == 0 else 2
        sites.extend(range(start, n, 2))
    return tuple(sites)


def random_brickwork_circuit(
    n: int, seed: int | np.random.Generator, depth: int | None = None
) -> MatchgateCircuit:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    gates = tuple(random_matchgate(site, rng) for site in brickwork_site_list(n, depth))
    return MatchgateCircuit(n, gates)


def _standard_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_gaussian(
    n: int, seed: int | np.random.Generator, method: str = "circuit"
) -> EvenParityState:
    """Normalized random Gaussian state, by circuit sampling or chart sampling."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if method == "circuit":
        return run_circuit(random_brickwork_circuit(n, rng))
    if method == "chart":
        k = len(chart_labels(n, 0))
        vec = _standard_complex(rng, k)
        # pivot below tolerance would poison the completion; resample it
        while abs(vec[0]) <= PIVOT_TOL:
            vec[0] = complex(_standard_complex(rng, 1)[0])
        amps = _complete_vector(n, 0, vec)
        return EvenParityState(n, amps).rescaled_to_unit()
    raise ValueError(f"unknown sampling method {method!r}")


# ---------------------------------------------------------------------------
# Parametrized circuits (used by the dual-side optimizers)

PARAMS_PER_GATE = 7


def su2_matrix(a: float, b: float, c: float) -> np.ndarray:
    """Rz(a) Ry(b) Rz(c); the identity at a = b = c = 0."""
    cb, sb = np.cos(b / 2.0), np.sin(b / 2.0)
    return np.array(
        [
            [np.exp(-0.5j * (a + c)) * cb, -np.exp(-0.5j * (a - c)) * sb],
            [np.exp(0.5j * (a - c)) * sb, np.exp(0.5j * (a + c)) * cb],
        ],
        dtype=np.complex128,
    )


def parametrized_gate_blocks(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A and B blocks from 7 reals: shared phase plus two SU(2) angle triples."""
    phi = params[0]
    A = np.exp(1j * phi) * su2_matrix(params[1], params[2], params[3])
    B = np.exp(1j * phi) * su2_matrix(params[4], params[5], params[6])
    return A, B


def apply_parametrized_circuit(
    n: int, sites: Sequence[int], params: np.ndarray, vec: np.ndarray
) -> np.ndarray:
    """Apply the parametrized matchgate sequence to an even-sector vector."""
    params = np.asarray(params, dtype=np.float64)
    if params.size != PARAMS_PER_GATE * len(sites):
        raise ValueError(
            f"expected {PARAMS_PER_GATE * len(sites)} parameters, got {params.size}"
        )
    out = vec
    for g, site in enumerate(sites):
        block = params[PARAMS_PER_GATE * g : PARAMS_PER_GATE * (g + 1)]
        A, B = parametrized_gate_blocks(block)
        out = _apply_blocks(out, n, site, A, B)
    return out
