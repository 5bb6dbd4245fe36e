"""Gaussian-rank search and the symmetry-restricted rank of two magic copies.

Upper bounds on Gaussian rank come from explicit decompositions found by
simulated annealing over completion charts: each term is a Gaussian state
parametrized by its free chart amplitudes, the linear coefficients are
re-fit by least squares at every step, and the loss is the squared l2
distance to the target.  Lower-bound evidence comes from a symmetry
restriction on 8 qubits: states supported on labels with even weight on
qubits 3..6 (hence also on 1,2,7,8) obey a 7x7 multiplicative constraint
grid plus two 4-term constraints, and for 3-term candidates the grid forces
a rank-3 matrix equation whose left side has rank at most 2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from . import _pool
from .extent import Decomposition, make_decomposition
from .fidelity import gaussian_fidelity
from .labels import even_index_table, even_label_array, hamming_weight
from .states import (
    PIVOT_TOL,
    ConstraintId,
    EvenParityState,
    Matchgate,
    MatchgateCircuit,
    _complete_vector,
    _standard_complex,
    chart_labels,
    random_matchgate,
    run_circuit,
    tensor_power,
)

SECTOR_SUPPORT_TOL = 1e-10
PROPOSAL_PIVOT_FLOOR = 1e-6
CERT_PIVOT_TOL = 1e-8

# ---------------------------------------------------------------------------
# Magic states


@dataclass(frozen=True)
class MagicState:
    kind: str
    state: EvenParityState


def m_state() -> EvenParityState:
    """(|0> + |15>)/sqrt(2) on four qubits."""
    r = 1.0 / math.sqrt(2.0)
    return EvenParityState.from_amplitude_map(4, {0: r, 15: r})


def mtilde_state() -> EvenParityState:
    """(sqrt(3)|0> + sqrt(2)|3> + sqrt(2)|12> + |15>)/sqrt(8)."""
    r8 = math.sqrt(8.0)
    return EvenParityState.from_amplitude_map(
        4,
        {
            0: math.sqrt(3.0) / r8,
            3: math.sqrt(2.0) / r8,
            12: math.sqrt(2.0) / r8,
            15: 1.0 / r8,
        },
    )


def malpha_state(alpha: float) -> EvenParityState:
    """alpha|0> + sqrt(1 - alpha^2)|15>; interpolates |0> at alpha = 1."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    beta = math.sqrt(max(1.0 - alpha * alpha, 0.0))
    return EvenParityState.from_amplitude_map(4, {0: alpha, 15: beta})


def magic_state(kind: str, alpha: float | None = None) -> MagicState:
    if kind == "M":
        return MagicState("M", m_state())
    if kind == "Mtilde":
        return MagicState("Mtilde", mtilde_state())
    if kind == "Malpha":
        if alpha is None or not 0.0 < alpha < 1.0:
            raise ValueError(f"Malpha needs alpha in (0, 1), got {alpha}")
        return MagicState(f"Malpha:{alpha}", malpha_state(alpha))
    raise ValueError(f"unknown magic state kind {kind!r}")


def malpha_rank1_loss(alpha: float, k: int) -> tuple[float, float]:
    """Leading-order and exact loss of the one-term alpha^k |0...0> fit.

    analytic = sqrt(2) k alpha^(k-1) sqrt(1-alpha); the exact value is the
    total absolute amplitude left after removing the alpha^k |0...0> term,
    (alpha + beta)^k - alpha^k, computed here numerically from the tensor
    power rather than from the closed form.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if k < 1:
        raise ValueError("k must be at least 1")
    analytic = math.sqrt(2.0) * k * alpha ** (k - 1) * math.sqrt(1.0 - alpha)
    if alpha == 1.0:
        return 0.0, 0.0
    big = tensor_power(malpha_state(alpha), k)
    diff = big.amplitudes.copy()
    diff[0] -= alpha**k
    numeric = float(np.sum(np.abs(diff)))
    return analytic, numeric


# ---------------------------------------------------------------------------
# Block symmetry projection


def symmetry_project(state: EvenParityState) -> EvenParityState:
    """Zero the amplitudes not invariant under Z_{4j-1} Z_{4j} per 4-qubit block."""
    n = state.n
    if n % 4 != 0:
        raise ValueError(f"state on {n} qubits has no whole 4-qubit blocks")
    labels = even_label_array(n)
    keep = np.ones(labels.shape, dtype=bool)
    for j in range(1, n // 4 + 1):
        hi = n - (4 * j - 1)  # shift of bit 4j-1
        lo = n - 4 * j  # shift of bit 4j
        keep &= (((labels >> hi) ^ (labels >> lo)) & 1) == 0
    amps = np.where(keep, state.amplitudes, 0.0)
    nrm = float(np.linalg.norm(amps))
    return EvenParityState(n, amps, normalized=abs(nrm - 1.0) <= 1e-12)


# ---------------------------------------------------------------------------
# The 8-qubit symmetry-restricted constraint grid

SYMMETRIC_ROW_LABELS = (12, 20, 24, 36, 40, 48, 60)
SYMMETRIC_COL_LABELS = (3, 65, 66, 129, 130, 192, 195)
_MASK_A = 60  # qubits 3..6
_MASK_B = 195  # qubits 1,2,7,8


@dataclass(frozen=True)
class SymmetryGrid:
    """Row/column headers of the 8-qubit sector grid; body entry (r,c) = r^c."""

    row_labels: tuple[int, ...] = SYMMETRIC_ROW_LABELS
    col_labels: tuple[int, ...] = SYMMETRIC_COL_LABELS
    pivot: int = 0

    def body_label(self, r: int, c: int) -> int:
        return self.pivot ^ r ^ c


def _in_sector(label: int) -> bool:
    return hamming_weight(label & _MASK_A) % 2 == 0 and hamming_weight(label) % 2 == 0


@lru_cache(maxsize=None)
def symmetric_sector_labels() -> tuple[int, ...]:
    """The 64 even 8-qubit labels with even weight on qubits 3..6."""
    return tuple(int(x) for x in even_label_array(8) if _in_sector(int(x)))


def _require_sector_support(amps: np.ndarray, what: str) -> None:
    index = even_index_table(8)
    inside = np.zeros(amps.shape, dtype=bool)
    inside[[index[x] for x in symmetric_sector_labels()]] = True
    scale = float(np.max(np.abs(amps)))
    if scale == 0.0:
        raise ValueError(f"{what} is the zero vector")
    worst = float(np.max(np.abs(np.where(inside, 0.0, amps))))
    if worst > SECTOR_SUPPORT_TOL * scale:
        raise ValueError(f"{what} has weight {worst:.3e} outside the symmetric sector")


_GRID_CHART_OFFSETS = (0,) + SYMMETRIC_ROW_LABELS[:-1] + SYMMETRIC_COL_LABELS[:-1]


@lru_cache(maxsize=None)
def _grid_plan(pivot: int):
    """Even-vector index arrays for the grid chart around a sector pivot."""
    if not _in_sector(pivot):
        raise ValueError(f"label {pivot} lies outside the symmetric sector")
    index = even_index_table(8)
    rows = np.array([index[pivot ^ r] for r in SYMMETRIC_ROW_LABELS], dtype=np.int64)
    cols = np.array([index[pivot ^ c] for c in SYMMETRIC_COL_LABELS], dtype=np.int64)
    body = np.array(
        [[index[pivot ^ r ^ c] for c in SYMMETRIC_COL_LABELS] for r in SYMMETRIC_ROW_LABELS],
        dtype=np.int64,
    )
    return int(index[pivot]), rows, cols, body


def _complete_grid_vector(pivot: int, params: np.ndarray) -> np.ndarray:
    """Params (pivot, 6 row frees, 6 col frees) -> full even amplitude vector.

    The last row/column entries come from the two 4-term constraints; the
    body is filled multiplicatively.
    """
    pidx, rows, cols, body = _grid_plan(pivot)
    ap = params[0]
    rv = np.empty(7, dtype=np.complex128)
    rv[:6] = params[1:7]
    rv[6] = (rv[0] * rv[5] - rv[1] * rv[4] + rv[2] * rv[3]) / ap
    cv = np.empty(7, dtype=np.complex128)
    cv[:6] = params[7:13]
    cv[6] = (cv[0] * cv[5] - cv[1] * cv[4] + cv[2] * cv[3]) / ap
    amps = np.zeros(128, dtype=np.complex128)
    amps[pidx] = ap
    amps[rows] = rv
    amps[cols] = cv
    amps[body.ravel()] = np.outer(rv, cv).ravel() / ap
    return amps


def complete_symmetric_chart(
    pivot: int, values: Mapping[int, complex]
) -> EvenParityState:
    """Complete a 13-entry sector chart to a full (unnormalized) sector state.

    Free labels are pivot, pivot^r for the first six rows and pivot^c for the
    first six columns; missing entries default to zero.
    """
    allowed = tuple(pivot ^ off for off in _GRID_CHART_OFFSETS)
    allowed_set = set(allowed)
    for label in values:
        if label not in allowed_set:
            raise ValueError(f"label {label} is not a free entry of the grid at pivot {pivot}")
    params = np.array([complex(values.get(lbl, 0.0)) for lbl in allowed])
    if abs(params[0]) <= PIVOT_TOL:
        raise ValueError("grid pivot amplitude is zero or below tolerance")
    return EvenParityState(8, _complete_grid_vector(pivot, params))


def symmetric_chart_from_state(
    state: EvenParityState, pivot: int = 0
) -> dict[int, complex]:
    """Restrict an 8-qubit state to the 13 free grid entries at a pivot."""
    if state.n != 8:
        raise ValueError("the symmetry grid is defined on 8 qubits")
    return {pivot ^ off: state.amplitude(pivot ^ off) for off in _GRID_CHART_OFFSETS}


def symmetry_grid_residuals(
    state: EvenParityState, pivot_choice: int = 0
) -> dict[ConstraintId, complex]:
    """All 49 body residuals a_p a_{p^r^c} - a_{p^r} a_{p^c} plus the two
    4-term residuals, keyed by (pivot, completed label).

    The grid translates to any sector pivot with nonzero amplitude; pass an
    alternate pivot when a_0 vanishes (the deleted-row/column charts).
    """
    if state.n != 8:
        raise ValueError("the symmetry grid is defined on 8 qubits")
    _require_sector_support(state.amplitudes, "state")
    p = pivot_choice
    if not _in_sector(p):
        raise ValueError(f"pivot {p} lies outside the symmetric sector")
    a = state.amplitude
    ap = a(p)
    if abs(ap) <= PIVOT_TOL:
        raise ValueError(f"pivot amplitude a_{p} is zero; choose an alternate pivot")
    out: dict[ConstraintId, complex] = {}
    for r in SYMMETRIC_ROW_LABELS:
        for c in SYMMETRIC_COL_LABELS:
            out[ConstraintId(p, p ^ r ^ c)] = ap * a(p ^ r ^ c) - a(p ^ r) * a(p ^ c)
    out[ConstraintId(p, p ^ 60)] = (
        ap * a(p ^ 60) - a(p ^ 12) * a(p ^ 48) + a(p ^ 20) * a(p ^ 40) - a(p ^ 24) * a(p ^ 36)
    )
    out[ConstraintId(p, p ^ 195)] = (
        ap * a(p ^ 195) - a(p ^ 3) * a(p ^ 192) + a(p ^ 65) * a(p ^ 130) - a(p ^ 66) * a(p ^ 129)
    )
    return out


def _random_diagonal_matchgate(site: int, rng: np.random.Generator) -> Matchgate:
    # diagonal blocks with matched determinants; preserves every basis label
    a, b, c = rng.uniform(0.0, 2.0 * np.pi, 3)
    A = np.diag([np.exp(1j * a), np.exp(1j * b)])
    B = np.diag([np.exp(1j * c), np.exp(1j * (a + b - c))])
    return Matchgate(A, B, site)


def random_symmetric_gaussian(
    seed: int | np.random.Generator, method: str = "circuit", layers: int = 16
) -> EvenParityState:
    """Random Gaussian state supported on the symmetric sector.

    Circuit sampling keeps the sector invariant: gates inside qubit blocks
    {1,2}, {3..6}, {7,8} are arbitrary matchgates, while the straddling
    sites 2 and 6 only carry diagonal (phase) matchgates.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if method == "chart":
        params = _standard_complex(rng, 13)
        while abs(params[0]) <= PIVOT_TOL:
            params[0] = complex(_standard_complex(rng, 1)[0])
        amps = _complete_grid_vector(0, params)
        return EvenParityState(8, amps).rescaled_to_unit()
    if method != "circuit":
        raise ValueError(f"unknown sampling method {method!r}")
    gates = []
    for layer in range(layers):
        if layer % 2 == 0:
            for site in (1, 3, 5, 7):
                gates.append(random_matchgate(site, rng))
        else:
            gates.append(_random_diagonal_matchgate(2, rng))
            gates.append(random_matchgate(4, rng))
            gates.append(_random_diagonal_matchgate(6, rng))
    return run_circuit(MatchgateCircuit(8, tuple(gates)))


# ---------------------------------------------------------------------------
# Rank-3 infeasibility certificate

_CERT_ROWS = (12, 48, 60)
_CERT_COLS = (3, 192, 195)


def rank3_infeasibility_certificate(
    candidate: Decomposition | Sequence[tuple[complex, EvenParityState]],
) -> dict:
    """Structural obstruction to 3 symmetric Gaussians summing to |M>|M>.

    For scaled terms phi^i = c_i s_i with pivots alpha_i = phi^i_0 all
    nonzero, an exact decomposition forces A X = (alpha_3/2) I_3 where
    A[j,:] = (f1_j, f2_j) over rows j in {12,48,60},
    f1_j = (1/2 - alpha_2) phi^1_j + alpha_1 phi^2_j,
    f2_j = (1/2 - alpha_1) phi^2_j + alpha_2 phi^1_j,
    and X[i,c] = phi^i_c / alpha_i over columns c in {3,192,195}.  But
    A X has rank at most 2, so its smallest singular value stays 0 while
    the right side needs |alpha_3|/2 > 0: that gap is reported as the
    obstruction.  Candidates with a zero pivot fall outside this case; when
    exactly one pivot vanishes the report carries the a_60 dichotomy
    numbers as a diagnostic.
    """
    if isinstance(candidate, Decomposition):
        pairs = candidate.terms
    else:
        pairs = [(complex(c), s) for c, s in candidate]
    report: dict = {
        "applicable": False,
        "sigma3": None,
        "required_sigma3": None,
        "obstruction": None,
        "residual": None,
        "verdict": "not-applicable",
    }
    if len(pairs) != 3:
        report["reason"] = f"expected 3 terms, got {len(pairs)}"
        return report
    phis = []
    for c, s in pairs:
        if s.n != 8:
            report["reason"] = "terms must live on 8 qubits"
            return report
        phi = c * s.amplitudes
        try:
            _require_sector_support(phi, "term")
        except ValueError as exc:
            report["reason"] = str(exc)
            return report
        phis.append(phi)
    alphas = [phi[0] for phi in phis]  # even index of label 0 is 0
    small = [i for i, al in enumerate(alphas) if abs(al) <= CERT_PIVOT_TOL]
    if small:
        report["reason"] = f"pivot amplitude(s) at index {small} vanish"
        if len(small) == 1:
            others = [i for i in range(3) if i not in small]
            index = even_index_table(8)
            i60 = int(index[60])
            a, b = others
            report["dichotomy"] = {
                "zero_pivot_index": small[0],
                "branch1_antisymmetry": float(abs(alphas[a] + alphas[b])),
                "pivot_sum_error": float(abs(alphas[a] + alphas[b] - 0.5)),
                "branch2_a60_max": float(max(abs(phis[a][i60]), abs(phis[b][i60]))),
            }
        return report
    index = even_index_table(8)
    a1, a2, a3 = alphas
    phi1, phi2 = phis[0], phis[1]
    A = np.empty((3, 2), dtype=np.complex128)
    for row, j in enumerate(_CERT_ROWS):
        pj1, pj2 = phi1[index[j]], phi2[index[j]]
        A[row, 0] = (0.5 - a2) * pj1 + a1 * pj2
        A[row, 1] = (0.5 - a1) * pj2 + a2 * pj1
    X = np.empty((2, 3), dtype=np.complex128)
    for col, c in enumerate(_CERT_COLS):
        X[0, col] = phi1[index[c]] / a1
        X[1, col] = phi2[index[c]] / a2
    AX = A @ X
    svals = np.linalg.svd(AX, compute_uv=False)
    sigma3 = float(svals[-1])
    required = float(abs(a3) / 2.0)
    obstruction = max(required - sigma3, 0.0)
    residual = float(np.linalg.norm(AX - (a3 / 2.0) * np.eye(3)))
    report.update(
        applicable=True,
        sigma3=sigma3,
        required_sigma3=required,
        obstruction=obstruction,
        residual=residual,
        verdict="infeasible" if obstruction > 0.0 else "inconclusive",
    )
    return report


# ---------------------------------------------------------------------------
# Simulated annealing over completion charts


@dataclass
class RankSearchConfig:
    terms: int = 3
    iterations: int = 100_000
    initial_temperature: float = 1.0
    cooling_rate: float = 0.9995
    restarts: int = 20
    seed: int = 0
    symmetry_restricted: bool = False
    step_scale: float = 0.2
    # floor on |a_pivot| of each completed, normalized term; 0 disables.
    # Positive values keep the search inside the chart's own stratum, which
    # is what the rank-3 certificate assumes of its candidates.
    min_state_pivot: float = 0.0
    centers: tuple[int, ...] | None = None
    pivots: tuple[int, ...] | None = None
    warm_start: Decomposition | None = None
    greedy_init: bool = True
    polish: bool = True
    polish_maxiter: int = 200
    log_path: str | None = None
    log_every: int = 100
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.terms < 1:
            raise ValueError("terms must be at least 1")
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValueError("cooling_rate must lie in (0, 1)")
        if self.iterations < 0 or self.restarts < 1:
            raise ValueError("iterations must be >= 0 and restarts >= 1")


class _ChartTermSpace:
    """One Gaussian term parametrized by its free chart around a fixed label."""

    __slots__ = ("n", "favored", "size", "pivot_index", "pivot_even_index", "_chart_idx")

    def __init__(self, n: int, favored: int):
        self.n = n
        self.favored = favored
        labels = chart_labels(n, favored)
        self.size = len(labels)
        self.pivot_index = labels.index(favored)
        index = even_index_table(n)
        self._chart_idx = np.array([index[z] for z in labels], dtype=np.int64)
        self.pivot_even_index = int(self._chart_idx[self.pivot_index])

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        v = _standard_complex(rng, self.size)
        while abs(v[self.pivot_index]) < 0.05:
            v[self.pivot_index] = complex(_standard_complex(rng, 1)[0])
        return v

    def initial_params(self) -> np.ndarray:
        v = np.zeros(self.size, dtype=np.complex128)
        v[self.pivot_index] = 1.0
        return v

    def perturb(
        self, params: np.ndarray, rng: np.random.Generator, step: float
    ) -> np.ndarray | None:
        idx = int(rng.integers(self.size))
        new = params.copy()
        new[idx] += step * complex(rng.standard_normal(), rng.standard_normal())
        if abs(new[self.pivot_index]) < PROPOSAL_PIVOT_FLOOR:
            return None
        return new

    def state_vector(self, params: np.ndarray) -> np.ndarray:
        amps = _complete_vector(self.n, self.favored, params)
        return amps / np.linalg.norm(amps)

    def restrict(self, amps: np.ndarray) -> np.ndarray | None:
        v = amps[self._chart_idx].copy()
        if abs(v[self.pivot_index]) < PROPOSAL_PIVOT_FLOOR:
            return None
        return v


class _GridTermSpace:
    """One sector Gaussian parametrized by the 13 free grid entries."""

    __slots__ = ("n", "pivot", "size", "pivot_index", "pivot_even_index", "_chart_idx")

    def __init__(self, pivot: int = 0):
        self.n = 8
        self.pivot = pivot
        self.size = 13
        self.pivot_index = 0
        _grid_plan(pivot)  # validates the pivot label
        index = even_index_table(8)
        self._chart_idx = np.array(
            [index[pivot ^ off] for off in _GRID_CHART_OFFSETS], dtype=np.int64
        )
        self.pivot_even_index = int(self._chart_idx[0])

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        v = _standard_complex(rng, self.size)
        while abs(v[0]) < 0.05:
            v[0] = complex(_standard_complex(rng, 1)[0])
        return v

    def initial_params(self) -> np.ndarray:
        v = np.zeros(self.size, dtype=np.complex128)
        v[0] = 1.0
        return v

    def perturb(
        self, params: np.ndarray, rng: np.random.Generator, step: float
    ) -> np.ndarray | None:
        idx = int(rng.integers(self.size))
        new = params.copy()
        new[idx] += step * complex(rng.standard_normal(), rng.standard_normal())
        if abs(new[0]) < PROPOSAL_PIVOT_FLOOR:
            return None
        return new

    def state_vector(self, params: np.ndarray) -> np.ndarray:
        amps = _complete_grid_vector(self.pivot, params)
        return amps / np.linalg.norm(amps)

    def restrict(self, amps: np.ndarray) -> np.ndarray | None:
        v = amps[self._chart_idx].copy()
        if abs(v[0]) < PROPOSAL_PIVOT_FLOOR:
            return None
        return v


def _ls_loss(G: np.ndarray, b: np.ndarray, tt: float) -> float:
    k = G.shape[0]
    try:
        c = np.linalg.solve(G + 1e-12 * np.eye(k), b)
    except np.linalg.LinAlgError:
        c, *_ = np.linalg.lstsq(G, b, rcond=None)
    return max(tt - float(np.vdot(b, c).real), 0.0)


def _anneal_once(
    target_vec: np.ndarray,
    spaces: Sequence,
    cfg: RankSearchConfig,
    rng: np.random.Generator,
    init: list[np.ndarray] | None = None,
):
    k = len(spaces)
    floor = cfg.min_state_pivot
    params = [p.copy() for p in init] if init is not None else [
        sp.random_params(rng) for sp in spaces
    ]
    if floor > 0.0:
        # fall back to the pivot basis state when an init violates the floor
        for i, sp in enumerate(spaces):
            if abs(sp.state_vector(params[i])[sp.pivot_even_index]) < floor:
                params[i] = sp.initial_params()
    states = np.vstack([spaces[i].state_vector(params[i]) for i in range(k)])
    tt = float(np.vdot(target_vec, target_vec).real)
    G = states.conj() @ states.T
    b = states.conj() @ target_vec
    loss = _ls_loss(G, b, tt)
    best_loss = loss
    best_params = [p.copy() for p in params]
    T = cfg.initial_temperature
    log_rows: list[tuple[int, float, float, float]] = []
    for it in range(cfg.iterations):
        if cfg.log_every > 0 and it % cfg.log_every == 0:
            log_rows.append((it, T, loss, best_loss))
        t = int(rng.integers(k))
        step = min(max(cfg.step_scale * math.sqrt(T), 1e-3), cfg.step_scale)
        cand = spaces[t].perturb(params[t], rng, step)
        if cand is not None:
            vec = spaces[t].state_vector(cand)
            if floor > 0.0 and abs(vec[spaces[t].pivot_even_index]) < floor:
                T *= cfg.cooling_rate
                continue
            col = states.conj() @ vec
            Gc = G.copy()
            Gc[:, t] = col
            Gc[t, :] = col.conj()
            Gc[t, t] = 1.0
            bc = b.copy()
            bc[t] = np.vdot(vec, target_vec)
            cand_loss = _ls_loss(Gc, bc, tt)
            dl = cand_loss - loss
            if dl <= 0.0 or (T > 0.0 and rng.random() < math.exp(-dl / T)):
                params[t] = cand
                states[t] = vec
                G, b, loss = Gc, bc, cand_loss
                if loss < best_loss:
                    best_loss = loss
                    best_params = [p.copy() for p in params]
        T *= cfg.cooling_rate
    if cfg.log_every > 0:
        log_rows.append((cfg.iterations, T, loss, best_loss))
    return best_params, best_loss, log_rows


def _joint_loss(target_vec: np.ndarray, spaces: Sequence, params: list[np.ndarray]) -> float:
    rows = [sp.state_vector(p) for sp, p in zip(spaces, params)]
    S = np.vstack(rows)
    tt = float(np.vdot(target_vec, target_vec).real)
    return _ls_loss(S.conj() @ S.T, S.conj() @ target_vec, tt)


def _polish_params(
    target_vec: np.ndarray,
    spaces: Sequence,
    params: list[np.ndarray],
    maxiter: int,
    floor: float = 0.0,
) -> tuple[list[np.ndarray], float]:
    sizes = [sp.size for sp in spaces]
    offsets = np.cumsum([0] + [2 * s for s in sizes])

    def unpack(x: np.ndarray) -> list[np.ndarray]:
        return [
            np.ascontiguousarray(x[offsets[i] : offsets[i + 1]]).view(np.complex128)
            for i in range(len(spaces))
        ]

    def fun(x: np.ndarray) -> float:
        ps = unpack(x)
        rows = []
        for sp, p in zip(spaces, ps):
            if abs(p[sp.pivot_index]) < 1e-9:
                return 1e6  # barrier against pivot collapse
            vec = sp.state_vector(p)
            if floor > 0.0 and abs(vec[sp.pivot_even_index]) < floor:
                return 1e6
            rows.append(vec)
        S = np.vstack(rows)
        tt = float(np.vdot(target_vec, target_vec).real)
        return _ls_loss(S.conj() @ S.T, S.conj() @ target_vec, tt)

    x0 = np.concatenate([np.ascontiguousarray(p).view(np.float64) for p in params])
    base = _joint_loss(target_vec, spaces, params)
    res = minimize(fun, x0, method="L-BFGS-B", options={"maxiter": maxiter})
    cand = unpack(np.asarray(res.x))
    cand_loss = fun(np.asarray(res.x))
    if cand_loss < base:
        return [p.copy() for p in cand], cand_loss
    return params, base


def _default_centers(target: EvenParityState, k: int) -> tuple[int, ...]:
    labels = even_label_array(target.n)
    order = sorted(
        range(labels.shape[0]),
        key=lambda i: (-abs(target.amplitudes[i]), int(labels[i])),
    )
    return tuple(int(labels[order[i % len(order)]]) for i in range(k))


def _greedy_chart_init(
    target: EvenParityState,
    spaces: Sequence,
    seed: np.random.SeedSequence,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    """Peel the target greedily: each term fits the Gaussian fidelity witness
    of the current residual, then the coefficients are re-fit."""
    children = seed.spawn(len(spaces))
    residual = target.amplitudes.copy()
    params: list[np.ndarray] = []
    rows: list[np.ndarray] = []
    for i, sp in enumerate(spaces):
        rnorm = float(np.linalg.norm(residual))
        p = None
        if rnorm > 1e-9:
            res_state = EvenParityState(target.n, residual / rnorm, normalized=True)
            fit = gaussian_fidelity(
                res_state, restarts=3, seed=children[i], threads=1, maxiter=200
            )
            p = sp.restrict(fit.witness.amplitudes)
        if p is None:
            p = sp.random_params(rng)
        params.append(p)
        rows.append(sp.state_vector(p))
        S = np.vstack(rows)
        c, *_ = np.linalg.lstsq(S.T, target.amplitudes, rcond=None)
        residual = target.amplitudes - S.T @ c
    return params


def _warm_start_init(
    warm: Decomposition,
    spaces: Sequence,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    params: list[np.ndarray] = []
    for i, sp in enumerate(spaces):
        p = None
        if i < len(warm.terms):
            p = sp.restrict(warm.terms[i][1].amplitudes)
        if p is None:
            p = sp.random_params(rng)
        params.append(p)
    return params


def _final_decomposition(
    target: EvenParityState, spaces: Sequence, params: list[np.ndarray]
) -> Decomposition:
    rows = [sp.state_vector(p) for sp, p in zip(spaces, params)]
    S = np.vstack(rows)
    c, *_ = np.linalg.lstsq(S.T, target.amplitudes, rcond=None)
    terms = [
        (complex(c[i]), EvenParityState(target.n, rows[i], normalized=True))
        for i in range(len(rows))
    ]
    return make_decomposition(target, terms)


def _write_search_log(path: str, rows: list[tuple[int, float, float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("iteration", "temperature", "loss", "best_loss"))
        writer.writerows(rows)


def anneal_decomposition(
    target: EvenParityState, config: RankSearchConfig | None = None
) -> Decomposition:
    """Best k-term Gaussian decomposition found by annealed chart search.

    Restart 0 warm-starts from config.warm_start when given, else from a
    greedy fidelity-witness peel (chart mode); restart 1 starts from the
    pivot-only basis charts; later restarts are random.  Coefficients are
    re-fit by least squares at every proposal, so the annealer only ever
    moves the states.
    """
    cfg = config if config is not None else RankSearchConfig()
    if abs(target.norm() - 1.0) > 1e-9:
        raise ValueError("target state must be normalized")
    k = cfg.terms
    if cfg.symmetry_restricted:
        if target.n != 8:
            raise ValueError("symmetry-restricted search needs an 8-qubit target")
        pivots = cfg.pivots if cfg.pivots is not None else (0,) * k
        if len(pivots) != k:
            raise ValueError(f"need {k} pivots, got {len(pivots)}")
        spaces: list = [_GridTermSpace(p) for p in pivots]
    else:
        centers = cfg.centers if cfg.centers is not None else _default_centers(target, k)
        if len(centers) != k:
            raise ValueError(f"need {k} centers, got {len(centers)}")
        spaces = [_ChartTermSpace(target.n, c) for c in centers]
    master = np.random.SeedSequence(cfg.seed)
    children = master.spawn(cfg.restarts)

    def one_restart(r: int):
        rng = np.random.default_rng(children[r])
        init = None
        if r == 0:
            if cfg.warm_start is not None:
                init = _warm_start_init(cfg.warm_start, spaces, rng)
            elif cfg.greedy_init and not cfg.symmetry_restricted:
                init = _greedy_chart_init(target, spaces, children[r], rng)
            else:
                init = [sp.initial_params() for sp in spaces]
        elif r == 1:
            init = [sp.initial_params() for sp in spaces]
        return _anneal_once(target.amplitudes, spaces, cfg, rng, init)

    results = _pool.run_indexed(one_restart, cfg.restarts, cfg.threads)
    best_r = min(range(cfg.restarts), key=lambda r: (results[r][1], r))
    best_params, best_loss, log_rows = results[best_r]
    if cfg.polish:
        best_params, best_loss = _polish_params(
            target.amplitudes, spaces, best_params, cfg.polish_maxiter, cfg.min_state_pivot
        )
    if cfg.log_path is not None:
        _write_search_log(cfg.log_path, log_rows)
    return _final_decomposition(target, spaces, best_params)


def symmetric_rank_search(
    k_terms: int, config: RankSearchConfig | None = None
) -> Decomposition:
    """Anneal k symmetric-sector Gaussians against |M>|M>.

    At 4 terms restart 1's pivot-only start is already the exact product
    expansion over pivots (0, 15, 240, 255); at 3 terms the loss stays
    bounded away from zero, and the returned terms all carry nonzero a_0
    by construction of the grid charts (pivot 0 unless overridden).
    """
    target = tensor_power(m_state(), 2)
    cfg = config if config is not None else RankSearchConfig(terms=k_terms)
    pivots = cfg.pivots
    if pivots is None:
        pivots = (0, 15, 240, 255)[:k_terms] if k_terms == 4 else (0,) * k_terms
    cfg = replace(cfg, terms=k_terms, symmetry_restricted=True, pivots=pivots)
    return anneal_decomposition(target, cfg)
