"""Gaussian extent: primal decompositions, dual witnesses, certificates.

The extent of a target is the squared best l1 coefficient mass over exact
decompositions into normalized Gaussian states.  Lower bounds come from
fidelity (1/F) and from dual witnesses y with sup_s |<s|y>| <= 1; on four
qubits the dual optimum is attained on the orbit of |0> + |15> under
matchgate circuits, which makes the extent computable to optimizer
precision.  A sparse PSD certificate bounds the overlap of any Gaussian
with tensor powers of |0> + |15> without optimization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla
from scipy.optimize import minimize

from . import _pool
from .fidelity import FidelityResult, gaussian_fidelity
from .labels import (
    diff_positions,
    even_index_table,
    even_label_array,
    flip_bits,
    hamming_distance,
)
from .states import (
    EvenParityState,
    apply_parametrized_circuit,
    brickwork_site_list,
    lambda_residual_norm,
    overlap,
    state_from_dict,
    state_to_dict,
    tensor_product,
    PARAMS_PER_GATE,
)
from .triples import pair_label

FEASIBILITY_TOL = 1e-7
DUALITY_GAP_TOL = 1e-5
EXACT_DECOMP_TOL = 1e-9
CERT_EIG_TOL = 1e-9
ATTAIN_TOL = 1e-6


# ---------------------------------------------------------------------------
# Primal side


@dataclass(eq=False)
class Decomposition:
    """Exact or near-exact expansion of a target over Gaussian states."""

    target: EvenParityState
    terms: list[tuple[complex, EvenParityState]]
    loss: float
    extent_value: float

    def __post_init__(self) -> None:
        for _, state in self.terms:
            if lambda_residual_norm(state) > 1e-9:
                raise ValueError("decomposition term fails the Gaussianity check")
        if abs(self.loss - self._recompute_loss()) > 1e-12:
            raise ValueError("stored loss does not match the terms")
        mass = sum(abs(c) for c, _ in self.terms)
        if abs(self.extent_value - mass**2) > 1e-12 * max(1.0, mass**2):
            raise ValueError("stored extent value does not match the coefficients")

    def _recompute_loss(self) -> float:
        acc = np.zeros_like(self.target.amplitudes)
        for c, state in self.terms:
            acc = acc + c * state.amplitudes
        return float(np.linalg.norm(self.target.amplitudes - acc) ** 2)


def make_decomposition(
    target: EvenParityState, terms: Sequence[tuple[complex, EvenParityState]]
) -> Decomposition:
    terms = [(complex(c), s) for c, s in terms]
    acc = np.zeros_like(target.amplitudes)
    for c, state in terms:
        acc = acc + c * state.amplitudes
    loss = float(np.linalg.norm(target.amplitudes - acc) ** 2)
    mass = sum(abs(c) for c, _ in terms)
    return Decomposition(target, terms, loss, float(mass**2))


def extent_upper(d: Decomposition) -> float:
    """Extent upper bound from an exact decomposition."""
    if d.loss > EXACT_DECOMP_TOL:
        raise ValueError(f"decomposition is inexact (loss {d.loss:.3e})")
    return d.extent_value


def decomposition_to_dict(d: Decomposition) -> dict:
    return {
        "target": state_to_dict(d.target),
        "terms": [[c.real, c.imag, state_to_dict(s)] for c, s in d.terms],
        "loss": d.loss,
        "extent_value": d.extent_value,
    }


def decomposition_from_dict(data: dict) -> Decomposition:
    try:
        target = state_from_dict(data["target"])
        terms = [
            (complex(float(re), float(im)), state_from_dict(s))
            for re, im, s in data["terms"]
        ]
        return Decomposition(target, terms, float(data["loss"]), float(data["extent_value"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed decomposition object: {exc}") from exc


def basis_dictionary(n: int) -> list[EvenParityState]:
    """All even basis states; every one is Gaussian."""
    return [EvenParityState.basis_state(n, int(x)) for x in even_label_array(n)]


def socp_decomposition(
    target: EvenParityState,
    dictionary: Sequence[EvenParityState],
    solver: str | None = None,
) -> Decomposition:
    """Minimum l1-mass expansion of the target over a finite Gaussian dictionary.

    Solved as a second-order cone program; the support found by the solver is
    then re-fit by least squares so the returned decomposition is exact to
    machine precision whenever the dictionary spans the target.
    """
    import cvxpy as cp

    A = np.stack([s.amplitudes for s in dictionary], axis=1)
    c = cp.Variable(A.shape[1], complex=True)
    problem = cp.Problem(
        cp.Minimize(cp.norm1(c)), [A @ c == target.amplitudes]
    )
    solvers = [solver] if solver else ["CLARABEL", "ECOS", "SCS"]
    last_err: Exception | None = None
    for name in solvers:
        try:
            problem.solve(solver=name)
            if c.value is not None:
                break
        except cp.error.SolverError as exc:
            last_err = exc
    if c.value is None:
        raise RuntimeError(f"no SOCP solver produced a solution: {last_err}")
    coeffs = np.asarray(c.value)
    # support threshold must sit above conic-solver noise (~1e-9), else a
    # redundant dictionary survives into the least-squares refit and the
    # min-norm solution redistributes mass away from the l1 optimum
    keep = np.abs(coeffs) > 1e-6 * max(1.0, float(np.max(np.abs(coeffs))))
    support = [i for i in range(len(dictionary)) if keep[i]]
    refit, *_ = np.linalg.lstsq(A[:, support], target.amplitudes, rcond=None)
    terms = [(complex(refit[j]), dictionary[i]) for j, i in enumerate(support)]
    return make_decomposition(target, terms)


def extent_lower_via_fidelity(
    target: EvenParityState,
    restarts: int = 50,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
) -> tuple[float, FidelityResult]:
    """1/F lower bound; the fidelity witness is returned for audit."""
    result = gaussian_fidelity(target, restarts=restarts, seed=seed, threads=threads)
    return 1.0 / result.value, result


# ---------------------------------------------------------------------------
# Dual side


@dataclass(frozen=True, eq=False)
class DualWitness:
    """Vector y with estimated sup_s |<s|y>|^2 at most 1 (s Gaussian, unit)."""

    y: EvenParityState
    feasibility_margin: float
    objective: float
    fidelity_estimate: float

    @property
    def feasible(self) -> bool:
        return self.fidelity_estimate <= 1.0 + FEASIBILITY_TOL


def dual_feasibility(
    y: EvenParityState,
    target: EvenParityState | None = None,
    restarts: int = 12,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
) -> DualWitness:
    """Estimate sup_s |<s|y>|^2 by fidelity maximization on y/||y||."""
    nrm = y.norm()
    if nrm == 0.0:
        raise ValueError("dual vector is zero")
    scaled = EvenParityState(y.n, y.amplitudes / nrm, normalized=True)
    result = gaussian_fidelity(scaled, restarts=restarts, seed=seed, threads=threads)
    estimate = nrm**2 * result.value
    objective = float(overlap(target, y).real) if target is not None else 0.0
    return DualWitness(
        y=y,
        feasibility_margin=float(1.0 - np.sqrt(estimate)),
        objective=objective,
        fidelity_estimate=float(estimate),
    )


def _m4_vector(n: int = 4) -> np.ndarray:
    vec = np.zeros(1 << (n - 1), dtype=np.complex128)
    index = even_index_table(n)
    vec[index[0]] = 1.0
    vec[index[(1 << n) - 1]] = 1.0
    return vec


def _circuit_opt(
    n: int,
    sites: tuple[int, ...],
    v0: np.ndarray,
    target_conj: np.ndarray,
    theta0: np.ndarray,
    maxiter: int,
    real_part: bool,
) -> tuple[np.ndarray, float]:
    """Maximize |<target|U(theta) v0>| (or its real part) over gate angles."""
    step = 1e-6

    def value(theta: np.ndarray) -> float:
        w = apply_parametrized_circuit(n, sites, theta, v0)
        ip = target_conj @ w
        return -(ip.real**2) if real_part else -(abs(ip) ** 2)

    def fun_and_grad(theta: np.ndarray):
        f0 = value(theta)
        grad = np.empty_like(theta)
        for j in range(theta.size):
            probe = theta.copy()
            probe[j] += step
            fp = value(probe)
            probe[j] -= 2 * step
            fm = value(probe)
            grad[j] = (fp - fm) / (2 * step)
        return f0, grad

    res = minimize(
        fun_and_grad, theta0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter}
    )
    return res.x, -res.fun


def extent4_via_extreme_points(
    target: EvenParityState,
    restarts: int = 16,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
    maxiter: int = 300,
) -> tuple[float, DualWitness]:
    """Exact-to-optimizer-precision extent on 4 qubits.

    The dual optimum is attained on the circuit orbit of |0> + |15>; the
    squared best real overlap with that family is the extent estimate.
    """
    if target.n != 4:
        raise ValueError("extreme-point extent is a 4-qubit construction")
    if abs(target.norm() - 1.0) > 1e-9:
        raise ValueError("target state must be normalized")
    sites = brickwork_site_list(4)
    nparams = PARAMS_PER_GATE * len(sites)
    v0 = _m4_vector()
    target_conj = np.conj(target.amplitudes)
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    children = master.spawn(max(restarts, 1) + 1)

    def one_restart(i: int) -> tuple[np.ndarray, float]:
        if i == 0:
            theta0 = np.zeros(nparams)
        else:
            rng = np.random.default_rng(children[i])
            theta0 = rng.uniform(-np.pi, np.pi, nparams)
        return _circuit_opt(4, sites, v0, target_conj, theta0, maxiter, real_part=True)

    results = _pool.run_indexed(one_restart, max(restarts, 1), threads)
    best_theta, best_val = max(results, key=lambda r: r[1])
    y_vec = apply_parametrized_circuit(4, sites, best_theta, v0)
    y = EvenParityState(4, y_vec)
    witness = dual_feasibility(
        y, target=target, restarts=12, seed=children[-1], threads=threads
    )
    return float(best_val), witness


def multiplicativity_check(
    targets: Sequence[EvenParityState],
    restarts: int = 16,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
) -> dict:
    """Per-factor extents vs the tensor product, with a dual-feasible tensor
    witness on the joint system and a matching product decomposition."""
    for t in targets:
        if t.n != 4:
            raise ValueError("multiplicativity check expects 4-qubit factors")
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    children = master.spawn(len(targets) + 1)
    singles = []
    for t, child in zip(targets, children):
        value, witness = extent4_via_extreme_points(
            t, restarts=restarts, seed=child, threads=threads
        )
        singles.append((value, witness))
    product_extent = float(np.prod([v for v, _ in singles]))

    big_target = reduce(tensor_product, targets)
    big_y = reduce(tensor_product, [w.y for _, w in singles])
    tensor_witness = dual_feasibility(
        big_y, target=big_target, restarts=12, seed=children[-1], threads=threads
    )
    dual_value = tensor_witness.objective**2

    factor_decomps = [socp_decomposition(t, basis_dictionary(4)) for t in targets]
    coeff_lists = [[(c, s) for c, s in d.terms] for d in factor_decomps]
    product_terms = coeff_lists[0]
    for terms in coeff_lists[1:]:
        product_terms = [
            (c1 * c2, tensor_product(s1, s2))
            for c1, s1 in product_terms
            for c2, s2 in terms
        ]
    product_decomp = make_decomposition(big_target, product_terms)
    primal_value = extent_upper(product_decomp)

    return {
        "per_factor_extent": [v for v, _ in singles],
        "product_extent": product_extent,
        "dual_value": float(dual_value),
        "primal_value": float(primal_value),
        "gap": float(primal_value - dual_value),
        "tensor_fidelity": tensor_witness.fidelity_estimate,
        "tensor_margin": tensor_witness.feasibility_margin,
        "tensor_feasible": tensor_witness.feasible,
        "term_count": len(product_terms),
    }


# ---------------------------------------------------------------------------
# PSD certificate for tensor powers of |0> + |15>


@dataclass(eq=False)
class PsdCertificate:
    """Sparse PSD witness that |sum_S a_x|^2 <= 1 for normalized Gaussians.

    S is the set of labels whose 4-bit blocks are all 0000 or 1111; the
    quadratic form Q is the identity minus the S-projector corrections plus
    constraint fills, and Q >= 0 is the certified statement.
    """

    k: int
    labels: np.ndarray
    constraints: list[tuple[int, int, float]]
    Q: sp.csr_matrix
    min_eigenvalue: float

    def __post_init__(self) -> None:
        if self.min_eigenvalue < -CERT_EIG_TOL:
            raise ValueError(
                f"certificate is not PSD (min eigenvalue {self.min_eigenvalue:.3e})"
            )


def _extension_labels(k: int) -> list[int]:
    """Labels of 4k bits whose 4-bit blocks are each 0000 or 1111."""
    labels = []
    for mask in range(1 << k):
        value = 0
        for block in range(k):
            if (mask >> block) & 1:
                value |= 0xF << (4 * block)
        labels.append(value)
    return sorted(labels)


def _add_sym(entries: dict, iu: int, iv: int, w: float) -> None:
    if iu == iv:
        entries[(iu, iu)] = entries.get((iu, iu), 0.0) + w
    else:
        entries[(iu, iv)] = entries.get((iu, iv), 0.0) + w
        entries[(iv, iu)] = entries.get((iv, iu), 0.0) + w


def _fill_constraint_terms(
    entries: dict, n: int, x: int, xp: int, weight_of_i, index: np.ndarray
) -> None:
    """Add weight_of_i(i) at the i-th product pair of the (x, xp) constraint."""
    D = diff_positions(x, xp, n)
    k1 = D[0]
    for i, ki in enumerate(D[1:], start=2):
        u = flip_bits(x, (k1, ki), n)
        v = flip_bits(xp, (k1, ki), n)
        _add_sym(entries, int(index[u]), int(index[v]), weight_of_i(i))


def _offdiag_components(entries: dict, dim: int) -> list[np.ndarray]:
    rows, cols = [], []
    for (i, j), w in entries.items():
        if i != j and abs(w) > 1e-12:
            rows.append(i)
            cols.append(j)
    if not rows:
        return []
    adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim))
    ncomp, assignment = csgraph.connected_components(adj, directed=False)
    touched = sorted(set(rows) | set(cols))
    comps: dict[int, list[int]] = {}
    for node in touched:
        comps.setdefault(assignment[node], []).append(node)
    return [np.array(sorted(nodes)) for _, nodes in sorted(
        comps.items(), key=lambda kv: min(kv[1])
    ) if len(nodes) >= 2]


def _dense_block(entries: dict, nodes: np.ndarray) -> np.ndarray:
    pos = {int(node): i for i, node in enumerate(nodes)}
    block = np.zeros((len(nodes), len(nodes)))
    for int_node in nodes:
        block[pos[int(int_node)], pos[int(int_node)]] = entries.get(
            (int(int_node), int(int_node)), 0.0
        ) + 1.0
    for (i, j), w in entries.items():
        if i != j and i in pos and j in pos:
            block[pos[i], pos[j]] = w
    return block


def build_m4_certificate(k: int) -> PsdCertificate:
    """Assemble and verify the PSD certificate for k tensor copies."""
    if not 1 <= k <= 3:
        raise ValueError("certificate construction supports k in 1..3")
    n = 4 * k
    dim = 1 << (n - 1)
    index = even_index_table(n)
    labels = even_label_array(n)

    # entries hold Q - I; the identity is added when materializing
    entries: dict[tuple[int, int], float] = {}
    S = _extension_labels(k)
    for s in S:
        _add_sym(entries, int(index[s]), int(index[s]), -1.0)
    for s, t in combinations(S, 2):
        _fill_constraint_terms(
            entries, n, s, t, lambda i: -((-1.0) ** i), index
        )

    constraints: list[tuple[int, int, float]] = []
    label_of = {int(index[x]): int(x) for x in labels}
    for _round in range(k):
        fixed_any = False
        for nodes in _offdiag_components(entries, dim):
            block = _dense_block(entries, nodes)
            if np.linalg.eigvalsh(block)[0] >= -CERT_EIG_TOL:
                continue
            fixed_any = True
            color = _two_color(entries, nodes)
            for a_pos, b_pos in combinations(range(len(nodes)), 2):
                iu, iv = int(nodes[a_pos]), int(nodes[b_pos])
                if (iu, iv) in entries and abs(entries[(iu, iv)]) > 1e-12:
                    continue
                x, xp = label_of[iu], label_of[iv]
                if hamming_distance(x, xp) < 4:
                    raise ValueError(
                        f"component pair ({x},{xp}) too close for a constraint"
                    )
                sign = color[iu] * color[iv]
                alpha = -2.0 * sign
                constraints.append((x, xp, alpha))
                _add_sym(entries, iu, iv, sign)
                _fill_constraint_terms(
                    entries, n, x, xp,
                    lambda i, _a=alpha: _a * ((-1.0) ** i) / 2.0, index,
                )
        if not fixed_any:
            break

    rows = [i for (i, _j) in entries]
    cols = [j for (_i, j) in entries]
    vals = [w for w in entries.values()]
    Q = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    Q = Q + sp.identity(dim, format="csr")
    min_eig = _min_eigenvalue(Q, dense=(k <= 2))
    return PsdCertificate(
        k=k,
        labels=labels,
        constraints=constraints,
        Q=Q,
        min_eigenvalue=min_eig,
    )


def _two_color(entries: dict, nodes: np.ndarray) -> dict[int, int]:
    """Assign +-1 to nodes so every edge weight w_uv equals color_u * color_v."""
    adj: dict[int, list[tuple[int, float]]] = {int(u): [] for u in nodes}
    node_set = set(int(u) for u in nodes)
    for (i, j), w in entries.items():
        if i != j and abs(w) > 1e-12 and i in node_set and j in node_set:
            adj[i].append((j, w))
    color: dict[int, int] = {}
    root = int(nodes.min())
    color[root] = 1
    queue = [root]
    while queue:
        u = queue.pop()
        for v, w in adj[u]:
            want = color[u] * (1 if w > 0 else -1)
            if v in color:
                if color[v] != want:
                    raise ValueError("frustrated sign pattern in certificate block")
            else:
                color[v] = want
                queue.append(v)
    if len(color) != len(node_set):
        raise ValueError("certificate block is not connected")
    return color


def _min_eigenvalue(Q: sp.csr_matrix, dense: bool) -> float:
    if dense:
        return float(np.linalg.eigvalsh(Q.toarray())[0])
    try:
        # shift-invert below the spectrum: the eigenvalue nearest sigma is
        # the smallest one, negative or not (plain which='SA' stalls on the
        # degenerate clusters here)
        vals = spla.eigsh(Q.tocsc(), k=1, sigma=-1.0, which="LM",
                          return_eigenvectors=False)
        return float(vals[0])
    except Exception:
        return float(np.linalg.eigvalsh(Q.toarray())[0])


def certificate_block_eigenvalues(
    cert: PsdCertificate,
) -> list[tuple[list[int], np.ndarray]]:
    """Eigenvalues of each nontrivial off-diagonal block of Q, by component."""
    dim = cert.Q.shape[0]
    coo = cert.Q.tocoo()
    entries = {}
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if i != j:
            entries[(int(i), int(j))] = float(w)
        else:
            entries[(int(i), int(i))] = float(w) - 1.0
    out = []
    label_of = {idx: int(x) for idx, x in enumerate(cert.labels)}
    for nodes in _offdiag_components(entries, dim):
        block = _dense_block(entries, nodes)
        out.append(([label_of[int(u)] for u in nodes], np.linalg.eigvalsh(block)))
    return out


def certificate_to_dict(cert: PsdCertificate) -> dict:
    return {
        "k": cert.k,
        "constraints": [[x, xp, alpha] for x, xp, alpha in cert.constraints],
        "min_eigenvalue": cert.min_eigenvalue,
    }


def m4_overlap_bound_check(
    k: int,
    restarts: int = 8,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
) -> dict:
    """Directly maximize |<m^k|s>|^2 over Gaussians; must stay at most 1."""
    if not 1 <= k <= 3:
        raise ValueError("overlap check supports k in 1..3")
    n = 4 * k
    vec = np.zeros(1 << (n - 1), dtype=np.complex128)
    index = even_index_table(n)
    for s in _extension_labels(k):
        vec[index[s]] = 1.0
    norm2 = float(np.vdot(vec, vec).real)
    target = EvenParityState(n, vec / np.sqrt(norm2), normalized=True)
    result = gaussian_fidelity(target, restarts=restarts, seed=seed, threads=threads)
    bound_value = norm2 * result.value
    if bound_value > 1.0 + ATTAIN_TOL:
        raise AssertionError(
            f"overlap bound violated: {bound_value} > 1 for k={k}"
        )
    return {
        "k": k,
        "fidelity": result.value,
        "overlap_bound_value": float(bound_value),
        "within_bound": True,
    }


# ---------------------------------------------------------------------------
# Extreme-witness span diagnostic


def extreme_witness_span_test(
    y: EvenParityState,
    samples: int = 8,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
    maxiter: int = 300,
) -> dict:
    """Necessary-condition check that a feasible y touches enough Gaussians.

    Gaussians s = U|0> with <s|y> of modulus 1 are collected by optimizing
    over circuit parameters; each contributes U|0> and the pair-flip images
    U|[i,j]>.  Full even-sector rank of the collection is consistent with
    y being extreme (but does not prove it).
    """
    n = y.n
    master = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(seed)
    )
    children = master.spawn(max(samples, 1) + 1)
    feas = dual_feasibility(y, restarts=8, seed=children[-1], threads=threads)
    sites = brickwork_site_list(n)
    nparams = PARAMS_PER_GATE * len(sites)
    dim = 1 << (n - 1)
    vac = np.zeros(dim, dtype=np.complex128)
    vac[0] = 1.0
    target_conj = np.conj(y.amplitudes)

    def one_sample(i: int) -> tuple[float, np.ndarray]:
        if i == 0:
            theta0 = np.zeros(nparams)
        else:
            rng = np.random.default_rng(children[i])
            theta0 = rng.uniform(-np.pi, np.pi, nparams)
        theta, val = _circuit_opt(
            n, sites, vac, target_conj, theta0, maxiter, real_part=False
        )
        return np.sqrt(max(val, 0.0)), theta

    results = _pool.run_indexed(one_sample, max(samples, 1), threads)
    collected = []
    attaining = 0
    for val, theta in results:
        if val < 1.0 - ATTAIN_TOL:
            continue
        attaining += 1
        collected.append(apply_parametrized_circuit(n, sites, theta, vac))
        for i, j in combinations(range(1, n + 1), 2):
            basis = np.zeros(dim, dtype=np.complex128)
            basis[int(even_index_table(n)[pair_label(n, i, j)])] = 1.0
            collected.append(apply_parametrized_circuit(n, sites, theta, basis))
    if collected:
        sv = np.linalg.svd(np.stack(collected), compute_uv=False)
        rank = int(np.sum(sv > 1e-6 * sv[0]))
    else:
        rank = 0
    return {
        "n": n,
        "feasible": feas.feasible,
        "best_value": max(v for v, _ in results),
        "attaining": attaining,
        "rank": rank,
        "dim": dim,
        "consistent_with_extreme": rank == dim,
    }
