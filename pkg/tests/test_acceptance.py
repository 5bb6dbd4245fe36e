"""End-to-end acceptance checks, one test per criterion.

Each test prints a single pass/fail line with its headline numbers and
enforces the stated tolerance and wall-clock budget.  Budgets assume a
single worker; the searches here run at desk scale (4 to 12 qubits).
"""

import math
import time

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from gaussmagic.extent import (
    build_m4_certificate,
    extent4_via_extreme_points,
    extent_lower_via_fidelity,
    extent_upper,
    m4_overlap_bound_check,
    make_decomposition,
    multiplicativity_check,
)
from gaussmagic.fidelity import (
    delta_closed_form,
    delta_recursion,
    gaussian_fidelity,
    haar_random_even_state,
    net_cardinality_bound,
)
from gaussmagic.rank import (
    RankSearchConfig,
    anneal_decomposition,
    m_state,
    malpha_rank1_loss,
    malpha_state,
    mtilde_state,
    rank3_infeasibility_certificate,
    symmetric_rank_search,
)
from gaussmagic.states import (
    EvenParityState,
    all_constraints,
    chart_from_state,
    complete_amplitudes,
    lambda_residual_norm,
    random_gaussian,
    tensor_power,
    worst_constraint,
)
from gaussmagic.triples import (
    free_pair_labels,
    pair_label,
    pair_system_jacobian,
    pair_system_residuals,
    solve_triple_chart,
    triple_manifold_dimension,
)

GAUSSIAN_TOL = 1e-10


def emit(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d}: {'pass' if ok else 'FAIL'} ({detail})")


def test_criterion_01_verdict_agreement():
    started = time.monotonic()
    agree = total = 0
    for n in (4, 6):
        ids = all_constraints(n)
        states = [random_gaussian(n, seed) for seed in range(50)]
        states += [haar_random_even_state(n, 1000 + seed) for seed in range(50)]
        for state in states:
            by_lambda = lambda_residual_norm(state) <= GAUSSIAN_TOL
            _, value = worst_constraint(state, ids)
            by_constraints = abs(value) <= GAUSSIAN_TOL
            agree += by_lambda == by_constraints
            total += 1
    elapsed = time.monotonic() - started
    ok = agree == total and elapsed < 10.0
    emit(1, ok, f"agreement {agree}/{total}, {elapsed:.1f}s")
    assert agree == total
    assert elapsed < 10.0


def test_criterion_02_completion_roundtrip():
    started = time.monotonic()
    worst = 0.0
    for n in (4, 6, 8):
        for seed in range(100):
            state = random_gaussian(n, 100 * n + seed)
            rebuilt = complete_amplitudes(chart_from_state(state))
            worst = max(worst, float(np.max(np.abs(rebuilt.amplitudes - state.amplitudes))))
    elapsed = time.monotonic() - started
    ok = worst <= 1e-9 and elapsed < 30.0
    emit(2, ok, f"300 states, max roundtrip error {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 30.0


def test_criterion_03_fidelity_of_m():
    started = time.monotonic()
    result = gaussian_fidelity(m_state(), restarts=50, seed=0)
    elapsed = time.monotonic() - started
    ok = abs(result.value - 0.5) <= 1e-6 and result.converged and elapsed < 60.0
    emit(3, ok, f"F = {result.value:.9f}, {elapsed:.1f}s")
    assert abs(result.value - 0.5) <= 1e-6
    assert result.converged
    assert elapsed < 60.0


def test_criterion_04_extent_sandwich():
    started = time.monotonic()
    lower, _ = extent_lower_via_fidelity(m_state(), restarts=50, seed=0)
    value4, witness = extent4_via_extreme_points(m_state(), restarts=16, seed=0)
    r = 1.0 / math.sqrt(2.0)
    two_term = make_decomposition(
        m_state(),
        [
            (r + 0.0j, EvenParityState.basis_state(4, 0)),
            (r + 0.0j, EvenParityState.basis_state(4, 15)),
        ],
    )
    upper = extent_upper(two_term)
    gap = upper - lower
    elapsed = time.monotonic() - started
    ok = (
        abs(lower - 2.0) <= 1e-5
        and abs(value4 - 2.0) <= 1e-5
        and abs(upper - 2.0) <= 1e-12
        and abs(gap) <= 1e-4
        and witness.feasible
    )
    emit(4, ok, f"lower {lower:.7f}, extent4 {value4:.7f}, upper {upper:.1f}, gap {gap:.1e}")
    assert abs(lower - 2.0) <= 1e-5
    assert abs(value4 - 2.0) <= 1e-5
    assert abs(upper - 2.0) <= 1e-12
    assert abs(gap) <= 1e-4
    assert witness.feasible


def test_criterion_05_multiplicativity():
    started = time.monotonic()
    pairs = [
        ("M x M", [m_state(), m_state()], 0),
        ("M0.9 x M0.8", [malpha_state(0.9), malpha_state(0.8)], 1),
    ]
    details = []
    ok = True
    for name, targets, seed in pairs:
        report = multiplicativity_check(targets, restarts=8, seed=seed)
        ok &= report["tensor_fidelity"] <= 1.0 + 1e-6
        ok &= abs(report["primal_value"] - report["dual_value"]) <= 1e-4
        details.append(
            f"{name}: primal {report['primal_value']:.6f}, dual {report['dual_value']:.6f}"
        )
    elapsed = time.monotonic() - started
    ok = ok and elapsed < 600.0
    emit(5, ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


def nontrivial_blocks(Q):
    coo = sp.coo_matrix(Q)
    mask = (coo.row != coo.col) & (np.abs(coo.data) > 1e-12)
    graph = sp.coo_matrix(
        (np.ones(mask.sum()), (coo.row[mask], coo.col[mask])), shape=Q.shape
    )
    count, labels = connected_components(graph, directed=False)
    blocks = []
    for c in range(count):
        members = np.nonzero(labels == c)[0]
        if len(members) >= 2:
            blocks.append(members)
    return blocks


def test_criterion_06_certificates():
    started = time.monotonic()
    ok = True
    details = []
    for k, restarts in ((1, 8), (2, 6), (3, 4)):
        cert = build_m4_certificate(k)
        ok &= cert.min_eigenvalue >= -1e-9
        worst_block_dev = 0.0
        for members in nontrivial_blocks(cert.Q):
            sub = cert.Q[np.ix_(members, members)].toarray()
            eigs = np.linalg.eigvalsh(sub)
            top = eigs[-1]
            level = 2.0 ** round(math.log2(top))
            worst_block_dev = max(worst_block_dev, abs(top - level))
            dev = np.minimum(np.abs(eigs), np.abs(eigs - top))
            worst_block_dev = max(worst_block_dev, float(np.max(dev)))
        ok &= worst_block_dev <= 1e-9
        overlap = m4_overlap_bound_check(k, restarts=restarts, seed=0)
        ok &= overlap["overlap_bound_value"] <= 1.0 + 1e-6
        details.append(
            f"k={k}: min_eig {cert.min_eigenvalue:.1e}, block dev {worst_block_dev:.1e}, "
            f"overlap {overlap['overlap_bound_value']:.6f}"
        )
    elapsed = time.monotonic() - started
    ok = ok and elapsed < 300.0
    emit(6, ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_07_recursion_and_net_size():
    started = time.monotonic()
    worst = 0.0
    for n in range(2, 13):
        for w in range(2, n + 1, 2):
            for eta in (2.0**-20, 1e-3):
                a = delta_recursion(n, w, eta)
                b = delta_closed_form(n, w, eta)
                worst = max(worst, abs(a - b) / abs(b))
    card = net_cardinality_bound(4, 4)
    elapsed = time.monotonic() - started
    ok = worst <= 1e-9 and card.total_log2 == 356.0
    emit(7, ok, f"max rel dev {worst:.2e}, log2 net size {card.total_log2}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert card.total_log2 == 356.0


def random_solved_state(n: int, rng: np.random.Generator) -> EvenParityState:
    anchor = pair_label(n, 1, 2)
    labels = free_pair_labels(n, anchor)
    while True:
        values = {
            lab: complex(rng.standard_normal() + 1j * rng.standard_normal())
            for lab in labels
        }
        values[0] = complex(rng.standard_normal(), rng.standard_normal())
        if abs(values[anchor]) > 0.3:
            return solve_triple_chart(n, values, anchor)


def test_criterion_08_triple_manifold():
    started = time.monotonic()
    rng = np.random.default_rng(7)
    dims_ok = all(triple_manifold_dimension(n, seed=3) == 2 * n - 3 for n in (4, 5, 6))
    min_gap = np.inf
    for n in (5, 6):
        point = random_solved_state(n, rng)
        vec = np.array(
            [
                point.amplitude(pair_label(n, i, j))
                for i in range(1, n + 1)
                for j in range(i + 1, n + 1)
            ]
        )
        sv = np.linalg.svd(pair_system_jacobian(n, vec), compute_uv=False)
        rank = n * (n - 1) // 2 - (2 * n - 3)
        min_gap = min(min_gap, sv[rank - 1] / max(sv[rank], 1e-300))
    worst_residual = 0.0
    for n in (4, 5, 6):
        for _ in range(20):
            state = random_solved_state(n, rng)
            residuals = pair_system_residuals(state)
            worst_residual = max(worst_residual, max(abs(v) for v in residuals.values()))
    elapsed = time.monotonic() - started
    ok = dims_ok and min_gap >= 1e3 and worst_residual <= 1e-10 and elapsed < 120.0
    emit(
        8,
        ok,
        f"dims 2n-3 for n=4,5,6: {dims_ok}, min sv gap {min_gap:.1e}, "
        f"max residual {worst_residual:.1e}, {elapsed:.1f}s",
    )
    assert dims_ok
    assert min_gap >= 1e3
    assert worst_residual <= 1e-10
    assert elapsed < 120.0


def test_criterion_09_rank_searches():
    started = time.monotonic()
    mtilde2 = tensor_power(mtilde_state(), 2)
    d_a = anneal_decomposition(mtilde2, RankSearchConfig(terms=3))

    m2 = tensor_power(m_state(), 2)
    d_b = anneal_decomposition(
        m2,
        RankSearchConfig(
            terms=3, iterations=20_000, restarts=50, seed=0, greedy_init=False
        ),
    )
    trivial = anneal_decomposition(
        m2,
        RankSearchConfig(
            terms=3, iterations=0, restarts=1, seed=0, greedy_init=False, polish=False
        ),
    )

    d_c = symmetric_rank_search(
        4, RankSearchConfig(iterations=200, restarts=2, seed=0)
    )
    elapsed = time.monotonic() - started
    ok = (
        d_a.loss <= 1e-4
        and d_b.loss >= 0.2
        and abs(trivial.loss - 0.25) <= 1e-12
        and d_c.loss <= 1e-10
        and elapsed < 1800.0
    )
    emit(
        9,
        ok,
        f"mtilde^2 3-term loss {d_a.loss:.2e}; m^2 3-term floor {d_b.loss:.4f}, "
        f"trivial {trivial.loss:.12f}; symmetric 4-term {d_c.loss:.1e}; {elapsed:.0f}s",
    )
    assert d_a.loss <= 1e-4
    assert d_b.loss >= 0.2
    assert abs(trivial.loss - 0.25) <= 1e-12
    assert d_c.loss <= 1e-10
    assert elapsed < 1800.0


def test_criterion_10_rank3_obstruction():
    started = time.monotonic()
    obstructions = []
    for seed in range(20):
        cfg = RankSearchConfig(
            terms=3,
            iterations=2000,
            restarts=1,
            seed=seed,
            min_state_pivot=0.05,
            polish_maxiter=60,
        )
        candidate = symmetric_rank_search(3, cfg)
        report = rank3_infeasibility_certificate(candidate)
        if not report["applicable"]:
            obstructions.append(-1.0)
        else:
            obstructions.append(report["obstruction"])
    elapsed = time.monotonic() - started
    ok = all(o > 0 for o in obstructions)
    emit(
        10,
        ok,
        f"20/20 applicable with obstruction > 0: {ok}, "
        f"min {min(obstructions):.2e}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_11_alpha_loss_ratio():
    ok = True
    details = []
    for k in (2, 3):
        ratios = []
        for j in range(2, 7):
            analytic, numeric = malpha_rank1_loss(1.0 - 10.0**-j, k)
            ratios.append(numeric / analytic)
        ok &= all(b < a for a, b in zip(ratios, ratios[1:]))
        ok &= abs(ratios[1] - 1.0) <= 0.05
        details.append(f"k={k}: {ratios[0]:.4f} -> {ratios[-1]:.4f}, j=3 at {ratios[1]:.4f}")
    emit(11, ok, "; ".join(details))
    assert ok
