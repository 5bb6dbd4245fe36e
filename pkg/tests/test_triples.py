import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussmagic.states import (
    EvenParityState,
    lambda_residual_norm,
    random_brickwork_circuit,
    random_gaussian,
)
from gaussmagic.triples import (
    GaussianTriple,
    build_triple,
    free_pair_labels,
    pair_label,
    pair_system_jacobian,
    pair_system_residuals,
    quad_relation,
    solve_triple_chart,
    triple_manifold_dimension,
)


def test_pair_label_frozen():
    assert pair_label(4, 1, 2) == 12
    assert pair_label(4, 3, 4) == 3
    assert pair_label(4, 1, 4) == 9
    assert pair_label(8, 5, 6) == 12


def test_free_pair_labels_frozen():
    assert free_pair_labels(4, 3) == [3, 10, 9, 6, 5]
    for n in (4, 5, 6):
        assert len(free_pair_labels(n, 3)) == 2 * n - 3


def test_free_pair_labels_rejects_bad_anchor():
    with pytest.raises(ValueError):
        free_pair_labels(4, 7)


def all_pairs(n):
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def decomposable_pairs(n, rng):
    """Rank-2 antisymmetric pair data a_ij = u_i w_j - u_j w_i.

    These satisfy every three-term quadruple relation identically, which
    is exactly the variety the anchored solve parametrizes.
    """
    u = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    w = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    return {(i, j): u[i] * w[j] - u[j] * w[i] for i, j in all_pairs(n)}


@pytest.mark.parametrize("n", [4, 5, 6])
def test_quad_relation_is_pfaffian_data_on_gaussians(n, rng):
    # on a genuine Gaussian the three-term relation recovers a_0 times the
    # weight-4 amplitude, so it vanishes exactly on weight <= 2 states
    from gaussmagic.labels import label_from_positions
    from gaussmagic.triples import _pair_amplitudes, _quadruples

    for _ in range(5):
        s = random_gaussian(n, rng)
        pairs = _pair_amplitudes(s)
        a0 = s.amplitude(0)
        for quad in _quadruples(n):
            expected = a0 * s.amplitude(label_from_positions(quad, n))
            assert quad_relation(pairs, quad) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_solve_reproduces_decomposable_pairs(n, rng):
    for _ in range(3):
        pairs = decomposable_pairs(n, rng)
        anchor_pq = max(pairs, key=lambda pq: abs(pairs[pq]))
        anchor = pair_label(n, *anchor_pq)
        free = {0: 0.3 + 0.1j}
        for label in free_pair_labels(n, anchor):
            i, j = [p for p in range(1, n + 1) if (label >> (n - p)) & 1]
            free[label] = pairs[(i, j)]
        solved = solve_triple_chart(n, free, anchor)
        for (i, j), value in pairs.items():
            assert solved.amplitude(pair_label(n, i, j)) == pytest.approx(
                value, abs=1e-10
            )


def test_pair_system_residuals_vanish_on_solved_states(rng):
    free = {0: 0.2, 3: 1.0, 10: 0.4 - 0.1j, 9: 0.3, 6: -0.2j, 5: 0.15}
    s = solve_triple_chart(4, free, 3)
    assert max(abs(r) for r in pair_system_residuals(s).values()) < 1e-13


def test_solve_rejects_zero_anchor():
    with pytest.raises(ValueError):
        solve_triple_chart(4, {0: 1.0}, 3)


def test_solve_rejects_non_free_label():
    with pytest.raises(ValueError):
        solve_triple_chart(4, {3: 1.0, 12: 0.5}, 3)


def test_build_triple_trivial_chart():
    triple = build_triple(4, None, {0: 0.5, 3: 0.5}, 3)
    assert triple.alpha == pytest.approx(1 / np.sqrt(2))
    assert triple.beta == pytest.approx(1 / np.sqrt(2))
    assert triple.psi0.amplitude(0) == pytest.approx(1.0)
    r = 1 / np.sqrt(2)
    assert triple.psi1.amplitude(0) == pytest.approx(r)
    assert triple.psi1.amplitude(3) == pytest.approx(r)
    assert triple.psi2.amplitude(0) == pytest.approx(r)
    assert triple.psi2.amplitude(3) == pytest.approx(-r)


def test_build_triple_linear_dependence(rng):
    free = {0: 0.4, 3: 0.8, 10: 0.3 - 0.2j, 5: 0.1j}
    circuit = random_brickwork_circuit(4, rng)
    triple = build_triple(4, circuit, free, 3)
    combo = (
        triple.psi0.amplitudes
        - triple.alpha * triple.psi1.amplitudes
        - triple.beta * triple.psi2.amplitudes
    )
    assert np.linalg.norm(combo) < 1e-12
    for state in (triple.psi0, triple.psi1, triple.psi2):
        assert lambda_residual_norm(state) < 1e-9
        assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_triple_validation_rejects_unrelated_states(rng):
    g1 = random_gaussian(4, rng)
    g2 = random_gaussian(4, rng)
    vac = EvenParityState.basis_state(4, 0)
    with pytest.raises(ValueError):
        GaussianTriple(vac, g1, g2, 0.3, 0.4)


@given(
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
)
def test_triple_from_random_chart(a, b, c):
    free = {0: 0.3, 3: 1.0, 10: complex(a, b), 6: complex(c, a * b)}
    triple = build_triple(4, None, free, 3)
    assert triple.alpha > 0
    assert triple.beta > 0


def test_manifold_dimension_smallest_case():
    assert triple_manifold_dimension(4, seed=0) == 5


def test_jacobian_rank_gap(rng):
    # at a smooth solution point the complex jacobian has rank
    # C(n,2) - (2n-3); the singular values drop sharply at the cut
    n = 5
    pairs = decomposable_pairs(n, rng)
    vec = np.array([pairs[pq] for pq in all_pairs(n)])
    J = pair_system_jacobian(n, vec)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = len(all_pairs(n)) - (2 * n - 3)
    assert sv[rank - 1] / max(sv[rank], 1e-300) > 1e3


@pytest.mark.parametrize("n", [4, 5])
def test_manifold_dimension_matches_formula(n):
    assert triple_manifold_dimension(n, seed=3) == 2 * n - 3
