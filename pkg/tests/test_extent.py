import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse import csgraph

from gaussmagic.extent import (
    Decomposition,
    basis_dictionary,
    build_m4_certificate,
    certificate_to_dict,
    decomposition_from_dict,
    decomposition_to_dict,
    dual_feasibility,
    extent4_via_extreme_points,
    extent_lower_via_fidelity,
    extent_upper,
    m4_overlap_bound_check,
    make_decomposition,
    multiplicativity_check,
    socp_decomposition,
)
from gaussmagic.states import (
    EvenParityState,
    lambda_residual_norm,
    random_gaussian,
)


def m_test_state() -> EvenParityState:
    r = 1 / np.sqrt(2)
    return EvenParityState.from_amplitude_map(4, {0: r, 15: r}).rescaled_to_unit()


def malpha_test_state(alpha: float) -> EvenParityState:
    beta = np.sqrt(1.0 - alpha * alpha)
    return EvenParityState.from_amplitude_map(
        4, {0: alpha, 15: beta}
    ).rescaled_to_unit()


def two_term_m_decomposition() -> Decomposition:
    r = 1 / np.sqrt(2)
    terms = [
        (r, EvenParityState.basis_state(4, 0)),
        (r, EvenParityState.basis_state(4, 15)),
    ]
    return make_decomposition(m_test_state(), terms)


# ---------------------------------------------------------------------------
# Decompositions


def test_exact_two_term_decomposition():
    d = two_term_m_decomposition()
    assert d.loss < 1e-15
    assert d.extent_value == pytest.approx(2.0, abs=1e-12)
    assert extent_upper(d) == pytest.approx(2.0, abs=1e-12)


def test_decomposition_rejects_non_gaussian_term():
    with pytest.raises(ValueError):
        make_decomposition(m_test_state(), [(1.0, m_test_state())])


def test_decomposition_rejects_wrong_loss():
    r = 1 / np.sqrt(2)
    terms = [
        (r, EvenParityState.basis_state(4, 0)),
        (r, EvenParityState.basis_state(4, 15)),
    ]
    with pytest.raises(ValueError):
        Decomposition(m_test_state(), terms, loss=0.5, extent_value=2.0)


def test_extent_upper_requires_exact_decomposition():
    r = 1 / np.sqrt(2)
    d = make_decomposition(m_test_state(), [(r, EvenParityState.basis_state(4, 0))])
    assert d.loss > 1e-9
    with pytest.raises(ValueError):
        extent_upper(d)


def test_decomposition_dict_roundtrip():
    d = two_term_m_decomposition()
    d2 = decomposition_from_dict(decomposition_to_dict(d))
    assert d2.loss == pytest.approx(d.loss, abs=1e-15)
    assert d2.extent_value == pytest.approx(d.extent_value, abs=1e-12)
    assert len(d2.terms) == 2


def test_basis_dictionary_is_gaussian():
    dictionary = basis_dictionary(4)
    assert len(dictionary) == 8
    for s in dictionary:
        assert lambda_residual_norm(s) < 1e-14


def test_socp_decomposition_of_magic_state():
    d = socp_decomposition(m_test_state(), basis_dictionary(4))
    assert d.loss < 1e-9
    assert d.extent_value == pytest.approx(2.0, abs=1e-4)


def test_socp_decomposition_of_gaussian_is_cheap(rng):
    target = random_gaussian(4, rng)
    d = socp_decomposition(target, basis_dictionary(4) + [target])
    assert d.extent_value == pytest.approx(1.0, abs=1e-4)


# ---------------------------------------------------------------------------
# Bounds


def test_extent_lower_on_magic_state():
    bound, result = extent_lower_via_fidelity(m_test_state(), restarts=10, seed=0)
    assert bound == pytest.approx(2.0, abs=1e-5)
    assert result.value == pytest.approx(0.5, abs=1e-6)


def test_extent4_on_magic_state():
    value, witness = extent4_via_extreme_points(m_test_state(), restarts=8, seed=0)
    assert value == pytest.approx(2.0, abs=1e-5)
    assert witness.feasible
    assert witness.fidelity_estimate <= 1.0 + 1e-6


def test_extent4_matches_closed_form_for_malpha():
    alpha = 0.9
    value, witness = extent4_via_extreme_points(
        malpha_test_state(alpha), restarts=8, seed=1
    )
    expected = (alpha + np.sqrt(1.0 - alpha * alpha)) ** 2
    assert value == pytest.approx(expected, abs=1e-5)
    assert witness.feasible


def test_extent4_rejects_wrong_size(rng):
    with pytest.raises(ValueError):
        extent4_via_extreme_points(random_gaussian(6, rng), restarts=1, seed=0)


def test_dual_feasibility_on_gaussian(rng):
    y = random_gaussian(4, rng)
    witness = dual_feasibility(y, restarts=6, seed=0)
    assert witness.fidelity_estimate == pytest.approx(1.0, abs=1e-6)
    assert witness.feasible


def test_dual_feasibility_detects_scaled_vector(rng):
    base = random_gaussian(4, rng)
    y = EvenParityState(4, 2.0 * base.amplitudes)
    witness = dual_feasibility(y, restarts=4, seed=0)
    assert witness.fidelity_estimate == pytest.approx(4.0, abs=1e-5)
    assert not witness.feasible


def test_multiplicativity_on_two_magic_states():
    report = multiplicativity_check([m_test_state(), m_test_state()], restarts=6, seed=0)
    assert report["product_extent"] == pytest.approx(4.0, abs=1e-4)
    assert report["primal_value"] == pytest.approx(4.0, abs=1e-4)
    assert report["dual_value"] == pytest.approx(4.0, abs=1e-3)
    assert report["tensor_feasible"]
    assert report["gap"] <= 1e-3


# ---------------------------------------------------------------------------
# Certificates


def nontrivial_blocks(Q: sp.spmatrix) -> list[np.ndarray]:
    """Connected components of the off-diagonal sparsity, size >= 2."""
    off = Q.tocoo()
    mask = (off.row != off.col) & (np.abs(off.data) > 1e-12)
    adj = sp.coo_matrix(
        (np.ones(mask.sum()), (off.row[mask], off.col[mask])), shape=Q.shape
    )
    _, assign = csgraph.connected_components(adj, directed=False)
    out = []
    touched = np.unique(np.concatenate([off.row[mask], off.col[mask]]))
    for comp in np.unique(assign[touched]):
        nodes = np.flatnonzero(assign == comp)
        if len(nodes) >= 2:
            out.append(nodes)
    return out


@pytest.mark.parametrize("k", [1, 2])
def test_certificate_is_psd(k):
    cert = build_m4_certificate(k)
    assert cert.min_eigenvalue >= -1e-9
    assert cert.k == k
    data = certificate_to_dict(cert)
    assert data["k"] == k
    assert data["min_eigenvalue"] == cert.min_eigenvalue


@pytest.mark.parametrize("k", [1, 2])
def test_certificate_block_spectra(k):
    # every nontrivial block has eigenvalues 0 and a single power of two
    cert = build_m4_certificate(k)
    Q = cert.Q
    for nodes in nontrivial_blocks(Q):
        block = Q[np.ix_(nodes, nodes)].toarray()
        eigs = np.linalg.eigvalsh(block)
        top = eigs[-1]
        level = round(float(np.log2(top)))
        assert top == pytest.approx(2.0**level, abs=1e-9)
        for e in eigs:
            assert min(abs(e), abs(e - top)) < 1e-9


def test_certificate_rejects_large_k():
    with pytest.raises(ValueError):
        build_m4_certificate(4)


@pytest.mark.parametrize("k", [1, 2])
def test_overlap_bound_holds(k):
    report = m4_overlap_bound_check(k, restarts=4, seed=0)
    assert report["within_bound"]
    assert report["overlap_bound_value"] <= 1.0 + 1e-6
    # the bound is tight: the Gaussian closest to the S-uniform vector
    # saturates it
    assert report["overlap_bound_value"] == pytest.approx(1.0, abs=1e-5)


def test_overlap_rejects_large_k():
    with pytest.raises(ValueError):
        m4_overlap_bound_check(4, restarts=1, seed=0)
