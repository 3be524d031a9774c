import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldprobe import gaussian as gq
from fieldprobe.errors import ConvergenceFailure, DomainError, IndexOutOfRange, NonPositiveDefinite
from fieldprobe.lattice import LatticeSpec, ground_state
from fieldprobe.regions import Region, reduce


def oracle_spectrum(sigma):
    """|eigenvalues of i Omega sigma| from a generic complex eigensolver, one per mode."""
    k = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * gq.symplectic_form(k) @ sigma))
    return np.sort(ev)[::-1][::2]


def random_state(k, seed, spread=3.0):
    rng = np.random.default_rng(seed)
    s = gq.random_symplectic(k, 0.6, seed)
    d = np.repeat(1.0 + spread * rng.random(k), 2)
    return (s * d) @ s.T


def test_symplectic_form_structure():
    om = gq.symplectic_form(3)
    np.testing.assert_array_equal(om, -om.T)
    np.testing.assert_array_equal(om @ om, -np.eye(6))
    np.testing.assert_array_equal(om[:2, :2], [[0, 1], [-1, 0]])


def test_spectrum_vacuum_and_reduced_two_mode():
    np.testing.assert_allclose(gq.symplectic_spectrum(np.eye(2)), [1.0])
    reduced = gq.submatrix(gq.two_mode_squeezed(2.0), [0])
    np.testing.assert_allclose(reduced, 2 * np.eye(2))
    np.testing.assert_allclose(gq.symplectic_spectrum(reduced), [2.0])


@pytest.mark.parametrize("seed", range(10))
def test_spectrum_matches_complex_eigensolver(seed):
    sigma = random_state(2, seed)
    np.testing.assert_allclose(gq.symplectic_spectrum(sigma), oracle_spectrum(sigma), rtol=0, atol=1e-10)


def test_spectrum_generic_spd_matrix():
    # a generic SPD matrix need not be a physical state, but the spectrum is still defined
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    sigma = a @ a.T + 0.5 * np.eye(4)
    np.testing.assert_allclose(gq.symplectic_spectrum(sigma), oracle_spectrum(sigma), atol=1e-10)


def test_spectrum_sorted_descending():
    nu = gq.symplectic_spectrum(random_state(5, 3))
    assert np.all(np.diff(nu) <= 0)


def test_non_positive_definite_rejected():
    with pytest.raises(NonPositiveDefinite):
        gq.symplectic_spectrum(np.diag([1.0, 1.0, 0.0, 1.0]))
    with pytest.raises(NonPositiveDefinite):
        gq.williamson(-np.eye(2))


def test_asymmetric_input_rejected():
    sigma = np.eye(2)
    sigma[0, 1] = 0.1
    with pytest.raises(DomainError):
        gq.symplectic_spectrum(sigma)


def test_williamson_identity():
    wd = gq.williamson(np.eye(6))
    np.testing.assert_allclose(wd.spectrum, 1.0, atol=1e-12)
    assert wd.reconstruction_error() < 1e-12
    assert gq.is_symplectic(wd.transform)


@pytest.mark.parametrize("seed", range(5))
def test_williamson_pure_transformed_vacuum(seed):
    s0 = gq.random_symplectic(4, 0.8, seed)
    wd = gq.williamson(s0 @ s0.T)
    np.testing.assert_allclose(wd.spectrum, 1.0, atol=1e-8)
    assert wd.reconstruction_error() < 1e-7


def test_williamson_reduced_four_site_chain():
    lat = LatticeSpec(1, 5, 5.0, 0.3)
    sigma_a = reduce(ground_state(lat), Region.from_sites(lat, [0, 1]))
    for method in ("auto", "schur", "qp"):
        wd = gq.williamson(sigma_a, method=method)
        assert wd.reconstruction_error() < 1e-8
        np.testing.assert_allclose(wd.spectrum, oracle_spectrum(sigma_a), atol=1e-10)


def test_williamson_methods_agree_on_block_state():
    lat = LatticeSpec.near_critical(1, 15)
    sigma_a = reduce(ground_state(lat), Region.hypercube(lat, side=5))
    schur = gq.williamson(sigma_a, method="schur")
    qp = gq.williamson(sigma_a, method="qp")
    np.testing.assert_allclose(schur.spectrum, qp.spectrum, rtol=1e-10)
    # same modes up to sign, for this non-degenerate spectrum
    for k in range(3):
        a, b = schur.mode_rows()[2 * k], qp.mode_rows()[2 * k]
        assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-6


def test_qp_method_needs_block_form():
    with pytest.raises(DomainError):
        gq.williamson(random_state(2, 1), method="qp")


def test_williamson_sign_convention():
    wd = gq.williamson(random_state(3, 7))
    rows = wd.mode_rows()
    for k in range(3):
        q_row = rows[2 * k, 0::2]
        assert q_row[np.argmax(np.abs(q_row))] > 0


def test_williamson_mode_rows_diagonalize():
    sigma = random_state(4, 9)
    wd = gq.williamson(sigma)
    r = wd.mode_rows()
    np.testing.assert_allclose(r @ sigma @ r.T, wd.diagonal(), atol=1e-9)


def test_partial_transpose_involution_and_two_mode_entries():
    tms = gq.two_mode_squeezed(2.0)
    pt = gq.partial_transpose(tms, [1])
    np.testing.assert_array_equal(gq.partial_transpose(pt, [1]), tms)
    assert pt[1, 3] == pytest.approx(np.sqrt(3))
    assert tms[1, 3] == pytest.approx(-np.sqrt(3))
    assert pt[0, 2] == pytest.approx(np.sqrt(3))


def test_partial_transpose_product_state_spectrum():
    a, b = random_state(2, 1), random_state(1, 2)
    sigma = gq.direct_sum(a, b)
    pooled = np.sort(np.concatenate([gq.symplectic_spectrum(a), gq.symplectic_spectrum(b)]))[::-1]
    np.testing.assert_allclose(gq.symplectic_spectrum(gq.partial_transpose(sigma, [2])), pooled, atol=1e-10)


def test_partial_transpose_index_errors():
    with pytest.raises(IndexOutOfRange):
        gq.partial_transpose(np.eye(4), [2])
    with pytest.raises(IndexOutOfRange):
        gq.submatrix(np.eye(4), [-1])


def test_log_negativity_values():
    assert gq.log_negativity(gq.direct_sum(random_state(1, 0), random_state(1, 1)), [0]) == 0.0
    assert gq.log_negativity(gq.two_mode_squeezed(2.0), [0]) == pytest.approx(1.3169578969248166, abs=1e-10)


def test_log_negativity_two_routes_six_site_chain():
    lat = LatticeSpec.near_critical(1, 7)
    sigma = ground_state(lat)
    region = Region.from_sites(lat, [3, 4])
    direct = gq.log_negativity(sigma, region.site_indices)
    nu = gq.symplectic_spectrum(reduce(sigma, region))
    via = np.sum(gq.negativity_terms(nu - np.sqrt(nu**2 - 1)))
    assert direct == pytest.approx(via, rel=1e-8)


def test_entropy_values():
    assert gq.von_neumann_entropy(np.eye(4)) == 0.0
    expected = 1.5 * np.log(1.5) - 0.5 * np.log(0.5)
    assert gq.mode_entropy(2.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.9548, abs=1e-4)
    assert gq.von_neumann_entropy(ground_state(LatticeSpec.near_critical(1, 21))) < 1e-6


def test_ptranspose_map_values():
    np.testing.assert_allclose(gq.ptranspose_spectrum_from_reduced([1.0]), [1.0])
    np.testing.assert_allclose(gq.ptranspose_spectrum_from_reduced([2.0]), [2 - np.sqrt(3)], rtol=1e-14)
    np.testing.assert_allclose(gq.ptranspose_spectrum_from_reduced([1.0, 3.0, 2.0])[0], 3 - np.sqrt(8))
    with pytest.raises(DomainError):
        gq.ptranspose_spectrum_from_reduced([0.5])


def test_ptranspose_map_large_nu_no_cancellation():
    nu = 1e9
    assert gq.ptranspose_spectrum_from_reduced([nu])[0] == pytest.approx(1 / (2 * nu), rel=1e-9)


def test_ptranspose_floor_keeps_weakly_mixed_modes():
    # nu - 1 = 5e-13 is resolved by the spectrum; it contributes about 1e-6 to the negativity
    nu = np.array([1.0 + 5e-13] + [1.0] * 99 + [3.0])
    pred = gq.ptranspose_spectrum_from_reduced(nu)
    assert 1 - pred[1] == pytest.approx(np.sqrt(1e-12), rel=1e-3)
    # pure product modes with roundoff-level excess stay pure
    assert np.all(gq.ptranspose_spectrum_from_reduced([1.0 + 2e-16, 1.0 - 1e-16]) == 1.0)


def test_ptranspose_matches_direct_spectrum():
    lat = LatticeSpec.near_critical(1, 15)
    sigma = ground_state(lat)
    region = Region.hypercube(lat, side=5)
    nu = gq.symplectic_spectrum(reduce(sigma, region))
    pred = gq.ptranspose_spectrum_from_reduced(nu)
    direct = np.sort(gq.symplectic_spectrum(gq.partial_transpose(sigma, region.site_indices)))
    entangled = pred < 1 - 1e-6
    np.testing.assert_allclose(direct[: entangled.sum()], pred[entangled], atol=1e-8)


def test_two_mode_squeezed():
    np.testing.assert_array_equal(gq.two_mode_squeezed(1.0), np.eye(4))
    tms = gq.two_mode_squeezed(2.0)
    assert abs(tms[0, 2]) == pytest.approx(np.sqrt(3)) and abs(tms[1, 3]) == pytest.approx(np.sqrt(3))
    np.testing.assert_allclose(gq.symplectic_spectrum(tms), [1, 1], atol=1e-10)
    with pytest.raises(DomainError):
        gq.two_mode_squeezed(0.9)


def test_random_symplectic_properties():
    s = gq.random_symplectic(5, 1.0, 42)
    assert gq.symplectic_defect(s) < 1e-9
    np.testing.assert_array_equal(s, gq.random_symplectic(5, 1.0, 42))
    assert np.abs(gq.random_symplectic(3, 1e-9, 1) - np.eye(6)).max() < 1e-7
    with pytest.raises(DomainError):
        gq.random_symplectic(2, 0.0, 1)


def test_symplectic_inverse():
    s = gq.random_symplectic(3, 0.7, 5)
    np.testing.assert_allclose(gq.symplectic_inverse(s) @ s, np.eye(6), atol=1e-10)


def test_interlacing_examples():
    rep = gq.interlacing_check(np.eye(6), 1)
    assert rep.passed and rep.min_margin == pytest.approx(0.0, abs=1e-12)
    rep = gq.interlacing_check(gq.two_mode_squeezed(2.0), 1)
    assert rep.passed
    np.testing.assert_allclose(rep.spectrum_deleted, [2.0])
    np.testing.assert_allclose(rep.spectrum_full, [1.0, 1.0], atol=1e-10)
    with pytest.raises(IndexOutOfRange):
        gq.interlacing_check(np.eye(4), 2)
    with pytest.raises(DomainError):
        gq.interlacing_check(np.eye(2), 0)


def test_degenerate_cluster_ordering_is_deterministic():
    sigma = gq.direct_sum(2 * np.eye(2), np.eye(2), 2 * np.eye(2))
    wd = gq.williamson(sigma)
    np.testing.assert_allclose(wd.spectrum, [2, 2, 1])
    rows = wd.mode_rows()
    # ties broken by the dominant site index
    assert np.argmax(np.abs(rows[0, 0::2])) == 0
    assert np.argmax(np.abs(rows[2, 0::2])) == 2


@st.composite
def states(draw, max_modes=4):
    k = draw(st.integers(1, max_modes))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(k, seed)


@settings(max_examples=60, deadline=None)
@given(states(), st.integers(0, 2**32 - 1))
def test_property_symplectic_invariance(sigma, seed):
    k = sigma.shape[0] // 2
    s = gq.random_symplectic(k, 0.5, seed)
    np.testing.assert_allclose(gq.symplectic_spectrum(s @ sigma @ s.T), gq.symplectic_spectrum(sigma), rtol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0.05, 1.5))
def test_property_transformed_vacuum_is_pure(k, seed, intensity):
    s = gq.random_symplectic(k, intensity, seed)
    sigma = s @ s.T
    # rounding sigma alone moves the spectrum by about eps * cond(sigma)
    tol = max(1e-9, 1e-14 * np.linalg.cond(sigma))
    np.testing.assert_allclose(gq.symplectic_spectrum(sigma), 1.0, atol=tol)


@settings(max_examples=60, deadline=None)
@given(states())
def test_property_williamson_reconstructs(sigma):
    try:
        wd = gq.williamson(sigma)
    except ConvergenceFailure:  # pragma: no cover - would be a real bug
        raise
    assert wd.reconstruction_error() < 1e-7
    assert gq.symplectic_defect(wd.transform) < 1e-9
    assert np.all(wd.spectrum >= 1 - 1e-9)


@settings(max_examples=80, deadline=None)
@given(st.floats(1.0, 1e6, allow_nan=False))
def test_property_monotone_map(nu):
    here = gq.ptranspose_spectrum_from_reduced([nu])[0]
    further = gq.ptranspose_spectrum_from_reduced([nu * 1.01 + 1e-6])[0]
    assert here <= 1.0 and further < here


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_property_pure_state_entropy_symmetry_and_two_routes(k, seed):
    s = gq.random_symplectic(2 * k, 0.5, seed)
    sigma = s @ s.T
    a = list(range(k))
    b = list(range(k, 2 * k))
    assert gq.von_neumann_entropy(gq.submatrix(sigma, a)) == pytest.approx(
        gq.von_neumann_entropy(gq.submatrix(sigma, b)), abs=1e-6
    )
    nu = gq.symplectic_spectrum(gq.submatrix(sigma, a))
    via = np.sum(gq.negativity_terms(gq.ptranspose_spectrum_from_reduced(nu)))
    assert gq.log_negativity(sigma, a) == pytest.approx(via, rel=1e-8, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(states(5), st.data())
def test_property_interlacing(sigma, data):
    k = sigma.shape[0] // 2
    if k < 2:
        return
    assert gq.interlacing_check(sigma, data.draw(st.integers(0, k - 1))).passed
