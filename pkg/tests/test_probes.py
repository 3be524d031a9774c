import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldprobe import gaussian as gq
from fieldprobe import probes
from fieldprobe.errors import DomainError, IncompleteBasis, NonCommutingModes
from fieldprobe.io import read_csv
from fieldprobe.lattice import CouplingLattice, LatticeSpec, ground_state
from fieldprobe.regions import (
    ModeProfile,
    Region,
    entanglement_captured,
    mode_covariance,
    normal_modes,
    reduce,
)


@pytest.fixture(scope="module")
def chain():
    lat = LatticeSpec.near_critical(1, 21)
    sigma = ground_state(lat)
    return lat, sigma, Region.hypercube(lat, side_fraction=1 / 3)


@pytest.fixture(scope="module")
def chain6():
    lat = CouplingLattice.near_critical(1, 6)
    sigma = ground_state(lat)
    return lat, sigma, Region.from_sites(lat, [0, 1, 2])


def site_mode(lat, site):
    return ModeProfile(Region.from_sites(lat, [site]), [1.0], [1.0])


# -- swap -------------------------------------------------------------------


def test_single_site_swap_is_signed_permutation():
    lat = CouplingLattice(1, 3, 1.0, 0.0)
    s = probes.swap_unitary_symplectic(probes.SwapAssignment([(0, site_mode(lat, 1))]))
    expected = np.eye(8)
    # coordinates: (q_d, p_d, q0, p0, q1, p1, q2, p2)
    d, f = [0, 1], [4, 5]
    expected[np.ix_(d + f, d + f)] = probes._SWAP4
    np.testing.assert_array_equal(s, expected)
    assert set(np.unique(s)) <= {-1.0, 0.0, 1.0}


def test_swap_twice_is_minus_identity_on_planes(chain):
    lat, sigma, region = chain
    modes = normal_modes(sigma, region).modes[:2]
    assignment = probes.SwapAssignment(list(enumerate(modes)))
    s = probes.swap_unitary_symplectic(assignment)
    twice = s @ s
    for d, mode in assignment.pairs:
        vec = np.zeros((2, s.shape[0]))
        vec[0, 2 * d], vec[1, 2 * d + 1] = 1.0, 1.0
        np.testing.assert_allclose(twice @ vec.T, -vec.T, atol=1e-12)
    # a normal mode's dual vectors get a sign flip too; the unswapped modes stay put
    rest = normal_modes(sigma, region).modes[2]
    omega = gq.symplectic_form(lat.num_sites)
    dual = np.zeros(s.shape[0])
    dual[4:] = omega @ rest.lattice_rows()[1]
    np.testing.assert_allclose(s @ dual, dual, atol=1e-12)


def test_swap_is_symplectic_for_random_assignments(chain):
    lat, sigma, region = chain
    for seed in range(10):
        s_rand = gq.random_symplectic(len(region), 0.7, seed)
        rows = s_rand[:6]
        modes = [ModeProfile.from_phase_space_rows(region, rows[2 * j : 2 * j + 2]) for j in range(3)]
        s = probes.swap_unitary_symplectic(probes.SwapAssignment([(2, modes[0]), (0, modes[1]), (1, modes[2])]))
        assert gq.symplectic_defect(s) <= 1e-10


def test_swap_rejects_noncommuting_modes():
    lat = CouplingLattice(1, 3, 1.0, 0.0)
    region = Region.from_sites(lat, [0, 1])
    a = ModeProfile(region, [1.0, 0.0], [1.0, 0.0])
    b = ModeProfile(region, [1.0, 1.0], [0.0, 1.0])  # [Q_b, P_a] = i
    with pytest.raises(NonCommutingModes):
        probes.SwapAssignment([(0, a), (1, b)])
    with pytest.raises(NonCommutingModes):
        probes.SwapAssignment([(0, ModeProfile(region, [2.0, 0.0], [1.0, 0.0]))])
    with pytest.raises(DomainError):
        probes.SwapAssignment([(0, a), (0, ModeProfile(region, [0.0, 1.0], [0.0, 1.0]))])


def test_swap_transfers_state_exactly(chain):
    lat, sigma, region = chain
    modes = normal_modes(sigma, region).modes[:3]
    res = probes.run_swap(sigma, probes.SwapAssignment(list(enumerate(modes))))
    np.testing.assert_allclose(res.detectors, mode_covariance(sigma, modes), atol=1e-10)
    assert gq.von_neumann_entropy(res.detectors) == pytest.approx(
        entanglement_captured(sigma, region, 3), abs=1e-9
    )
    # the swapped field modes now hold the detector vacuum
    rows = np.vstack([m.lattice_rows() for m in modes])
    np.testing.assert_allclose(rows @ res.field @ rows.T, np.eye(6), atol=1e-10)
    # joint state stays pure
    np.testing.assert_allclose(gq.symplectic_spectrum(res.joint), 1.0, atol=1e-6)


def test_swap_with_pure_mode_leaves_vacuum():
    lat = CouplingLattice(1, 5, 1.0, 0.0)
    sigma = ground_state(lat)
    res = probes.run_swap(sigma, probes.SwapAssignment([(0, site_mode(lat, 3))]))
    np.testing.assert_allclose(res.detectors, np.eye(2), atol=1e-14)


def test_detector_bank():
    bank = probes.DetectorBank(3, gap=2.0)
    np.testing.assert_array_equal(bank.initial_covariance(), np.eye(6))
    with pytest.raises(DomainError):
        probes.DetectorBank(0)


def test_swap_into_larger_bank(chain):
    lat, sigma, region = chain
    mode = normal_modes(sigma, region)[0]
    res = probes.run_swap(sigma, probes.SwapAssignment([(2, mode)]), probes.DetectorBank(4))
    np.testing.assert_allclose(res.detectors[4:6, 4:6], mode_covariance(sigma, [mode]), atol=1e-10)
    np.testing.assert_allclose(res.detectors[:4, :4], np.eye(4), atol=1e-14)
    with pytest.raises(DomainError):
        probes.run_swap(sigma, probes.SwapAssignment([(5, mode)]), probes.DetectorBank(4))


# -- completion and negativity ----------------------------------------------


def test_complete_symplectic_basis():
    s = gq.random_symplectic(5, 0.8, 3)
    for m in (0, 1, 3, 5):
        basis = probes.complete_symplectic_basis(s[: 2 * m] if m else np.zeros((0, 10)), 5)
        assert gq.symplectic_defect(basis) <= 1e-8
        np.testing.assert_array_equal(basis[: 2 * m], s[: 2 * m])


def test_complete_rejects_bad_rows():
    with pytest.raises(NonCommutingModes):
        probes.complete_symplectic_basis(np.array([[1.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]]), 2)
    with pytest.raises(DomainError):
        probes.complete_symplectic_basis(np.eye(4)[:1], 2)
    assert issubclass(IncompleteBasis, Exception)


def test_well_conditioned_pairs_same_span():
    s = gq.random_symplectic(4, 1.5, 9)
    rows = s[:4]
    pairs = probes.well_conditioned_pairs(rows)
    probes.check_canonical(pairs)
    # same row space: projecting onto the span of rows changes nothing
    proj = np.linalg.lstsq(rows.T, pairs.T, rcond=None)[0]
    np.testing.assert_allclose(proj.T @ rows, pairs, atol=1e-9)
    assert np.linalg.cond(pairs) < np.linalg.cond(rows)


def test_full_trial_equals_bound_despite_bad_scaling(chain6):
    lat, sigma, region = chain6
    runner = probes.BoundTrials(sigma, region)
    for seed in range(20):
        assert abs(runner.trial(3, seed, intensity=1.5).margin) <= 1e-10


def test_negativity_all_modes_equals_region_negativity(chain):
    lat, sigma, region = chain
    modes = normal_modes(sigma, region).modes
    value = probes.negativity_with_complement(sigma, region, modes)
    assert value == pytest.approx(gq.log_negativity(sigma, region.site_indices), rel=1e-8)


def test_negativity_single_top_mode(chain):
    lat, sigma, region = chain
    ranked = normal_modes(sigma, region)
    nu = ranked.eigenvalues[0]
    value = probes.negativity_with_complement(sigma, region, [ranked[0]])
    assert value == pytest.approx(-np.log(nu - np.sqrt(nu**2 - 1)), rel=1e-9)


def test_negativity_of_unentangled_mode_is_zero():
    lat = CouplingLattice(1, 5, 1.0, 0.0)
    sigma = ground_state(lat)
    region = Region.from_sites(lat, [1, 2])
    mode = ModeProfile(region, [1.0, 0.0], [1.0, 0.0])
    assert probes.negativity_with_complement(sigma, region, [mode]) == 0.0


def test_negativity_rejects_mode_outside_region(chain):
    lat, sigma, region = chain
    with pytest.raises(DomainError):
        probes.negativity_with_complement(sigma, region, [site_mode(lat, 0)])


def test_negativity_is_completion_invariant(chain):
    lat, sigma, region = chain
    mode = normal_modes(sigma, region)[1]
    n = len(region)
    rows = probes._region_rows(region, [mode])
    base = probes.complete_symplectic_basis(rows, n)
    comp = region.complement()
    cross = gq.submatrix_pair(sigma, region.site_indices, comp.site_indices)
    sa, sb = reduce(sigma, region), reduce(sigma, comp)
    values = []
    for seed in range(5):
        # remix the completion with a random symplectic acting on it alone
        mix = np.eye(2 * n)
        mix[2:, 2:] = gq.random_symplectic(n - 1, 1.0, seed)
        t = mix @ base
        full = np.block([[t @ sa @ t.T, t @ cross], [(t @ cross).T, sb]])
        traced = gq.submatrix(full, [0, *range(n, n + len(comp))])
        values.append(gq.log_negativity(traced, [0]))
    expected = probes.negativity_with_complement(sigma, region, [mode])
    np.testing.assert_allclose(values, expected, rtol=1e-10)


def test_negativity_basis_independence(chain):
    lat, sigma, region = chain
    n = len(region)
    direct = gq.log_negativity(sigma, region.site_indices)
    for seed in range(5):
        s = gq.random_symplectic(n, 1.0, seed)
        modes = [ModeProfile.from_phase_space_rows(region, s[2 * j : 2 * j + 2]) for j in range(n)]
        assert probes.negativity_with_complement(sigma, region, modes) == pytest.approx(direct, rel=1e-8)


# -- bound trials -----------------------------------------------------------


def test_bound_trials_six_site_chain(chain6):
    lat, sigma, region = chain6
    runner = probes.BoundTrials(sigma, region)
    for k in (1, 2):
        reports = [runner.trial(k, s) for s in range(200)]
        assert all(r.passed for r in reports)
        assert max(r.margin for r in reports) <= probes.BOUND_SLACK


def test_bound_is_monotone_in_k(chain):
    lat, sigma, region = chain
    runner = probes.BoundTrials(sigma, region)
    bounds = [runner.bound(k) for k in range(1, len(region) + 1)]
    assert np.all(np.diff(bounds) >= -1e-12)


def test_identity_trial_saturates_bound(chain6):
    lat, sigma, region = chain6
    for k in (1, 2, 3):
        rep = probes.theorem_bound_trial(sigma, region, k, seed=0, intensity=0.0, basis="normal")
        assert rep.margin == pytest.approx(0.0, abs=1e-12)


def test_least_mixed_mode_strictly_below(chain):
    lat, sigma, region = chain
    ranked = normal_modes(sigma, region)
    assert ranked.eigenvalues[0] > ranked.eigenvalues[-1] + 1e-6
    runner = probes.BoundTrials(sigma, region)
    value = probes.negativity_with_complement(sigma, region, [ranked[len(region) - 1]])
    assert value < runner.bound(1)


def test_small_perturbations_of_normal_modes(chain6):
    lat, sigma, region = chain6
    reports = probes.theorem_bound_trials(sigma, region, 1, range(50), intensity=1e-3, basis="normal")
    margins = np.array([r.margin for r in reports])
    assert np.all(margins <= probes.BOUND_SLACK)
    # close to saturation but below
    assert np.all(margins > -1e-2)


def test_trial_argument_checks(chain6):
    lat, sigma, region = chain6
    runner = probes.BoundTrials(sigma, region)
    with pytest.raises(DomainError):
        runner.trial(0, 1)
    with pytest.raises(DomainError):
        runner.trial(1, 1, basis="fourier")


def test_trials_csv(tmp_path, chain6):
    lat, sigma, region = chain6
    reports = probes.theorem_bound_trials(sigma, region, 2, [3, 4, 5])
    path = tmp_path / "trials.csv"
    probes.write_trials_csv(path, reports, {"k": 2})
    meta, header, rows = read_csv(path)
    assert header == probes.TRIAL_HEADER and meta == {"k": 2}
    assert [int(r[0]) for r in rows] == [3, 4, 5]
    assert float(rows[1][4]) == reports[1].margin


# -- counterexample ---------------------------------------------------------


def test_counterexample_values():
    rep = probes.counterexample_abc(3.0, 2.0)
    assert rep.most_mixed == "A1" and not rep.degenerate
    assert rep.negativity_a1_b == 0.0
    assert rep.negativity_a2_b == pytest.approx(1.3169579, abs=1e-7)
    assert rep.negativity_a2_b == pytest.approx(rep.expected_a2_b, abs=1e-12)
    np.testing.assert_allclose(rep.spectrum_a, [3.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(gq.symplectic_spectrum(rep.covariance), 1.0, atol=1e-12)


def test_counterexample_degenerate_and_swapped():
    rep = probes.counterexample_abc(2.0, 2.0)
    assert rep.degenerate and rep.most_mixed is None
    swapped = probes.counterexample_abc(3.0, 2.0, swap_bc=True)
    assert swapped.negativity_a2_b == 0.0
    assert swapped.negativity_a1_b == pytest.approx(-np.log(3 - np.sqrt(8)), abs=1e-10)


@pytest.mark.parametrize("strong,weak", [(2.0, 3.0), (2.0, 1.0), (1.0, 1.0)])
def test_counterexample_domain(strong, weak):
    with pytest.raises(DomainError):
        probes.counterexample_abc(strong, weak)


# -- properties -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.sampled_from([0.1, 0.5, 1.0, 2.0]))
def test_property_bound_holds(seed, k, intensity):
    lat = CouplingLattice.near_critical(1, 6)
    sigma = ground_state(lat)
    rep = probes.theorem_bound_trial(sigma, Region.from_sites(lat, [0, 1, 2]), k, seed, intensity)
    assert rep.margin <= probes.BOUND_SLACK


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_property_swap_exact(seed, k):
    lat = LatticeSpec.near_critical(1, 11)
    sigma = ground_state(lat)
    region = Region.hypercube(lat, side=5)
    s = gq.random_symplectic(5, 0.8, seed)
    modes = [ModeProfile.from_phase_space_rows(region, s[2 * j : 2 * j + 2]) for j in range(k)]
    res = probes.run_swap(sigma, probes.SwapAssignment(list(enumerate(modes))))
    np.testing.assert_allclose(res.detectors, mode_covariance(sigma, modes), atol=1e-10)
