"""Self-contained invariant checks across every module.

Each check returns the worst observed deviation and the tolerance it is held
to. ``quick`` shrinks lattices and trial counts so the suite runs in a few
seconds.
"""

from dataclasses import dataclass

import numpy as np

from .. import continuum as ct
from .. import gaussian as gq
from .. import probes
from ..lattice import CouplingLattice, LatticeSpec, ground_state
from ..regions import Region, entanglement_captured, mode_covariance, normal_modes, reduce


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def _random_regions(lat, count, rng):
    out = []
    for _ in range(count):
        size = int(rng.integers(1, lat.num_sites))
        out.append(Region.from_sites(lat, rng.choice(lat.num_sites, size, replace=False)))
    return out


def check_purity(quick):
    worst = 0.0
    for dim, sites in ((1, 31 if quick else 101), (2, 7 if quick else 15), (3, 3 if quick else 7)):
        nu = gq.symplectic_spectrum(ground_state(LatticeSpec.near_critical(dim, sites)))
        worst = max(worst, float(np.max(np.abs(nu - 1))))
    return CheckResult("ground_state_purity", worst, 1e-6)


def check_williamson(quick):
    rng = np.random.default_rng(11)
    worst = 0.0
    for seed in range(5 if quick else 20):
        k = int(rng.integers(1, 6))
        s = gq.random_symplectic(k, 0.5, seed)
        d = np.repeat(1 + rng.random(k) * 3, 2)
        wd = gq.williamson((s * d) @ s.T)
        worst = max(worst, wd.reconstruction_error(), gq.symplectic_defect(wd.transform))
    return CheckResult("williamson_reconstruction", worst, 1e-9)


def check_entropy_symmetry(quick):
    lat = LatticeSpec.near_critical(1, 21 if quick else 41)
    sigma = ground_state(lat)
    worst = 0.0
    for region in _random_regions(lat, 5 if quick else 20, np.random.default_rng(3)):
        left = gq.von_neumann_entropy(reduce(sigma, region))
        right = gq.von_neumann_entropy(reduce(sigma, region.complement()))
        worst = max(worst, abs(left - right))
    return CheckResult("entropy_symmetry", worst, 1e-6)


def check_negativity_routes(quick):
    lat = LatticeSpec.near_critical(1, 21 if quick else 41)
    sigma = ground_state(lat)
    worst = 0.0
    for region in _random_regions(lat, 5 if quick else 20, np.random.default_rng(4)):
        direct = gq.log_negativity(sigma, region.site_indices)
        nu = gq.symplectic_spectrum(reduce(sigma, region))
        via = float(np.sum(gq.negativity_terms(gq.ptranspose_spectrum_from_reduced(nu))))
        worst = max(worst, abs(direct - via) / max(abs(via), 1e-300))
    return CheckResult("negativity_two_routes", worst, 1e-8)


def check_two_mode_anchor(quick):
    value = gq.log_negativity(gq.two_mode_squeezed(2.0), [0])
    return CheckResult("two_mode_squeezed_anchor", abs(value + np.log(2 - np.sqrt(3))), 1e-10)


def check_interlacing(quick):
    lat = LatticeSpec.near_critical(1, 21)
    sigma = ground_state(lat)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100 if quick else 1000):
        region = Region.from_sites(lat, rng.choice(lat.num_sites, int(rng.integers(2, 10)), replace=False))
        rep = gq.interlacing_check(reduce(sigma, region), int(rng.integers(len(region))))
        worst = max(worst, -rep.min_margin)
    return CheckResult("interlacing", worst, 1e-9)


def check_swap(quick):
    lat = LatticeSpec.near_critical(1, 21)
    sigma = ground_state(lat)
    region = Region.hypercube(lat, side_fraction=1 / 3)
    modes = normal_modes(sigma, region).modes[:3]
    res = probes.run_swap(sigma, probes.SwapAssignment(list(enumerate(modes))))
    err = float(np.max(np.abs(res.detectors - mode_covariance(sigma, modes))))
    ent = abs(gq.von_neumann_entropy(res.detectors) - entanglement_captured(sigma, region, 3))
    return [CheckResult("swap_exactness", err, 1e-10), CheckResult("swap_entropy", ent, 1e-9)]


def check_bound(quick):
    lat = CouplingLattice.near_critical(1, 6)
    sigma = ground_state(lat)
    runner = probes.BoundTrials(sigma, Region.from_sites(lat, [0, 1, 2]))
    worst = -np.inf
    for k in (1, 2):
        for seed in range(100 if quick else 1000):
            worst = max(worst, runner.trial(k, seed).margin)
    return CheckResult("negativity_bound", max(worst, 0.0), probes.BOUND_SLACK)


def check_kernel(quick):
    worst = 0.0
    for n in (5,) if quick else (5, 25):
        spec = ct.KernelSpec(n, 1.0)
        m = spec.sites_per_side
        card = ct.kernel(spec, np.arange(m)[:, None], np.arange(m)[None, :])
        worst = max(worst, float(np.max(np.abs(card - np.eye(m)))))
        gram = np.stack(
            [ct.kernel_integrals(lambda x, j=j: ct.kernel(spec, j, x / spec.spacing), spec) for j in range(m)]
        )
        worst = max(worst, float(np.max(np.abs(gram - spec.spacing * np.eye(m)))))
    return CheckResult("kernel_cardinality_orthogonality", worst, 1e-8)


def check_round_trip(quick):
    lat = LatticeSpec.continuum_preset(1, 12 if quick else 25)
    mode = normal_modes(ground_state(lat), Region.hypercube(lat, side_fraction=1 / 3))[0]
    prof = ct.reconstruct_profile(mode)
    back = ct.discretize_smearing(prof.f, prof.g, lat)
    g, f = mode.on_lattice()
    err = max(np.max(np.abs(back.position_coeffs - g)), np.max(np.abs(back.momentum_coeffs - f)))
    return CheckResult("profile_round_trip", float(err), 1e-6)


def check_counterexample(quick):
    rep = probes.counterexample_abc(3.0, 2.0)
    err = max(rep.negativity_a1_b, abs(rep.negativity_a2_b - rep.expected_a2_b))
    if rep.most_mixed != "A1":
        err = np.inf
    return CheckResult("three_region_counterexample", float(err), 1e-9)


CHECKS = (
    check_purity,
    check_williamson,
    check_entropy_symmetry,
    check_negativity_routes,
    check_two_mode_anchor,
    check_interlacing,
    check_swap,
    check_bound,
    check_kernel,
    check_round_trip,
    check_counterexample,
)


def run_checks(quick=False):
    results = []
    for check in CHECKS:
        out = check(quick)
        results.extend(out if isinstance(out, list) else [out])
    return results
