"""
Detectors coupled to collective field modes by an instantaneous swap.

A delta-switched coupling at the swap strength exchanges the phase space of
each detector with that of one collective field mode,

    q_d -> Q,  Q -> -q_d,  p_d -> P,  P -> -p_d,

and leaves everything symplectically orthogonal to the swapped planes
alone. Joint states order the detectors first, then the lattice sites.
The detector gap is kept only as metadata, since free evolution drops out
under delta switching.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import gaussian as gq
from .errors import DomainError, IncompleteBasis, NonCommutingModes
from .io import write_csv
from .regions import ModeProfile, normal_modes, reduce

COMMUTATION_TOL = 1e-9
BOUND_SLACK = 1e-9

# action of one swap on (q_d, p_d, Q, P)
_SWAP4 = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class DetectorBank:
    """``count`` single-mode detectors, all starting in the vacuum."""

    count: int
    gap: float = 1.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise DomainError("a detector bank needs at least one detector")

    def initial_covariance(self):
        return np.eye(2 * self.count)


def _symplectic_products(rows):
    """Matrix of ``omega(r_a, r_b)`` for the rows of ``rows``."""
    return rows @ gq.symplectic_form(rows.shape[1] // 2) @ rows.T


def check_canonical(rows, tol=COMMUTATION_TOL):
    """Raise unless consecutive row pairs form commuting canonical modes.

    The tolerance is relative to the largest squared row norm (at least one),
    since that sets the rounding error of the products.
    """
    target = gq.symplectic_form(rows.shape[0] // 2)
    err = np.max(np.abs(_symplectic_products(rows) - target), initial=0.0)
    scale = max(1.0, float(np.max(np.einsum("ij,ij->i", rows, rows), initial=0.0)))
    if err > tol * scale:
        raise NonCommutingModes(f"mode rows violate the canonical relations by {err:.3e}")


class SwapAssignment:
    """Pairs ``(detector index, ModeProfile)`` whose field modes commute.

    Every profile must live on the same lattice and carry ``[Q, P] = i``.
    """

    def __init__(self, pairs):
        pairs = [(int(d), m) for d, m in pairs]
        if not pairs:
            raise DomainError("an assignment needs at least one pair")
        detectors = [d for d, _ in pairs]
        if min(detectors) < 0 or len(set(detectors)) != len(detectors):
            raise DomainError("detector indices must be distinct and non-negative")
        lattice = pairs[0][1].support.lattice
        if any(m.support.lattice != lattice for _, m in pairs):
            raise DomainError("all assigned modes must live on one lattice")
        self.pairs = pairs
        self.lattice = lattice
        self.field_rows = np.vstack([m.lattice_rows() for _, m in pairs])
        check_canonical(self.field_rows)

    def __len__(self):
        return len(self.pairs)

    @property
    def detectors(self):
        return [d for d, _ in self.pairs]

    @property
    def modes(self):
        return [m for _, m in self.pairs]


def swap_unitary_symplectic(assignment, num_detectors=None):
    """Symplectic matrix of the product of swaps over detectors ⊕ lattice.

    Each swap acts as :data:`_SWAP4` on ``(q_d, p_d, Q, P)``. It is built as
    ``I + C (P' - I) R`` where ``R`` reads those four coordinates and ``C``
    holds the dual vectors, so vectors symplectically orthogonal to the
    swapped planes are untouched.
    """
    if num_detectors is None:
        num_detectors = max(assignment.detectors) + 1
    if max(assignment.detectors) >= num_detectors:
        raise DomainError("assignment refers to a detector outside the bank")
    nd = 2 * num_detectors
    dim = nd + 2 * assignment.lattice.num_sites
    omega = gq.symplectic_form(dim // 2)
    s = np.eye(dim)
    step = _SWAP4 - np.eye(4)
    for d, mode in assignment.pairs:
        r = np.zeros((4, dim))
        r[0, 2 * d] = 1.0
        r[1, 2 * d + 1] = 1.0
        r[2:, nd:] = mode.lattice_rows()
        c = np.zeros((dim, 4))
        c[2 * d, 0] = 1.0
        c[2 * d + 1, 1] = 1.0
        c[:, 2] = omega @ r[3]
        c[:, 3] = -omega @ r[2]
        s += c @ step @ r
    return s


@dataclass(frozen=True, eq=False)
class SwapResult:
    detectors: np.ndarray
    field: np.ndarray
    joint: np.ndarray


def run_swap(sigma_field, assignment, bank=None):
    """Swap vacuum detectors with the assigned field modes and split the result."""
    if bank is None:
        bank = DetectorBank(max(assignment.detectors) + 1)
    sigma_field = np.asarray(sigma_field, dtype=float)
    if sigma_field.shape[0] != 2 * assignment.lattice.num_sites:
        raise DomainError("field covariance does not match the assigned lattice")
    joint = gq.direct_sum(bank.initial_covariance(), sigma_field)
    s = swap_unitary_symplectic(assignment, bank.count)
    after = s @ joint @ s.T
    after = 0.5 * (after + after.T)
    nd = 2 * bank.count
    return SwapResult(after[:nd, :nd], after[nd:, nd:], after)


def complete_symplectic_basis(rows, num_modes):
    """
    Extend canonical mode rows to a full symplectic basis.

    ``rows`` holds ``(Q_1, P_1, ..., Q_m, P_m)`` over a ``num_modes``-mode
    phase space. At each step every unit vector is stripped of its
    components along the pairs found so far, the largest residual ``x`` is
    kept and paired with its rotated copy ``-Omega x``, which always has
    ``omega(x, -Omega x) = |x|^2``. Returns a ``(2 num_modes, 2 num_modes)``
    symplectic matrix whose leading rows are ``rows``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    dim = 2 * num_modes
    if rows.shape[1] != dim or rows.shape[0] % 2:
        raise DomainError("rows must come in (Q, P) pairs over the given phase space")
    check_canonical(rows)
    omega = gq.symplectic_form(num_modes)
    basis = rows.copy()

    def strip(x):
        # x + (x Om B^T) Om_B B removes every omega-product with the basis;
        # a second pass cleans up rounding
        for _ in range(2):
            if basis.shape[0]:
                x = x + (x @ omega @ basis.T) @ gq.symplectic_form(basis.shape[0] // 2) @ basis
        return x

    while basis.shape[0] < dim:
        cand = strip(np.eye(dim))
        norms = np.einsum("ij,ij->i", cand, cand)
        best = int(np.argmax(norms))
        if norms[best] < 1e-10:
            raise IncompleteBasis(f"only {basis.shape[0] // 2} of {num_modes} modes could be completed")
        x = cand[best]
        y = strip(-(omega @ x)[None, :])[0]
        c = np.sqrt(x @ omega @ y)
        basis = np.vstack([basis, x / c, y / c])
    # rounding in the products grows with the squared row norms
    defect = gq.symplectic_defect(basis) / max(1.0, float(np.max(np.einsum("ij,ij->i", basis, basis))))
    if defect > 1e-8:
        raise IncompleteBasis(f"completed basis has relative symplectic defect {defect:.3e}")
    return basis


def well_conditioned_pairs(rows):
    """
    Canonical pairs spanning the same phase-space subspace as ``rows``.

    Mode rows drawn from a large random symplectic can be badly scaled, and
    that scaling feeds straight into rounding error downstream. Quantities
    that only depend on the span (such as the negativity with the
    complement) can use these instead: an orthonormal basis of the span is
    block-diagonalised against the symplectic form, and each block gives one
    pair scaled to ``[Q, P] = i``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    check_canonical(rows)
    q, _ = np.linalg.qr(rows.T)
    u = q.T
    w = u @ gq.symplectic_form(u.shape[1] // 2) @ u.T
    t, z = sla.schur(0.5 * (w - w.T), output="real")
    out = []
    for i in range(u.shape[0] // 2):
        a = t[2 * i, 2 * i + 1]
        pair = z[:, [2 * i, 2 * i + 1]] if a > 0 else z[:, [2 * i + 1, 2 * i]]
        out.append(pair.T @ u / np.sqrt(abs(a)))
    out = np.vstack(out)
    check_canonical(out)
    return out


def _region_rows(region, modes):
    index = region.phase_space_indices()
    rows = []
    for mode in modes:
        full = mode.lattice_rows()
        outside = np.delete(full, index, axis=1)
        if np.max(np.abs(outside), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(full))):
            raise DomainError("a mode has weight outside the region")
        rows.append(full[:, index])
    return np.vstack(rows)


def negativity_with_complement(sigma_global, region, modes):
    """
    Log negativity between the chosen region modes and the complement.

    The chosen modes are completed to a symplectic basis of the region, the
    state is written in that basis, the completion is traced out and the
    negativity between what remains of the region and the complement is
    returned. Only the span of the chosen modes matters, so they are first
    replaced by :func:`well_conditioned_pairs`.
    """
    modes = list(modes)
    comp = region.complement()
    rows = well_conditioned_pairs(_region_rows(region, modes))
    t = complete_symplectic_basis(rows, len(region))
    sigma_a = reduce(sigma_global, region)
    sigma_abar = reduce(sigma_global, comp)
    cross = gq.submatrix_pair(sigma_global, region.site_indices, comp.site_indices)
    kept = t[: 2 * len(modes)]
    joint = np.block(
        [
            [kept @ sigma_a @ kept.T, kept @ cross],
            [(kept @ cross).T, sigma_abar],
        ]
    )
    return gq.log_negativity(joint, range(len(modes)))


@dataclass(frozen=True)
class TrialReport:
    seed: int
    k: int
    trial_negativity: float
    bound_value: float
    margin: float
    passed: bool


class BoundTrials:
    """Shared read-only data for repeated bound trials on one region."""

    def __init__(self, sigma_global, region):
        self.sigma = np.asarray(sigma_global, dtype=float)
        self.region = region
        self.normal = normal_modes(self.sigma, region)
        self.normal_rows = _region_rows(region, self.normal.modes)
        self._bounds = {}

    def bound(self, k):
        """Negativity captured by the ``k`` most mixed normal modes."""
        if k not in self._bounds:
            self._bounds[k] = negativity_with_complement(self.sigma, self.region, self.normal.modes[:k])
        return self._bounds[k]

    def trial(self, k, seed, intensity=1.0, basis="sites"):
        n = len(self.region)
        if not 1 <= k <= n:
            raise DomainError(f"k must lie in 1..{n}")
        if basis not in ("sites", "normal"):
            raise DomainError("basis must be 'sites' or 'normal'")
        s = np.eye(2 * n) if intensity == 0 else gq.random_symplectic(n, intensity, seed)
        rows = s[: 2 * k]
        if basis == "normal":
            rows = rows @ self.normal_rows
        modes = [
            ModeProfile.from_phase_space_rows(self.region, rows[2 * j : 2 * j + 2]) for j in range(k)
        ]
        value = negativity_with_complement(self.sigma, self.region, modes)
        bound = self.bound(k)
        margin = value - bound
        return TrialReport(int(seed), int(k), value, bound, margin, bool(margin <= BOUND_SLACK))


def theorem_bound_trial(sigma_global, region, k, seed, intensity=1.0, basis="sites"):
    """
    Compare ``k`` random collective modes of ``region`` with the ``k`` most
    mixed normal modes.

    The random modes are the first ``k`` pairs of a seeded random symplectic
    transform applied to the site quadratures (``basis="sites"``) or to the
    normal modes (``basis="normal"``, useful with a small ``intensity``).
    ``intensity=0`` uses the identity. ``margin`` is trial minus bound.
    """
    return BoundTrials(sigma_global, region).trial(k, seed, intensity, basis)


def theorem_bound_trials(sigma_global, region, k, seeds, intensity=1.0, basis="sites"):
    runner = BoundTrials(sigma_global, region)
    return [runner.trial(k, s, intensity, basis) for s in seeds]


TRIAL_HEADER = ["seed", "k", "trial_negativity", "bound_value", "margin"]


def write_trials_csv(path, reports, metadata=None):
    rows = [(r.seed, r.k, r.trial_negativity, r.bound_value, r.margin) for r in reports]
    write_csv(path, TRIAL_HEADER, rows, metadata)


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    nu_strong: float
    nu_weak: float
    labels: tuple
    spectrum_a: tuple
    most_mixed: object
    degenerate: bool
    negativity_a1_b: float
    negativity_a2_b: float
    expected_a2_b: float
    covariance: np.ndarray


def counterexample_abc(nu_strong, nu_weak, swap_bc=False):
    """
    Four-mode scenario where the most mixed mode of ``A = A1 ⊕ A2`` is not
    the one entangled with a neighbouring region ``B``.

    Modes are ordered ``(A1, A2, B, C)``. ``A1`` is paired with ``C`` in a
    two-mode squeezed state of eigenvalue ``nu_strong`` and ``A2`` with ``B``
    at ``nu_weak``; ``swap_bc`` exchanges the roles of ``B`` and ``C``.
    """
    if nu_weak <= 1 or nu_strong < nu_weak:
        raise DomainError("need nu_strong >= nu_weak > 1")
    strong, weak = gq.two_mode_squeezed(nu_strong), gq.two_mode_squeezed(nu_weak)
    partner_strong, partner_weak = (2, 3) if swap_bc else (3, 2)
    sigma = np.zeros((8, 8))
    for (i, j), block in (((0, partner_strong), strong), ((1, partner_weak), weak)):
        idx = gq.mode_indices([i, j])
        sigma[np.ix_(idx, idx)] = block

    wd = gq.williamson(gq.submatrix(sigma, [0, 1]))
    degenerate = bool(abs(nu_strong - nu_weak) < gq.DEGENERACY_TOL)
    most_mixed = None
    if not degenerate:
        lead = wd.mode_rows()[0]
        most_mixed = ("A1", "A2")[int(np.argmax([np.abs(lead[0:2]).sum(), np.abs(lead[2:4]).sum()]))]

    def neg(a):
        return gq.log_negativity(gq.submatrix(sigma, [a, 2]), [0])

    expected = float(-np.log(nu_weak - np.sqrt(nu_weak**2 - 1))) if not swap_bc else 0.0
    return CounterexampleReport(
        float(nu_strong),
        float(nu_weak),
        ("A1", "A2", "B", "C"),
        tuple(wd.spectrum),
        most_mixed,
        degenerate,
        neg(0),
        neg(1),
        expected,
        sigma,
    )
