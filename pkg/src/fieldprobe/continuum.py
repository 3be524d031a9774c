"""
Band-limited interpolation between lattice profiles and continuum smearings.

On a periodic box of side ``L = (2N+1) a`` the cardinal kernel

    S_j(N; y/a) = sin(pi (y/a - j)) / ((2N+1) sin(pi (y/a - j) / (2N+1)))

equals one at site ``j`` and zero at every other site. Equivalently it is
the Dirichlet sum ``(1/M) sum_{|m|<=N} cos(2 pi m (y/a - j) / M)`` with
``M = 2N+1``; that form is used next to the removable singularities.
Because ``M`` is odd the kernel is periodic with period ``M`` in ``y/a``,
sign included.

A lattice mode with position coefficients ``g_l`` and momentum
coefficients ``f_l`` maps to the continuum pair

    g_N(x) = sqrt(omega / a^n) / lambda_p * sum_l g_l S_l(x/a)
    f_N(x) = 1 / (lambda_q sqrt(omega a^n)) * sum_l f_l S_l(x/a)

and back by integrating against the kernel. ``lambda_q`` and ``lambda_p``
only fix units; the products ``lambda_p g_N`` and ``lambda_q f_N`` do not
depend on them.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, QuadratureFailure
from .io import write_csv
from .lattice import LatticeSpec, ground_state, ground_state_covariance, potential_matrix
from .regions import ModeProfile, Region, reduce
from . import gaussian as gq

# |sin(pi u / M)| below this switches to the Dirichlet-sum evaluation
_SINGULAR_GUARD = 1e-6
NORMALIZATION_TOL = 1e-6


class NormalizationWarning(UserWarning):
    """A discretized smearing pair does not satisfy ``sum f_l g_l = 1``."""


@dataclass(frozen=True)
class KernelSpec:
    uv_n: int
    box_length: float
    dim: int = 1

    def __post_init__(self):
        if int(self.uv_n) != self.uv_n or self.uv_n < 1:
            raise DomainError("uv_n must be a positive integer")
        if not self.box_length > 0:
            raise DomainError("box_length must be positive")
        if self.dim not in (1, 2, 3):
            raise DomainError("dim must be 1, 2 or 3")

    @classmethod
    def from_lattice(cls, lattice):
        return cls(lattice.uv_n, lattice.box_length, lattice.dim)

    @property
    def sites_per_side(self):
        return 2 * self.uv_n + 1

    @property
    def spacing(self):
        return self.box_length / self.sites_per_side


def _dirichlet(u, m):
    n = (m - 1) // 2
    k = np.arange(-n, n + 1)
    return np.cos(2 * np.pi * np.multiply.outer(u, k) / m).sum(axis=-1) / m


def kernel(spec, j, y_over_a):
    """Scalar cardinal kernel of site ``j`` at ``y/a`` (vectorized in both)."""
    m = spec.sites_per_side
    u = np.asarray(y_over_a, dtype=float) - np.asarray(j, dtype=float)
    # the kernel has period m; subtracting the nearest multiple is exact and
    # keeps the sine arguments small, so no accuracy is lost far from j
    u = u - m * np.round(u / m)
    r = np.round(u)
    num = np.where(r % 2, -1.0, 1.0) * np.sin(np.pi * (u - r))
    den = np.sin(np.pi * u / m)
    near = np.abs(den) < _SINGULAR_GUARD
    safe = np.where(near, 1.0, den)
    out = num / (m * safe)
    if np.any(near):
        out = np.where(near, _dirichlet(u, m), out)
    return out if out.ndim else float(out)


def tensor_kernel(spec, site, x):
    """Product kernel ``prod_r S_{l_r}(x_r / a)`` for a site vector ``l`` and point(s) ``x``."""
    site = np.atleast_1d(np.asarray(site, dtype=float))
    x = np.asarray(x, dtype=float)
    if site.shape[-1] != spec.dim or np.atleast_1d(x).shape[-1] != spec.dim:
        raise DimensionMismatch(f"expected {spec.dim}-dimensional site and point")
    x = np.atleast_1d(x)
    vals = kernel(spec, site, x / spec.spacing)
    return np.prod(vals, axis=-1)


def kernel_matrix(spec, points):
    """``(len(points), num_sites)`` values of every site kernel at each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != spec.dim:
        raise DimensionMismatch(f"points must have {spec.dim} coordinates")
    m = spec.sites_per_side
    per_axis = kernel(spec, np.arange(m)[None, None, :], (pts / spec.spacing)[:, :, None])
    out = per_axis[:, 0, :]
    for r in range(1, spec.dim):
        out = (out[:, :, None] * per_axis[:, r, None, :]).reshape(len(pts), -1)
    return out


def _unit_factors(lattice, lambda_q, lambda_p):
    """Multipliers taking ``(g_l, f_l)`` to the coefficients of the kernel sums."""
    if lambda_q <= 0 or lambda_p <= 0:
        raise DomainError("lambda_q and lambda_p must be positive")
    vol = lattice.spacing**lattice.dim
    return np.sqrt(lattice.omega / vol) / lambda_p, 1.0 / (lambda_q * np.sqrt(lattice.omega * vol))


@dataclass(frozen=True, eq=False)
class ContinuumProfile:
    """Continuum position and momentum smearings interpolating a lattice mode."""

    source: ModeProfile
    lambda_q: float = 1.0
    lambda_p: float = 1.0

    @property
    def lattice(self):
        return self.source.support.lattice

    @property
    def spec(self):
        return KernelSpec.from_lattice(self.lattice)

    def _weights(self):
        g, f = self.source.on_lattice()
        cg, cf = _unit_factors(self.lattice, self.lambda_q, self.lambda_p)
        return cg * g, cf * f

    def g(self, points):
        """Position smearing ``g_N`` at ``points`` (shape ``(P, dim)`` or ``(P,)`` in 1D)."""
        return kernel_matrix(self.spec, _points(points, self.lattice.dim)) @ self._weights()[0]

    def f(self, points):
        return kernel_matrix(self.spec, _points(points, self.lattice.dim)) @ self._weights()[1]

    def sample(self, points, truncate=False):
        """``(f_N, g_N, truncated)`` at ``points``.

        With ``truncate`` both functions are set to zero wherever the
        nearest lattice site is outside the mode's support, which suppresses
        the Gibbs ripples there.
        """
        pts = _points(points, self.lattice.dim)
        kmat = kernel_matrix(self.spec, pts)
        wg, wf = self._weights()
        gn, fn = kmat @ wg, kmat @ wf
        mask = np.zeros(len(pts), dtype=bool)
        if truncate:
            lat = self.lattice
            nearest = np.rint(pts / lat.spacing).astype(int) % lat.sites_per_side
            inside = np.zeros(lat.num_sites, dtype=bool)
            inside[list(self.source.support.site_indices)] = True
            mask = ~inside[lat.site_index(nearest)]
            gn = np.where(mask, 0.0, gn)
            fn = np.where(mask, 0.0, fn)
        return fn, gn, mask


def _points(points, dim):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and dim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimensionMismatch(f"points must have shape (P, {dim})")
    return pts


def reconstruct_profile(profile, lambda_q=1.0, lambda_p=1.0):
    """Continuum profile of a lattice mode (zero-padded to the whole lattice)."""
    return ContinuumProfile(profile, float(lambda_q), float(lambda_p))


def uniform_grid(lattice, points_per_site=8):
    """Regular 1D grid on ``[0, L)`` including every lattice point."""
    if lattice.dim != 1:
        raise DimensionMismatch("uniform_grid builds 1D grids only")
    count = lattice.sites_per_side * points_per_site
    return np.arange(count) * (lattice.box_length / count)


def sample_table(cprofile, points, truncate=False):
    """Rows ``(*x, f_N, g_N, truncated)`` for CSV export."""
    pts = _points(points, cprofile.lattice.dim)
    fn, gn, mask = cprofile.sample(pts, truncate)
    return [(*p, a, b, int(t)) for p, a, b, t in zip(pts, fn, gn, mask)]


def sample_header(dim):
    return [*[f"x{r}" for r in range(dim)], "f_N", "g_N", "truncated"]


def write_samples_csv(path, cprofile, points, truncate=False, metadata=None):
    meta = {"lambda_q": cprofile.lambda_q, "lambda_p": cprofile.lambda_p, **(metadata or {})}
    write_csv(path, sample_header(cprofile.lattice.dim), sample_table(cprofile, points, truncate), meta)


def _cell_integrals(func, spec, order):
    """``int func(x) S_l(x/a) dx`` over the box for every site, by composite
    Gauss-Legendre with ``order`` nodes per lattice cell and axis."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a, m = spec.spacing, spec.sites_per_side
    # cells [l a - a/2, l a + a/2] tile one period
    axis = ((np.arange(m)[:, None] + 0.5 * nodes[None, :]) * a).reshape(-1)
    axis_w = np.tile(0.5 * a * weights, m)
    kern = kernel(spec, np.arange(m)[None, :], axis[:, None] / a)  # (points, sites)
    grids = np.meshgrid(*([axis] * spec.dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=-1) % spec.box_length
    vals = np.asarray(func(pts if spec.dim > 1 else pts[:, 0]), dtype=float).reshape((axis.size,) * spec.dim)
    vals = vals * np.prod(np.meshgrid(*([axis_w] * spec.dim), indexing="ij"), axis=0)
    # contract one axis at a time with the 1D kernels
    out = vals
    for _ in range(spec.dim):
        out = np.tensordot(out, kern, axes=([0], [0]))
    return out.reshape(-1)


def kernel_integrals(func, spec, order=8, rtol=1e-9, atol=1e-12):
    """Projections of ``func`` on every site kernel, checked against doubled order."""
    low = _cell_integrals(func, spec, order)
    high = _cell_integrals(func, spec, 2 * order)
    err = np.max(np.abs(high - low), initial=0.0)
    if err > atol + rtol * np.max(np.abs(high), initial=0.0):
        raise QuadratureFailure(f"quadrature orders {order} and {2 * order} differ by {err:.3e}")
    return high


def discretize_smearing(f, g, lattice, lambda_q=1.0, lambda_p=1.0, order=8):
    """
    Lattice coefficients of continuum smearings ``f`` (momentum) and ``g``
    (position).

    ``f_l = lambda_q sqrt(omega/a^n) int f S_l`` and
    ``g_l = lambda_p / sqrt(omega a^n) int g S_l``. The functions take an
    array of points (shape ``(P,)`` in 1D, ``(P, dim)`` otherwise). A
    :class:`NormalizationWarning` is issued when ``sum f_l g_l`` is not one.
    """
    if lambda_q <= 0 or lambda_p <= 0:
        raise DomainError("lambda_q and lambda_p must be positive")
    spec = KernelSpec.from_lattice(lattice)
    vol = lattice.spacing**lattice.dim
    f_l = lambda_q * np.sqrt(lattice.omega / vol) * kernel_integrals(f, spec, order)
    g_l = lambda_p / np.sqrt(lattice.omega * vol) * kernel_integrals(g, spec, order)
    total = float(f_l @ g_l)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        warnings.warn(f"sum f_l g_l = {total:.9g} differs from 1", NormalizationWarning, stacklevel=2)
    whole = Region(lattice, tuple(range(lattice.num_sites)))
    return ModeProfile(whole, g_l, f_l)


def _wrapped_offsets(m):
    idx = np.arange(m)
    d = idx[:, None] - idx[None, :]
    return (d + m // 2) % m - m // 2


def spectral_derivative_matrix(spec):
    """
    Leading-order nonlocal lattice derivative ``(-1)^d / (a d)`` with ``d``
    the minimal periodic offset between sites (1D).
    """
    d = _wrapped_offsets(spec.sites_per_side)
    safe = np.where(d == 0, 1, d)
    return np.where(d == 0, 0.0, (-1.0) ** np.abs(d) / (spec.spacing * safe))


def exact_periodic_derivative_matrix(spec):
    """Derivative that is exact on band-limited periodic samples (1D)."""
    d = _wrapped_offsets(spec.sites_per_side)
    m = spec.sites_per_side
    safe = np.where(d == 0, 1, d)
    val = (np.pi / spec.box_length) * (-1.0) ** np.abs(d) / np.sin(np.pi * safe / m)
    return np.where(d == 0, 0.0, val)


def nearest_neighbour_derivative_matrix(spec):
    """Periodic central difference ``(u_{l+1} - u_{l-1}) / (2a)`` (1D)."""
    m = spec.sites_per_side
    eye = np.eye(m)
    return (np.roll(eye, 1, axis=1) - np.roll(eye, -1, axis=1)) / (2 * spec.spacing)


@dataclass(frozen=True)
class ConvergenceRow:
    uv_n: int
    entropy: float
    delta: float


def region_entropy(lattice, region_fraction):
    region = Region.hypercube(lattice, side_fraction=region_fraction)
    return gq.von_neumann_entropy(reduce(ground_state(lattice), region))


def convergence_study(region_fraction, uv_values, dim=1, box_length=1.0, mass=None, alpha_zero=False):
    """
    Region entropy at fixed box length and mass for each UV integer ``N``.

    ``mass`` defaults to ``1/box_length``. With ``alpha_zero`` the sites are
    decoupled (product ground state), which gives zero entropy throughout.
    ``delta`` is the change from the previous row (NaN for the first).
    """
    uv_values = [int(n) for n in uv_values]
    if any(b <= a for a, b in zip(uv_values, uv_values[1:])):
        raise DomainError("uv_values must be strictly increasing")
    mass = 1.0 / box_length if mass is None else mass
    rows, prev = [], None
    for n in uv_values:
        lat = LatticeSpec(dim, 2 * n + 1, box_length, mass)
        if alpha_zero:
            pot = potential_matrix(dim, lat.sites_per_side, lat.omega, 0.0)
            sigma = ground_state_covariance(pot, lat.omega)
            s = gq.von_neumann_entropy(reduce(sigma, Region.hypercube(lat, side_fraction=region_fraction)))
        else:
            s = region_entropy(lat, region_fraction)
        rows.append(ConvergenceRow(n, s, float("nan") if prev is None else s - prev))
        prev = s
    return rows


def write_convergence_csv(path, rows, metadata=None):
    write_csv(path, ["N", "entropy", "delta"], [(r.uv_n, r.entropy, r.delta) for r in rows], metadata)
