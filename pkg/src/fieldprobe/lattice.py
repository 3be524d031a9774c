"""
Harmonic-lattice discretization of a free scalar field.

A periodic hypercubic lattice of ``(2N+1)^n`` sites with Hamiltonian

    H = (omega/2) sum_i (q_i^2 + p_i^2) - (alpha/2) sum_<ij> q_i q_j

where ``omega^2 = m^2 + 2n/a^2`` and ``alpha = 1/(omega a^2)``. Sites are
numbered in C order over their integer coordinates.
"""

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, LengthMismatch, UnstableHamiltonian

# alpha/omega sits this fraction below the critical ratio 1/(2n)
NEAR_CRITICAL_OFFSET = 1e-3


class _PeriodicGrid:
    """Site bookkeeping shared by lattice descriptions (needs ``dim`` and ``sites_per_side``)."""

    @property
    def num_sites(self):
        return self.sites_per_side**self.dim

    @property
    def shape(self):
        return (self.sites_per_side,) * self.dim

    def coordinates(self, sites=None):
        """Integer coordinates of ``sites`` (all sites by default), shape ``(len, dim)``."""
        if sites is None:
            sites = np.arange(self.num_sites)
        return np.stack(np.unravel_index(np.asarray(sites, dtype=int), self.shape), axis=-1)

    def site_index(self, coords):
        coords = np.asarray(coords, dtype=int) % self.sites_per_side
        return np.ravel_multi_index(tuple(np.moveaxis(coords, -1, 0)), self.shape)

    @cached_property
    def neighbour_table(self):
        """``(num_sites, 2*dim)`` array of periodic nearest neighbours."""
        idx = np.arange(self.num_sites).reshape(self.shape)
        cols = []
        for axis in range(self.dim):
            cols.append(np.roll(idx, -1, axis=axis).ravel())
            cols.append(np.roll(idx, 1, axis=axis).ravel())
        return np.stack(cols, axis=1)



@dataclass(frozen=True)
class LatticeSpec(_PeriodicGrid):
    """Geometry and mass of a periodic lattice; ``omega`` and ``alpha`` are derived."""

    dim: int
    sites_per_side: int
    box_length: float
    mass: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        m = self.sites_per_side
        if int(m) != m or m < 3 or m % 2 == 0:
            raise DomainError(f"sites_per_side must be an odd integer >= 3, got {m}")
        if not self.box_length > 0:
            raise DomainError("box_length must be positive")
        if not np.isfinite(self.mass) or self.mass < 0:
            raise DomainError("mass must be finite and non-negative")
        if self.mass == 0:
            raise UnstableHamiltonian(
                "the massless periodic lattice has a zero mode; use a positive mass "
                "or LatticeSpec.near_critical"
            )
        object.__setattr__(self, "sites_per_side", int(m))
        object.__setattr__(self, "box_length", float(self.box_length))
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def near_critical(cls, dim, sites_per_side, box_length=None, offset=NEAR_CRITICAL_OFFSET):
        """Lattice whose ``alpha/omega`` is ``(1 - offset)/(2 dim)``.

        ``box_length`` defaults to ``sites_per_side`` (unit spacing); it does
        not affect the dimensionless ground state.
        """
        if not 0 < offset < 1:
            raise DomainError("offset must lie in (0, 1)")
        length = float(sites_per_side if box_length is None else box_length)
        a = length / sites_per_side
        ratio = (1.0 - offset) / (2 * dim)
        mass = np.sqrt(1.0 / ratio - 2 * dim) / a
        return cls(dim, sites_per_side, length, mass)

    @classmethod
    def continuum_preset(cls, dim, uv_n, box_length=1.0):
        """``2N+1`` sites per side and mass ``1/L``."""
        return cls(dim, 2 * uv_n + 1, box_length, 1.0 / box_length)

    @classmethod
    def from_couplings(cls, dim, sites_per_side, omega, alpha):
        """Invert the cutoff relations for given ``omega`` and ``alpha``."""
        if not 0 < alpha < omega / (2 * dim):
            raise UnstableHamiltonian("need 0 < alpha < omega/(2n)")
        a = 1.0 / np.sqrt(omega * alpha)
        mass = np.sqrt(omega**2 - 2 * dim / a**2)
        return cls(dim, sites_per_side, sites_per_side * a, mass)

    @property
    def uv_n(self):
        return (self.sites_per_side - 1) // 2

    @property
    def spacing(self):
        return self.box_length / self.sites_per_side

    @property
    def omega(self):
        return float(np.sqrt(self.mass**2 + 2 * self.dim / self.spacing**2))

    @property
    def alpha(self):
        return 1.0 / (self.omega * self.spacing**2)

    @property
    def critical_ratio(self):
        """``(alpha/omega) * 2n``; equals 1 only for a massless field."""
        return 2 * self.dim * self.alpha / self.omega

    def to_config(self):
        return {
            "dim": self.dim,
            "sites_per_side": self.sites_per_side,
            "box_length": self.box_length,
            "mass": self.mass,
        }

    @classmethod
    def from_config(cls, config):
        """Build from a mapping with ``dim``, ``sites_per_side``, optional
        ``box_length`` and either ``mass`` or a true ``near_critical`` flag."""
        dim = int(config["dim"])
        sites = int(config["sites_per_side"])
        length = config.get("box_length")
        near = config.get("near_critical", False)
        if isinstance(near, str):
            near = near.strip().lower() in ("1", "true", "yes", "on")
        if near and config.get("mass") is not None:
            raise DomainError("give either mass or near_critical, not both")
        if near:
            return cls.near_critical(dim, sites, None if length is None else float(length))
        if config.get("mass") is None:
            raise DomainError("lattice config needs mass or near_critical")
        return cls(dim, sites, float(sites if length is None else length), float(config["mass"]))


@dataclass(frozen=True)
class CouplingLattice(_PeriodicGrid):
    """Periodic lattice given directly by ``omega`` and ``alpha``.

    Unlike :class:`LatticeSpec` any side length ``>= 3`` is allowed, which
    covers small even chains used as test systems. There is no continuum
    interpretation, so spacing and mass are not defined.
    """

    dim: int
    sites_per_side: int
    omega: float
    alpha: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        if int(self.sites_per_side) != self.sites_per_side or self.sites_per_side < 3:
            raise DomainError("sites_per_side must be an integer >= 3")
        if not self.omega > 0 or self.alpha < 0:
            raise DomainError("need omega > 0 and alpha >= 0")
        object.__setattr__(self, "sites_per_side", int(self.sites_per_side))

    @classmethod
    def near_critical(cls, dim, sites_per_side, omega=1.0, offset=NEAR_CRITICAL_OFFSET):
        return cls(dim, sites_per_side, omega, omega * (1.0 - offset) / (2 * dim))


def adjacency_matrix(dim, sites_per_side):
    m = sites_per_side
    k = m**dim
    idx = np.arange(k).reshape((m,) * dim)
    adj = np.zeros((k, k))
    for axis in range(dim):
        nb = np.roll(idx, 1, axis=axis).ravel()
        adj[idx.ravel(), nb] = 1.0
        adj[nb, idx.ravel()] = 1.0
    return adj


def potential_matrix(dim, sites_per_side, omega, alpha):
    """``omega`` on the diagonal, ``-alpha`` on periodic nearest-neighbour pairs."""
    k = sites_per_side**dim
    return omega * np.eye(k) - alpha * adjacency_matrix(dim, sites_per_side)


def build_potential(spec):
    """Potential matrix ``V`` of ``spec``."""
    # circulant spectrum: omega - 2 alpha sum_r cos(2 pi k_r / M) >= omega - 2 n alpha
    if spec.omega - 2 * spec.dim * spec.alpha <= 0:
        raise UnstableHamiltonian("potential matrix is not positive definite")
    return potential_matrix(spec.dim, spec.sites_per_side, spec.omega, spec.alpha)


def ground_state_blocks(potential, omega):
    """``(sqrt(omega V^-1), sqrt(V/omega))`` via one symmetric eigendecomposition."""
    w, u = np.linalg.eigh(potential)
    if w[0] <= 0:
        raise UnstableHamiltonian(f"potential has eigenvalue {w[0]:.3e} <= 0")
    x = (u * np.sqrt(omega / w)) @ u.T
    p = (u * np.sqrt(w / omega)) @ u.T
    return 0.5 * (x + x.T), 0.5 * (p + p.T)


def interleave(x, p):
    """Assemble an interleaved covariance from position and momentum blocks."""
    k = x.shape[0]
    sigma = np.zeros((2 * k, 2 * k))
    sigma[0::2, 0::2] = x
    sigma[1::2, 1::2] = p
    return sigma


def ground_state_covariance(potential, omega):
    return interleave(*ground_state_blocks(potential, omega))


def ground_state(spec):
    """Pure Gaussian ground-state covariance of ``spec`` (interleaved ordering)."""
    return ground_state_covariance(build_potential(spec), spec.omega)


def field_unit_scales(omega, spacing, dim):
    """Factors taking dimensionless profile coefficients to field units.

    Returns ``(sqrt(omega a^n), sqrt(a^n / omega))`` for position and
    momentum coefficients respectively.
    """
    vol = spacing**dim
    return float(np.sqrt(omega * vol)), float(np.sqrt(vol / omega))


def _check_profile(spec, profile):
    n = len(profile.support)
    if profile.support.lattice != spec:
        raise LengthMismatch("profile belongs to a different lattice")
    if len(profile.position_coeffs) != n or len(profile.momentum_coeffs) != n:
        raise LengthMismatch("coefficient vectors do not match the support size")


def _rescale(profile, q_scale, p_scale):
    # coefficients on q_i scale like q_i -> phi_i, those on p_i like p_i -> pi_i
    def scaled(v, c):
        return None if v is None else v * c

    return dataclasses.replace(
        profile,
        position_coeffs=profile.position_coeffs * q_scale,
        momentum_coeffs=profile.momentum_coeffs * p_scale,
        position_mixing=scaled(profile.position_mixing, p_scale),
        momentum_mixing=scaled(profile.momentum_mixing, q_scale),
    )


def dimensionless_to_field_units(spec, profile):
    """Coefficients of a mode against ``phi_i`` and ``pi_i`` instead of ``q_i``, ``p_i``."""
    _check_profile(spec, profile)
    sq, sp = field_unit_scales(spec.omega, spec.spacing, spec.dim)
    return _rescale(profile, sq, sp)


def field_units_to_dimensionless(spec, profile):
    _check_profile(spec, profile)
    sq, sp = field_unit_scales(spec.omega, spec.spacing, spec.dim)
    return _rescale(profile, 1.0 / sq, 1.0 / sp)
