"""
Subregions of a lattice ground state: reduced states, Williamson normal
modes and their spatial profiles, partner modes and entanglement counting.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gaussian as gq
from .errors import DegeneratePairing, DomainError, IndexOutOfRange, NotPure
from .io import read_csv, write_csv

# Normal modes with nu - 1 below this carry no entanglement.
UNENTANGLED_TOL = 1e-6
PAIRING_TOL = 1e-6


@dataclass(frozen=True)
class Region:
    """An ordered, duplicate-free set of lattice sites."""

    lattice: object
    site_indices: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in np.asarray(self.site_indices).reshape(-1))
        if not sites:
            raise DomainError("a region needs at least one site")
        if len(set(sites)) != len(sites):
            raise DomainError("region sites must be distinct")
        if min(sites) < 0 or max(sites) >= self.lattice.num_sites:
            raise IndexOutOfRange("region site outside the lattice")
        object.__setattr__(self, "site_indices", sites)

    @classmethod
    def from_sites(cls, lattice, sites):
        return cls(lattice, tuple(sites))

    @classmethod
    def hypercube(cls, lattice, side_fraction=None, side=None, offset=None):
        """Axis-aligned hypercube of ``side`` sites per axis.

        ``side`` defaults to ``round(side_fraction * sites_per_side)``. The
        cube's lowest corner is ``offset`` (default: centred in the box).
        """
        m = lattice.sites_per_side
        if side is None:
            if side_fraction is None:
                raise DomainError("give side or side_fraction")
            side = max(1, int(round(side_fraction * m)))
        if not 1 <= side <= m:
            raise DomainError(f"hypercube side {side} does not fit {m} sites")
        start = (m - side) // 2 if offset is None else int(offset)
        axes = [np.arange(start, start + side) % m] * lattice.dim
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lattice.dim)
        return cls(lattice, tuple(lattice.site_index(grid).tolist()))

    def __len__(self):
        return len(self.site_indices)

    @property
    def is_proper(self):
        return len(self) < self.lattice.num_sites

    def complement(self):
        """Remaining lattice sites in canonical order."""
        inside = set(self.site_indices)
        rest = [s for s in range(self.lattice.num_sites) if s not in inside]
        if not rest:
            raise DomainError("region covers the whole lattice; its complement is empty")
        return Region(self.lattice, tuple(rest))

    def boundary_sites(self):
        """Region sites with at least one nearest neighbour outside the region."""
        inside = np.zeros(self.lattice.num_sites, dtype=bool)
        inside[list(self.site_indices)] = True
        nbrs = self.lattice.neighbour_table[list(self.site_indices)]
        on_edge = ~inside[nbrs].all(axis=1)
        return tuple(s for s, e in zip(self.site_indices, on_edge) if e)

    @property
    def num_boundary_sites(self):
        return len(self.boundary_sites())

    def coordinates(self):
        return self.lattice.coordinates(self.site_indices)

    def phase_space_indices(self):
        return gq.mode_indices(self.site_indices)


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """
    One collective mode ``Q = sum g_i q_i``, ``P = sum f_i p_i`` over the
    sites of ``support``.

    General modes (for example from a random symplectic transform) may also
    mix quadratures: ``position_mixing`` holds the coefficients of ``Q`` on
    the momenta and ``momentum_mixing`` those of ``P`` on the positions.
    """

    support: Region
    position_coeffs: np.ndarray
    momentum_coeffs: np.ndarray
    position_mixing: np.ndarray = field(default=None)
    momentum_mixing: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("position_coeffs", "momentum_coeffs", "position_mixing", "momentum_mixing"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.asarray(value, dtype=float).reshape(-1))

    @classmethod
    def from_phase_space_rows(cls, support, rows):
        """Build from the two rows expressing ``Q`` and ``P`` over the
        interleaved phase space of ``support``."""
        rows = np.asarray(rows, dtype=float)
        q_row, p_row = rows[0], rows[1]
        mix_q, mix_p = q_row[1::2], p_row[0::2]
        scale = max(np.max(np.abs(rows)), 1.0)
        pure = np.max(np.abs(mix_q), initial=0) <= 1e-14 * scale and (
            np.max(np.abs(mix_p), initial=0) <= 1e-14 * scale
        )
        return cls(
            support,
            q_row[0::2],
            p_row[1::2],
            None if pure else mix_q,
            None if pure else mix_p,
        )

    @property
    def is_quadrature_pure(self):
        """True when ``Q`` uses only positions and ``P`` only momenta."""
        return self.position_mixing is None and self.momentum_mixing is None

    def phase_space_rows(self):
        """``(2, 2n)`` rows of ``Q`` and ``P`` over the support's phase space."""
        n = len(self.support)
        rows = np.zeros((2, 2 * n))
        rows[0, 0::2] = self.position_coeffs
        rows[1, 1::2] = self.momentum_coeffs
        if self.position_mixing is not None:
            rows[0, 1::2] = self.position_mixing
        if self.momentum_mixing is not None:
            rows[1, 0::2] = self.momentum_mixing
        return rows

    def lattice_rows(self):
        """Rows over the whole lattice phase space, zero outside the support."""
        rows = np.zeros((2, 2 * self.support.lattice.num_sites))
        rows[:, self.support.phase_space_indices()] = self.phase_space_rows()
        return rows

    def on_lattice(self):
        """``(g, f)`` zero-padded to every lattice site."""
        k = self.support.lattice.num_sites
        g, f = np.zeros(k), np.zeros(k)
        sites = list(self.support.site_indices)
        g[sites] = self.position_coeffs
        f[sites] = self.momentum_coeffs
        return g, f

    @property
    def normalization(self):
        """``[Q, P] / i``; equals one for a canonical mode."""
        r = self.phase_space_rows()
        return float(r[0] @ gq.symplectic_form(len(self.support)) @ r[1])

    def occupation(self):
        return self.momentum_coeffs * self.position_coeffs


@dataclass(frozen=True, eq=False)
class RankedModes:
    """Normal modes of a region, most mixed first."""

    modes: list
    eigenvalues: np.ndarray

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    def __iter__(self):
        return iter(self.modes)


def reduce(sigma_global, region):
    """Reduced covariance of ``region`` (sites in region order)."""
    return gq.submatrix(sigma_global, region.site_indices)


def _boundary_positive(g):
    mags = np.abs(g)
    lead = int(np.flatnonzero(mags >= (1 - 1e-9) * mags.max())[0])
    return (-1.0 if g[lead] < 0 else 1.0), lead


def normal_modes(sigma_global, region):
    """Williamson normal modes of the reduced state of ``region``."""
    wd = gq.williamson(reduce(sigma_global, region))
    rows = wd.mode_rows()
    modes = []
    for k in range(wd.num_modes):
        mode = ModeProfile.from_phase_space_rows(region, rows[2 * k : 2 * k + 2])
        sign, _ = _boundary_positive(mode.position_coeffs)
        if sign < 0:
            mode = ModeProfile.from_phase_space_rows(region, -rows[2 * k : 2 * k + 2])
        modes.append(mode)
    return RankedModes(modes, wd.spectrum)


def occupation_function(mode):
    """Per-site occupation ``F_i = f_i g_i``; sums to one for a normal mode."""
    return mode.occupation()


def mode_covariance(sigma_global, modes):
    """Joint covariance of a list of modes (each given by its lattice rows)."""
    rows = np.vstack([m.lattice_rows() for m in modes])
    return rows @ sigma_global @ rows.T


def check_pure(sigma, tol=gq.PURITY_TOL):
    nu = gq.symplectic_spectrum(sigma)
    worst = float(np.max(np.abs(nu - 1.0))) if nu.size else 0.0
    if worst > tol:
        raise NotPure(f"global state is mixed: max |nu - 1| = {worst:.3e}")


def partner_mode(sigma_global, region, rank):
    """
    Partner of the ``rank``-th most mixed normal mode of ``region`` (rank 0
    is the most mixed): the ``rank``-th most mixed normal mode of the
    complement.

    Raises
    ------
    NotPure
        The global state is not pure to 1e-6.
    DegeneratePairing
        The mode is unentangled or its eigenvalue is degenerate within 1e-6.
    """
    check_pure(sigma_global)
    if not 0 <= rank < len(region):
        raise IndexOutOfRange(f"rank {rank} outside 0..{len(region) - 1}")
    nu = gq.symplectic_spectrum(reduce(sigma_global, region))
    if nu[rank] - 1.0 < UNENTANGLED_TOL:
        raise DegeneratePairing(f"mode {rank} has nu = {nu[rank]:.9g}; it has no partner")
    for other in (rank - 1, rank + 1):
        if 0 <= other < nu.size and abs(nu[other] - nu[rank]) < PAIRING_TOL:
            raise DegeneratePairing(f"nu[{rank}] is degenerate with nu[{other}]")
    return normal_modes(sigma_global, region.complement())[rank]


def entanglement_captured(sigma_global, region, first_k_modes):
    """Entropy carried by the ``first_k_modes`` most mixed normal modes of ``region``."""
    nu = gq.symplectic_spectrum(reduce(sigma_global, region))
    if not 0 <= first_k_modes <= nu.size:
        raise DomainError(f"first_k_modes must lie in 0..{nu.size}")
    return float(np.sum(gq.mode_entropy(nu[:first_k_modes])))


def saturation_count(sigma_global, region, fraction):
    """Smallest number of most mixed modes carrying ``fraction`` of the region entropy."""
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    nu = gq.symplectic_spectrum(reduce(sigma_global, region))
    terms = gq.mode_entropy(nu)
    total = terms.sum()
    if total <= 0:
        return 0
    cumulative = np.cumsum(terms)
    target = fraction * total * (1 - 1e-12)
    return int(np.argmax(cumulative >= target)) + 1


def profile_table(mode):
    """Rows ``(site_index, *coords, g, f, F)`` for one mode."""
    coords = mode.support.coordinates()
    occ = mode.occupation()
    return [
        (site, *map(int, c), g, f, o)
        for site, c, g, f, o in zip(
            mode.support.site_indices, coords, mode.position_coeffs, mode.momentum_coeffs, occ
        )
    ]


def profile_header(dim):
    return ["site_index", *[f"x{r}" for r in range(dim)], "g", "f", "F"]


def write_profile_csv(path, mode, metadata=None):
    write_csv(path, profile_header(mode.support.lattice.dim), profile_table(mode), metadata)


def read_profile_csv(path, region):
    """Inverse of :func:`write_profile_csv` for a known support region."""
    _, header, rows = read_csv(path)
    gi, fi = header.index("g"), header.index("f")
    sites = [int(r[0]) for r in rows]
    if tuple(sites) != region.site_indices:
        raise DomainError("CSV sites do not match the region")
    return ModeProfile(region, [float(r[gi]) for r in rows], [float(r[fi]) for r in rows])


__all__ = [
    "Region",
    "ModeProfile",
    "RankedModes",
    "reduce",
    "normal_modes",
    "occupation_function",
    "mode_covariance",
    "partner_mode",
    "entanglement_captured",
    "saturation_count",
    "profile_table",
    "write_profile_csv",
    "read_profile_csv",
]
