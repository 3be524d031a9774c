"""
Symplectic linear algebra for zero-mean Gaussian states.

All covariance matrices use the interleaved phase-space ordering
``(q1, p1, q2, p2, ..., qK, pK)`` and the convention that the vacuum has
covariance equal to the identity. The symplectic form is

    Omega = direct_sum_i [[0, 1], [-1, 0]]

so that ``[xi_a, xi_b] = i Omega_ab``. Mode indices are 0-based everywhere.
Entropies and negativities use the natural logarithm.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConvergenceFailure,
    DomainError,
    IndexOutOfRange,
    NonPositiveDefinite,
)

# Positivity floor applied to the ordinary eigenvalues of a covariance matrix.
EIGENVALUE_FLOOR = 1e-13
PURITY_TOL = 1e-6
SYMPLECTIC_TOL = 1e-9
# Symplectic defect above which the Williamson transform gets a correction pass.
RESYMPLECTIFY_TOL = 1e-10
# Symplectic eigenvalues closer than this are treated as one degenerate cluster.
DEGENERACY_TOL = 1e-9

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(num_modes):
    """Return the ``2K x 2K`` symplectic form for ``num_modes`` interleaved modes."""
    if num_modes < 0:
        raise DomainError("num_modes must be non-negative")
    return np.kron(np.eye(num_modes), _J2)


def num_modes_of(matrix):
    """Number of modes of a ``2K x 2K`` phase-space matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        raise DomainError(f"expected a square matrix of even size, got shape {matrix.shape}")
    return matrix.shape[0] // 2


def mode_indices(modes):
    """Phase-space row indices ``[2i, 2i+1, ...]`` for the listed modes."""
    modes = np.asarray(modes, dtype=int).reshape(-1)
    return np.stack([2 * modes, 2 * modes + 1], axis=1).reshape(-1)


def submatrix(sigma, modes):
    """Rows and columns of ``sigma`` belonging to ``modes``, in the given order."""
    k = num_modes_of(sigma)
    modes = np.asarray(modes, dtype=int).reshape(-1)
    if modes.size and (modes.min() < 0 or modes.max() >= k):
        raise IndexOutOfRange(f"mode index out of range for a {k}-mode state")
    idx = mode_indices(modes)
    return np.asarray(sigma)[np.ix_(idx, idx)]


def submatrix_pair(sigma, rows, cols):
    """Cross block of ``sigma`` between the modes ``rows`` and ``cols``."""
    sigma = np.asarray(sigma)
    return sigma[np.ix_(mode_indices(rows), mode_indices(cols))]


def direct_sum(*matrices):
    """Block-diagonal direct sum; in interleaved ordering this joins mode sets."""
    return sla.block_diag(*matrices)


def _as_covariance(sigma):
    sigma = np.asarray(sigma, dtype=float)
    num_modes_of(sigma)
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma - sigma.T)) > 1e-12 * scale:
        raise DomainError("covariance matrix is not symmetric")
    return 0.5 * (sigma + sigma.T)


def _sqrt_pd(sigma):
    """Symmetric square root and inverse square root of a positive definite matrix."""
    w, u = np.linalg.eigh(sigma)
    if w[0] <= EIGENVALUE_FLOOR:
        raise NonPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} is below the positivity floor")
    root = (u * np.sqrt(w)) @ u.T
    inv_root = (u / np.sqrt(w)) @ u.T
    return 0.5 * (root + root.T), 0.5 * (inv_root + inv_root.T)


def symplectic_spectrum(sigma):
    """
    Symplectic eigenvalues of a covariance matrix, sorted descending.

    Computed as the paired singular values of the skew-symmetric matrix
    ``sigma^(1/2) Omega sigma^(1/2)``.

    Raises
    ------
    NonPositiveDefinite
        If an ordinary eigenvalue of ``sigma`` is at or below 1e-13.
    """
    sigma = _as_covariance(sigma)
    k = num_modes_of(sigma)
    if k == 0:
        return np.zeros(0)
    root, _ = _sqrt_pd(sigma)
    b = root @ symplectic_form(k) @ root
    s = np.linalg.svd(b, compute_uv=False)
    return 0.5 * (s[0::2] + s[1::2])


def symplectic_defect(s):
    """Max-abs entry of ``S Omega S^T - Omega``."""
    omega = symplectic_form(num_modes_of(s))
    return float(np.max(np.abs(s @ omega @ s.T - omega)))


def is_symplectic(s, tol=SYMPLECTIC_TOL):
    return symplectic_defect(s) <= tol


def symplectic_inverse(s):
    """Inverse of a symplectic matrix, ``Omega^T S^T Omega``."""
    omega = symplectic_form(num_modes_of(s))
    return omega.T @ s.T @ omega


def _resymplectify(s):
    # S X^(-1/2) with X = Omega^T S^T Omega S is exactly symplectic when X is
    # close to the identity; X^(-1/2) is an Omega-symmetric function of X.
    omega = symplectic_form(num_modes_of(s))
    x = omega.T @ s.T @ omega @ s
    w, v = np.linalg.eig(x)
    inv_root = (v * w ** -0.5) @ np.linalg.inv(v)
    return s @ np.real(inv_root)


@dataclass(frozen=True, eq=False)
class WilliamsonDecomposition:
    """``source = transform @ diag(nu1, nu1, ..., nuK, nuK) @ transform.T``.

    Normal modes are ordered by descending symplectic eigenvalue. The rows of
    :meth:`mode_rows` give each normal-mode quadrature as a linear
    combination of the original quadratures.
    """

    spectrum: np.ndarray
    transform: np.ndarray
    source: np.ndarray

    @property
    def num_modes(self):
        return self.spectrum.size

    def diagonal(self):
        return np.diag(np.repeat(self.spectrum, 2))

    def reconstruct(self):
        return self.transform @ self.diagonal() @ self.transform.T

    def reconstruction_error(self):
        """Relative Frobenius error of :meth:`reconstruct` against the source."""
        return float(
            np.linalg.norm(self.reconstruct() - self.source) / np.linalg.norm(self.source)
        )

    def mode_rows(self):
        return symplectic_inverse(self.transform)


def _has_qp_blocks(sigma):
    scale = max(1.0, float(np.max(np.abs(sigma))))
    return np.max(np.abs(sigma[0::2, 1::2])) <= 1e-14 * scale


def _williamson_qp(sigma):
    """Williamson form of a covariance with vanishing position-momentum block.

    Every normal mode then has a position quadrature built from positions
    only and a momentum quadrature built from momenta only.
    """
    x = sigma[0::2, 0::2]
    p = sigma[1::2, 1::2]
    x_root, x_inv_root = _sqrt_pd(x)
    _sqrt_pd(p)
    c = x_root @ p @ x_root
    lam, u = np.linalg.eigh(0.5 * (c + c.T))
    lam, u = lam[::-1], u[:, ::-1]
    nu = np.sqrt(np.clip(lam, 0.0, None))
    g = x_inv_root @ u * np.sqrt(nu)  # Q_k = g[:, k] . q
    f = x_root @ u / np.sqrt(nu)  # P_k = f[:, k] . p
    k = nu.size
    s = np.zeros((2 * k, 2 * k))
    s[0::2, 0::2] = f
    s[1::2, 1::2] = g
    return nu, s


def _williamson_schur(sigma):
    k = num_modes_of(sigma)
    root, _ = _sqrt_pd(sigma)
    b = root @ symplectic_form(k) @ root
    t, z = sla.schur(0.5 * (b - b.T), output="real")
    blocks = np.zeros_like(t)
    nu = np.empty(k)
    z = z.copy()
    for i in range(k):
        sl = slice(2 * i, 2 * i + 2)
        blk = t[sl, sl]
        upper, lower = blk[0, 1], blk[1, 0]
        if upper * lower >= 0:
            raise ConvergenceFailure("real Schur form did not yield a 2x2 skew block")
        if upper < 0:
            z[:, [2 * i, 2 * i + 1]] = z[:, [2 * i + 1, 2 * i]]
        nu[i] = 0.5 * (abs(upper) + abs(lower))
        blocks[sl, sl] = blk
    residual = np.linalg.norm(t - blocks) / max(np.linalg.norm(b), 1.0)
    if residual > 1e-8:
        raise ConvergenceFailure(f"skew-symmetric block reduction left residual {residual:.2e}")
    s = root @ z / np.sqrt(np.repeat(nu, 2))
    if symplectic_defect(s) > RESYMPLECTIFY_TOL:
        s = _resymplectify(s)
    return nu, s


def _fix_phases(s):
    """Rotate each mode within its own plane so that its position quadrature
    carries as much weight on the original positions as possible."""
    rows = symplectic_inverse(s)
    for i in range(num_modes_of(s)):
        a, b = rows[2 * i, 0::2], rows[2 * i + 1, 0::2]
        gram = np.array([[a @ a, a @ b], [a @ b, b @ b]])
        if abs(gram[0, 1]) <= 1e-14 * gram.trace() and gram[0, 0] >= gram[1, 1]:
            continue
        _, vec = np.linalg.eigh(gram)
        c, sn = vec[:, 1]
        # rows (Q, P) -> R (Q, P) means columns -> columns R^T
        rot = np.array([[c, sn], [-sn, c]])
        s[:, 2 * i : 2 * i + 2] = s[:, 2 * i : 2 * i + 2] @ rot.T
    return s


def _canonical_order(nu, s):
    """Sort modes by descending nu, fix phases and signs, break near-ties reproducibly."""
    k = nu.size
    s = _fix_phases(s)
    rows = symplectic_inverse(s)
    dominant = np.empty(k, dtype=int)
    for i in range(k):
        q_part = rows[2 * i, 0::2]
        mags = np.abs(q_part)
        lead = int(np.flatnonzero(mags >= (1 - 1e-9) * mags.max())[0])
        dominant[i] = lead
        if q_part[lead] < 0:
            s[:, 2 * i : 2 * i + 2] *= -1
    order = list(np.argsort(-nu, kind="stable"))
    # within each cluster of near-equal nu, order by the dominant site index
    out, start = [], 0
    while start < k:
        stop = start + 1
        while stop < k and nu[order[start]] - nu[order[stop]] < DEGENERACY_TOL:
            stop += 1
        out.extend(sorted(order[start:stop], key=lambda i: (dominant[i], i)))
        start = stop
    out = np.asarray(out, dtype=int)
    return nu[out], s[:, mode_indices(out)]


def williamson(sigma, method="auto"):
    """
    Williamson decomposition ``sigma = S diag(nu) S^T`` with ``S`` symplectic.

    Parameters
    ----------
    sigma : array
        Positive definite ``2K x 2K`` covariance matrix.
    method : {"auto", "schur", "qp"}
        ``"schur"`` uses a real Schur reduction of ``sigma^(1/2) Omega
        sigma^(1/2)``. ``"qp"`` requires a vanishing position-momentum block
        and returns normal modes that do not mix positions with momenta.
        ``"auto"`` picks ``"qp"`` whenever that block vanishes.

    Returns
    -------
    WilliamsonDecomposition
        Modes ordered by descending symplectic eigenvalue; each mode's
        largest-magnitude position coefficient is positive.
    """
    sigma = _as_covariance(sigma)
    if num_modes_of(sigma) == 0:
        return WilliamsonDecomposition(np.zeros(0), np.zeros((0, 0)), sigma)
    if method == "auto":
        method = "qp" if _has_qp_blocks(sigma) else "schur"
    if method == "qp":
        if not _has_qp_blocks(sigma):
            raise DomainError("method='qp' needs a vanishing position-momentum block")
        nu, s = _williamson_qp(sigma)
    elif method == "schur":
        nu, s = _williamson_schur(sigma)
    else:
        raise DomainError(f"unknown method {method!r}")
    nu, s = _canonical_order(nu, s)
    return WilliamsonDecomposition(nu, s, sigma)


def partial_transpose(sigma, modes):
    """Local time reversal: flip the sign of the momenta of ``modes``.

    This is an involution and the phase-space image of the partial transpose.
    """
    sigma = np.array(sigma, dtype=float)
    k = num_modes_of(sigma)
    modes = np.asarray(modes, dtype=int).reshape(-1)
    if modes.size and (modes.min() < 0 or modes.max() >= k):
        raise IndexOutOfRange(f"mode index out of range for a {k}-mode state")
    signs = np.ones(2 * k)
    signs[2 * np.unique(modes) + 1] = -1.0
    return sigma * np.outer(signs, signs)


def negativity_terms(nu_tilde):
    """``-log(x)`` for symplectic eigenvalues below one, zero otherwise."""
    nu_tilde = np.asarray(nu_tilde, dtype=float)
    return np.where(nu_tilde < 1.0, -np.log(np.minimum(nu_tilde, 1.0)), 0.0)


def log_negativity(sigma, partition):
    """Logarithmic negativity between ``partition`` and the remaining modes."""
    nu_tilde = symplectic_spectrum(partial_transpose(sigma, partition))
    return float(np.sum(negativity_terms(nu_tilde)))


def mode_entropy(nu):
    """Von Neumann entropy (nats) of single modes with symplectic eigenvalue ``nu``."""
    nu = np.maximum(np.asarray(nu, dtype=float), 1.0)
    plus = 0.5 * (nu + 1.0)
    minus = 0.5 * (nu - 1.0)
    safe = np.where(minus > 0, minus, 1.0)
    return plus * np.log(plus) - np.where(minus > 0, minus * np.log(safe), 0.0)


def von_neumann_entropy(sigma):
    return float(np.sum(mode_entropy(symplectic_spectrum(sigma))))


def ptranspose_spectrum_from_reduced(nu, tol=PURITY_TOL, floor=None):
    """
    Partial-transpose spectrum of a pure bipartite state, predicted from the
    reduced spectrum ``nu`` of one side: ``nu - sqrt(nu^2 - 1)``.

    The map has infinite slope at ``nu = 1``, so a roundoff error ``d`` in
    ``nu`` becomes an error ``sqrt(2 d)`` in the prediction. Eigenvalues
    with ``nu - 1`` below ``floor`` are therefore treated as exactly pure.
    The default floor is the roundoff scale ``8 eps max(nu)`` of a single
    eigenvalue, or twice the largest unphysical undershoot ``1 - nu`` if that
    is bigger. A larger floor would discard genuinely mixed modes: the
    reduced spectrum resolves ``nu - 1`` far below ``len(nu) eps``.
    Returned sorted ascending (most entangled first).
    """
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if nu.size and nu.min() < 1.0 - tol:
        raise DomainError(f"symplectic eigenvalue {nu.min():.6g} is below 1")
    if floor is None:
        floor = 0.0
        if nu.size:
            floor = max(8 * np.finfo(float).eps * nu.max(), 2 * (1.0 - nu.min()))
    excess = np.where(nu - 1.0 < floor, 0.0, nu - 1.0)
    # 1 / (nu + sqrt(nu^2 - 1)) avoids cancellation for large nu
    nu = 1.0 + excess
    return np.sort(1.0 / (nu + np.sqrt(excess * (nu + 1.0))))


def two_mode_squeezed(nu):
    """Two-mode squeezed vacuum whose reduced modes both have eigenvalue ``nu``."""
    if nu < 1:
        raise DomainError("two-mode squeezed state needs nu >= 1")
    c = np.sqrt(nu * nu - 1.0)
    return np.array(
        [
            [nu, 0.0, c, 0.0],
            [0.0, nu, 0.0, -c],
            [c, 0.0, nu, 0.0],
            [0.0, -c, 0.0, nu],
        ]
    )


def random_symplectic(num_modes, intensity, seed):
    """``expm(Omega^{-1} F)`` for a seeded random symmetric ``F`` of scale ``intensity``."""
    if intensity <= 0:
        raise DomainError("intensity must be positive")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2 * num_modes, 2 * num_modes))
    f = intensity * (g + g.T) / np.sqrt(2.0)
    return sla.expm(symplectic_form(num_modes).T @ f)


@dataclass(frozen=True)
class InterlacingReport:
    passed: bool
    min_margin: float
    margins: tuple
    spectrum_full: tuple
    spectrum_deleted: tuple


def interlacing_check(sigma, delete_mode, slack=SYMPLECTIC_TOL):
    """
    Check symplectic-eigenvalue interlacing after deleting one mode.

    With ascending spectra ``a`` of ``sigma`` (K modes) and ``b`` of the
    matrix with ``delete_mode`` removed, checks ``a[j] <= b[j] <= a[j+2]``
    for ``j < K-2`` and ``a[K-2] <= b[K-2]``. ``margins`` holds every
    ``rhs - lhs`` difference; the check passes when none is below ``-slack``.
    """
    k = num_modes_of(sigma)
    if k < 2:
        raise DomainError("interlacing needs at least two modes")
    if not 0 <= delete_mode < k:
        raise IndexOutOfRange(f"cannot delete mode {delete_mode} of {k}")
    keep = [i for i in range(k) if i != delete_mode]
    a = np.sort(symplectic_spectrum(sigma))
    b = np.sort(symplectic_spectrum(submatrix(sigma, keep)))
    margins = []
    for j in range(k - 2):
        margins.append(b[j] - a[j])
        margins.append(a[j + 2] - b[j])
    margins.append(b[k - 2] - a[k - 2])
    margins = np.asarray(margins)
    return InterlacingReport(
        passed=bool(margins.min() >= -slack),
        min_margin=float(margins.min()),
        margins=tuple(margins.tolist()),
        spectrum_full=tuple(a.tolist()),
        spectrum_deleted=tuple(b.tolist()),
    )
