"""Closed-form asymptotics for Fisher-transformed sample correlations.

Covers the positive-semidefiniteness argument for 3x3 correlation matrices
(characteristic cubic solved in closed form), Gaussian fourth-order covariances
from Isserlis' theorem, the fourth-moment condition under which two
transformed correlations are asymptotically independent, its Gaussian
reduction to a quadratic in the gene-gene correlation, and the delta-method
chain that yields the full asymptotic covariance of ``sqrt(n) * (phi(r) - phi(rho))``.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from rglab.exceptions import DomainError, ParameterError, ValidityError

__all__ = [
    "CubicRoots",
    "MAX_DENSE_K",
    "PSD_TOL",
    "PairwiseMoments",
    "QuadraticCondition",
    "ZERO_TOL",
    "asymptotic_fisher_covariance",
    "char_poly_roots",
    "delta_method_stages",
    "gaussian_condition",
    "independence_lhs",
    "is_valid_correlation_structure",
    "isserlis_pair_moments",
    "solve_cubic",
]

PSD_TOL = 1e-10
SYM_TOL = 1e-12
# |independence_lhs| at or below this counts as "the condition holds"
ZERO_TOL = 1e-9
MAX_DENSE_K = 64

_REAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# cubic roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CubicRoots:
    """All three complex roots of a cubic, plus the real ones (with multiplicity)."""

    roots: tuple
    real_roots: tuple
    coefficients: tuple

    def residuals(self):
        c3, c2, c1, c0 = self.coefficients
        return tuple(abs(((c3 * z + c2) * z + c1) * z + c0) for z in self.roots)

    @property
    def min_real(self):
        return min(self.real_roots) if self.real_roots else None


def _horner(coeffs, z):
    c3, c2, c1, c0 = coeffs
    f = ((c3 * z + c2) * z + c1) * z + c0
    df = (3 * c3 * z + 2 * c2) * z + c1
    return f, df


def _polish(coeffs, z):
    # one Newton step, kept only if it reduces the residual
    f, df = _horner(coeffs, z)
    if df == 0 or f == 0:
        return z
    cand = z - f / df
    if abs(_horner(coeffs, cand)[0]) < abs(f):
        return cand
    return z


def _depressed_roots(p, q):
    """Roots of t^3 + p t + q via the trigonometric / Cardano closed forms."""
    if p == 0 and q == 0:
        return [0.0, 0.0, 0.0]
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p ** 3
    scale = half_q * half_q + abs(third_p) ** 3
    if abs(disc) <= 1e-14 * scale:
        # repeated root
        u = np.cbrt(-half_q)
        return [2.0 * u, -u, -u]
    if disc < 0:
        m = 2.0 * math.sqrt(-third_p)
        arg = max(-1.0, min(1.0, half_q / (third_p * math.sqrt(-third_p))))
        theta = math.acos(arg) / 3.0
        return [m * math.cos(theta - 2.0 * math.pi * j / 3.0) for j in range(3)]
    sd = math.sqrt(disc)
    w = -half_q + math.copysign(sd, -half_q)
    u = float(np.cbrt(w))
    v = -third_p / u if u != 0 else 0.0
    re = -(u + v) / 2.0
    im = math.sqrt(3.0) / 2.0 * (u - v)
    return [u + v, complex(re, im), complex(re, -im)]


def solve_cubic(c3, c2, c1, c0):
    """Roots of ``c3*x**3 + c2*x**2 + c1*x + c0``.

    Closed form (trigonometric branch for three real roots, Cardano otherwise)
    followed by one guarded Newton step per root.  A root counts as real when
    its imaginary part is below ``1e-10 * max(1, max|root|)``.
    """
    if c3 == 0:
        raise ParameterError("leading coefficient c3 must be non-zero (not a cubic)")
    coeffs = (float(c3), float(c2), float(c1), float(c0))
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    roots = [_polish(coeffs, t + shift) for t in _depressed_roots(p, q)]
    scale = max(1.0, max(abs(z) for z in roots))
    real = []
    out = []
    for z in roots:
        z = complex(z)
        if abs(z.imag) < _REAL_TOL * scale:
            real.append(z.real)
            z = complex(z.real, 0.0)
        out.append(z)
    return CubicRoots(roots=tuple(out), real_roots=tuple(sorted(real)), coefficients=coeffs)


def _check_open_unit(name, value):
    if not -1.0 < value < 1.0:
        raise DomainError(f"{name} must lie in (-1, 1), got {value!r}")


def char_poly_roots(rho1, rho2, c):
    """Eigenvalues of the correlation matrix ``[[1, c, rho1], [c, 1, rho2], [rho1, rho2, 1]]``.

    Obtained as roots of its characteristic polynomial
    ``(1-l)^3 - (1-l)(rho1^2 + rho2^2 + c^2) + 2 c rho1 rho2``.  The matrix is
    symmetric, so any imaginary residue from the closed form is rounding and is
    dropped before a final Newton polish.
    """
    for name, value in (("rho1", rho1), ("rho2", rho2), ("c", c)):
        _check_open_unit(name, value)
    s = rho1 * rho1 + rho2 * rho2 + c * c
    coeffs = (-1.0, 3.0, s - 3.0, 1.0 - s + 2.0 * c * rho1 * rho2)
    # already depressed in m = 1 - l: m^3 - s m + 2 c rho1 rho2, so solve there
    # and skip the shift, which loses precision near a triple root
    depressed = (1.0, 0.0, -s, 2.0 * c * rho1 * rho2)
    mus = [_polish(depressed, complex(t).real) for t in _depressed_roots(-s, depressed[3])]
    real = sorted(1.0 - mu for mu in mus)
    return CubicRoots(
        roots=tuple(complex(x, 0.0) for x in real),
        real_roots=tuple(real),
        coefficients=coeffs,
    )


def is_valid_correlation_structure(rho1, rho2, c):
    """True iff the 3x3 correlation matrix is PSD up to ``PSD_TOL``.

    Points within about 1e-10 of the PSD boundary (e.g. ``c -> 1`` with
    ``rho1 == rho2``) are decided by that tolerance.
    """
    return char_poly_roots(rho1, rho2, c).min_real >= -PSD_TOL


# ---------------------------------------------------------------------------
# fourth-order moments and the independence condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairwiseMoments:
    """Moments of (X_i, X_j, Y) entering the asymptotic covariance of (r_i, r_j).

    ``c_a_b`` is Cov(a, b) with ``a`` one of X_i^2, Y^2, X_i Y and ``b`` one of
    X_j^2, Y^2, X_j Y.
    """

    var_xi: float
    var_xj: float
    var_y: float
    rho_i: float
    rho_j: float
    rho_xixj: float
    c_xi2_xj2: float
    c_y2_xj2: float
    c_xiy_xj2: float
    c_xi2_y2: float
    c_y2_y2: float
    c_xiy_y2: float
    c_xi2_xjy: float
    c_y2_xjy: float
    c_xiy_xjy: float

    def __post_init__(self):
        for name in ("var_xi", "var_xj", "var_y"):
            if not getattr(self, name) > 0:
                raise ValidityError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("rho_i", "rho_j", "rho_xixj"):
            if not -1.0 < getattr(self, name) < 1.0:
                raise ValidityError(f"{name} must lie in (-1, 1), got {getattr(self, name)!r}")
        if self.c_y2_y2 < 0:
            raise ValidityError("c_y2_y2 is a variance and cannot be negative")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _check_covariance(sigma, name="covariance"):
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValidityError(f"{name} must be a square matrix, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise ValidityError(f"{name} has non-finite entries")
    if np.max(np.abs(sigma - sigma.T)) > SYM_TOL * max(1.0, np.max(np.abs(sigma))):
        raise ValidityError(f"{name} is not symmetric")
    if np.any(np.diag(sigma) <= 0):
        raise ValidityError(f"{name} must have a positive diagonal")
    sigma = (sigma + sigma.T) / 2.0
    min_eig = float(np.linalg.eigvalsh(sigma)[0])
    if min_eig < -PSD_TOL:
        raise ValidityError(
            f"{name} is not positive semi-definite (min eigenvalue {min_eig:.3e})"
        )
    return sigma


def isserlis_pair_moments(sigma):
    """Gaussian closed forms for every moment of (X_i, X_j, Y).

    ``sigma`` is the 3x3 covariance with variable order (X_i, X_j, Y).
    """
    s = _check_covariance(sigma)
    if s.shape != (3, 3):
        raise ValidityError(f"expected a 3x3 covariance of (X_i, X_j, Y), got {s.shape}")
    s11, s22, syy = s[0, 0], s[1, 1], s[2, 2]
    s12, s1y, s2y = s[0, 1], s[0, 2], s[1, 2]
    return PairwiseMoments(
        var_xi=float(s11),
        var_xj=float(s22),
        var_y=float(syy),
        rho_i=float(s1y / math.sqrt(s11 * syy)),
        rho_j=float(s2y / math.sqrt(s22 * syy)),
        rho_xixj=float(s12 / math.sqrt(s11 * s22)),
        c_xi2_xj2=float(2 * s12 ** 2),
        c_y2_xj2=float(2 * s2y ** 2),
        c_xiy_xj2=float(2 * s12 * s2y),
        c_xi2_y2=float(2 * s1y ** 2),
        c_y2_y2=float(2 * syy ** 2),
        c_xiy_y2=float(2 * syy * s1y),
        c_xi2_xjy=float(2 * s12 * s1y),
        c_y2_xjy=float(2 * syy * s2y),
        c_xiy_xjy=float(syy * s12 + s1y * s2y),
    )


def independence_lhs(m):
    """Asymptotic covariance of ``sqrt(n) * (r_i, r_j)`` from fourth-order moments.

    Each correlation has gradient ``(-rho/(2 var_x), -rho/(2 var_y), 1/(sd_x sd_y))``
    with respect to (variance of x, variance of y, covariance of x and y); the
    value is the bilinear form of those gradients against the covariances of
    (X_i^2, Y^2, X_i Y) with (X_j^2, Y^2, X_j Y).  It vanishes exactly when the
    two transformed correlations are asymptotically independent.  The quantity
    is dimensionless (invariant to rescaling any variable), so ``ZERO_TOL``
    applies to it directly.
    """
    sd_xi = math.sqrt(m.var_xi)
    sd_xj = math.sqrt(m.var_xj)
    sd_y = math.sqrt(m.var_y)
    gi = (-m.rho_i / (2 * m.var_xi), -m.rho_i / (2 * m.var_y), 1.0 / (sd_xi * sd_y))
    gj = (-m.rho_j / (2 * m.var_xj), -m.rho_j / (2 * m.var_y), 1.0 / (sd_xj * sd_y))
    # rows: X_i^2, Y^2, X_i Y ; columns: X_j^2, Y^2, X_j Y
    cov = (
        (m.c_xi2_xj2, m.c_xi2_y2, m.c_xi2_xjy),
        (m.c_y2_xj2, m.c_y2_y2, m.c_y2_xjy),
        (m.c_xiy_xj2, m.c_xiy_y2, m.c_xiy_xjy),
    )
    total = 0.0
    for b in range(3):
        inner = gi[0] * cov[0][b] + gi[1] * cov[1][b] + gi[2] * cov[2][b]
        total += gj[b] * inner
    return float(total)


@dataclass(frozen=True)
class QuadraticCondition:
    """``a*x**2 + b*x + c = 0`` in the gene-gene correlation ``x``."""

    a: float
    b: float
    c: float
    discriminant: float

    def evaluate(self, x):
        return (self.a * x + self.b) * x + self.c

    def real_roots(self):
        """Real solutions, ascending.  Degenerates to the linear root when ``a == 0``."""
        if self.a == 0:
            if self.b == 0:
                return ()
            return (-self.c / self.b,)
        if self.discriminant < 0:
            return ()
        sq = math.sqrt(self.discriminant)
        # stable form: avoid subtracting nearly equal numbers
        qq = -0.5 * (self.b + math.copysign(sq, self.b)) if self.b != 0 else -0.5 * sq
        if qq == 0:
            return (0.0, 0.0)
        r1, r2 = qq / self.a, self.c / qq
        return tuple(sorted((r1, r2)))

    def roots_in_domain(self):
        return tuple(x for x in self.real_roots() if -1.0 < x < 1.0)

    @property
    def solvable(self):
        return bool(self.roots_in_domain())


def gaussian_condition(rho1, rho2):
    """Coefficients of the Gaussian independence quadratic for target correlations ``rho1, rho2``."""
    _check_open_unit("rho1", rho1)
    _check_open_unit("rho2", rho2)
    a = rho1 * rho2 / 2.0
    b = 1.0 - rho1 * rho1 - rho2 * rho2
    c = (rho1 * rho2 ** 3 + rho1 ** 3 * rho2 - rho1 * rho2) / 2.0
    return QuadraticCondition(a=a, b=b, c=c, discriminant=b * b - 4.0 * a * c)


# ---------------------------------------------------------------------------
# delta-method pipeline
# ---------------------------------------------------------------------------

def _moment_covariance(S):
    """Cov(Z) for Gaussian Z = (X, Y, X^2, Y^2, X*Y), mean zero, covariance S."""
    k = S.shape[0] - 1
    first = np.arange(k + 1)
    # each second-order entry is a product of two base variables
    left = np.concatenate([first, np.arange(k)])
    right = np.concatenate([first, np.full(k, k)])
    quad = (
        S[np.ix_(left, left)] * S[np.ix_(right, right)]
        + S[np.ix_(left, right)] * S[np.ix_(right, left)]
    )
    dim = 3 * k + 2
    out = np.zeros((dim, dim))
    out[: k + 1, : k + 1] = S
    # third moments of a centred Gaussian vanish, so the off-diagonal blocks stay 0
    out[k + 1:, k + 1:] = quad
    return out


def _eta_jacobian(z, k):
    """(3k+2) x (2k+1) Jacobian of z -> (second moments - products of means)."""
    dim = 3 * k + 2
    J = np.zeros((dim, 2 * k + 1))
    J[: k + 1, : k + 1] = -2.0 * np.diag(z[: k + 1])
    J[:k, k + 1:] = -z[k] * np.eye(k)
    J[k, k + 1:] = -z[:k]
    J[k + 1: 2 * k + 2, : k + 1] = np.eye(k + 1)
    J[2 * k + 2:, k + 1:] = np.eye(k)
    return J


def _gamma_jacobian(v, k):
    """k x (2k+1) Jacobian of (variances, covariances with y) -> correlations."""
    vx, vy, cxy = v[:k], v[k], v[k + 1:]
    G = np.zeros((k, 2 * k + 1))
    G[np.arange(k), np.arange(k)] = -cxy / (2.0 * np.sqrt(vx ** 3 * vy))
    G[:, k] = -cxy / (2.0 * np.sqrt(vx * vy ** 3))
    G[np.arange(k), k + 1 + np.arange(k)] = 1.0 / np.sqrt(vx * vy)
    return G


def delta_method_stages(covariance):
    """All four covariance stages for a zero-mean Gaussian (X_1..X_k, Y).

    Returns a dict with ``sigma1`` (raw moments, (3k+2)^2), ``sigma2``
    (centred second moments), ``sigma3`` (sample correlations), ``sigma4``
    (Fisher-transformed correlations) and ``rho``.
    """
    S = _check_covariance(getattr(covariance, "covariance", covariance))
    k = S.shape[0] - 1
    if k < 1:
        raise ParameterError("need at least one feature plus the target")
    if k > MAX_DENSE_K:
        raise ParameterError(f"k={k} exceeds the dense-pipeline cap of {MAX_DENSE_K}")
    vx, vy, cxy = np.diag(S)[:k], S[k, k], S[:k, k]
    rho = cxy / np.sqrt(vx * vy)
    if np.any(np.abs(rho) >= 1.0 - 1e-12):
        bad = int(np.flatnonzero(np.abs(rho) >= 1.0 - 1e-12)[0])
        raise ValidityError(f"(X_{bad}, Y) is degenerate: |correlation| = 1")

    sigma1 = _moment_covariance(S)
    mean = np.concatenate([np.zeros(k + 1), np.diag(S), cxy])
    J = _eta_jacobian(mean, k)
    sigma2 = J.T @ sigma1 @ J
    v = np.concatenate([np.diag(S), cxy])
    G = _gamma_jacobian(v, k)
    sigma3 = G @ sigma2 @ G.T
    dphi = 1.0 / (1.0 - rho ** 2)
    sigma4 = sigma3 * np.outer(dphi, dphi)
    return {"sigma1": sigma1, "sigma2": sigma2, "sigma3": sigma3, "sigma4": sigma4, "rho": rho}


def asymptotic_fisher_covariance(spec):
    """Asymptotic covariance of ``sqrt(n) * (phi(r) - phi(rho))`` under a Gaussian model.

    ``spec`` is a ``GaussianSpec`` or a (k+1)x(k+1) covariance matrix with the
    target last.  The diagonal is one (classical Fisher variance).
    """
    return delta_method_stages(spec)["sigma4"]
