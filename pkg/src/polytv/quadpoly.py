"""Second-degree polynomials ``<Bx, x> + <b, x> + beta`` in a standard normal vector.

Closed-form moments, L2 distances and the diagonalized ("canonical") form
whose law is a generalized chi-square distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InputError

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
ZERO_REL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadPoly:
    """``x -> <quad x, x> + <lin, x> + const_term`` on R^n.

    ``quad`` is symmetrized on construction, since the quadratic form only
    sees the symmetric part.
    """

    quad: np.ndarray
    lin: np.ndarray
    const_term: float = 0.0

    def __post_init__(self):
        quad = np.atleast_2d(np.asarray(self.quad, dtype=float))
        lin = np.atleast_1d(np.asarray(self.lin, dtype=float))
        if quad.ndim != 2 or quad.shape[0] != quad.shape[1] or quad.shape[0] < 1:
            raise InputError(f"quad must be a square n x n matrix, got shape {quad.shape}")
        if lin.shape != (quad.shape[0],):
            raise InputError(f"lin must have length {quad.shape[0]}, got shape {lin.shape}")
        const = float(self.const_term)
        if not (np.all(np.isfinite(quad)) and np.all(np.isfinite(lin)) and np.isfinite(const)):
            raise InputError("polynomial coefficients must be finite")
        object.__setattr__(self, "quad", _frozen(0.5 * (quad + quad.T)))
        object.__setattr__(self, "lin", _frozen(lin))
        object.__setattr__(self, "const_term", const)

    @classmethod
    def zero(cls, dim: int) -> QuadPoly:
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0.0)

    @classmethod
    def from_quad(cls, quad, lin=None, const_term: float = 0.0) -> QuadPoly:
        quad = np.atleast_2d(np.asarray(quad, dtype=float))
        if lin is None:
            lin = np.zeros(quad.shape[0])
        return cls(quad, lin, const_term)

    @property
    def dim(self) -> int:
        return self.quad.shape[0]

    def __call__(self, x):
        """Evaluate at points ``x`` of shape ``(..., dim)``."""
        x = np.asarray(x, dtype=float)
        return ((x @ self.quad) * x).sum(axis=-1) + x @ self.lin + self.const_term

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * x @ self.quad + self.lin

    def _check_dim(self, other: QuadPoly):
        if not isinstance(other, QuadPoly):
            raise InputError(f"expected QuadPoly, got {type(other).__name__}")
        if other.dim != self.dim:
            raise InputError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, QuadPoly):
            self._check_dim(other)
            return QuadPoly(self.quad + other.quad, self.lin + other.lin,
                            self.const_term + other.const_term)
        return QuadPoly(self.quad, self.lin, self.const_term + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, QuadPoly):
            self._check_dim(other)
            return QuadPoly(self.quad - other.quad, self.lin - other.lin,
                            self.const_term - other.const_term)
        return QuadPoly(self.quad, self.lin, self.const_term - float(other))

    def __mul__(self, c):
        c = float(c)
        return QuadPoly(c * self.quad, c * self.lin, c * self.const_term)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def to_dict(self) -> dict:
        return {"quad": self.quad.tolist(), "lin": self.lin.tolist(),
                "const": self.const_term}

    @classmethod
    def from_dict(cls, payload: dict) -> QuadPoly:
        try:
            quad = payload["quad"]
        except (KeyError, TypeError):
            raise InputError("polynomial payload needs a 'quad' entry") from None
        return cls.from_quad(quad, payload.get("lin"), payload.get("const", 0.0))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition sorted by decreasing absolute eigenvalue."""

    eigenvalues: np.ndarray
    basis: np.ndarray
    zero_threshold: float
    sweeps: int = 0

    @property
    def nonzero(self) -> np.ndarray:
        return np.abs(self.eigenvalues) > self.zero_threshold

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.nonzero))


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """The law ``sum_j lam_j (Z_j + delta_j)^2 + sigma Z_0 + offset``."""

    terms: tuple
    sigma: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        terms = tuple((float(lam), float(d)) for lam, d in self.terms)
        if any(lam == 0.0 for lam, _ in terms):
            raise InputError("canonical-form terms need nonzero weights")
        if self.sigma < 0:
            raise InputError("sigma must be nonnegative")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.terms], dtype=float)

    @property
    def shifts(self) -> np.ndarray:
        return np.array([d for _, d in self.terms], dtype=float)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def is_degenerate(self) -> bool:
        """True when the law is a point mass at ``offset``."""
        return not self.terms and self.sigma == 0.0

    @property
    def has_integrable_cf(self) -> bool:
        return self.sigma > 0.0 or len(self.terms) >= 3

    def mean(self) -> float:
        lam, d = self.lambdas, self.shifts
        return float(np.sum(lam * (1.0 + d * d)) + self.offset)

    def variance(self) -> float:
        lam, d = self.lambdas, self.shifts
        return float(np.sum(2.0 * lam * lam * (1.0 + 2.0 * d * d)) + self.sigma ** 2)

    def second_moment(self) -> float:
        return self.variance() + self.mean() ** 2

    def shifted(self, h: float) -> CanonicalForm:
        return CanonicalForm(self.terms, self.sigma, self.offset + h)

    def to_quadpoly(self) -> QuadPoly:
        """An equivalent polynomial in ``n_terms + 1`` variables (last one carries sigma)."""
        lam, d = self.lambdas, self.shifts
        n = lam.size + 1
        quad = np.zeros((n, n))
        quad[:-1, :-1] = np.diag(lam)
        lin = np.append(2.0 * lam * d, self.sigma)
        return QuadPoly(quad, lin, float(np.sum(lam * d * d)) + self.offset)


def symmetric_eigen(m, zero_threshold: float | None = None) -> Spectrum:
    """Eigen-decompose a real symmetric matrix by cyclic Jacobi rotations."""
    m = np.atleast_2d(np.array(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    scale = np.abs(m).max()
    if np.abs(m - m.T).max() > 1e-12 * max(scale, 1.0):
        raise InputError("matrix is not symmetric")
    work = np.ascontiguousarray(0.5 * (m + m.T))
    hs = float(np.sqrt(np.sum(work * work)))
    vals, vecs, sweeps = _backend.jacobi_eigh(work, JACOBI_TOL * hs, JACOBI_MAX_SWEEPS)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    if zero_threshold is None:
        zero_threshold = ZERO_REL * max(1.0, float(np.abs(vals).max()))
    return Spectrum(_frozen(vals), _frozen(vecs), float(zero_threshold), int(sweeps))


def mean(f: QuadPoly) -> float:
    """E f(Z) = tr B + beta."""
    return float(np.trace(f.quad) + f.const_term)


def second_moment(f: QuadPoly) -> float:
    """E f(Z)^2 = 2 |B|_HS^2 + (tr B + beta)^2 + |b|^2."""
    return float(2.0 * _hs_sq(f.quad) + mean(f) ** 2 + f.lin @ f.lin)


def variance(f: QuadPoly) -> float:
    return float(2.0 * _hs_sq(f.quad) + f.lin @ f.lin)


def l2_distance(f: QuadPoly, g: QuadPoly) -> float:
    """``||f(Z) - g(Z)||_2`` in closed form."""
    f._check_dim(g)
    return float(np.sqrt(second_moment(f - g)))


def gradient_l2_distance(f: QuadPoly, g: QuadPoly) -> float:
    """``||grad f(Z) - grad g(Z)||_2 = (4 |A - B|_HS^2 + |a - b|^2)^(1/2)``."""
    f._check_dim(g)
    d = f - g
    return float(np.sqrt(4.0 * _hs_sq(d.quad) + d.lin @ d.lin))


def structured_distance(f: QuadPoly, g: QuadPoly) -> float:
    """``|A - B|_HS + |tr A - tr B + alpha - beta| + |a - b|``.

    Twice this quantity dominates ``l2_distance(f, g)``.
    """
    f._check_dim(g)
    d = f - g
    return float(hs_norm(d.quad) + abs(mean(d)) + np.linalg.norm(d.lin))


def canonicalize(f: QuadPoly, spectrum: Spectrum | None = None) -> CanonicalForm:
    """Rotate to the eigenbasis of ``f.quad`` and complete the square."""
    spec = symmetric_eigen(f.quad) if spectrum is None else spectrum
    rotated = spec.basis.T @ f.lin
    keep = spec.nonzero
    lam = spec.eigenvalues[keep]
    delta = rotated[keep] / (2.0 * lam)
    sigma = float(np.linalg.norm(rotated[~keep]))
    offset = f.const_term - float(np.sum(lam * delta * delta))
    return CanonicalForm(tuple(zip(lam.tolist(), delta.tolist())), sigma, offset)


def nuclear_norm(m) -> float:
    """Sum of absolute eigenvalues of a symmetric matrix."""
    return float(np.sum(np.abs(symmetric_eigen(m).eigenvalues)))


def _hs_sq(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(np.sum(m * m))


def hs_norm(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(m * m)))


def psd_sqrt(sigma, rel_tol: float = 1e-10):
    """Symmetric square root of a PSD matrix, plus its sorted eigenvalues.

    Eigenvalues in ``[-rel_tol * |sigma|, 0)`` are clipped to zero; anything
    more negative is rejected.
    """
    spec = symmetric_eigen(sigma)
    vals = spec.eigenvalues
    norm = hs_norm(sigma)
    if np.any(vals < -rel_tol * max(norm, np.finfo(float).tiny)):
        raise InputError(f"matrix is not positive semidefinite (min eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    q = spec.basis
    root = (q * np.sqrt(vals)) @ q.T
    return 0.5 * (root + root.T), np.sort(vals)[::-1]
