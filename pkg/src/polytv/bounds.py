"""Explicit total-variation and Kolmogorov bounds between Gaussian polynomials.

Every TV bound here has the shape ``constant / sqrt(|s1 * s2|) * distance`` where
``(s1, s2)`` are two same-sign eigenvalues of the quadratic part of one of the
two polynomials. Both orientations are evaluated (TV is symmetric) and the
smaller applicable bound is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .errors import InputError, NotApplicableError
from .quadpoly import (QuadPoly, Spectrum, hs_norm, l2_distance, nuclear_norm,
                       psd_sqrt, structured_distance, symmetric_eigen)

TV_CONSTANT = 80.0
STRUCTURED_CONSTANT = 160.0
NOT_ENOUGH_EIGENVALUES = "fewer than required same-sign eigenvalues"


@dataclass(frozen=True)
class EigenPair:
    s1: float
    s2: float
    idx1: int
    idx2: int

    @property
    def product(self) -> float:
        return abs(self.s1 * self.s2)


@dataclass(frozen=True)
class BoundReport:
    bound: float | None
    constant: float
    pair: EigenPair | None
    l2: float
    applicable: bool
    reason: str = ""
    orientation: str = ""

    def to_dict(self) -> dict:
        pair = self.pair
        return {
            "bound": self.bound,
            "constant": self.constant,
            "s1": None if pair is None else pair.s1,
            "s2": None if pair is None else pair.s2,
            "l2": self.l2,
            "applicable": self.applicable,
            "reason": self.reason,
            "orientation": self.orientation,
        }


@dataclass(frozen=True)
class GnsuTerms:
    lambda1_x: float
    lambda2_x: float
    lambda1_y: float
    lambda2_y: float
    nuclear_diff: float
    shift_sq: float


def select_same_sign_pair(spec: Spectrum) -> EigenPair | None:
    """Same-sign eigenvalue pair with the largest ``|s1 * s2|``, if any.

    Eigenvalues are sorted by magnitude, so the best pair is the top two
    positive or the top two negative ones.
    """
    vals = spec.eigenvalues
    nz = spec.nonzero
    best = None
    for sign in (1.0, -1.0):
        idx = [i for i in range(vals.size) if nz[i] and np.sign(vals[i]) == sign]
        if len(idx) >= 2:
            i, j = idx[0], idx[1]
            cand = EigenPair(float(vals[i]), float(vals[j]), i, j)
            if best is None or cand.product > best.product:
                best = cand
    return best


def brute_force_pair(spec: Spectrum) -> EigenPair | None:
    """Exhaustive version of :func:`select_same_sign_pair` (reference)."""
    vals = spec.eigenvalues
    nz = spec.nonzero
    best = None
    for i, j in combinations(range(vals.size), 2):
        if nz[i] and nz[j] and vals[i] * vals[j] > 0:
            if best is None or abs(vals[i] * vals[j]) > best.product:
                best = EigenPair(float(vals[i]), float(vals[j]), i, j)
    return best


def _oriented(g: QuadPoly, distance: float, constant: float, orientation: str) -> BoundReport:
    pair = select_same_sign_pair(symmetric_eigen(g.quad))
    if pair is None:
        return BoundReport(None, constant, None, distance, False, NOT_ENOUGH_EIGENVALUES,
                           orientation)
    bound = constant / np.sqrt(pair.product) * distance
    return BoundReport(float(bound), constant, pair, distance, True, "", orientation)


def _best(reports, clamp: bool) -> BoundReport:
    ok = [r for r in reports if r.applicable]
    if not ok:
        return reports[0]
    best = min(ok, key=lambda r: r.bound)
    if clamp:
        best = replace(best, bound=min(best.bound, 1.0))
    return best


def tv_bound(f: QuadPoly, g: QuadPoly, clamp: bool = False) -> BoundReport:
    """``80 / sqrt(|s1 s2|) * ||f(Z) - g(Z)||_2`` for degree-2 ``f`` and ``g``."""
    f._check_dim(g)
    dist = l2_distance(f, g)
    return _best([_oriented(g, dist, TV_CONSTANT, "g"),
                  _oriented(f, dist, TV_CONSTANT, "f")], clamp)


def tv_bound_structured(f: QuadPoly, g: QuadPoly, clamp: bool = False) -> BoundReport:
    """``160 / sqrt(|s1 s2|) * (|A-B|_HS + |trA - trB + alpha - beta| + |a-b|)``."""
    f._check_dim(g)
    dist = structured_distance(f, g)
    return _best([_oriented(g, dist, STRUCTURED_CONSTANT, "g"),
                  _oriented(f, dist, STRUCTURED_CONSTANT, "f")], clamp)


def norm_polynomial(sigma, shift) -> QuadPoly:
    """``|X - a|^2`` as a polynomial in Z, with ``X = sigma^(1/2) Z``."""
    root, _ = psd_sqrt(sigma)
    shift = np.asarray(shift, dtype=float)
    return QuadPoly(np.asarray(sigma, dtype=float), -2.0 * root @ shift, float(shift @ shift))


def _check_cov(sigma, shift, name):
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InputError(f"{name}: covariance must be square, got shape {sigma.shape}")
    if shift.shape != (sigma.shape[0],):
        raise InputError(f"{name}: shift must have length {sigma.shape[0]}")
    return sigma, shift


def norm_distance_terms(sigma_x, a, sigma_y, b) -> dict:
    sigma_x, a = _check_cov(sigma_x, a, "X")
    sigma_y, b = _check_cov(sigma_y, b, "Y")
    if sigma_x.shape != sigma_y.shape:
        raise InputError("covariances have different dimensions")
    root_x, _ = psd_sqrt(sigma_x)
    root_y, _ = psd_sqrt(sigma_y)
    return {
        "hs": hs_norm(sigma_x - sigma_y),
        "trace": abs(float(np.trace(sigma_x) - np.trace(sigma_y))),
        "shift_sq": abs(float(a @ a - b @ b)),
        "root_shift": float(np.linalg.norm(root_x @ a - root_y @ b)),
    }


def norm_tv_bound(sigma_x, a, sigma_y, b, clamp: bool = False) -> BoundReport:
    """Bound on ``d_TV(|X - a|, |Y - b|)`` for centered normal X, Y."""
    terms = norm_distance_terms(sigma_x, a, sigma_y, b)
    dist = terms["hs"] + terms["trace"] + terms["shift_sq"] + terms["root_shift"]
    reports = []
    for name, sigma in (("x", sigma_x), ("y", sigma_y)):
        _, vals = psd_sqrt(sigma)
        thr = 1e-12 * max(1.0, float(vals[0]))
        if vals.size >= 2 and vals[1] > thr:
            pair = EigenPair(float(vals[0]), float(vals[1]), 0, 1)
            bound = STRUCTURED_CONSTANT / np.sqrt(pair.product) * dist
            reports.append(BoundReport(float(bound), STRUCTURED_CONSTANT, pair, dist, True,
                                       "", name))
        else:
            reports.append(BoundReport(None, STRUCTURED_CONSTANT, None, dist, False,
                                       "covariance rank below 2", name))
    return _best(reports, clamp)


def gnsu_terms(sigma_x, sigma_y, a) -> GnsuTerms:
    sigma_x, a = _check_cov(sigma_x, a, "X")
    sigma_y, _ = _check_cov(sigma_y, a, "Y")
    _, vx = psd_sqrt(sigma_x)
    _, vy = psd_sqrt(sigma_y)

    def tail(vals, k):
        return float(np.sqrt(np.sum(vals[k - 1:] ** 2)))

    return GnsuTerms(tail(vx, 1), tail(vx, 2), tail(vy, 1), tail(vy, 2),
                     nuclear_norm(sigma_x - sigma_y), float(a @ a))


def gnsu_kolmogorov_bound(sigma_x, sigma_y, a, c: float = 1.0) -> float:
    """Kolmogorov bound with a caller-supplied numerical constant ``c``.

    ``c * (1/sqrt(L1x L2x) + 1/sqrt(L1y L2y)) * (|Sx - Sy|_(1) + |a|^2)`` where
    ``Lk^2`` is the sum of squared covariance eigenvalues from the k-th on.
    A side with ``L2 = 0`` contributes an infinite factor.
    """
    if not c > 0:
        raise InputError("the constant must be positive")
    t = gnsu_terms(sigma_x, sigma_y, a)
    if t.lambda2_x <= 0 and t.lambda2_y <= 0:
        raise NotApplicableError("both covariances have rank below 2")
    rhs = t.nuclear_diff + t.shift_sq
    if rhs == 0.0:
        return 0.0

    def inv(l1, l2):
        return np.inf if l2 <= 0 else 1.0 / np.sqrt(l1 * l2)

    return float(c * (inv(t.lambda1_x, t.lambda2_x) + inv(t.lambda1_y, t.lambda2_y)) * rhs)
