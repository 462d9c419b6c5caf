"""Seeded random instances for the verification campaigns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..quadpoly import QuadPoly, l2_distance

SPECTRUM_LAWS = ("uniform", "loguniform")
MIN_MAGNITUDE = 1e-3       # keeps counted eigenvalues well clear of the zero threshold


@dataclass(frozen=True)
class InstanceSpec:
    dim: int
    rank: int
    spectrum_law: str = "uniform"
    perturbation_eps: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"dim must be positive, got {self.dim}")
        if not 0 <= self.rank <= self.dim:
            raise InputError(f"rank must lie in [0, dim={self.dim}], got {self.rank}")
        if self.spectrum_law not in SPECTRUM_LAWS:
            raise InputError(f"unknown spectrum law {self.spectrum_law!r}; "
                             f"expected one of {', '.join(SPECTRUM_LAWS)}")
        if not (np.isfinite(self.perturbation_eps) and self.perturbation_eps >= 0):
            raise InputError("perturbation_eps must be a nonnegative real")


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def random_spectrum(rng: np.random.Generator, rank: int, law: str) -> np.ndarray:
    """``rank`` nonzero eigenvalues with magnitudes in ``[MIN_MAGNITUDE, 1]``."""
    if law == "uniform":
        mags = rng.uniform(MIN_MAGNITUDE, 1.0, rank)
    else:
        mags = 10.0 ** rng.uniform(np.log10(MIN_MAGNITUDE), 0.0, rank)
    signs = np.where(rng.random(rank) < 0.5, -1.0, 1.0)
    return signs * mags


def generate_instance(spec: InstanceSpec) -> tuple[QuadPoly, QuadPoly]:
    """Random pair ``(f, g)`` with ``l2_distance(f, g) == spec.perturbation_eps``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.dim
    q = random_orthogonal(rng, n)
    vals = np.zeros(n)
    vals[:spec.rank] = random_spectrum(rng, spec.rank, spec.spectrum_law)
    g = QuadPoly((q * vals) @ q.T, rng.standard_normal(n), float(rng.standard_normal()))
    m = rng.standard_normal((n, n))
    d = QuadPoly(0.5 * (m + m.T), rng.standard_normal(n), float(rng.standard_normal()))
    if spec.perturbation_eps == 0:
        return g, g
    scale = spec.perturbation_eps / l2_distance(d, QuadPoly.zero(n))
    return g + scale * d, g
