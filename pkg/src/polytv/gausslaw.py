"""Laws of second-degree Gaussian polynomials (generalized chi-square).

The characteristic function of ``sum_j lam_j (Z_j + delta_j)^2 + sigma Z_0 + c``
is inverted numerically. The half-line ``t > 0`` is cut into geometrically
growing panels; on each panel the mean-centered characteristic function (or
its ratio with ``t``, for the CDF) is expanded in Legendre polynomials, and
the Fourier moments of Legendre polynomials are exact,

    int_{-1}^{1} P_n(s) exp(-i k s) ds = 2 (-i)^n j_n(k),

so the oscillation ``exp(-i t (x - mean))`` never has to be resolved by nodes.
Because the panel count only grows logarithmically with the truncation point,
truncation can be pushed until the tail of the integrand is negligible, even
for the slowly decaying one- and two-term laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import eval_legendre, roots_legendre, sici

from . import _backend
from .errors import InputError, NotApplicableError
from .quadpoly import CanonicalForm, QuadPoly

NODES_PER_PANEL = 20
FIRST_PANEL = 0.5          # first panel is [0, FIRST_PANEL / sd]
NEAR_RATIO = 1.5
FAR_RATIO = 2.0
MAX_PANELS = 600
CDF_TAIL_TOL = 1e-14
PDF_TAIL_TOL = 1e-12       # relative to 1 / sd
QUANTILE_MASS = 1e-8
TV_STOP = 1e-4
KOL_STOP = 1e-6

_GL_NODES, _GL_WEIGHTS = roots_legendre(NODES_PER_PANEL)
_ORDERS = np.arange(NODES_PER_PANEL)
# coefficient projector: values at nodes -> Legendre coefficients
_PROJECT = (eval_legendre(_ORDERS[:, None], _GL_NODES[None, :]) * _GL_WEIGHTS[None, :]
            * ((2 * _ORDERS + 1) / 2.0)[:, None]).T
_MOMENT = 2.0 * (-1j) ** _ORDERS


@dataclass(frozen=True)
class GridDensity:
    xs: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    mass_captured: float


@dataclass(frozen=True)
class TVEstimate:
    lower: float
    value: float | None
    mesh: float
    converged: bool

    def best(self) -> float:
        return self.lower if self.value is None else self.value


def _log_cf_terms(lam, delta, t):
    """Per-term log CF contributions, shape ``(t.size, terms)``."""
    u = 1.0 - 2j * lam[None, :] * t[:, None]
    return -0.5 * np.log(u) + 1j * lam * delta * delta * t[:, None] / u


def char_fn(cf: CanonicalForm, t):
    """Characteristic function ``E exp(i t X)`` of the canonical law."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    lam, delta = cf.lambdas, cf.shifts
    log_phi = 1j * t_arr * cf.offset - 0.5 * cf.sigma ** 2 * t_arr ** 2
    if lam.size:
        log_phi = log_phi + _log_cf_terms(lam, delta, t_arr).sum(axis=1)
    out = np.exp(log_phi)
    return out[0] if np.ndim(t) == 0 else out


def _log_centered_cf(cf: CanonicalForm, t):
    """``log(phi(t) exp(-i t mean))`` written without the cancelling linear phase."""
    lam, delta = cf.lambdas, cf.shifts
    out = -0.5 * cf.sigma ** 2 * t ** 2 + 0j
    if lam.size:
        u = 1.0 - 2j * lam[None, :] * t[:, None]
        lt = lam[None, :] * t[:, None]
        out = out + (-0.5 * np.log(u) - 1j * lt
                     - 2.0 * (lt * delta[None, :]) ** 2 / u).sum(axis=1)
    return out


def _log_cf_without_offset(cf: CanonicalForm, t):
    """``log(phi(t) exp(-i t offset))``, accurate for large ``t``."""
    out = -0.5 * cf.sigma ** 2 * t ** 2 + 0j
    if cf.n_terms:
        out = out + _log_cf_terms(cf.lambdas, cf.shifts, t).sum(axis=1)
    return out


def _phase_rate(cf: CanonicalForm, t):
    """``d/dt arg phi(t) - offset``: the local oscillation frequency of the CF."""
    lam, delta = cf.lambdas, cf.shifts
    if not lam.size:
        return np.zeros_like(t)
    q = 1.0 + 4.0 * (lam[None, :] * t[:, None]) ** 2
    return (lam / q + lam * delta ** 2 * (2.0 - q) / q ** 2).sum(axis=1)


def _cexpm1(z):
    x, y = z.real, z.imag
    return (np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2) + 1j * np.exp(x) * np.sin(y)


class _Panels:
    """Panel layout and Legendre data for one integrand ``kind`` in {"cdf", "pdf"}.

    On panel ``p`` the integrand is ``exp(-i t (x - shift_p)) * amp_p(t)`` where
    ``shift_p`` is the CF's local phase slope at the panel center, which keeps
    ``amp_p`` slowly varying even when the panel is wide.
    """

    def __init__(self, cf: CanonicalForm, kind: str):
        self.kind = kind
        sd = np.sqrt(cf.variance())
        lam_abs = np.abs(cf.lambdas)
        m = lam_abs.size
        self.mean = cf.mean()
        self.first = FIRST_PANEL / sd
        far = 25.0 / lam_abs.min() if m else np.inf
        edges = [0.0, self.first]
        while len(edges) <= MAX_PANELS:
            t = edges[-1]
            if self._tail(cf, lam_abs, t, sd) < 1.0:
                break
            edges.append(t * (FAR_RATIO if t > far else NEAR_RATIO))
        self.edges = np.array(edges)
        lo, hi = self.edges[:-1], self.edges[1:]
        self.centers = np.ascontiguousarray(0.5 * (lo + hi))
        self.halfwidths = np.ascontiguousarray(0.5 * (hi - lo))
        rate = _phase_rate(cf, self.centers)
        rate[0] = self.mean - cf.offset
        self.shifts = np.ascontiguousarray(cf.offset + rate)
        t_nodes = self.centers[:, None] + self.halfwidths[:, None] * _GL_NODES[None, :]
        near = self.centers * (lam_abs.max() if m else 0.0) < 1.0
        near[0] = True
        log_amp = np.empty(t_nodes.shape, dtype=complex)
        tn = t_nodes[near].ravel()
        log_amp[near] = (_log_centered_cf(cf, tn)
                         + 1j * tn * np.repeat(self.mean - self.shifts[near], NODES_PER_PANEL)
                         ).reshape(-1, NODES_PER_PANEL)
        if (~near).any():
            tf = t_nodes[~near].ravel()
            log_amp[~near] = (_log_cf_without_offset(cf, tf)
                              - 1j * tf * np.repeat(rate[~near], NODES_PER_PANEL)
                              ).reshape(-1, NODES_PER_PANEL)
        if kind == "pdf":
            amp = np.exp(log_amp)
        else:
            amp = np.exp(log_amp) / t_nodes
            amp[0] = _cexpm1(log_amp[0]) / t_nodes[0]
        coef = (amp @ _PROJECT) * _MOMENT[None, :]
        self.d_re = np.ascontiguousarray(coef.real)
        self.d_im = np.ascontiguousarray(coef.imag)

    def _tail(self, cf, lam_abs, t, sd):
        """Bound on the integrand tail beyond ``t``, divided by its tolerance."""
        if t <= 0:
            return np.inf
        env = np.exp(_log_centered_cf(cf, np.array([t]))[0].real)
        m = lam_abs.size
        a = 4.0 * lam_abs ** 2 * t * t
        k = float(np.prod(((1.0 + a) / a) ** 0.25)) if m else 1.0
        s2 = cf.sigma ** 2
        if self.kind == "cdf":
            cands = [2.0 / m if m else np.inf, 1.0 / (s2 * t * t) if s2 > 0 else np.inf]
            tol = CDF_TAIL_TOL
        else:
            cands = [2.0 * t / (m - 2) if m > 2 else np.inf, 1.0 / (s2 * t) if s2 > 0 else np.inf]
            tol = PDF_TAIL_TOL / sd
        return env * k * min(cands) / tol

    def transform(self, x):
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=float)
        re, im = _backend.filon_legendre_sum(x, self.shifts, self.centers, self.halfwidths,
                                             self.d_re, self.d_im)
        return re + 1j * im


class Law:
    """Numerical distribution functions of a canonical form.

    Panels are built lazily and reused across evaluations.
    """

    def __init__(self, cf: CanonicalForm):
        self.cf = cf
        self.mean = cf.mean()
        self.sd = float(np.sqrt(cf.variance()))
        self._cdf_panels = None
        self._pdf_panels = None

    @property
    def degenerate(self) -> bool:
        return self.cf.is_degenerate

    @property
    def integrable(self) -> bool:
        return self.cf.has_integrable_cf

    def singular_points(self):
        """Points where the density may be unbounded or non-smooth."""
        if self.degenerate or self.integrable:
            return []
        return [self.cf.offset]

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            return (x >= self.cf.offset).astype(float)
        if self._cdf_panels is None:
            self._cdf_panels = _Panels(self.cf, "cdf")
        p = self._cdf_panels
        flat = np.atleast_1d(x).ravel()
        s = p.transform(flat)
        vals = 0.5 + sici((flat - self.mean) * p.first)[0] / np.pi - s.imag / np.pi
        return np.clip(vals, 0.0, 1.0).reshape(x.shape)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if not self.integrable:
            raise NotApplicableError(
                "non-integrable CF (fewer than three quadratic terms and no Gaussian part); "
                "use CDF-based estimation")
        if self._pdf_panels is None:
            self._pdf_panels = _Panels(self.cf, "pdf")
        vals = self._pdf_panels.transform(np.atleast_1d(x).ravel()).real / np.pi
        return np.clip(vals, 0.0, None).reshape(x.shape)

    def quantile(self, probs, iterations: int = 60):
        """Bisection on the CDF, vectorized over ``probs``."""
        probs = np.atleast_1d(np.asarray(probs, dtype=float))
        if self.degenerate:
            return np.full(probs.shape, self.cf.offset)
        lo = np.full(probs.shape, self.mean - 8.0 * self.sd)
        hi = np.full(probs.shape, self.mean + 8.0 * self.sd)
        width = 8.0 * self.sd
        for _ in range(200):
            bad_lo = self.cdf(lo) > probs
            bad_hi = self.cdf(hi) < probs
            if not (bad_lo.any() or bad_hi.any()):
                break
            width *= 2.0
            lo = np.where(bad_lo, self.mean - width, lo)
            hi = np.where(bad_hi, self.mean + width, hi)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < probs
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def support_range(self, mass: float = QUANTILE_MASS):
        lo, hi = self.quantile([mass, 1.0 - mass])
        return float(lo), float(hi)


def cdf(cf: CanonicalForm, x):
    """Distribution function by Gil-Pelaez inversion (exact step for a point mass)."""
    return Law(cf).cdf(x)


def density(cf: CanonicalForm, x):
    """Density by Fourier inversion; needs an integrable characteristic function."""
    return Law(cf).pdf(x)


def density_on_grid(cf: CanonicalForm, grid) -> GridDensity:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise InputError("grid must be a strictly increasing 1-d array with >= 2 points")
    law = Law(cf)
    pdf = law.pdf(grid)
    ends = law.cdf(grid[[0, -1]])
    steps = 0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid)
    cum = np.concatenate([[ends[0]], ends[0] + np.cumsum(steps)])
    cum = np.clip(np.maximum.accumulate(cum), 0.0, 1.0)
    return GridDensity(grid, pdf, cum, float(ends[1] - ends[0]))


def _abs_trapezoid(d, x):
    """Exact integral of |piecewise-linear interpolant of d| over x."""
    h = np.diff(x)
    d0, d1 = d[:-1], d[1:]
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    denom = np.where(a0 + a1 > 0, a0 + a1, 1.0)
    cross = h * (d0 * d0 + d1 * d1) / (2.0 * denom)
    return float(np.sum(np.where(same, 0.5 * h * (a0 + a1), cross)))


def _partition_sum(ff, fg):
    """``1/2 sum |dF_f - dF_g|`` over cells, including the two unbounded tails."""
    df = np.diff(np.concatenate([[0.0], ff, [1.0]]))
    dg = np.diff(np.concatenate([[0.0], fg, [1.0]]))
    return 0.5 * float(np.sum(np.abs(df - dg)))


def _dyadic_cluster(c, scale, lo, hi, depth=40):
    r = scale * 2.0 ** -np.arange(depth)
    pts = np.concatenate([c - r, [c], c + r])
    return pts[(pts > lo) & (pts < hi)]


def _refine_crossings(x, ff, fg, law_f, law_g, max_rounds=60, noise=1e-14, rel_width=1e-10):
    """Bisect cells adjacent to a sign change of the cell-mass difference.

    A sign change marks a crossing of the two densities; the partition sum only
    loses mass in the cells containing crossings, and the loss shrinks with the
    square of their width, so those cells are split until they are narrower
    than ``rel_width`` times the grid span.
    """
    min_width = rel_width * max(x[-1] - x[0], np.finfo(float).tiny)
    for _ in range(max_rounds):
        d = np.diff(ff) - np.diff(fg)
        sgn = np.where(np.abs(d) > noise, np.sign(d), 0.0)
        nz = np.flatnonzero(sgn)
        if nz.size < 2:
            break
        change = sgn[nz[:-1]] != sgn[nz[1:]]
        cells = np.unique(np.concatenate([nz[:-1][change], nz[1:][change]]))
        cells = cells[np.diff(x)[cells] > min_width]
        if cells.size == 0:
            break
        mids = 0.5 * (x[cells] + x[cells + 1])
        x = np.concatenate([x, mids])
        ff = np.concatenate([ff, law_f.cdf(mids)])
        fg = np.concatenate([fg, law_g.cdf(mids)])
        order = np.argsort(x, kind="stable")
        x, ff, fg = x[order], ff[order], fg[order]
    return x, ff, fg


def _common_range(law_f: Law, law_g: Law):
    lf, hf = law_f.support_range()
    lg, hg = law_g.support_range()
    lo, hi = min(lf, lg), max(hf, hg)
    if hi <= lo:
        pad = max(law_f.sd, law_g.sd, 1.0)
        lo, hi = lo - pad, hi + pad
    return lo, hi


def _atom_distance(law_f: Law, law_g: Law) -> float:
    if law_f.degenerate and law_g.degenerate:
        return 0.0 if law_f.cf.offset == law_g.cf.offset else 1.0
    return 1.0


def tv_distance(cf_f: CanonicalForm, cf_g: CanonicalForm, initial_cells: int = 512,
                max_cells: int = 2 ** 15) -> TVEstimate:
    """Total variation distance between two canonical laws.

    ``lower`` is a partition sum of CDF increments (a lower bound on the
    distance up to CDF error). ``value`` is half the L1 distance of the
    densities on a grid halved until successive estimates differ by less than
    ``TV_STOP``; it is ``None`` when either density is not available.
    """
    law_f, law_g = Law(cf_f), Law(cf_g)
    if law_f.degenerate or law_g.degenerate:
        d = _atom_distance(law_f, law_g)
        return TVEstimate(d, d, 0.0, True)
    lo, hi = _common_range(law_f, law_g)
    value = None
    converged = False
    if law_f.integrable and law_g.integrable:
        cells = initial_cells
        x = np.linspace(lo, hi, cells + 1)
        pf, pg = law_f.pdf(x), law_g.pdf(x)
        prev = _abs_trapezoid(pf - pg, x)
        while cells < max_cells:
            mids = 0.5 * (x[1:] + x[:-1])
            xn = np.empty(2 * cells + 1)
            xn[0::2], xn[1::2] = x, mids
            pfn = np.empty_like(xn)
            pgn = np.empty_like(xn)
            pfn[0::2], pfn[1::2] = pf, law_f.pdf(mids)
            pgn[0::2], pgn[1::2] = pg, law_g.pdf(mids)
            x, pf, pg, cells = xn, pfn, pgn, 2 * cells
            cur = _abs_trapezoid(pf - pg, x)
            if abs(cur - prev) < TV_STOP:
                converged = True
                prev = cur
                break
            prev = cur
        ff, fg = law_f.cdf(x), law_g.cdf(x)
        tails = 0.5 * (abs(ff[0] - fg[0]) + abs(fg[-1] - ff[-1]))
        value = 0.5 * prev + tails
        mesh = float(x[1] - x[0])
    else:
        x = np.linspace(lo, hi, 4 * initial_cells + 1)
        mesh = float(x[1] - x[0])
        extra = [_dyadic_cluster(c, max(law.sd, mesh), lo, hi)
                 for law in (law_f, law_g) for c in law.singular_points()]
        if extra:
            x = np.unique(np.concatenate([x] + extra))
        ff, fg = law_f.cdf(x), law_g.cdf(x)
    x, ff, fg = _refine_crossings(x, ff, fg, law_f, law_g)
    lower = min(_partition_sum(ff, fg), 1.0)
    if value is not None:
        value = min(max(value, lower), 1.0)
    return TVEstimate(float(lower), None if value is None else float(value), mesh, converged)


def kolmogorov_distance(cf_f: CanonicalForm, cf_g: CanonicalForm, points: int = 2048) -> float:
    """``sup_x |F_f(x) - F_g(x)|`` by grid search refined around the maximizer."""
    law_f, law_g = Law(cf_f), Law(cf_g)
    if law_f.degenerate and law_g.degenerate:
        return _atom_distance(law_f, law_g)
    if law_f.degenerate or law_g.degenerate:
        atom, cont = (law_f, law_g) if law_f.degenerate else (law_g, law_f)
        fc = float(cont.cdf(atom.cf.offset))
        return max(fc, 1.0 - fc)
    lo, hi = _common_range(law_f, law_g)
    x = np.linspace(lo, hi, points)
    extra = [_dyadic_cluster(c, max(law.sd, x[1] - x[0]), lo, hi)
             for law in (law_f, law_g) for c in law.singular_points()]
    if extra:
        x = np.unique(np.concatenate([x] + extra))
    diff = np.abs(law_f.cdf(x) - law_g.cdf(x))
    best = float(diff.max())
    i = int(diff.argmax())
    a, b = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    for _ in range(60):
        xs = np.linspace(a, b, 33)
        dv = np.abs(law_f.cdf(xs) - law_g.cdf(xs))
        j = int(dv.argmax())
        new = max(best, float(dv[j]))
        a, b = xs[max(j - 1, 0)], xs[min(j + 1, xs.size - 1)]
        gain, best = new - best, new
        if gain < KOL_STOP and b - a < 1e-9 * max(law_f.sd, law_g.sd):
            break
    return best


def standard_normal_matrix(count: int, dim: int, seed: int) -> np.ndarray:
    """``count x dim`` standard normals from the seeded SplitMix64/polar stream."""
    if count < 0 or dim < 1:
        raise InputError("count must be >= 0 and dim >= 1")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return _backend.standard_normals(seed, count * dim).reshape(count, dim)


def sample(f: QuadPoly, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. draws of ``f(Z)``; deterministic in ``seed``."""
    if count == 0:
        return np.empty(0)
    return f(standard_normal_matrix(count, f.dim, seed))


def _weighted_sup(values, grads, box=12.0, step=0.1, starts=6):
    """Maximize ``sum_i G_i(x)^2 exp(-|x|^2 / 2)`` over R^2; return its square root.

    ``values(x)`` returns the stacked ``G_i`` at points ``x`` (..., 2) and
    ``grads(x)`` their gradients (k, 2) at a single point.
    """
    axis = np.arange(-box, box + step / 2, step)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    obj = np.sum(values(pts) ** 2, axis=0) * np.exp(-0.5 * np.sum(pts * pts, axis=1))
    top = pts[np.argsort(obj)[::-1][:starts]]
    best = float(obj.max())

    def neg(x):
        v = values(x[None, :])[:, 0]
        w = np.exp(-0.5 * x @ x)
        val = float(v @ v) * w
        grad = (2.0 * grads(x).T @ v) * w - val * x
        return -val, -grad

    for x0 in top:
        res = minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-14, "maxiter": 500})
        best = max(best, -float(res.fun))
    return float(np.sqrt(best))


def weighted_sup_norm(g: QuadPoly) -> float:
    """``sup_x |G(x)| exp(-|x|^2 / 4)`` for a polynomial on R^2."""
    if g.dim != 2:
        raise InputError("weighted_sup_norm is defined for polynomials on R^2")
    return _weighted_sup(lambda x: np.atleast_1d(g(x))[None, :],
                         lambda x: g.gradient(x)[None, :])


def weighted_sup_norm_pair(l1: QuadPoly, l2: QuadPoly) -> float:
    """``sup_x sqrt(l1(x)^2 + l2(x)^2) exp(-|x|^2 / 4)`` on R^2."""
    if l1.dim != 2 or l2.dim != 2:
        raise InputError("weighted_sup_norm_pair is defined on R^2")
    return _weighted_sup(lambda x: np.stack([np.atleast_1d(l1(x)), np.atleast_1d(l2(x))]),
                         lambda x: np.stack([l1.gradient(x), l2.gradient(x)]))
