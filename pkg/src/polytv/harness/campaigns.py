"""Verification campaigns: bound certification, optimality demo, norm comparison.

Each campaign returns plain row dicts keyed by its column list; rendering is
left to :mod:`polytv.harness.report`.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import gausslaw
from ..bounds import (NOT_ENOUGH_EIGENVALUES, TV_CONSTANT, gnsu_kolmogorov_bound,
                      norm_distance_terms, norm_polynomial, norm_tv_bound, tv_bound,
                      tv_bound_structured)
from ..errors import InputError, NotApplicableError
from ..quadpoly import (QuadPoly, canonicalize, mean, nuclear_norm, psd_sqrt, second_moment,
                        variance)
from .instances import InstanceSpec, generate_instance, random_orthogonal

DEFAULT_TOL = 1e-6
KOL_TV_SLACK = 1e-9

VERIFY_COLUMNS = ["seed", "dim", "rank", "eps", "l2", "s1", "s2", "bound80", "bound160",
                  "tv_lower", "tv_value", "margin", "pass"]
OPTIMALITY_COLUMNS = ["case", "h", "tv_lower", "tv_value", "ratio", "bound80"]
NORM_COLUMNS = ["index", "dim", "hs", "trace", "shift_sq_diff", "root_shift", "nuclear_diff",
                "a_sq", "root_a", "norm_bound", "orientation", "gnsu_shift", "gnsu_c",
                "gnsu_bound", "tv_lower", "tv_value", "kolmogorov", "pass"]
MOMENT_COLUMNS = ["mean", "second_moment", "variance", "samples", "mc_mean", "mc_second_moment",
                  "se_mean", "se_second_moment", "pass"]


def _maybe(x):
    return None if x is None else float(x)


# -- TV bound certification ---------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    """Campaign template; ranges are inclusive and sampled per instance."""

    count: int = 100
    rank: tuple = (3, 6)
    dim: tuple = (3, 8)
    eps: tuple = (1e-3, 1e-1)
    spectrum_law: str = "uniform"
    seed: int = 0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.count < 0:
            raise InputError("count must be nonnegative")
        r_lo, r_hi = self.rank
        d_lo, d_hi = self.dim
        e_lo, e_hi = self.eps
        if r_lo > r_hi or d_lo > d_hi or e_lo > e_hi:
            raise InputError("ranges must be given as low:high with low <= high")
        if r_lo < 3:
            raise NotApplicableError(f"rank {r_lo} < 3: {NOT_ENOUGH_EIGENVALUES} is possible")
        if r_hi > d_hi:
            raise InputError(f"rank up to {r_hi} needs dim up to at least {r_hi}")
        if e_lo < 0:
            raise InputError("eps must be nonnegative")


def instance_specs(config: VerifyConfig) -> list[InstanceSpec]:
    """Deterministic per-instance specs; instance ``i`` depends only on (seed, i)."""
    specs = []
    for i in range(config.count):
        ss = np.random.SeedSequence([config.seed & 0xFFFFFFFFFFFFFFFF, i])
        rng = np.random.default_rng(ss)
        rank = int(rng.integers(config.rank[0], config.rank[1] + 1))
        dim = int(rng.integers(max(rank, config.dim[0]), config.dim[1] + 1))
        e_lo, e_hi = config.eps
        if e_lo > 0 and e_hi > e_lo:
            eps = float(10.0 ** rng.uniform(math.log10(e_lo), math.log10(e_hi)))
        else:
            eps = float(e_lo)
        seed = int(ss.generate_state(1, np.uint64)[0])
        specs.append(InstanceSpec(dim, rank, config.spectrum_law, eps, seed))
    return specs


def verify_instance(spec: InstanceSpec, tol: float = DEFAULT_TOL) -> dict:
    f, g = generate_instance(spec)
    plain = tv_bound(f, g)
    structured = tv_bound_structured(f, g)
    if not plain.applicable:
        raise NotApplicableError(plain.reason)
    est = gausslaw.tv_distance(canonicalize(f), canonicalize(g))
    ok = est.lower <= plain.bound + tol and est.lower <= structured.bound + tol
    return {
        "seed": spec.seed, "dim": spec.dim, "rank": spec.rank, "eps": spec.perturbation_eps,
        "l2": plain.l2, "s1": plain.pair.s1, "s2": plain.pair.s2,
        "bound80": plain.bound, "bound160": structured.bound,
        "tv_lower": est.lower, "tv_value": _maybe(est.value),
        "margin": plain.bound - est.best(), "pass": bool(ok),
    }


def _verify_star(args):
    return verify_instance(*args)


def run_verification(config: VerifyConfig, workers: int = 1) -> list[dict]:
    """Certify ``tv_lower <= bound`` on random instances; rows in instance order."""
    jobs = [(s, config.tol) for s in instance_specs(config)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_verify_star, jobs))
    return [_verify_star(j) for j in jobs]


# -- optimality demonstration -------------------------------------------------

@dataclass(frozen=True)
class OptimalityResult:
    rows: list
    ratios: list
    contrast_ratios: list

    @property
    def increasing(self) -> bool | None:
        """Strict increase of the ratio sequence (None for a single h)."""
        if len(self.ratios) < 2:
            return None
        return all(b > a for a, b in zip(self.ratios, self.ratios[1:]))

    @property
    def growth(self) -> float:
        return self.ratios[-1] / self.ratios[0] if self.ratios[0] > 0 else math.inf

    @property
    def contrast_ok(self) -> bool:
        return all(r <= TV_CONSTANT for r in self.contrast_ratios)

    @property
    def passed(self) -> bool:
        return self.increasing is not False and self.contrast_ok


def run_optimality_demo(hs=(1e-1, 1e-2, 1e-3)) -> OptimalityResult:
    """``tv_lower(g + h, g) / h`` for ``g = z1^2 - z2^2`` and for ``z1^2 + z2^2 + z3^2``."""
    hs = [float(h) for h in hs]
    if not hs or any(not h > 0 for h in hs):
        raise InputError("h values must be positive")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise InputError("h values must be strictly decreasing")
    cases = [("z1^2-z2^2", QuadPoly.from_quad(np.diag([1.0, -1.0]))),
             ("z1^2+z2^2+z3^2", QuadPoly.from_quad(np.eye(3)))]
    rows, ratios, contrast = [], [], []
    for name, g in cases:
        cg = canonicalize(g)
        for h in hs:
            f = g + h
            est = gausslaw.tv_distance(canonicalize(f), cg)
            bound = tv_bound(f, g)
            ratio = est.lower / h
            (ratios if name == "z1^2-z2^2" else contrast).append(ratio)
            rows.append({"case": name, "h": h, "tv_lower": est.lower,
                         "tv_value": _maybe(est.value), "ratio": ratio,
                         "bound80": bound.bound})
    return OptimalityResult(rows, ratios, contrast)


# -- norm bound vs GNSU ----------------------------------------------------------

def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _matrix(value, n=None, where=""):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        side = math.isqrt(arr.size)
        if side * side != arr.size:
            raise InputError(f"{where}: flat matrix of length {arr.size} is not square")
        arr = arr.reshape(side, side)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"{where}: matrix must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputError(f"{where}: expected a {n} x {n} matrix")
    return arr


def parse_covariance_pairs(text: str) -> list[dict]:
    """Parse a JSON array of ``{sigma_x, sigma_y, a, b}`` records.

    Matrices are nested lists of rows (or a flat row-major list). Errors name
    the line the offending record starts on.
    """
    decoder = json.JSONDecoder()
    pos = len(text) - len(text.lstrip())
    if not text[pos:pos + 1] == "[":
        raise InputError(f"line {_line_of(text, pos)}: expected a JSON array of records")
    pos += 1
    out = []
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text):
            raise InputError(f"line {_line_of(text, pos)}: unterminated array")
        if text[pos] == "]":
            break
        line = _line_of(text, pos)
        try:
            rec, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {exc.lineno}: {exc.msg}") from None
        where = f"line {line}"
        if not isinstance(rec, dict):
            raise InputError(f"{where}: each record must be an object")
        missing = [k for k in ("sigma_x", "sigma_y", "a", "b") if k not in rec]
        if missing:
            raise InputError(f"{where}: missing field(s) {', '.join(missing)}")
        try:
            sx = _matrix(rec["sigma_x"], where=where + " sigma_x")
            n = sx.shape[0]
            sy = _matrix(rec["sigma_y"], n, where + " sigma_y")
            a = np.asarray(rec["a"], dtype=float)
            b = np.asarray(rec["b"], dtype=float)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"{where}: malformed matrix or vector ({exc})") from None
        if a.shape != (n,) or b.shape != (n,):
            raise InputError(f"{where}: shift vectors must have length {n}")
        out.append({"sigma_x": sx, "sigma_y": sy, "a": a, "b": b, "line": line})
    return out


def random_covariance_pairs(count: int, seed: int, max_dim: int = 6) -> list[dict]:
    """Nearby PSD pairs with ``rank(sigma_x) >= 3`` and small shifts.

    Pairs cycle through ``b = 0``, ``b = a`` (the two shapes covered by the
    GNSU bound) and a generic perturbed ``b``.
    """
    if max_dim < 3:
        raise InputError("max_dim must be at least 3")
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, 0x5EED]))
    pairs = []
    for i in range(count):
        n = int(rng.integers(3, max_dim + 1))
        rank = int(rng.integers(3, n + 1))
        q = random_orthogonal(rng, n)
        vals = np.zeros(n)
        vals[:rank] = rng.uniform(0.1, 2.0, rank)
        sx = (q * vals) @ q.T
        e = np.eye(n) + rng.uniform(0.0, 0.1) * rng.standard_normal((n, n)) / np.sqrt(n)
        sy = e @ sx @ e.T
        a = rng.uniform(0.0, 0.5) * rng.standard_normal(n)
        b = a + rng.uniform(0.0, 0.1) * rng.standard_normal(n)
        if i % 3 == 0:
            b = np.zeros(n)
        elif i % 3 == 1:
            b = a.copy()
        pairs.append({"sigma_x": 0.5 * (sx + sx.T), "sigma_y": 0.5 * (sy + sy.T), "a": a, "b": b})
    return pairs


def _gnsu_shift(a, b):
    if not np.any(b):
        return "a", a
    if not np.any(a) or np.array_equal(a, b):
        return "b", b
    return "none", None


def compare_norm_pair(sigma_x, a, sigma_y, b, c: float = 1.0, tol: float = DEFAULT_TOL,
                      index: int = 0) -> dict:
    terms = norm_distance_terms(sigma_x, a, sigma_y, b)
    sigma_x, sigma_y = np.asarray(sigma_x, float), np.asarray(sigma_y, float)
    a, b = np.asarray(a, float), np.asarray(b, float)
    report = norm_tv_bound(sigma_x, a, sigma_y, b)
    label, shift = _gnsu_shift(a, b)
    gnsu = None
    if shift is not None:
        try:
            gnsu = gnsu_kolmogorov_bound(sigma_x, sigma_y, shift, c)
        except NotApplicableError:
            gnsu = None
    cf_x = canonicalize(norm_polynomial(sigma_x, a))
    cf_y = canonicalize(norm_polynomial(sigma_y, b))
    est = gausslaw.tv_distance(cf_x, cf_y)
    kol = gausslaw.kolmogorov_distance(cf_x, cf_y)
    tv = est.best()
    ok = kol <= tv + KOL_TV_SLACK
    if report.applicable:
        ok = ok and tv <= report.bound + tol
    root_x, _ = psd_sqrt(sigma_x)
    return {
        "index": index, "dim": sigma_x.shape[0], "hs": terms["hs"], "trace": terms["trace"],
        "shift_sq_diff": terms["shift_sq"], "root_shift": terms["root_shift"],
        "nuclear_diff": nuclear_norm(sigma_x - sigma_y), "a_sq": float(a @ a),
        "root_a": float(np.linalg.norm(root_x @ a)), "norm_bound": report.bound,
        "orientation": report.orientation, "gnsu_shift": label, "gnsu_c": float(c),
        "gnsu_bound": gnsu, "tv_lower": est.lower, "tv_value": _maybe(est.value),
        "kolmogorov": kol, "pass": bool(ok),
    }


def run_norm_comparison(pairs, c: float = 1.0, tol: float = DEFAULT_TOL) -> list[dict]:
    return [compare_norm_pair(p["sigma_x"], p["a"], p["sigma_y"], p["b"], c, tol, i)
            for i, p in enumerate(pairs)]


# -- closed-form moments --------------------------------------------------------

def moments_report(f: QuadPoly, samples: int = 0, seed: int = 0, z: float = 4.0) -> dict:
    """Closed-form mean and second moment, optionally checked by Monte Carlo."""
    row = {"mean": mean(f), "second_moment": second_moment(f),
           "variance": variance(f), "samples": int(samples),
           "mc_mean": None, "mc_second_moment": None, "se_mean": None,
           "se_second_moment": None, "pass": True}
    if samples > 0:
        x = gausslaw.sample(f, samples, seed)
        x2 = x * x
        row["mc_mean"] = float(x.mean())
        row["mc_second_moment"] = float(x2.mean())
        row["se_mean"] = float(x.std() / np.sqrt(samples))
        row["se_second_moment"] = float(x2.std() / np.sqrt(samples))
        row["pass"] = bool(abs(row["mc_mean"] - row["mean"]) <= z * row["se_mean"]
                           and abs(row["mc_second_moment"] - row["second_moment"])
                           <= z * row["se_second_moment"])
    return row
