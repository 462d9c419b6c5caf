"""Pure numpy versions of the routines in ``_kernels.pyx``.

Same signatures, same algorithms; used when the extension is not built or
when ``POLYTV_PURE_PYTHON`` is set.
"""

import numpy as np
from scipy.special import spherical_jn

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0

# x values processed per block in filon_legendre_sum (memory bound)
_BLOCK = 128


def jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n)
    sweep = 0
    while True:
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol or sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweep


def _splitmix_outputs(seed, start, count):
    """SplitMix64 outputs number ``start`` .. ``start + count - 1`` (0-based)."""
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + k * GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def standard_normals(seed, count):
    out = np.empty(count)
    filled = 0
    used = 0
    while filled < count:
        pairs = max(64, int((count - filled) * 0.64) + 64)
        z = _splitmix_outputs(seed, used, 2 * pairs)
        used += 2 * pairs
        u = (z >> np.uint64(11)).astype(np.float64) * TWO_M53
        v = 2.0 * u - 1.0
        v1 = v[0::2]
        v2 = v[1::2]
        s = v1 * v1 + v2 * v2
        ok = (s < 1.0) & (s != 0.0)
        v1, v2, s = v1[ok], v2[ok], s[ok]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        block = np.empty(2 * v1.size)
        block[0::2] = v1 * factor
        block[1::2] = v2 * factor
        take = min(block.size, count - filled)
        out[filled:filled + take] = block[:take]
        filled += take
    return out


def filon_legendre_sum(x, shifts, centers, halfwidths, d_re, d_im):
    x = np.asarray(x, dtype=float)
    d = np.asarray(d_re) + 1j * np.asarray(d_im)
    order = d.shape[1]
    n = np.arange(order)
    parity = np.where(n % 2 == 1, -1.0, 1.0)
    out = np.empty(x.size, dtype=complex)
    for lo in range(0, x.size, _BLOCK):
        om = x[lo:lo + _BLOCK, None] - shifts[None, :]
        kappa = om * halfwidths[None, :]
        jn = spherical_jn(n[None, None, :], np.abs(kappa)[:, :, None])
        jn = np.where((kappa < 0)[:, :, None], jn * parity, jn)
        inner = np.einsum("mpn,pn->mp", jn, d)
        phase = np.exp(-1j * om * centers[None, :])
        out[lo:lo + _BLOCK] = (halfwidths[None, :] * phase * inner).sum(axis=1)
    return out.real.copy(), out.imag.copy()
