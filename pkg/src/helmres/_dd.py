"""Vectorized double-double arithmetic (~31 significant digits).

Every value is an unevaluated sum hi + lo of two float64 with
|lo| <= ulp(hi)/2.  All operations are built from the error-free
transforms two_sum / two_prod (Dekker splitting; numpy exposes no fma)
and are closed over the (hi, lo) representation: no intermediate ever
silently drops to plain float64.

Shapes follow numpy broadcasting; hi and lo are kept as parallel
ndarrays, so slicing returns views and in-place updates write through.
The exponent range is that of float64 (the format is a *precision*
extension only), which bounds usable exponents to about e^{+-700}.
"""

from __future__ import annotations

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLIT * a
    big = c - a
    hi = c - big
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DD:
    """A double-double real, ndarray-valued."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = (np.zeros_like(self.hi) if lo is None
                   else np.asarray(lo, dtype=np.float64))

    # -- construction / conversion -------------------------------------
    @staticmethod
    def from_mpf(x, mp):
        hi = float(x)
        lo = float(x - mp.mpf(hi))
        return DD(hi, lo)

    def to_mpf(self, mp):
        return mp.mpf(float(self.hi)) + mp.mpf(float(self.lo))

    def to_float(self):
        return self.hi + self.lo

    @property
    def shape(self):
        return self.hi.shape

    def copy(self):
        return DD(self.hi.copy(), self.lo.copy())

    def __getitem__(self, idx):
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, val):
        if not isinstance(val, DD):
            val = DD(val)
        self.hi[idx] = val.hi
        self.lo[idx] = val.lo

    # -- arithmetic ------------------------------------------------------
    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __add__(self, other):
        if not isinstance(other, DD):
            other = DD(other)
        s, e = _two_sum(self.hi, other.hi)
        t, f = _two_sum(self.lo, other.lo)
        e = e + t
        s, e = _quick_two_sum(s, e)
        e = e + f
        hi, lo = _quick_two_sum(s, e)
        return DD(hi, lo)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, DD):
            other = DD(other)
        return self + (-other)

    def __rsub__(self, other):
        return DD(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, DD):
            other = DD(other)
        p, e = _two_prod(self.hi, other.hi)
        e = e + (self.hi * other.lo + self.lo * other.hi)
        hi, lo = _quick_two_sum(p, e)
        return DD(hi, lo)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, DD):
            other = DD(other)
        q1 = self.hi / other.hi
        r = self - other * DD(q1)
        q2 = r.hi / other.hi
        r = r - other * DD(q2)
        q3 = r.hi / other.hi
        hi, lo = _quick_two_sum(q1, q2)
        lo = lo + q3
        hi, lo = _quick_two_sum(hi, lo)
        return DD(hi, lo)

    def __rtruediv__(self, other):
        return DD(other) / self

    def abs(self):
        neg = self.hi < 0
        return DD(np.where(neg, -self.hi, self.hi),
                  np.where(neg, -self.lo, self.lo))

    def sqrt(self):
        """Karp-style refinement of the float64 root; requires hi >= 0."""
        a = np.sqrt(self.hi)
        a_dd = DD(a)
        diff = self - a_dd * a_dd
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = diff * DD(np.where(a > 0.0, 0.5 / np.where(a > 0.0, a, 1.0), 0.0))
        out = a_dd + corr
        return DD(np.where(a > 0.0, out.hi, 0.0), np.where(a > 0.0, out.lo, 0.0))


class DDC:
    """A double-double complex, ndarray-valued, stored as two DD parts."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        if isinstance(re, DDC):
            self.re, self.im = re.re.copy(), re.im.copy()
            return
        if im is None and np.iscomplexobj(re):
            arr = np.asarray(re)
            self.re = DD(arr.real.astype(np.float64))
            self.im = DD(arr.imag.astype(np.float64))
            return
        self.re = re if isinstance(re, DD) else DD(re)
        self.im = (DD(np.zeros_like(self.re.hi)) if im is None
                   else (im if isinstance(im, DD) else DD(im)))

    @staticmethod
    def zeros(shape):
        return DDC(DD(np.zeros(shape)), DD(np.zeros(shape)))

    @staticmethod
    def from_mpc(z, mp):
        return DDC(DD.from_mpf(z.real, mp), DD.from_mpf(z.imag, mp))

    def to_mpc(self, mp):
        return mp.mpc(self.re.to_mpf(mp), self.im.to_mpf(mp))

    def to_complex(self):
        return self.re.to_float() + 1j * self.im.to_float()

    @property
    def shape(self):
        return self.re.hi.shape

    def copy(self):
        return DDC(self.re.copy(), self.im.copy())

    def __getitem__(self, idx):
        return DDC(self.re[idx], self.im[idx])

    def __setitem__(self, idx, val):
        val = _as_ddc(val)
        self.re[idx] = val.re
        self.im[idx] = val.im

    def conj(self):
        return DDC(self.re.copy(), -self.im)

    def __neg__(self):
        return DDC(-self.re, -self.im)

    def __add__(self, other):
        other = _as_ddc(other)
        return DDC(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_ddc(other)
        return DDC(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _as_ddc(other) - self

    def __mul__(self, other):
        other = _as_ddc(other)
        return DDC(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ddc(other)
        den = other.re * other.re + other.im * other.im
        num = self * other.conj()
        return DDC(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return _as_ddc(other) / self

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def abs(self):
        return self.abs2().sqrt()

    def sqrt(self):
        """Principal square root by two complex Newton steps off np.sqrt."""
        z64 = self.to_complex()
        s = np.sqrt(_fix_negzero_imag(z64))
        out = DDC(s)
        for _ in range(2):
            out = (out + self / out) * DDC(0.5 + 0.0j)
        # Newton is undefined at 0 and unstable exactly on the cut; fall
        # back to the float64 value there (both parts are then exact).
        bad = ~np.isfinite(out.re.hi) | ~np.isfinite(out.im.hi)
        if np.any(bad):
            out.re.hi = np.where(bad, s.real, out.re.hi)
            out.re.lo = np.where(bad, 0.0, out.re.lo)
            out.im.hi = np.where(bad, s.imag, out.im.hi)
            out.im.lo = np.where(bad, 0.0, out.im.lo)
        return out


def _as_ddc(val):
    if isinstance(val, DDC):
        return val
    if isinstance(val, DD):
        return DDC(val)
    return DDC(np.asarray(val, dtype=np.complex128))


def _fix_negzero_imag(z):
    """Map -0.0 imaginary parts to +0.0 so np.sqrt stays on the principal
    branch for values that are mathematically on the negative real axis."""
    z = np.asarray(z, dtype=np.complex128)
    im = z.imag.copy()
    im[im == 0.0] = 0.0
    return z.real + 1j * im


# ---------------------------------------------------------------------------
# reductions and dense linear algebra (enough for inverse iteration)
# ---------------------------------------------------------------------------

def dd_sum(x: DD) -> DD:
    """Pairwise-tree sum along the last axis, fully in double-double."""
    hi, lo = x.hi.copy(), x.lo.copy()
    n = hi.shape[-1]
    while n > 1:
        half = n // 2
        a = DD(hi[..., :half], lo[..., :half])
        b = DD(hi[..., half:2 * half], lo[..., half:2 * half])
        s = a + b
        if n % 2:
            s_last = DD(s.hi[..., -1:], s.lo[..., -1:]) + DD(
                hi[..., -1:], lo[..., -1:])
            s.hi[..., -1:] = s_last.hi
            s.lo[..., -1:] = s_last.lo
        hi, lo = s.hi, s.lo
        n = half
    return DD(hi[..., 0], lo[..., 0])


def ddc_sum(x: DDC) -> DDC:
    return DDC(dd_sum(x.re), dd_sum(x.im))


def ddc_vdot(u: DDC, v: DDC) -> DDC:
    """conj(u) . v"""
    return ddc_sum(u.conj() * v)


def ddc_norm(v: DDC) -> DD:
    return dd_sum(v.abs2()).sqrt()


def ddc_matvec(a: DDC, x: DDC) -> DDC:
    prod = a * DDC(x.re.hi[None, :] * 0.0 + x.re.hi, x.im.hi)  # broadcast row
    # the line above loses the lo parts; do it properly:
    xr = DD(np.broadcast_to(x.re.hi, a.shape).copy(),
            np.broadcast_to(x.re.lo, a.shape).copy())
    xi = DD(np.broadcast_to(x.im.hi, a.shape).copy(),
            np.broadcast_to(x.im.lo, a.shape).copy())
    prod = a * DDC(xr, xi)
    return ddc_sum(prod)


def ddc_lu(a: DDC):
    """In-place LU with partial pivoting: returns (lu, swaps).

    After the call, lu holds U on and above the diagonal and the unit
    lower-triangular multipliers below it; swaps[i] is the row swapped
    with row i at step i (LAPACK style).
    """
    lu = a.copy()
    n = lu.shape[0]
    swaps = np.zeros(n, dtype=np.int64)
    for i in range(n):
        col_mag = lu.re.hi[i:, i] ** 2 + lu.im.hi[i:, i] ** 2
        p = i + int(np.argmax(col_mag))
        swaps[i] = p
        if p != i:
            for arr in (lu.re.hi, lu.re.lo, lu.im.hi, lu.im.lo):
                arr[[i, p], :] = arr[[p, i], :]
        if i == n - 1:
            break
        piv = lu[i, i]
        inv_piv = DDC(np.asarray(1.0 + 0.0j)) / piv
        mult = lu[i + 1:, i] * inv_piv
        lu[i + 1:, i] = mult
        row = lu[i, i + 1:]
        sub = lu[i + 1:, i + 1:]
        upd = sub - DDC(DD(mult.re.hi[:, None], mult.re.lo[:, None]),
                        DD(mult.im.hi[:, None], mult.im.lo[:, None])) * \
            DDC(DD(row.re.hi[None, :], row.re.lo[None, :]),
                DD(row.im.hi[None, :], row.im.lo[None, :]))
        lu[i + 1:, i + 1:] = upd
    return lu, swaps


def _apply_swaps(x: DDC, swaps, reverse=False):
    idx = range(len(swaps) - 1, -1, -1) if reverse else range(len(swaps))
    for i in idx:
        p = swaps[i]
        if p != i:
            for arr in (x.re.hi, x.re.lo, x.im.hi, x.im.lo):
                arr[[i, p]] = arr[[p, i]]


def ddc_lu_solve(lu: DDC, swaps, b: DDC, conj_transpose=False) -> DDC:
    """Solve A x = b, or A^H x = b, from the factorization P A = L U."""
    n = lu.shape[0]
    x = b.copy()
    if not conj_transpose:
        _apply_swaps(x, swaps)
        for j in range(n):          # L y = P b  (unit diagonal)
            if j + 1 < n:
                x[j + 1:] = x[j + 1:] - lu[j + 1:, j] * x[j]
        for j in range(n - 1, -1, -1):   # U x = y
            x[j] = x[j] / lu[j, j]
            if j > 0:
                x[:j] = x[:j] - lu[:j, j] * x[j]
    else:
        # A^H = U^H L^H P:  solve U^H z = b, L^H w = z, x = P^T w
        for j in range(n):          # U^H is lower triangular
            x[j] = x[j] / lu[j, j].conj()
            if j + 1 < n:
                x[j + 1:] = x[j + 1:] - lu[j, j + 1:].conj() * x[j]
        for j in range(n - 1, -1, -1):   # L^H is unit upper triangular
            if j + 1 < n:
                x[j] = x[j] - ddc_vdot(lu[j + 1:, j], x[j + 1:])
        _apply_swaps(x, swaps, reverse=True)
    return x


def ddc_smallest_singular(a: DDC, v0=None, sweeps=3):
    """Smallest singular triple (sigma, u, v) of a square DDC matrix.

    Inverse iteration on (A^H A)^{-1} through one LU of A; v0 (complex)
    seeds the right singular vector, typically from a float64 SVD of the
    hi parts.  Returns (sigma: DD scalar, u: DDC, v: DDC) with A v ~ sigma u.
    """
    n = a.shape[0]
    if v0 is None:
        _, _, vh = np.linalg.svd(a.to_complex())
        v0 = vh[-1].conj()
    v = DDC(np.asarray(v0, dtype=np.complex128))
    nrm = ddc_norm(v)
    v = v * DDC(DD(1.0) / nrm, DD(0.0))
    lu, swaps = ddc_lu(a)
    for _ in range(sweeps):
        z = ddc_lu_solve(lu, swaps, v, conj_transpose=True)
        w = ddc_lu_solve(lu, swaps, z)
        nrm = ddc_norm(w)
        v = w * DDC(DD(1.0) / nrm, DD(0.0))
    av = ddc_matvec(a, v)
    sigma = ddc_norm(av)
    inv = DD(1.0) / sigma
    u = av * DDC(inv, DD(0.0))
    return sigma, u, v
