"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical arithmetic.  The numba path is used when numba imports and the
environment variable ``QIPFLOW_DISABLE_NUMBA`` is unset (or ``0``); otherwise
the numpy path is selected.  Both are importable directly (``*_numba`` /
``*_numpy``) so benchmarks and tests can compare them.
"""
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("QIPFLOW_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not _DISABLED

EPS = np.finfo(float).eps
MAX_SWEEPS = 60
QUAD_MAX_INTERVALS = 2 ** 20


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# Cyclic Jacobi for stacks of Hermitian matrices
# ---------------------------------------------------------------------------

def _jacobi_single(a, v):
    """In-place cyclic Jacobi on one Hermitian matrix; returns sweeps used (-1 on failure)."""
    n = a.shape[0]
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag <= EPS * math.sqrt(abs(a[p, p].real * a[q, q].real)):
                    continue
                rotated = True
                ph = apq / mag
                theta = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
                c = math.cos(theta)
                s = math.sin(theta)
                phc = ph.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * phc * akq
                    a[k, q] = s * akp + c * phc * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * apk + c * ph * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * phc * vkq
                    v[k, q] = s * vkp + c * phc * vkq
        if not rotated:
            return sweep
    return -1


if numba is not None:
    _jacobi_single_nb = numba.njit(cache=True)(_jacobi_single)

    @numba.njit(cache=True)
    def _jacobi_batch_nb(mats):
        nb, n, _ = mats.shape
        a = mats.copy()
        vecs = np.zeros((nb, n, n), dtype=np.complex128)
        vals = np.zeros((nb, n))
        status = np.zeros(nb, dtype=np.int64)
        for b in range(nb):
            for i in range(n):
                vecs[b, i, i] = 1.0
            status[b] = _jacobi_single_nb(a[b], vecs[b])
            for i in range(n):
                vals[b, i] = a[b, i, i].real
        return vals, vecs, status, a


def _jacobi_batch_np(mats):
    """Same rotation sequence as the scalar kernel, applied to the whole stack at once."""
    a = mats.copy()
    nb, n, _ = a.shape
    vecs = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    status = np.full(nb, -1, dtype=np.int64)
    active = np.ones(nb, dtype=bool)
    rows = np.arange(nb)
    for sweep in range(MAX_SWEEPS):
        rotated_any = np.zeros(nb, dtype=bool)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                rot = active & (mag > 1e-300) & (mag > EPS * np.sqrt(np.abs(app * aqq)))
                if not rot.any():
                    continue
                rotated_any |= rot
                idx = rows[rot]
                ph = apq[rot] / mag[rot]
                theta = 0.5 * np.arctan2(2.0 * mag[rot], aqq[rot] - app[rot])
                c = np.cos(theta)[:, None]
                s = np.sin(theta)[:, None]
                phc = ph.conj()[:, None]
                ph = ph[:, None]
                sub = a[idx]
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q].copy()
                sub[:, :, p] = c * colp - s * phc * colq
                sub[:, :, q] = s * colp + c * phc * colq
                rowp = sub[:, p, :].copy()
                rowq = sub[:, q, :].copy()
                sub[:, p, :] = c * rowp - s * ph * rowq
                sub[:, q, :] = s * rowp + c * ph * rowq
                sub[:, p, q] = 0.0
                sub[:, q, p] = 0.0
                sub[:, p, p] = sub[:, p, p].real
                sub[:, q, q] = sub[:, q, q].real
                a[idx] = sub
                vsub = vecs[idx]
                vp = vsub[:, :, p].copy()
                vq = vsub[:, :, q].copy()
                vsub[:, :, p] = c * vp - s * phc * vq
                vsub[:, :, q] = s * vp + c * phc * vq
                vecs[idx] = vsub
        finished = active & ~rotated_any
        status[finished] = sweep
        active &= rotated_any
        if not active.any():
            break
    vals = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    return vals, vecs, status, a


def jacobi_eigh_numba(mats):
    return _jacobi_batch_nb(np.ascontiguousarray(mats, dtype=np.complex128))


def jacobi_eigh_numpy(mats):
    return _jacobi_batch_np(np.asarray(mats, dtype=np.complex128))


# ---------------------------------------------------------------------------
# Volterra integro-differential solver (implicit trapezoid)
#   y'(t) = -int_0^t k(t - s) y(s) ds,  y(0) = 1
# ---------------------------------------------------------------------------

@_njit
def _volterra_nb(kern, h):
    m = kern.shape[0]
    y = np.empty(m, dtype=np.complex128)
    y[0] = 1.0
    mem_prev = 0.0 + 0.0j
    denom = 1.0 + 0.25 * h * h * kern[0]
    for n in range(1, m):
        acc = 0.5 * kern[n] * y[0]
        for k in range(1, n):
            acc += kern[n - k] * y[k]
        partial = h * acc
        y[n] = (y[n - 1] - 0.5 * h * (mem_prev + partial)) / denom
        mem_prev = partial + 0.5 * h * kern[0] * y[n]
    return y


def _volterra_np(kern, h):
    m = kern.shape[0]
    y = np.empty(m, dtype=np.complex128)
    y[0] = 1.0
    mem_prev = 0.0 + 0.0j
    denom = 1.0 + 0.25 * h * h * kern[0]
    for n in range(1, m):
        partial = h * (0.5 * kern[n] * y[0] + np.dot(kern[n - 1:0:-1], y[1:n]))
        y[n] = (y[n - 1] - 0.5 * h * (mem_prev + partial)) / denom
        mem_prev = partial + 0.5 * h * kern[0] * y[n]
    return y


def volterra_numba(kern, h):
    return _volterra_nb(np.ascontiguousarray(kern, dtype=np.complex128), float(h))


def volterra_numpy(kern, h):
    return _volterra_np(np.asarray(kern, dtype=np.complex128), float(h))


# ---------------------------------------------------------------------------
# Cumulative adaptive Simpson integral of the Ohmic dephasing rate
# ---------------------------------------------------------------------------

def _ohmic_rate_scalar(t, pref, wc, s):
    x = wc * t
    return pref * math.sin(s * math.atan(x)) / (1.0 + x * x) ** (0.5 * s)


@_njit
def _ohmic_rate_nb(t, pref, wc, s):
    x = wc * t
    return pref * math.sin(s * math.atan(x)) / (1.0 + x * x) ** (0.5 * s)


def _make_simpson(rate):
    def simpson(a, b, tol, pref, wc, s):
        """Returns (integral, n_intervals); n_intervals < 0 flags the subdivision cap."""
        fa = rate(a, pref, wc, s)
        fb = rate(b, pref, wc, s)
        m = 0.5 * (a + b)
        fm = rate(m, pref, wc, s)
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        # explicit stack: a, b, fa, fm, fb, whole, tol
        stack = np.empty((128, 7))
        stack[0, 0] = a
        stack[0, 1] = b
        stack[0, 2] = fa
        stack[0, 3] = fm
        stack[0, 4] = fb
        stack[0, 5] = whole
        stack[0, 6] = tol
        top = 1
        total = 0.0
        intervals = 1
        failed = False
        while top > 0:
            top -= 1
            a0 = stack[top, 0]
            b0 = stack[top, 1]
            fa0 = stack[top, 2]
            fm0 = stack[top, 3]
            fb0 = stack[top, 4]
            whole0 = stack[top, 5]
            tol0 = stack[top, 6]
            m0 = 0.5 * (a0 + b0)
            lm = 0.5 * (a0 + m0)
            rm = 0.5 * (m0 + b0)
            flm = rate(lm, pref, wc, s)
            frm = rate(rm, pref, wc, s)
            left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
            right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
            delta = left + right - whole0
            if abs(delta) <= 15.0 * tol0 or failed or top >= 126 or m0 == a0 or m0 == b0:
                total += left + right + delta / 15.0
                if abs(delta) > 15.0 * tol0 and not failed:
                    failed = True
                continue
            intervals += 1
            if intervals > QUAD_MAX_INTERVALS:
                failed = True
            stack[top, 0] = a0
            stack[top, 1] = m0
            stack[top, 2] = fa0
            stack[top, 3] = flm
            stack[top, 4] = fm0
            stack[top, 5] = left
            stack[top, 6] = 0.5 * tol0
            stack[top + 1, 0] = m0
            stack[top + 1, 1] = b0
            stack[top + 1, 2] = fm0
            stack[top + 1, 3] = frm
            stack[top + 1, 4] = fb0
            stack[top + 1, 5] = right
            stack[top + 1, 6] = 0.5 * tol0
            top += 2
        if failed:
            return total, -intervals
        return total, intervals
    return simpson


_simpson_py = _make_simpson(_ohmic_rate_scalar)


def _make_cumulative(simpson):
    def cumulative(times, tol, pref, wc, s):
        n = times.shape[0]
        out = np.zeros(n)
        span = times[n - 1] - times[0]
        ok = True
        for i in range(1, n):
            a = times[i - 1]
            b = times[i]
            local = tol * (b - a) / span if span > 0 else tol
            val, cnt = simpson(a, b, local, pref, wc, s)
            if cnt < 0:
                ok = False
            out[i] = out[i - 1] + val
        return out, ok
    return cumulative


_ohmic_cumulative_py = _make_cumulative(_simpson_py)

if numba is not None:
    # closures over dispatchers cannot be cached on disk
    _simpson_nb = numba.njit(_make_simpson(_ohmic_rate_nb))
    _ohmic_cumulative_nb = numba.njit(_make_cumulative(_simpson_nb))


def ohmic_cumulative_numba(times, tol, pref, wc, s):
    return _ohmic_cumulative_nb(np.ascontiguousarray(times, dtype=np.float64), tol, pref, wc, s)


def ohmic_cumulative_numpy(times, tol, pref, wc, s):
    return _ohmic_cumulative_py(np.asarray(times, dtype=np.float64), tol, pref, wc, s)


if USE_NUMBA:
    jacobi_eigh = jacobi_eigh_numba
    volterra = volterra_numba
    ohmic_cumulative = ohmic_cumulative_numba
else:
    jacobi_eigh = jacobi_eigh_numpy
    volterra = volterra_numpy
    ohmic_cumulative = ohmic_cumulative_numpy
