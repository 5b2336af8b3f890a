"""Compiled single-pass gate kernels on (batch, 2**n) amplitude arrays."""

import numba
import numpy as np


@numba.njit(cache=True)
def apply_1q(batch, n, q, u):
    stride = 1 << (n - q - 1)
    size = batch.shape[1]
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for r in range(batch.shape[0]):
        for base in range(0, size, 2 * stride):
            for i in range(base, base + stride):
                a = batch[r, i]
                b = batch[r, i + stride]
                batch[r, i] = u00 * a + u01 * b
                batch[r, i + stride] = u10 * a + u11 * b


@numba.njit(cache=True)
def apply_cx(batch, n, c, t):
    cbit = 1 << (n - 1 - c)
    tbit = 1 << (n - 1 - t)
    for r in range(batch.shape[0]):
        for i in range(batch.shape[1]):
            if (i & cbit) and not (i & tbit):
                j = i | tbit
                tmp = batch[r, i]
                batch[r, i] = batch[r, j]
                batch[r, j] = tmp


@numba.njit(cache=True)
def sample_rows(cdf, rows, u):
    """Inverse-CDF draw per shot from row ``rows[s]`` of ``cdf``."""
    out = np.empty(rows.shape[0], dtype=np.int64)
    size = cdf.shape[1]
    for s in range(rows.shape[0]):
        out[s] = min(np.searchsorted(cdf[rows[s]], u[s], side="right"), size - 1)
    return out


@numba.njit(cache=True)
def resample_framed(phi, n, fx, fz, w, base, u):
    """Exact outcome draws for trajectories ``W phi`` with ``W`` local to a frame.

    ``base[r]`` must already be a draw from ``|phi|^2``: the bits outside the
    frame support keep their (unchanged) marginal, and the support bits are
    redrawn from the conditional amplitudes after applying ``W``.
    """
    rows = fx.shape[0]
    out = base.copy()
    buf = np.empty(1 << n, dtype=np.complex128)
    sup = np.empty(n, dtype=np.int64)
    kind = np.empty(n, dtype=np.int64)
    for r in range(rows):
        k = 0
        mask = 0
        for q in range(n):
            if fx[r, q] or fz[r, q]:
                sup[k] = q
                kind[k] = 2 if not fx[r, q] else (1 if fz[r, q] else 0)
                mask |= 1 << (n - 1 - q)
                k += 1
        if k == 0:
            continue
        rest = base[r] & ~mask
        size = 1 << k
        for s in range(size):
            idx = rest
            for m in range(k):
                if (s >> (k - 1 - m)) & 1:
                    idx |= 1 << (n - 1 - sup[m])
            buf[s] = phi[idx]
        for m in range(k):
            q = sup[m]
            kk = kind[m]
            stride = 1 << (k - 1 - m)
            u00, u01, u10, u11 = w[q, kk, 0, 0], w[q, kk, 0, 1], w[q, kk, 1, 0], w[q, kk, 1, 1]
            for b0 in range(0, size, 2 * stride):
                for i in range(b0, b0 + stride):
                    a = buf[i]
                    b = buf[i + stride]
                    buf[i] = u00 * a + u01 * b
                    buf[i + stride] = u10 * a + u11 * b
        total = 0.0
        for s in range(size):
            total += buf[s].real ** 2 + buf[s].imag ** 2
        target = u[r] * total
        acc = 0.0
        choice = size - 1
        for s in range(size):
            acc += buf[s].real ** 2 + buf[s].imag ** 2
            if acc > target:
                choice = s
                break
        idx = rest
        for m in range(k):
            if (choice >> (k - 1 - m)) & 1:
                idx |= 1 << (n - 1 - sup[m])
        out[r] = idx
    return out
