"""In-place numba kernels over a 2^n complex statevector.

Qubit q is bit q of the basis index. Each kernel visits only the amplitude
pairs (or quads) the gate couples; nothing builds a 2^n x 2^n matrix.
"""

import numba
import numpy as np

_opts = dict(cache=True, nogil=True, fastmath=False)


@numba.njit(**_opts)
def _pair(k, q):
    low = (1 << q) - 1
    return ((k & ~low) << 1) | (k & low)


@numba.njit(**_opts)
def apply_1q(psi, q, m00, m01, m10, m11):
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _pair(k, q)
        i1 = i0 | bit
        a = psi[i0]
        b = psi[i1]
        psi[i0] = m00 * a + m01 * b
        psi[i1] = m10 * a + m11 * b


@numba.njit(**_opts)
def apply_rx(psi, q, theta):
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _pair(k, q)
        i1 = i0 | bit
        a = psi[i0]
        b = psi[i1]
        # -i s b  ==  s * (b.imag - i b.real)
        psi[i0] = complex(c * a.real + s * b.imag, c * a.imag - s * b.real)
        psi[i1] = complex(c * b.real + s * a.imag, c * b.imag - s * a.real)


@numba.njit(**_opts)
def apply_ry(psi, q, theta):
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _pair(k, q)
        i1 = i0 | bit
        a = psi[i0]
        b = psi[i1]
        psi[i0] = c * a - s * b
        psi[i1] = s * a + c * b


@numba.njit(**_opts)
def apply_rz(psi, q, theta):
    p0 = complex(np.cos(theta / 2), -np.sin(theta / 2))
    p1 = complex(np.cos(theta / 2), np.sin(theta / 2))
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _pair(k, q)
        psi[i0] *= p0
        psi[i0 | bit] *= p1


@numba.njit(**_opts)
def apply_rzz(psi, a, b, theta):
    p_even = complex(np.cos(theta / 2), -np.sin(theta / 2))
    p_odd = complex(np.cos(theta / 2), np.sin(theta / 2))
    for k in range(psi.size):
        if ((k >> a) ^ (k >> b)) & 1:
            psi[k] *= p_odd
        else:
            psi[k] *= p_even


@numba.njit(**_opts)
def apply_z_ry(psi, ctrl, target, theta):
    """exp(-i theta Z_ctrl Y_target / 2): RY(+theta) where ctrl bit is 0, RY(-theta) where 1."""
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    bit = 1 << target
    for k in range(psi.size >> 1):
        i0 = _pair(k, target)
        i1 = i0 | bit
        ss = -s if (i0 >> ctrl) & 1 else s
        x = psi[i0]
        y = psi[i1]
        psi[i0] = c * x - ss * y
        psi[i1] = ss * x + c * y


@numba.njit(**_opts)
def apply_2q(psi, a, b, m):
    """Generic 4x4 on (a, b); local basis index is 2 * x_a + x_b."""
    lo = min(a, b)
    hi = max(a, b)
    ba = 1 << a
    bb = 1 << b
    for k in range(psi.size >> 2):
        i = _pair(_pair(k, lo), hi)
        i01 = i | bb
        i10 = i | ba
        i11 = i | ba | bb
        v0 = psi[i]
        v1 = psi[i01]
        v2 = psi[i10]
        v3 = psi[i11]
        psi[i] = m[0, 0] * v0 + m[0, 1] * v1 + m[0, 2] * v2 + m[0, 3] * v3
        psi[i01] = m[1, 0] * v0 + m[1, 1] * v1 + m[1, 2] * v2 + m[1, 3] * v3
        psi[i10] = m[2, 0] * v0 + m[2, 1] * v1 + m[2, 2] * v2 + m[2, 3] * v3
        psi[i11] = m[3, 0] * v0 + m[3, 1] * v1 + m[3, 2] * v2 + m[3, 3] * v3


@numba.njit(**_opts)
def weighted_sum(psi, diag):
    acc = 0.0
    for k in range(psi.size):
        v = psi[k]
        acc += (v.real * v.real + v.imag * v.imag) * diag[k]
    return acc
