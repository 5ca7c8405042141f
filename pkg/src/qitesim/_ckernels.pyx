# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled state-vector kernels. Same contract as ``_pykernels``."""

import numpy as np
from libc.math cimport cos, sin
from libc.stdint cimport uint64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline double _sgn(uint64_t v) noexcept nogil:
    return -1.0 if (__builtin_popcountll(v) & 1) else 1.0


cdef inline double complex _ipow(int k) noexcept nogil:
    k &= 3
    if k == 0:
        return 1.0
    if k == 1:
        return 1j
    if k == 2:
        return -1.0
    return -1j


cdef inline double complex _rot_factor(double s, int y) noexcept nogil:
    # -i * sin(theta) * i**y, written per case so real states stay exactly real
    y &= 3
    if y == 0:
        return -1j * s
    if y == 1:
        return s
    if y == 2:
        return 1j * s
    return -s


def apply_rotations(double complex[::1] psi, const uint64_t[::1] xs,
                    const uint64_t[::1] zs, const double[::1] thetas):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_rot = xs.shape[0]
    cdef Py_ssize_t r
    cdef uint64_t k, kp, x, z
    cdef double c, s
    cdef double complex f, a, b
    if zs.shape[0] != n_rot or thetas.shape[0] != n_rot:
        raise ValueError("mask and angle arrays differ in length")
    with nogil:
        for r in range(n_rot):
            if thetas[r] == 0.0:
                continue
            x = xs[r]
            z = zs[r]
            c = cos(thetas[r])
            s = sin(thetas[r])
            f = _rot_factor(s, __builtin_popcountll(x & z))
            if x == 0:
                for k in range(<uint64_t>dim):
                    psi[k] = (c + _sgn(z & k) * f) * psi[k]
            else:
                for k in range(<uint64_t>dim):
                    kp = k ^ x
                    if kp > k:
                        a = psi[k]
                        b = psi[kp]
                        psi[k] = c * a + (_sgn(z & kp) * f) * b
                        psi[kp] = c * b + (_sgn(z & k) * f) * a


def pauli_columns(const double complex[::1] psi, const uint64_t[::1] xs,
                  const uint64_t[::1] zs, rows=None):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_str = xs.shape[0]
    cdef const long[::1] rv
    cdef Py_ssize_t n_rows, i, r
    cdef uint64_t row, src
    cdef double complex ph
    if rows is None:
        rows = np.arange(dim, dtype=np.int_)
    rv = np.ascontiguousarray(rows, dtype=np.int_)
    n_rows = rv.shape[0]
    out = np.empty((n_rows, n_str), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for r in range(n_rows):
            row = <uint64_t>rv[r]
            for i in range(n_str):
                src = row ^ xs[i]
                ph = _ipow(__builtin_popcountll(xs[i] & zs[i]))
                o[r, i] = (_sgn(zs[i] & src) * ph) * psi[src]
    return out


def pauli_expectations(const double complex[::1] psi, const uint64_t[::1] xs,
                       const uint64_t[::1] zs):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_str = xs.shape[0]
    cdef Py_ssize_t i
    cdef uint64_t k, src, x, z
    cdef double complex acc, a, b
    out = np.empty(n_str, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for i in range(n_str):
            x = xs[i]
            z = zs[i]
            acc = 0.0
            for k in range(<uint64_t>dim):
                src = k ^ x
                a = psi[k]
                b = psi[src]
                acc = acc + _sgn(z & src) * (a.conjugate() * b)
            o[i] = _ipow(__builtin_popcountll(x & z)) * acc
    return out


def apply_rotations_real(double[:] psi, const uint64_t[::1] xs,
                         const uint64_t[::1] zs, const double[::1] thetas):
    """Rotations by odd-Y strings on a real state (passed as a real view).

    Every string must carry an odd number of Y letters so that
    ``-i sin(theta) i**y`` is real; the caller guarantees it.
    """
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_rot = xs.shape[0]
    cdef Py_ssize_t r
    cdef uint64_t k, kp, x, z
    cdef double c, f, a, b
    if zs.shape[0] != n_rot or thetas.shape[0] != n_rot:
        raise ValueError("mask and angle arrays differ in length")
    with nogil:
        for r in range(n_rot):
            if thetas[r] == 0.0:
                continue
            x = xs[r]
            z = zs[r]
            c = cos(thetas[r])
            f = sin(thetas[r])
            if (__builtin_popcountll(x & z) & 3) == 3:
                f = -f
            for k in range(<uint64_t>dim):
                kp = k ^ x
                if kp > k:
                    a = psi[k]
                    b = psi[kp]
                    psi[k] = c * a + (_sgn(z & kp) * f) * b
                    psi[kp] = c * b + (_sgn(z & k) * f) * a


def pauli_columns_real(const double[:] psi, const uint64_t[::1] xs,
                       const uint64_t[::1] zs, rows=None):
    """``Im((P_i psi)[rows[r]])`` for a real state and odd-Y strings."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_str = xs.shape[0]
    cdef const long[::1] rv
    cdef Py_ssize_t n_rows, i, r
    cdef uint64_t row, src
    if rows is None:
        rows = np.arange(dim, dtype=np.int_)
    rv = np.ascontiguousarray(rows, dtype=np.int_)
    n_rows = rv.shape[0]
    fac = np.empty(n_str, dtype=np.float64)
    cdef double[::1] fv = fac
    for i in range(n_str):
        fv[i] = -1.0 if (__builtin_popcountll(xs[i] & zs[i]) & 3) == 3 else 1.0
    out = np.empty((n_rows, n_str), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(n_rows):
            row = <uint64_t>rv[r]
            for i in range(n_str):
                src = row ^ xs[i]
                o[r, i] = (_sgn(zs[i] & src) * fv[i]) * psi[src]
    return out


def rotation_schedule(const uint64_t[::1] xs, const uint64_t[::1] zs, int n_qubits, frontier=None):
    """Gate count and depth of the compiled rotations, applied in order.

    Mirrors ``circuit.compile_rotation``: basis changes on X/Y qubits, CNOT
    ladder in ascending qubit order, RZ on the last qubit, then the mirror.
    ``frontier`` (int64, one entry per qubit) is continued and updated in place.
    """
    cdef Py_ssize_t n_rot = xs.shape[0]
    cdef Py_ssize_t r
    cdef int j, w, q, t
    cdef uint64_t x, sup
    cdef long long gates = 0
    cdef int[64] qs
    cdef int[64] bc
    if zs.shape[0] != n_rot:
        raise ValueError("mask arrays differ in length")
    if not 1 <= n_qubits <= 64:
        raise ValueError("n_qubits must be in 1..64")
    if frontier is None:
        frontier = np.zeros(n_qubits, dtype=np.int64)
    if frontier.shape[0] != n_qubits:
        raise ValueError("frontier length differs from n_qubits")
    front_arr = frontier
    cdef long long[::1] f = front_arr
    with nogil:
        for r in range(n_rot):
            x = xs[r]
            sup = x | zs[r]
            if sup == 0:
                continue
            w = 0
            for q in range(n_qubits):
                if (sup >> (n_qubits - 1 - q)) & 1:
                    qs[w] = q
                    bc[w] = <int>((x >> (n_qubits - 1 - q)) & 1)
                    w += 1
            gates += 2 * (w - 1) + 1
            for j in range(w):
                if bc[j]:
                    f[qs[j]] += 1
                    gates += 2
            for j in range(w - 1):
                t = <int>(f[qs[j]] if f[qs[j]] > f[qs[j + 1]] else f[qs[j + 1]]) + 1
                f[qs[j]] = t
                f[qs[j + 1]] = t
            f[qs[w - 1]] += 1
            for j in range(w - 2, -1, -1):
                t = <int>(f[qs[j]] if f[qs[j]] > f[qs[j + 1]] else f[qs[j + 1]]) + 1
                f[qs[j]] = t
                f[qs[j + 1]] = t
            for j in range(w):
                if bc[j]:
                    f[qs[j]] += 1
    return int(gates), int(front_arr.max(initial=0))


def apply_pauli_sum(const double complex[::1] psi, const uint64_t[::1] xs,
                    const uint64_t[::1] zs, const double[::1] coeffs):
    """``sum_i coeffs[i] * P_i psi`` as a new vector."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t n_str = xs.shape[0]
    cdef Py_ssize_t i
    cdef uint64_t k, x, z
    cdef double complex ph
    if zs.shape[0] != n_str or coeffs.shape[0] != n_str:
        raise ValueError("mask and coefficient arrays differ in length")
    out = np.zeros(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for i in range(n_str):
            if coeffs[i] == 0.0:
                continue
            x = xs[i]
            z = zs[i]
            ph = coeffs[i] * _ipow(__builtin_popcountll(x & z))
            for k in range(<uint64_t>dim):
                o[k] = o[k] + (_sgn(z & (k ^ x)) * ph) * psi[k ^ x]
    return out
