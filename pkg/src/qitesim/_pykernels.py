"""Pure numpy state-vector kernels.

Reference backend for :mod:`qitesim._ckernels`; both take big-endian
``uint64`` x/z masks (see :mod:`qitesim.pauli`).
"""

import numpy as np

_IPOW = np.array([1, 1j, -1, -1j])


def _sign(v):
    return 1.0 - 2.0 * (np.bitwise_count(v) & 1)


def _rot_factor(s, y):
    # -i * sin(theta) * i**y without a complex product, so real states stay real
    return (-1j * s, s, 1j * s, -s)[y & 3]


def apply_rotations(psi, xs, zs, thetas):
    """In place: ``psi <- prod_r exp(-i theta_r P_r) psi``, first row applied first."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    thetas = np.asarray(thetas, dtype=float)
    if not len(xs) == len(zs) == len(thetas):
        raise ValueError("mask and angle arrays differ in length")
    idx = np.arange(psi.shape[0], dtype=np.uint64)
    for x, z, theta in zip(xs, zs, thetas):
        if theta == 0.0:
            continue
        c, s = np.cos(theta), np.sin(theta)
        f = _rot_factor(s, int(np.bitwise_count(x & z)))
        src = idx ^ x
        psi[:] = c * psi + (_sign(z & src) * f) * psi[src]


def pauli_columns(psi, xs, zs, rows=None):
    """``out[r, i] = (P_i psi)[rows[r]]``."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    if rows is None:
        rows = np.arange(psi.shape[0])
    rows = np.asarray(rows, dtype=np.uint64)
    src = rows[:, None] ^ xs[None, :]
    ph = _IPOW[np.bitwise_count(xs & zs) & 3]
    return (_sign(zs[None, :] & src) * ph[None, :]) * psi[src.astype(np.intp)]


def pauli_expectations(psi, xs, zs):
    """``out[i] = <psi|P_i|psi>``."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    idx = np.arange(psi.shape[0], dtype=np.uint64)
    out = np.empty(len(xs), dtype=complex)
    conj = psi.conj()
    for i, (x, z) in enumerate(zip(xs, zs)):
        src = idx ^ x
        out[i] = _IPOW[int(np.bitwise_count(x & z)) & 3] * np.dot(conj, _sign(z & src) * psi[src])
    return out


def apply_rotations_real(psi, xs, zs, thetas):
    """Rotations by odd-Y strings on a real state view; see the compiled twin."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    thetas = np.asarray(thetas, dtype=float)
    if not len(xs) == len(zs) == len(thetas):
        raise ValueError("mask and angle arrays differ in length")
    idx = np.arange(psi.shape[0], dtype=np.uint64)
    for x, z, theta in zip(xs, zs, thetas):
        if theta == 0.0:
            continue
        f = np.sin(theta) * (-1.0 if int(np.bitwise_count(x & z)) & 3 == 3 else 1.0)
        src = idx ^ x
        psi[:] = np.cos(theta) * psi + (_sign(z & src) * f) * psi[src]


def pauli_columns_real(psi, xs, zs, rows=None):
    """``Im((P_i psi)[rows[r]])`` for a real state and odd-Y strings."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    if rows is None:
        rows = np.arange(psi.shape[0])
    rows = np.asarray(rows, dtype=np.uint64)
    src = rows[:, None] ^ xs[None, :]
    fac = np.where(np.bitwise_count(xs & zs) & 3 == 3, -1.0, 1.0)
    return (_sign(zs[None, :] & src) * fac[None, :]) * np.asarray(psi)[src.astype(np.intp)]


def rotation_schedule(xs, zs, n_qubits, frontier=None):
    """Gate count and depth of the compiled rotations, applied in order.

    ``frontier`` (int64, one entry per qubit) is continued and updated in place.
    """
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    if len(xs) != len(zs):
        raise ValueError("mask arrays differ in length")
    if not 1 <= n_qubits <= 64:
        raise ValueError("n_qubits must be in 1..64")
    if frontier is not None and len(frontier) != n_qubits:
        raise ValueError("frontier length differs from n_qubits")
    f = [0] * n_qubits if frontier is None else [int(v) for v in frontier]
    gates = 0
    for x, z in zip(xs.tolist(), zs.tolist()):
        sup = x | z
        if not sup:
            continue
        qs = [q for q in range(n_qubits) if (sup >> (n_qubits - 1 - q)) & 1]
        bc = [q for q in qs if (x >> (n_qubits - 1 - q)) & 1]
        gates += 2 * (len(qs) - 1) + 1 + 2 * len(bc)
        for q in bc:
            f[q] += 1
        for a, b in zip(qs, qs[1:]):
            f[a] = f[b] = max(f[a], f[b]) + 1
        f[qs[-1]] += 1
        for a, b in reversed(list(zip(qs, qs[1:]))):
            f[a] = f[b] = max(f[a], f[b]) + 1
        for q in bc:
            f[q] += 1
    if frontier is not None:
        frontier[:] = f
    return gates, max(f, default=0)


def apply_pauli_sum(psi, xs, zs, coeffs):
    """``sum_i coeffs[i] * P_i psi`` as a new vector."""
    xs = np.asarray(xs, dtype=np.uint64)
    zs = np.asarray(zs, dtype=np.uint64)
    coeffs = np.asarray(coeffs, dtype=float)
    if not len(xs) == len(zs) == len(coeffs):
        raise ValueError("mask and coefficient arrays differ in length")
    idx = np.arange(psi.shape[0], dtype=np.uint64)
    out = np.zeros(psi.shape[0], dtype=complex)
    for x, z, c in zip(xs, zs, coeffs):
        if c == 0.0:
            continue
        src = idx ^ x
        out += (c * _IPOW[int(np.bitwise_count(x & z)) & 3]) * _sign(z & src) * psi[src]
    return out
