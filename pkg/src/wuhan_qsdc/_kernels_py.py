"""Pure numpy fallback for the compiled amplitude kernels.

Same signatures and in-place semantics as ``_kernels.pyx``.
"""

import numpy as np

BACKEND = "python"


def _split(psi, n, q):
    # (high bits, qubit q, low bits) view of the big-endian index
    return psi.reshape(1 << q, 2, 1 << (n - 1 - q))


def apply_1q(psi, n, q, u):
    v = _split(psi, n, q)
    x0 = v[:, 0, :].copy()
    x1 = v[:, 1, :].copy()
    v[:, 0, :] = u[0, 0] * x0 + u[0, 1] * x1
    v[:, 1, :] = u[1, 0] * x0 + u[1, 1] * x1


def apply_cnot(psi, n, control, target):
    v = psi.reshape((2,) * n)
    on = [slice(None)] * n
    off = [slice(None)] * n
    on[control] = off[control] = 1
    on[target], off[target] = 1, 0
    on, off = tuple(on), tuple(off)
    tmp = v[off].copy()
    v[off] = v[on]
    v[on] = tmp


def norm_sq(psi):
    return float(np.vdot(psi, psi).real)


def prob_one(psi, n, q):
    branch = _split(psi, n, q)[:, 1, :]
    return float(np.sum(branch.real**2 + branch.imag**2))


def pair_probs(psi, n, q1, q2):
    w = (psi.real**2 + psi.imag**2).reshape((2,) * n)
    rest = tuple(k for k in range(n) if k not in (q1, q2))
    p = w.sum(axis=rest) if rest else w
    if q1 > q2:
        p = p.T
    return (float(p[0, 0]), float(p[0, 1]), float(p[1, 0]), float(p[1, 1]))


def project(psi, n, q, bit):
    v = _split(psi, n, q)
    v[:, 1 - bit, :] = 0.0
    kept = v[:, bit, :]
    p = float(np.sum(kept.real**2 + kept.imag**2))
    if p <= 0.0:
        raise ValueError("projection onto a zero-probability outcome")
    psi *= 1.0 / np.sqrt(p)
    return p
