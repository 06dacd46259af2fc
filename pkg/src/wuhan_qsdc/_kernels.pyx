# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled amplitude kernels.

All routines work in place on a C-contiguous complex128 vector holding the
amplitudes of an ``n``-qubit register. Qubit 0 is the most significant bit of
the basis index.
"""

from libc.math cimport sqrt

BACKEND = "cython"


cdef inline Py_ssize_t _mask(int n, int q):
    return (<Py_ssize_t>1) << (n - 1 - q)


def apply_1q(double complex[::1] psi, int n, int q, double complex[:, ::1] u):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t m = _mask(n, q)
    cdef Py_ssize_t i
    cdef double complex x0, x1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    for i in range(dim):
        if i & m:
            continue
        x0 = psi[i]
        x1 = psi[i | m]
        psi[i] = u00 * x0 + u01 * x1
        psi[i | m] = u10 * x0 + u11 * x1


def apply_cnot(double complex[::1] psi, int n, int control, int target):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t cm = _mask(n, control)
    cdef Py_ssize_t tm = _mask(n, target)
    cdef Py_ssize_t i
    cdef double complex tmp
    for i in range(dim):
        if (i & cm) and not (i & tm):
            tmp = psi[i]
            psi[i] = psi[i | tm]
            psi[i | tm] = tmp


def norm_sq(double complex[::1] psi):
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(psi.shape[0]):
        s += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return s


def prob_one(double complex[::1] psi, int n, int q):
    cdef Py_ssize_t m = _mask(n, q)
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(psi.shape[0]):
        if i & m:
            s += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return s


def pair_probs(double complex[::1] psi, int n, int q1, int q2):
    """Joint B_z probabilities of two qubits, ordered 00, 01, 10, 11."""
    cdef Py_ssize_t m1 = _mask(n, q1)
    cdef Py_ssize_t m2 = _mask(n, q2)
    cdef Py_ssize_t i
    cdef double p[4]
    cdef double w
    p[0] = p[1] = p[2] = p[3] = 0.0
    for i in range(psi.shape[0]):
        w = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
        p[(2 if i & m1 else 0) + (1 if i & m2 else 0)] += w
    return (p[0], p[1], p[2], p[3])


def project(double complex[::1] psi, int n, int q, int bit):
    """Zero the branch where qubit ``q`` differs from ``bit`` and renormalize.

    Returns the probability of the kept branch.
    """
    cdef Py_ssize_t m = _mask(n, q)
    cdef Py_ssize_t i
    cdef double p = 0.0
    cdef double scale
    cdef bint keep
    for i in range(psi.shape[0]):
        keep = ((i & m) != 0) == (bit != 0)
        if keep:
            p += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
        else:
            psi[i] = 0.0
    if p <= 0.0:
        raise ValueError("projection onto a zero-probability outcome")
    scale = 1.0 / sqrt(p)
    for i in range(psi.shape[0]):
        psi[i] = psi[i] * scale
    return p
