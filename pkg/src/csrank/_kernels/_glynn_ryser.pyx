# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Gray-code permanent kernels (Glynn and Ryser formulas).

Each step of the reflected-binary Gray code flips one sign (Glynn) or
toggles one column (Ryser), so the row sums are updated in O(n) and the
whole permanent costs O(2^n n).  The iteration order is fixed, making the
floating-point summation order deterministic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline int _ctz(unsigned long long k) nogil:
    cdef int c = 0
    while not (k & 1):
        k >>= 1
        c += 1
    return c


def glynn(a):
    """Per(a) via Glynn's formula with delta_1 pinned to +1."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(m[0, 0])

    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w = np.sum(m, axis=0)
    cdef double complex total = 0
    cdef double complex prod
    cdef double sign = 1.0
    cdef unsigned long long k, steps = 1ULL << (n - 1)
    cdef int j
    cdef Py_ssize_t i, col

    prod = 1
    for col in range(n):
        prod *= w[col]
    total += prod

    for k in range(1, steps):
        j = _ctz(k)  # Gray transition flips delta_{j+1}
        i = j + 1
        sign = -sign
        # the flipped delta moved by -2 sign_new ... update via +-2 row i
        if _gray_bit(k, j):
            for col in range(n):
                w[col] -= 2 * m[i, col]
        else:
            for col in range(n):
                w[col] += 2 * m[i, col]
        prod = 1
        for col in range(n):
            prod *= w[col]
        total += sign * prod
    return complex(total / <double> steps)


cdef inline bint _gray_bit(unsigned long long k, int j) nogil:
    # bit j of gray(k) = k ^ (k >> 1)
    return ((k ^ (k >> 1)) >> j) & 1


def ryser(a):
    """Per(a) via Ryser's inclusion-exclusion over column subsets."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(m[0, 0])

    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w = np.zeros(n, dtype=np.complex128)
    cdef double complex total = 0
    cdef double complex prod
    cdef unsigned long long k, steps = 1ULL << n
    cdef int j, popcount = 0
    cdef Py_ssize_t row

    for k in range(1, steps):
        j = _ctz(k)
        if _gray_bit(k, j):  # column j enters the subset
            popcount += 1
            for row in range(n):
                w[row] += m[row, j]
        else:
            popcount -= 1
            for row in range(n):
                w[row] -= m[row, j]
        prod = 1
        for row in range(n):
            prod *= w[row]
        total += prod if (popcount & 1) == 0 else -prod
    if n & 1:
        total = -total
    return complex(total)
