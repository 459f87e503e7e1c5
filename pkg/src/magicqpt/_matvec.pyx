# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matrix-free action of real X/Z-type Pauli sums."""

cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil


def matvec_real(const double[::1] diag, const long long[::1] xmasks,
                const long long[::1] zmasks, const double[::1] coeffs,
                const double[::1] v, double[::1] out):
    """out[t] = diag[t] v[t] + sum_j c_j (-1)^{pop((t^x_j) & z_j)} v[t ^ x_j]."""
    cdef Py_ssize_t dim = v.shape[0]
    cdef Py_ssize_t nt = coeffs.shape[0]
    cdef Py_ssize_t t, j
    cdef unsigned long long s
    cdef double acc
    with nogil:
        for t in range(dim):
            acc = diag[t] * v[t]
            for j in range(nt):
                s = (<unsigned long long> t) ^ (<unsigned long long> xmasks[j])
                if __builtin_parityll(s & (<unsigned long long> zmasks[j])):
                    acc = acc - coeffs[j] * v[s]
                else:
                    acc = acc + coeffs[j] * v[s]
            out[t] = acc
