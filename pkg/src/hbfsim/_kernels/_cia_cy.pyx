# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled column-iterative ascent sweep.

Same in-place contract as the numpy fallback: one Gauss-Seidel sweep over
all columns/rows of ``b`` maximizing ``|det(b^H d b)|`` under the
constant-modulus constraint.  The reduced Gram solve and the Schur
complement use BLAS/LAPACK directly, which is what makes large-array
sweeps affordable on a single core.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm, zgemv
from scipy.linalg.cython_lapack cimport zgesv

cnp.import_array()

ctypedef double complex zdouble


cdef inline zdouble zconj(zdouble z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline bint _has_nan(zdouble *a, int count) noexcept nogil:
    cdef int i
    for i in range(count):
        if a[i] != a[i]:
            return True
    return False


def cia_sweep(cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] d,
              cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] b,
              double scale, double reg_eps):
    """Run one ascent sweep in place on ``b``; see the numpy fallback for
    the full contract.  Returns ``(max_delta, n_reg)``."""
    cdef int n = d.shape[0]
    cdef int m = b.shape[1]
    cdef int mm = m - 1
    cdef int j, i, l, col_idx, info
    cdef int ione = 1
    cdef double max_delta = 0.0
    cdef double ad, mag, ridge, tr
    cdef int n_reg = 0
    cdef zdouble Z_ONE = 1.0
    cdef zdouble Z_ZERO = 0.0
    cdef zdouble Z_MONE = -1.0
    cdef zdouble s, newv, delta

    if b.shape[0] != n or d.shape[1] != n:
        raise ValueError("shape mismatch between d and b")

    # Fortran-order scratch; sizes are small so per-sweep allocation is
    # negligible next to the BLAS work.
    bbar_a = np.empty((n, mm if mm > 0 else 1), dtype=np.complex128, order="F")
    db_a = np.empty_like(bbar_a)
    c_a = np.empty((mm if mm > 0 else 1,) * 2, dtype=np.complex128, order="F")
    csave_a = np.empty_like(c_a)
    rhs_a = np.empty((mm if mm > 0 else 1, n), dtype=np.complex128, order="F")
    g_a = np.empty((n, n), dtype=np.complex128, order="F")
    t_a = np.empty(n, dtype=np.complex128)
    col_a = np.empty(n, dtype=np.complex128)
    ipiv_a = np.empty(mm if mm > 0 else 1, dtype=np.intc)

    cdef zdouble *pd = <zdouble *> cnp.PyArray_DATA(d)
    cdef zdouble *pb = <zdouble *> cnp.PyArray_DATA(b)
    cdef zdouble *pbbar = <zdouble *> cnp.PyArray_DATA(bbar_a)
    cdef zdouble *pdb = <zdouble *> cnp.PyArray_DATA(db_a)
    cdef zdouble *pc = <zdouble *> cnp.PyArray_DATA(c_a)
    cdef zdouble *pcs = <zdouble *> cnp.PyArray_DATA(csave_a)
    cdef zdouble *prhs = <zdouble *> cnp.PyArray_DATA(rhs_a)
    cdef zdouble *pg = <zdouble *> cnp.PyArray_DATA(g_a)
    cdef zdouble *pt = <zdouble *> cnp.PyArray_DATA(t_a)
    cdef zdouble *pcol = <zdouble *> cnp.PyArray_DATA(col_a)
    cdef int *pipiv = <int *> cnp.PyArray_DATA(ipiv_a)

    for j in range(m):
        for i in range(n):
            pcol[i] = pb[i * m + j]

        if mm == 0:
            # single column: the complement term vanishes, g is d itself
            for i in range(n):
                for l in range(n):
                    pg[i + l * n] = pd[i * n + l]  # transpose copy C -> F
        else:
            col_idx = 0
            for l in range(m):
                if l == j:
                    continue
                for i in range(n):
                    pbbar[col_idx * n + i] = pb[i * m + l]
                col_idx += 1
            # db = d @ bbar; the C-order buffer of d reads as d^T in
            # Fortran, so request op(A) = A^T.
            zgemm("T", "N", &n, &mm, &n, &Z_ONE, pd, &n, pbbar, &n,
                  &Z_ZERO, pdb, &n)
            # c = bbar^H @ db
            zgemm("C", "N", &mm, &mm, &n, &Z_ONE, pbbar, &n, pdb, &n,
                  &Z_ZERO, pc, &mm)
            memcpy(pcs, pc, mm * mm * sizeof(zdouble))
            for i in range(n):
                for l in range(mm):
                    prhs[l + i * mm] = zconj(pdb[i + l * n])
            zgesv(&mm, &n, pc, &mm, pipiv, prhs, &mm, &info)
            if info != 0 or _has_nan(prhs, mm * n):
                n_reg += 1
                tr = 0.0
                for l in range(mm):
                    tr += pcs[l + l * mm].real
                ridge = reg_eps * (tr / mm)
                memcpy(pc, pcs, mm * mm * sizeof(zdouble))
                for l in range(mm):
                    pc[l + l * mm] = pc[l + l * mm] + ridge
                for i in range(n):
                    for l in range(mm):
                        prhs[l + i * mm] = zconj(pdb[i + l * n])
                zgesv(&mm, &n, pc, &mm, pipiv, prhs, &mm, &info)
                if info != 0 or _has_nan(prhs, mm * n):
                    raise RuntimeError(
                        "reduced system singular after regularization")
            # g = d - db @ (c^{-1} db^H)
            for i in range(n):
                for l in range(n):
                    pg[i + l * n] = pd[i * n + l]
            zgemm("N", "N", &n, &n, &mm, &Z_MONE, pdb, &n, prhs, &mm,
                  &Z_ONE, pg, &n)

        # t = g @ col, then rank-1 refresh after each accepted entry
        zgemv("N", &n, &n, &Z_ONE, pg, &n, pcol, &ione, &Z_ZERO, pt, &ione)
        for i in range(n):
            s = pt[i] - pg[i + i * n] * pcol[i]
            mag = sqrt(s.real * s.real + s.imag * s.imag)
            if mag > 0.0:
                newv = scale * s / mag
            else:
                newv = scale + 0j
            delta = newv - pcol[i]
            ad = sqrt(delta.real * delta.real + delta.imag * delta.imag)
            if ad > 0.0:
                if ad > max_delta:
                    max_delta = ad
                pcol[i] = newv
                for l in range(n):
                    pt[l] = pt[l] + pg[l + i * n] * delta

        for i in range(n):
            pb[i * m + j] = pcol[i]

    return max_delta, n_reg
