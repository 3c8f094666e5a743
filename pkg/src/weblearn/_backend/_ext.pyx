# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of ``weblearn._backend.pyref``; same update rules,
C loops instead of vectorized numpy."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs
from scipy.special.cython_special cimport psi as c_psi

cnp.import_array()


def sgd_epoch(double[:, ::1] X, double[::1] y, double[::1] v, long[::1] perm,
              double[::1] w, double[::1] b, long t, double eta0, double decay,
              long batch_size, int loss_id, double reg_coef, bint fit_intercept):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]
    cdef Py_ssize_t start, stop, nb, p, i, j
    cdef double lr, s, margin, coeff, gb, inv_nb
    cdef double[::1] gw = np.empty(m, dtype=np.float64)

    for start in range(0, n, batch_size):
        stop = start + batch_size
        if stop > n:
            stop = n
        nb = stop - start
        inv_nb = 1.0 / nb
        lr = eta0 / (1.0 + decay * t)
        t += 1
        for j in range(m):
            gw[j] = reg_coef * w[j]
        gb = 0.0
        for p in range(start, stop):
            i = perm[p]
            s = b[0]
            for j in range(m):
                s += X[i, j] * w[j]
            margin = y[i] * s
            if loss_id == 0:
                coeff = -y[i] if margin < 1.0 else 0.0
            elif loss_id == 1:
                coeff = -2.0 * y[i] * (1.0 - margin) if margin < 1.0 else 0.0
            else:
                if margin >= 0.0:
                    coeff = -y[i] * (exp(-margin) / (1.0 + exp(-margin)))
                else:
                    coeff = -y[i] * (1.0 / (1.0 + exp(margin)))
            coeff *= v[i]
            if coeff != 0.0:
                for j in range(m):
                    gw[j] += coeff * X[i, j] * inv_nb
                gb += coeff
        for j in range(m):
            w[j] -= lr * gw[j]
        if fit_intercept:
            b[0] -= lr * (gb * inv_nb)
    return t


def lda_e_step(int[::1] ids, double[::1] cts, long[::1] offsets,
               double[:, ::1] exp_elog_beta, double alpha,
               double[:, ::1] gamma, double[:, ::1] sstats,
               long doc_iters, double tol):
    cdef Py_ssize_t n_docs = gamma.shape[0]
    cdef Py_ssize_t K = gamma.shape[1]
    cdef Py_ssize_t d, lo, hi, nd, it, k, n2
    cdef double gsum, change, phin, ratio
    cdef double[::1] gammad = np.empty(K, dtype=np.float64)
    cdef double[::1] last = np.empty(K, dtype=np.float64)
    cdef double[::1] exp_elog = np.empty(K, dtype=np.float64)
    cdef double[::1] phinorm

    cdef Py_ssize_t max_len = 0
    for d in range(n_docs):
        if offsets[d + 1] - offsets[d] > max_len:
            max_len = offsets[d + 1] - offsets[d]
    phinorm = np.empty(max(max_len, 1), dtype=np.float64)

    for d in range(n_docs):
        lo = offsets[d]
        hi = offsets[d + 1]
        nd = hi - lo
        if nd == 0:
            continue
        gsum = 0.0
        for k in range(K):
            gammad[k] = gamma[d, k]
            gsum += gammad[k]
        for k in range(K):
            exp_elog[k] = exp(c_psi(gammad[k]) - c_psi(gsum))
        for n2 in range(nd):
            phin = 0.0
            for k in range(K):
                phin += exp_elog[k] * exp_elog_beta[k, ids[lo + n2]]
            phinorm[n2] = phin + 1e-100
        for it in range(doc_iters):
            for k in range(K):
                last[k] = gammad[k]
            for k in range(K):
                ratio = 0.0
                for n2 in range(nd):
                    ratio += (cts[lo + n2] / phinorm[n2]) * exp_elog_beta[k, ids[lo + n2]]
                gammad[k] = alpha + exp_elog[k] * ratio
            gsum = 0.0
            for k in range(K):
                gsum += gammad[k]
            for k in range(K):
                exp_elog[k] = exp(c_psi(gammad[k]) - c_psi(gsum))
            for n2 in range(nd):
                phin = 0.0
                for k in range(K):
                    phin += exp_elog[k] * exp_elog_beta[k, ids[lo + n2]]
                phinorm[n2] = phin + 1e-100
            change = 0.0
            for k in range(K):
                change += fabs(gammad[k] - last[k])
            if change / K < tol:
                break
        for k in range(K):
            gamma[d, k] = gammad[k]
        for n2 in range(nd):
            ratio = cts[lo + n2] / phinorm[n2]
            for k in range(K):
                sstats[k, ids[lo + n2]] += exp_elog[k] * ratio
