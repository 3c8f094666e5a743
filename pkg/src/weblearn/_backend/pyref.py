"""Pure-numpy reference implementations of the hot kernels.

The compiled extension mirrors these update rules exactly; keep the two
in lockstep when changing either.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, psi


def sgd_epoch(X, y, v, perm, w, b, t, eta0, decay, batch_size, loss_id, reg_coef, fit_intercept):
    """One epoch of weighted mini-batch SGD; updates ``w`` and ``b`` (a
    1-element array) in place and returns the advanced update counter.

    Per batch: lr = eta0 / (1 + decay * t); gradient is the batch mean of
    v_i * dL/ds_i * x_i plus ``reg_coef * w`` (the caller scales the L2
    coefficient by 2/n so the mean-gradient step matches the summed
    objective).
    """
    n = X.shape[0]
    for start in range(0, n, batch_size):
        idx = perm[start : start + batch_size]
        nb = idx.shape[0]
        lr = eta0 / (1.0 + decay * t)
        t += 1
        Xb = X[idx]
        s = Xb @ w + b[0]
        margins = y[idx] * s
        if loss_id == 0:  # hinge
            coeff = np.where(margins < 1.0, -y[idx], 0.0)
        elif loss_id == 1:  # squared hinge
            coeff = np.where(margins < 1.0, -2.0 * y[idx] * (1.0 - margins), 0.0)
        else:  # logistic
            coeff = -y[idx] * expit(-margins)
        coeff = coeff * v[idx]
        gw = Xb.T @ coeff / nb + reg_coef * w
        w -= lr * gw
        if fit_intercept:
            b[0] -= lr * (coeff.sum() / nb)
    return t


def lda_e_step(ids, cts, offsets, exp_elog_beta, alpha, gamma, sstats, doc_iters, tol):
    """Coordinate-ascent E-step over a corpus.

    ``gamma`` (D, K) is warm-started in place; ``sstats`` (K, V)
    accumulates exp(Elog theta)_k * cts / phinorm per token (the caller
    multiplies by exp(Elog beta) afterwards).  Documents are processed in
    order so accumulation is deterministic.
    """
    n_docs = gamma.shape[0]
    for d in range(n_docs):
        lo, hi = offsets[d], offsets[d + 1]
        if hi == lo:
            continue
        ids_d = ids[lo:hi]
        cts_d = cts[lo:hi]
        gammad = gamma[d]
        beta_d = exp_elog_beta[:, ids_d]
        elog = psi(gammad) - psi(gammad.sum())
        exp_elog = np.exp(elog)
        phinorm = exp_elog @ beta_d + 1e-100
        for _ in range(doc_iters):
            last = gammad
            gammad = alpha + exp_elog * ((cts_d / phinorm) @ beta_d.T)
            elog = psi(gammad) - psi(gammad.sum())
            exp_elog = np.exp(elog)
            phinorm = exp_elog @ beta_d + 1e-100
            if np.abs(gammad - last).mean() < tol:
                break
        gamma[d] = gammad
        sstats[:, ids_d] += np.outer(exp_elog, cts_d / phinorm)
