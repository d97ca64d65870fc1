"""Symmetric and SPD matrix algebra.

Every function accepts stacks of matrices with shape ``(..., n, n)`` and
broadcasts over the leading axes.  Symmetric matrices are plain ``ndarray``
objects; :func:`as_sym` and :func:`as_spd` are the validating constructors.
"""

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

#: relative asymmetry silently removed by :func:`as_sym`
SYM_RTOL = 1e-9
#: smallest admissible eigenvalue ratio lambda_min / lambda_max
SPD_RTOL = 1e-12
#: relative size at which a power series is truncated
SERIES_RTOL = 1e-16
_MAX_SERIES_TERMS = 400


def transpose(a):
    return np.swapaxes(a, -1, -2)


def sym(a):
    """Symmetric part ``(A + A^T) / 2``, no validation."""
    return 0.5 * (a + transpose(a))


def eye_like(a):
    n = np.shape(a)[-1]
    return np.broadcast_to(np.eye(n), np.shape(a))


def dim(a):
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatchError(f"expected square matrices, got shape {a.shape}")
    return a.shape[-1]


def check_same_dim(*mats):
    n = {dim(m) for m in mats}
    if len(n) != 1:
        raise DimensionMismatchError(f"matrix dimensions differ: {sorted(n)}")
    return n.pop()


def frob(a):
    """Frobenius norm over the last two axes."""
    return np.sqrt(np.sum(np.square(a), axis=(-2, -1)))


def as_sym(a):
    """Validate and symmetrize.

    Asymmetry up to ``SYM_RTOL`` relative to the Frobenius norm is treated as
    roundoff and removed; anything larger raises :class:`NotSymmetricError`.
    """
    a = np.asarray(a, dtype=float)
    dim(a)
    if not np.all(np.isfinite(a)):
        raise NotSymmetricError("matrix has non-finite entries")
    skew = frob(a - transpose(a))
    scale = frob(a)
    bad = skew > SYM_RTOL * scale
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0]) if np.ndim(bad) else None
        raise NotSymmetricError(
            f"matrix is not symmetric (relative asymmetry "
            f"{float(np.max(skew / np.where(scale > 0, scale, 1))):.3g})"
            + ("" if idx is None else f" at batch index {idx}")
        )
    return sym(a)


def is_spd(a):
    """Boolean (per matrix) scale-invariant positive definiteness test."""
    w = np.linalg.eigvalsh(sym(np.asarray(a, dtype=float)))
    return (w[..., 0] > SPD_RTOL * w[..., -1]) & (w[..., -1] > 0)


def as_spd(a):
    """Validate symmetric positive definite input; returns the symmetrized array."""
    a = as_sym(a)
    ok = is_spd(a)
    if not np.all(ok):
        idx = int(np.flatnonzero(~ok)[0]) if np.ndim(ok) else None
        raise NotPositiveDefiniteError(
            "matrix is not positive definite"
            + ("" if idx is None else f" at batch index {idx}")
        )
    return a


def trace(a):
    return np.trace(a, axis1=-2, axis2=-1)


def traceless_part(h):
    """``H - tr(H)/n Id``.  Works for mixed (non-symmetric) tensors too."""
    h = np.asarray(h, dtype=float)
    n = dim(h)
    return h - (trace(h) / n)[..., None, None] * np.eye(n)


def trace_inner(h, k):
    """``tr(HK)`` without forming the product."""
    check_same_dim(h, k)
    return np.einsum("...ij,...ji->...", h, k)


def sym_func(a, fn):
    """Apply a scalar function spectrally to symmetric ``a``."""
    w, v = np.linalg.eigh(a)
    return sym((v * fn(w)[..., None, :]) @ transpose(v))


def sym_exp(a):
    """Matrix exponential of a symmetric matrix via ``eigh``."""
    return sym_func(np.asarray(a, dtype=float), np.exp)


def sym_log(p):
    """Principal logarithm of an SPD matrix; rejects non-SPD input."""
    return sym_func(as_spd(p), np.log)


def sym_sqrt(p):
    return sym_func(as_spd(p), np.sqrt)


def relative_log(g0, g):
    """Mixed tensor ``log(g0^{-1} g)``.

    Evaluated as ``g0^{-1/2} log(g0^{-1/2} g g0^{-1/2}) g0^{1/2}`` so the
    spectral work stays on symmetric matrices.  ``g0 @ result`` is symmetric.
    """
    g0 = as_spd(g0)
    g = as_spd(g)
    check_same_dim(g0, g)
    w, v = np.linalg.eigh(g0)
    vt = transpose(v)
    root = (v * np.sqrt(w)[..., None, :]) @ vt
    iroot = (v / np.sqrt(w)[..., None, :]) @ vt
    inner = sym_func(sym(iroot @ g @ iroot), np.log)
    return iroot @ inner @ root


def ad(l, k):
    """Commutator ``[L, K] = LK - KL``."""
    return l @ k - k @ l


def ad_series_operator(l, k):
    """Apply ``A_L = e^{tr(L)/2} sum_k 2 ad(L)^{2k} / (2k+2)!`` to ``K``.

    This is the operator of the metric pulled back along ``L -> g0 e^L``.
    The series stops once a term drops below ``SERIES_RTOL`` times the running
    sum.
    """
    l = np.asarray(l, dtype=float)
    k = np.asarray(k, dtype=float)
    check_same_dim(l, k)
    term = np.array(k, dtype=float, copy=True)  # 2/2! = 1
    total = term.copy()
    for j in range(1, _MAX_SERIES_TERMS):
        term = ad(l, ad(l, term)) / ((2 * j + 1) * (2 * j + 2))
        total = total + term
        if np.all(frob(term) <= SERIES_RTOL * frob(total)):
            break
    return np.exp(0.5 * trace(l))[..., None, None] * total
