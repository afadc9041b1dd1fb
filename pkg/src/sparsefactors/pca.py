"""Principal-component estimation of factors, loadings, and common components.

Estimation always decomposes the T x T Gram matrix ``X'X/(NT)`` (even when
N < T; the N x N form changes the normalization convention). Estimated
factors are ``sqrt(T)`` times the leading eigenvectors, loadings are
``X F / T``, and the fitted common component is ``Lambda F'``.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .panel import Panel


class StandardizationWarning(UserWarning):
    """Panel passed to pc_fit without prior standardization."""


@dataclass(frozen=True)
class SymEig:
    """Full symmetric eigendecomposition, eigenvalues nonincreasing.

    ``vectors[:, k]`` is the unit eigenvector for ``values[k]``, sign-fixed
    so its largest-magnitude entry is positive (ties resolved to the lowest
    index).
    """

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class PcFit:
    """Principal-component fit with ``r`` factors.

    Attributes
    ----------
    r : int
    factors : ndarray, shape (T, r)
        ``sqrt(T)`` times the top-r eigenvectors; ``factors' factors / T = I``.
    loadings : ndarray, shape (N, r)
        ``X factors / T``.
    eigvals : ndarray, shape (r,)
        Leading eigenvalues of ``X'X/(NT)``, nonincreasing.
    common : ndarray, shape (N, T)
        ``loadings @ factors.T``.
    resid : ndarray, shape (N, T)
        ``X - common``.
    """

    r: int
    factors: np.ndarray
    loadings: np.ndarray
    eigvals: np.ndarray
    common: np.ndarray
    resid: np.ndarray


def gram(panel: Panel) -> np.ndarray:
    """T x T matrix ``X'X/(NT)``, symmetrized to kill roundoff asymmetry."""
    x = panel.values
    n, t = x.shape
    g = x.T @ x / (n * t)
    return (g + g.T) / 2.0


def eig_sym_desc(matrix: np.ndarray) -> SymEig:
    """Full eigendecomposition of a symmetric matrix, sorted nonincreasing.

    Eigenvectors are sign-normalized: the entry of largest magnitude is made
    positive, ties broken by the lowest index. Exact-tie eigenvalues keep the
    solver's order.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    vals, vecs = np.linalg.eigh(m)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    # sign rule: largest-|entry| positive, ties -> lowest index
    absv = np.abs(vecs)
    pivot = np.argmax(absv == absv.max(axis=0, keepdims=True), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs
    return SymEig(values=vals, vectors=vecs)


def pc_fit(panel: Panel, r: int, eig: SymEig | None = None) -> PcFit:
    """Estimate an r-factor model by principal components.

    Parameters
    ----------
    panel : Panel
    r : int
        Number of factors, 1 <= r <= min(N, T).
    eig : SymEig, optional
        Precomputed decomposition of ``gram(panel)``; pass it when several
        fits share one panel so the decomposition is done once.

    Notes
    -----
    Warns (does not refuse) when the panel is not standardized.
    """
    x = panel.values
    n, t = x.shape
    if not 1 <= r <= min(n, t):
        raise ValueError(f"r must be in [1, {min(n, t)}], got {r}")
    if not panel.standardized:
        warnings.warn(
            "pc_fit called on a non-standardized panel", StandardizationWarning, stacklevel=2
        )
    if eig is None:
        eig = eig_sym_desc(gram(panel))
    factors = np.sqrt(t) * eig.vectors[:, :r]
    loadings = x @ factors / t
    common = loadings @ factors.T
    return PcFit(
        r=r,
        factors=factors,
        loadings=loadings,
        eigvals=eig.values[:r].copy(),
        common=common,
        resid=x - common,
    )


def sigma_hat(panel: Panel, rmax: int, eig: SymEig | None = None) -> float:
    """Mean squared residual of the rmax-factor PC fit.

    Estimates the average idiosyncratic variance ``(NT)^-1 sum E[e_it^2]``
    in the style of the residual variance behind information criteria.
    """
    fit = pc_fit(panel, rmax, eig=eig)
    return float(np.mean(fit.resid**2))


def export_pc_fit(fit: PcFit, panel: Panel) -> dict[str, str]:
    """Render a fit as three labeled CSV documents: factors, loadings, eigenvalues."""
    cols = [f"pc{k + 1}" for k in range(fit.r)]

    def table(row_label, row_ids, mat):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([row_label] + cols)
        for rid, row in zip(row_ids, mat):
            w.writerow([rid] + [repr(float(v)) for v in row])
        return buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "eigenvalue"])
    for k, v in enumerate(fit.eigvals, start=1):
        w.writerow([k, repr(float(v))])
    return {
        "factors": table("time", panel.time_ids, fit.factors),
        "loadings": table("series", panel.series_ids, fit.loadings),
        "eigenvalues": buf.getvalue(),
    }
