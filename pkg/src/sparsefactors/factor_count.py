"""Estimators of the number of factors.

Four selectors over a shared eigendecomposition of ``X'X/(NT)``:

* ``select_r_svt`` - singular-value thresholding: count the eigenvalues at or
  above ``sigma2 * N^{-1/2} * sqrt(ln ln N)``.
* ``select_r_icp1`` - the IC_p1 information criterion.
* ``select_r_ed`` - Onatski's edge-distribution estimator (iterated OLS wedge
  on eigenvalue differences, slope doubled).
* ``select_r_ah`` - Ahn-Horenstein eigenvalue ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .panel import Panel
from .pca import SymEig, eig_sym_desc, gram, pc_fit

DEFAULT_RMAX = 8


@dataclass(frozen=True)
class FactorCountResult:
    """Outcome of one selection rule.

    ``diagnostics`` holds one ``(k, statistic, threshold_or_criterion)``
    triple per candidate k (the ED rule appends its iteration trace);
    ``notes`` flags degenerate paths such as rank-deficient panels.
    """

    method: str
    r_hat: int
    rmax: int
    diagnostics: tuple = ()
    notes: tuple = ()


def _prep(panel: Panel, rmax: int, eig: SymEig | None) -> SymEig:
    n, t = panel.values.shape
    if not 1 <= rmax <= min(n, t):
        raise ValueError(f"rmax must be in [1, {min(n, t)}], got {rmax}")
    return eig if eig is not None else eig_sym_desc(gram(panel))


def select_r_svt(panel: Panel, rmax: int = DEFAULT_RMAX, eig: SymEig | None = None) -> FactorCountResult:
    """Largest k whose eigenvalue clears ``sigma2 N^{-1/2} (ln ln N)^{1/2}``.

    ``sigma2`` is the mean squared residual of the rmax-factor fit. Returns
    r_hat = 0 when no eigenvalue clears the threshold. Exactly low-rank data
    (sigma2 = 0) make the rule vacuous; the rank of X capped at rmax is
    returned with a note.
    """
    n, t = panel.values.shape
    if n < 16:
        raise ValueError(f"N must be at least 16 for the double-log threshold, got {n}")
    eig = _prep(panel, rmax, eig)
    fit = pc_fit(panel, rmax, eig=eig)
    sigma2 = float(np.mean(fit.resid**2))
    notes = []
    if sigma2 <= 1e-12 * max(float(np.mean(panel.values**2)), 1e-300):
        rank = int(np.linalg.matrix_rank(panel.values))
        r_hat = min(rank, rmax)
        notes.append("rank-deficient: sigma2 = 0, returned rank(X) capped at rmax")
        thr = 0.0
    else:
        thr = sigma2 * n**-0.5 * math.sqrt(math.log(math.log(n)))
        above = np.nonzero(eig.values[:rmax] >= thr)[0]
        r_hat = int(above.max()) + 1 if above.size else 0
    diags = tuple((k + 1, float(eig.values[k]), thr) for k in range(rmax))
    return FactorCountResult("WZ_SVT", r_hat, rmax, diags, tuple(notes))


def select_r_icp1(panel: Panel, rmax: int = DEFAULT_RMAX, eig: SymEig | None = None) -> FactorCountResult:
    """IC_p1: minimize ``ln V(k) + k ((N+T)/NT) ln(NT/(N+T))`` over k = 1..rmax."""
    n, t = panel.values.shape
    eig = _prep(panel, rmax, eig)
    penalty = (n + t) / (n * t) * math.log(n * t / (n + t))
    vks = np.empty(rmax)
    for k in range(1, rmax + 1):
        vks[k - 1] = np.mean(pc_fit(panel, k, eig=eig).resid ** 2)
    zero_floor = 1e-12 * max(float(np.mean(panel.values**2)), 1e-300)
    if np.any(vks <= zero_floor):
        k0 = int(np.nonzero(vks <= zero_floor)[0][0]) + 1
        diags = tuple((k + 1, float(vks[k]), float("-inf")) for k in range(rmax))
        return FactorCountResult(
            "BN_ICP1", k0, rmax, diags, ("rank-deficient: exact fit at k = %d" % k0,)
        )
    ic = np.log(vks) + np.arange(1, rmax + 1) * penalty
    r_hat = int(np.argmin(ic)) + 1  # argmin takes the lowest k on ties
    diags = tuple((k + 1, float(vks[k]), float(ic[k])) for k in range(rmax))
    return FactorCountResult("BN_ICP1", r_hat, rmax, diags)


def select_r_ed(panel: Panel, rmax: int = DEFAULT_RMAX, eig: SymEig | None = None) -> FactorCountResult:
    """Onatski's edge-distribution rule on eigenvalues of ``XX'/T``.

    The wedge ``delta`` is twice the absolute OLS slope of the five
    eigenvalues ``gamma_j .. gamma_{j+4}`` regressed on
    ``(j-1)^{2/3} .. (j+3)^{2/3}``; iteration starts at j = rmax + 1 and
    stops at a fixed point or after 10 rounds (note attached in that case).
    """
    n, t = panel.values.shape
    if rmax + 5 > min(n, t):
        raise ValueError(f"need rmax + 5 <= min(N, T); got rmax={rmax}, min={min(n, t)}")
    eig = _prep(panel, rmax, eig)
    # eigenvalues of XX'/T equal N times those of X'X/(NT) on the shared spectrum
    gamma = n * eig.values
    j = rmax + 1
    r_hat = 0
    trace = []
    converged = False
    for _ in range(10):
        y = gamma[j - 1 : j + 4]
        x = np.arange(j - 1, j + 4, dtype=float) ** (2.0 / 3.0)
        xc = x - x.mean()
        slope = float(xc @ (y - y.mean()) / (xc @ xc))
        delta = 2.0 * abs(slope)
        gaps = gamma[:rmax] - gamma[1 : rmax + 1]
        hit = np.nonzero(gaps >= delta)[0]
        candidate = int(hit.max()) + 1 if hit.size else 0
        trace.append((j, delta, candidate))
        if candidate + 1 == j:
            r_hat = candidate
            converged = True
            break
        j = candidate + 1
        r_hat = candidate
    diags = tuple((k + 1, float(gamma[k] - gamma[k + 1]), trace[-1][1]) for k in range(rmax))
    diags = diags + tuple(("iter", float(d), float(c)) for (_, d, c) in trace)
    notes = () if converged else ("max-iterations: returned last candidate",)
    return FactorCountResult("ED", r_hat, rmax, diags, notes)


def select_r_ah(panel: Panel, rmax: int = DEFAULT_RMAX, eig: SymEig | None = None) -> FactorCountResult:
    """Eigenvalue-ratio rule: argmax of ``mu_k / mu_{k+1}`` over k = 1..rmax."""
    n, t = panel.values.shape
    if rmax + 1 > min(n, t):
        raise ValueError(f"need rmax + 1 <= min(N, T); got rmax={rmax}, min={min(n, t)}")
    eig = _prep(panel, rmax, eig)
    mu = eig.values
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(mu[1 : rmax + 1] > 0, mu[:rmax] / mu[1 : rmax + 1], np.inf)
    r_hat = int(np.argmax(ratios)) + 1  # lowest k on ties
    diags = tuple((k + 1, float(ratios[k]), float("nan")) for k in range(rmax))
    return FactorCountResult("AH", r_hat, rmax, diags)


SELECTORS = {
    "wz": select_r_svt,
    "bn": select_r_icp1,
    "ed": select_r_ed,
    "ah": select_r_ah,
}


def select_r(panel: Panel, methods, rmax: int = DEFAULT_RMAX) -> dict[str, FactorCountResult]:
    """Run several selection rules on one shared decomposition."""
    unknown = [m for m in methods if m not in SELECTORS]
    if unknown:
        raise ValueError(f"unknown factor-count methods {unknown}; choose from {sorted(SELECTORS)}")
    eig = eig_sym_desc(gram(panel))
    return {m: SELECTORS[m](panel, rmax=rmax, eig=eig) for m in methods}


def diagnostics_json(results: dict[str, FactorCountResult]) -> dict:
    """JSON-ready per-method diagnostics: statistic and threshold per k, chosen r."""
    out = {}
    for m, res in results.items():
        out[m] = {
            "method": res.method,
            "r_hat": res.r_hat,
            "rmax": res.rmax,
            "diagnostics": [list(d) for d in res.diagnostics],
            "notes": list(res.notes),
        }
    return out
