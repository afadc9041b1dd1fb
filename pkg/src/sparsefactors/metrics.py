"""Evaluation statistics for simulated panels.

Span recovery is measured with trace statistics (invariant to invertible
column mixing, so no sign/rotation alignment is needed), common components
with an entrywise root mean squared error, and support recovery with false
discovery proportions and recall. Per-factor quantities pair estimated
columns (eigenvalue order) with true columns (strength order) by rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _trace_stat(a0: np.ndarray, a_hat: np.ndarray) -> float:
    a0 = np.asarray(a0, dtype=float)
    a_hat = np.asarray(a_hat, dtype=float)
    if a0.shape[0] != a_hat.shape[0]:
        raise ValueError(f"row dimensions differ: {a0.shape[0]} vs {a_hat.shape[0]}")
    gram_hat = a_hat.T @ a_hat
    cross = a_hat.T @ a0
    try:
        sol = np.linalg.solve(gram_hat, cross)
    except np.linalg.LinAlgError as exc:
        raise ValueError("estimated matrix has singular Gram; trace statistic undefined") from exc
    return float(np.trace(cross.T @ sol) / np.trace(a0.T @ a0))


def trace_stat_f(f0: np.ndarray, f_hat: np.ndarray) -> float:
    """Share of the true factors' energy captured by the estimated span.

    ``Tr(F0' Fh (Fh'Fh)^-1 Fh' F0) / Tr(F0' F0)``; equals 1 exactly when the
    spans coincide, regardless of any invertible right-multiplication.
    """
    return _trace_stat(f0, f_hat)


def trace_stat_lambda(lambda0: np.ndarray, lambda_hat: np.ndarray) -> float:
    """Trace statistic for loadings; same formula with loadings in place of factors."""
    return _trace_stat(lambda0, lambda_hat)


def rmse_c(c0: np.ndarray, c_hat: np.ndarray) -> float:
    """Entrywise RMSE between common components: ``sqrt(mean((Ch - C0)^2))``."""
    c0 = np.asarray(c0, dtype=float)
    c_hat = np.asarray(c_hat, dtype=float)
    if c0.shape != c_hat.shape:
        raise ValueError(f"shape mismatch: {c0.shape} vs {c_hat.shape}")
    return float(np.sqrt(np.mean((c_hat - c0) ** 2)))


def fdr_power(true_support, est_support) -> tuple[float, float]:
    """Per-replication false discovery proportion and recall.

    ``fdp = |S^c & Sh| / (|Sh| v 1)`` and ``power = |S & Sh| / (|S| v 1)``;
    the ``v 1`` guards make empty sets well-defined (empty estimate gives
    (0, 0) against a nonempty truth).
    """
    s = frozenset(true_support)
    sh = frozenset(est_support)
    fdp = len(sh - s) / max(len(sh), 1)
    power = len(sh & s) / max(len(s), 1)
    return fdp, power


def pooled_fdr_power(true_supports, est_supports, n: int) -> tuple[float, float]:
    """Overall FDP/recall pooling all factors' (unit, factor) loading cells."""
    if len(true_supports) != len(est_supports):
        raise ValueError("need one estimated support per true support")
    s = {(k, i) for k, sup in enumerate(true_supports) for i in sup}
    sh = {(k, i) for k, sup in enumerate(est_supports) for i in sup}
    fdp = len(sh - s) / max(len(sh), 1)
    power = len(sh & s) / max(len(s), 1)
    return fdp, power


def rotation_q(f_hat: np.ndarray, f0: np.ndarray, alpha=None) -> tuple[np.ndarray, dict]:
    """Alignment matrix ``Q = Fh' F0 / T`` with a triangularity summary.

    When the true strength vector ``alpha`` is supplied, the summary scales
    each strictly-lower entry as ``|Q_lk| * N^(alpha_k - alpha_l)``-free form:
    it reports the raw ``|Q_lk|`` for l > k so trend checks across N can
    apply their own scaling, plus the smallest singular value of Q.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    if f_hat.shape[0] != f0.shape[0]:
        raise ValueError("factor matrices must share the time dimension")
    t = f_hat.shape[0]
    q = f_hat.T @ f0 / t
    lower = {
        (l + 1, k + 1): float(abs(q[l, k]))
        for l in range(q.shape[0])
        for k in range(q.shape[1])
        if l > k
    }
    summary = {
        "lower_abs": lower,
        "min_singular_value": float(np.linalg.svd(q, compute_uv=False)[-1]),
    }
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=float)
        summary["alpha"] = alpha.tolist()
    return q, summary


@dataclass
class ReplicationRecord:
    """Raw per-replication metric values; aggregation is a fold over these."""

    rep: int
    r_hat: dict = field(default_factory=dict)
    tr_f: float | None = None
    tr_lambda: float | None = None
    rmse_c: float | None = None
    fdr: tuple | None = None
    power: tuple | None = None
    fdr_overall: float | None = None
    power_overall: float | None = None
    alpha_hat: tuple | None = None
    sym_diff: tuple | None = None
    eigvals: tuple | None = None
    q_lower_abs: dict | None = None
    q_min_sv: float | None = None
    error: str | None = None


@dataclass
class MetricsReport:
    """Per-replication records plus exact aggregate statistics."""

    config: dict
    per_rep: list
    aggregates: dict

    def to_json(self) -> dict:
        per_rep = []
        for rec in self.per_rep:
            per_rep.append(
                {
                    "rep": rec.rep,
                    "r_hat": rec.r_hat,
                    "tr_f": rec.tr_f,
                    "tr_lambda": rec.tr_lambda,
                    "rmse_c": rec.rmse_c,
                    "fdr": list(rec.fdr) if rec.fdr is not None else None,
                    "power": list(rec.power) if rec.power is not None else None,
                    "fdr_overall": rec.fdr_overall,
                    "power_overall": rec.power_overall,
                    "alpha_hat": list(rec.alpha_hat) if rec.alpha_hat is not None else None,
                    "sym_diff": list(rec.sym_diff) if rec.sym_diff is not None else None,
                    "eigvals": list(rec.eigvals) if rec.eigvals is not None else None,
                    "q_min_sv": rec.q_min_sv,
                    "error": rec.error,
                }
            )
        return {"config": self.config, "aggregates": self.aggregates, "per_rep": per_rep}


def _rmse_bias(values: np.ndarray, target: float) -> tuple[float, float]:
    err = values - target
    return float(np.sqrt(np.mean(err**2))), float(np.mean(err))


def aggregate(records, true_r: int, alpha) -> dict:
    """Fold replication records into the aggregate block of a MetricsReport.

    Deterministic given the records; incomplete cells (failed replications or
    estimators not requested) are reported as None rather than poisoning the
    rest of the table.
    """
    ok = [rec for rec in records if rec.error is None]
    agg: dict = {
        "replications": len(records),
        "failed": len(records) - len(ok),
    }
    methods = sorted({m for rec in ok for m in rec.r_hat})
    agg["r_hat"] = {}
    for m in methods:
        vals = np.array([rec.r_hat[m] for rec in ok if m in rec.r_hat], dtype=float)
        rmse, bias = _rmse_bias(vals, true_r)
        agg["r_hat"][m] = {"rmse": rmse, "bias": bias, "mean": float(vals.mean())}
    for name in ("tr_f", "tr_lambda", "rmse_c", "fdr_overall", "power_overall"):
        vals = [getattr(rec, name) for rec in ok if getattr(rec, name) is not None]
        agg[f"mean_{name}"] = float(np.mean(vals)) if vals else None
    r = len(alpha)
    have_sup = [rec for rec in ok if rec.fdr is not None]
    if have_sup:
        agg["fdr"] = [float(np.mean([rec.fdr[k] for rec in have_sup])) for k in range(r)]
        agg["power"] = [float(np.mean([rec.power[k] for rec in have_sup])) for k in range(r)]
    have_alpha = [rec for rec in ok if rec.alpha_hat is not None]
    if have_alpha:
        agg["alpha_hat"] = []
        for k in range(r):
            vals = np.array([rec.alpha_hat[k] for rec in have_alpha])
            rmse, bias = _rmse_bias(vals, float(alpha[k]))
            agg["alpha_hat"].append({"rmse": rmse, "bias": bias, "mean": float(vals.mean())})
    have_sd = [rec for rec in ok if rec.sym_diff is not None]
    if have_sd:
        agg["median_sym_diff"] = [
            float(np.median([rec.sym_diff[k] for rec in have_sd])) for k in range(r)
        ]
    have_ev = [rec for rec in ok if rec.eigvals is not None]
    if have_ev:
        agg["median_eigvals"] = [
            float(np.median([rec.eigvals[k] for rec in have_ev])) for k in range(r)
        ]
    have_q = [rec for rec in ok if rec.q_lower_abs is not None]
    if have_q:
        keys = sorted(have_q[0].q_lower_abs)
        agg["median_q_lower_abs"] = {
            f"{l},{k}": float(np.median([rec.q_lower_abs[(l, k)] for rec in have_q]))
            for (l, k) in keys
        }
        agg["q_full_rank_share"] = float(
            np.mean([rec.q_min_sv > 0.05 for rec in have_q if rec.q_min_sv is not None])
        )
    return agg
