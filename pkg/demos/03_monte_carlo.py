"""Run a reduced Monte Carlo batch and print the aggregate tables.

100 replications at (N, T) = (200, 200) keep the runtime to a few seconds;
raise `REPS` toward 500+ to tighten the Monte Carlo error. The aggregates
mirror the standard reporting layout: factor-count RMSE/bias, span-recovery
trace statistics, common-component RMSE, support-recovery FDR/power, and
strength-estimation bias/RMSE.
"""
from sparsefactors import SimConfig, run_replications

REPS = 100

cfg = SimConfig(N=200, T=200, r=3, alpha=(0.9, 0.75, 0.6), seed=2024)
report = run_replications(cfg, REPS, rmax=8, workers=2)
agg = report.aggregates

print(f"{REPS} replications, N=T=200, alpha={cfg.alpha}\n")

print("number of factors (true r = 3):")
print(f"  {'method':>6} {'rmse':>7} {'bias':>8} {'mean':>7}")
for m in ("wz", "bn", "ed", "ah"):
    s = agg["r_hat"][m]
    print(f"  {m:>6} {s['rmse']:7.3f} {s['bias']:+8.3f} {s['mean']:7.3f}")

print("\nestimation quality at the true r:")
print(f"  trace stat (factors)  {agg['mean_tr_f']:.3f}")
print(f"  trace stat (loadings) {agg['mean_tr_lambda']:.3f}")
print(f"  common-component RMSE {agg['mean_rmse_c']:.3f}")

print("\nsupport recovery:")
for k, (f, p) in enumerate(zip(agg["fdr"], agg["power"]), start=1):
    print(f"  factor {k}: FDR {f:.3f}  power {p:.3f}")
print(f"  overall : FDR {agg['mean_fdr_overall']:.3f}  power {agg['mean_power_overall']:.3f}")

print("\nfactor strengths:")
for k, s in enumerate(agg["alpha_hat"]):
    print(f"  alpha_{k + 1} (true {cfg.alpha[k]}): bias {s['bias']:+.3f}  rmse {s['rmse']:.3f}")
