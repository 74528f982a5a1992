"""ROM differential-filter error studies.

Sweeps the filter radius at fixed mode count, then the mode count at
fixed radius, printing the average squared L2 / H1 filtering errors
and the fitted log-log convergence rates. On the full benchmark mesh
(n = 64, pass it as an argument) this reproduces the published delta-
and r-sweep tables; the default coarse mesh just shows the trends.

Run:  python3 demos/demo_filtering_error.py [mesh_n] [r]
"""

import sys

from romlab.study import StudyConfig, build_context, run_study


def show(result):
    cfg = result.config
    print(f"\n{cfg.kind}: fixed "
          + (f"r={cfg.r}" if cfg.kind == "filter-delta"
             else f"delta={cfg.delta:g}"))
    print(f"{cfg.param_name:>10} {'E_L2':>12} {'E_H1':>12} {'Lambda_H1':>12}")
    for rec in result.records:
        print(f"{rec.value:>10.4g} {rec.e_l2:>12.4e} {rec.e_h1:>12.4e} "
              f"{rec.lambda_h1:>12.4e}")
    if result.slope is not None:
        print(f"rates: L2 {result.slope:.2f} (R^2 {result.r_squared:.3f}), "
              f"H1 {result.slope_h1:.2f} (R^2 {result.r_squared_h1:.3f})")


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 16
    ctx = build_context(StudyConfig(kind="filter-delta", mesh_n=n, r=1))
    print(f"mesh n={n}, POD rank d={ctx.basis.d}")
    default_r = 95 if n >= 64 else max(1, ctx.basis.d - 3)
    r = int(sys.argv[2]) if len(sys.argv) > 2 else default_r
    base = StudyConfig(kind="filter-delta", mesh_n=n, r=r)

    show(run_study(base, ctx))

    d = ctx.basis.d
    r_sweep = (None if n >= 64
               else sorted({max(1, d // 5), d // 3, d // 2,
                            2 * d // 3, d - 2}))
    show(run_study(StudyConfig(kind="filter-r", mesh_n=n,
                               sweep=r_sweep), ctx))


if __name__ == "__main__":
    main()
