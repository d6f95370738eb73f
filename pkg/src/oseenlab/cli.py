"""Command-line front end for batch runs and post-hoc queries."""

import argparse
import sys

import numpy as np

from .harness import (
    ConfigError,
    SnapshotFormatError,
    alpha_scaling_study,
    fit_rate,
    load_config,
    read_csv,
    rescaling_check,
    run_linear,
    run_linear_oseen,
    run_nonlinear_decay,
    verify_semigroup_estimates,
)


def _cmd_run(args):
    cfg = load_config(args.config)
    if cfg.mode == "nonlinear":
        series = run_nonlinear_decay(cfg)
    elif cfg.mode == "linear_H":
        series = run_linear_oseen(cfg)
    elif cfg.mode == "linear":
        series = run_linear(cfg)
    else:
        raise ConfigError(f"run expects mode nonlinear, linear or linear_H,"
                          f" got {cfg.mode}")
    for label in series.labels():
        for p in sorted({r.p for r in series.rows if r.label == label}):
            ts, vals = series.values(label, p)
            print(f"{label} p={p:g}: "
                  + "  ".join(f"t={t:g}:{v:.6g}" for t, v in zip(ts, vals)))
    if cfg.csv_out:
        print(f"wrote {cfg.csv_out}")
    return 0


def _cmd_estimates(args):
    cfg = load_config(args.config)
    report = verify_semigroup_estimates(cfg)
    text = report.to_text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    return 0


def _cmd_alpha_study(args):
    cfg = load_config(args.config)
    table, _ = alpha_scaling_study(cfg)
    print("alpha,sup_z_l2")
    for alpha, sup in table:
        print(f"{alpha:g},{sup:.12g}")
    return 0


def _cmd_rescale(args):
    cfg = load_config(args.config)
    report = rescaling_check(cfg)
    print(f"lambda={report.lam:g} t={report.t:g} "
          f"rel_l4_discrepancy={report.rel_l4_discrepancy:.6g}")
    return 0


def _cmd_rate_fit(args):
    series = read_csv(args.csv)
    fit = fit_rate(series, (args.t_min, args.t_max), label=args.label, p=args.p)
    print(f"slope={fit.slope:.8g} intercept={fit.intercept:.8g} "
          f"residual={fit.residual:.3g} probes={fit.count}")
    return 0


def _cmd_snapshot_dump(args):
    from .harness import read_snapshot

    header, values = read_snapshot(args.snapshot)
    for key in ("n_s", "n_theta", "r_wall", "S_max", "t", "gamma_infinity"):
        print(f"{key}={header[key]:g}" if isinstance(header[key], float)
              else f"{key}={header[key]}")
    print(f"omega_min={values.min():.12g}")
    print(f"omega_max={values.max():.12g}")
    print(f"omega_l1={np.abs(values).sum():.12g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oseenlab",
        description="Batch driver for the exterior-disk vortex decay lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="nonlinear or linear decay run per config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_est = sub.add_parser("estimates", help="empirical semigroup decay constants")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--out", default=None)
    p_est.set_defaults(func=_cmd_estimates)

    p_alpha = sub.add_parser("alpha-study", help="amplitude scaling of the remainder")
    p_alpha.add_argument("--config", required=True)
    p_alpha.set_defaults(func=_cmd_alpha_study)

    p_res = sub.add_parser("rescale", help="discrete scale-invariance check")
    p_res.add_argument("--config", required=True)
    p_res.set_defaults(func=_cmd_rescale)

    p_fit = sub.add_parser("rate-fit", help="log-log slope of a CSV decay curve")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--label", default=None)
    p_fit.add_argument("--p", type=float, default=None)
    p_fit.add_argument("--t-min", type=float, required=True)
    p_fit.add_argument("--t-max", type=float, required=True)
    p_fit.set_defaults(func=_cmd_rate_fit)

    p_dump = sub.add_parser("snapshot-dump", help="print an OSN1 snapshot header")
    p_dump.add_argument("--snapshot", required=True)
    p_dump.set_defaults(func=_cmd_snapshot_dump)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SnapshotFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
