"""Command-line front end: sweeps, pole studies and flatness reports.

Exit codes: 0 on success, 2 when the config file fails validation.
"""

from __future__ import annotations

import argparse
import sys

from .configio import ConfigError, parse_config


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopofdm",
        description="Link-level Monte-Carlo for uncoordinated cooperative OFDM relaying",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the configured Es/N0 sweep")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True, help="results CSV path")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--plot", default=None, help="optional SER curve figure (svg/png)")
    sim.add_argument("--append", action="store_true", help="append to an existing CSV")

    study = sub.add_parser("study", help="parameter studies")
    study_sub = study.add_subparsers(dest="study_kind", required=True)
    poles = study_sub.add_parser("poles", help="SER over pole modulus / order / taps")
    poles.add_argument("--config", required=True)
    poles.add_argument("--out", required=True)
    poles.add_argument("--mp-grid", default="0.1,0.3,0.5,0.7,0.9")
    poles.add_argument("--m-grid", default="4")
    poles.add_argument("--tc-set", default="12")
    poles.add_argument("--esn0-db", type=float, default=30.0)
    poles.add_argument("--workers", type=int, default=1)
    poles.add_argument("--plot", default=None)

    report = sub.add_parser("report", help="channel reports")
    report_sub = report.add_subparsers(dest="report_kind", required=True)
    flat = report_sub.add_parser("flatness", help="composite magnitude statistics")
    flat.add_argument("--config", required=True)
    flat.add_argument("--out", required=True)
    flat.add_argument("--u-list", default="1,2,3,5")
    flat.add_argument("--realizations", type=int, default=200)
    flat.add_argument(
        "--ideal", action="store_true", help="pin propagation taps to a delta"
    )
    flat.add_argument("--plot", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    from . import harness

    if args.command == "simulate":
        result = harness.run_sweep(cfg, workers=args.workers)
        harness.write_results(result.rows, args.out, append=args.append)
        for row in result.rows:
            print(
                f"EsN0={row.esn0_db:g} dB  blocks={row.blocks}  "
                f"SER={row.ser:.3e} (+-{row.ser_ci95:.1e})  BER={row.ber:.3e}"
            )
        if args.plot:
            from .plotting import save_ser_curves

            save_ser_curves(result.rows, args.plot)
        return 0

    if args.command == "study":
        result = harness.pole_modulus_study(
            cfg,
            mp_grid=_parse_floats(args.mp_grid),
            m_grid=_parse_ints(args.m_grid),
            tc_set=_parse_ints(args.tc_set),
            esn0_db=args.esn0_db,
            workers=args.workers,
        )
        harness.write_results(result.rows, args.out)
        for row in result.rows:
            print(
                f"M={row.apf_order} Mp={row.pole_modulus:g} Tc={row.vchan_taps}  "
                f"SER={row.ser:.3e} (+-{row.ser_ci95:.1e})"
            )
        if args.plot:
            from .plotting import save_pole_study

            save_pole_study(result.rows, args.plot)
        return 0

    report = harness.flatness_report(
        cfg,
        u_list=_parse_ints(args.u_list),
        realizations=args.realizations,
        ideal_channel=args.ideal,
    )
    harness.write_flatness(report, args.out)
    for row in report.rows:
        print(
            f"U={row.uavs}  meanAbsDev={row.mean_abs_dev:.4g}  "
            f"maxAbsDev={row.max_abs_dev:.4g}  selectivity={row.mean_selectivity:.4g}"
        )
    if args.plot:
        from .plotting import save_flatness

        save_flatness(report, args.plot)
    return 0


if __name__ == "__main__":
    sys.exit(main())
