"""Command line entry point ``ofdma-cfo``.

Exit codes: 0 success, 2 invalid scenario, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .exceptions import ScenarioError, SingularMatrixError
from .harness import io
from .harness.experiments import (
    complexity_report,
    run_ber_experiment,
    run_heatmap,
    run_sinr_comparison,
    sinr_gap,
)
from .harness.scenario import load_complexity_params, load_scenario

EXIT_OK, EXIT_SCENARIO, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("ofdma_cfo")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    s = load_scenario(args.scenario, seed=args.seed)
    res = run_ber_experiment(s, workers=args.workers)
    out = _out_dir(args)
    io.write_ber_csv(res, out / "ber.csv")
    io.write_sinr_csv(res, out / "sinr.csv")
    io.write_meta(io.provenance(s, "run", args.workers, {
        "wall_time_s": res.wall_time, "complexity": res.complexity,
        "fixed_cfos": res.cfos,
    }), out / "result.meta")
    for snr, label, bits, errors, ber in res.ber_rows():
        print(f"{snr:6.1f} dB  {label:22s} {errors:>9d}/{bits:<10d} BER={ber:.3e}")
    return EXIT_OK


def cmd_sinr(args) -> int:
    s = load_scenario(args.scenario, seed=args.seed)
    res = run_sinr_comparison(s, workers=args.workers)
    out = _out_dir(args)
    io.write_sinr_csv(res, out / "sinr.csv")
    io.write_ber_csv(res, out / "ber.csv")
    labels = [t.label for t in s.techniques]
    gaps = {}
    if len(labels) >= 2:
        gaps = {f"{labels[0]} - {lab}": sinr_gap(res, labels[0], lab) for lab in labels[1:]}
    io.write_meta(io.provenance(s, "sinr", args.workers, {
        "wall_time_s": res.wall_time, "sinr_gap_db": gaps,
    }), out / "result.meta")
    for snr, label, frames, sinr, pooled in res.sinr_rows():
        print(f"{snr:6.1f} dB  {label:22s} mean SINR={sinr:.2f} dB (pooled {pooled:.2f}) "
              f"over {frames} frames")
    for name, g in gaps.items():
        print(f"gap {name}: {g:.2f} dB")
    return EXIT_OK


def cmd_heatmap(args) -> int:
    s = load_scenario(args.scenario, seed=args.seed)
    maps = run_heatmap(s)
    out = _out_dir(args)
    io.write_heatmaps(maps, out)
    ratios = {name: m["offband_ratio"] for name, m in maps.items()}
    io.write_meta(io.provenance(s, "heatmap", 1, {
        "half_bandwidth": s.band_halfwidth, "offband_ratio": ratios,
    }), out / "result.meta")
    for name, r in ratios.items():
        print(f"{name:9s} off-band energy ratio (D={s.band_halfwidth}): {r:.3e}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    cases = load_complexity_params(args.params)
    rows = complexity_report(cases)
    out = _out_dir(args)
    io.write_complexity_csv(rows, out / "complexity.csv")
    for r in rows:
        print(f"{r['case']:8s} {r['technique']:13s} CM={r['cm']:>14.1f}  ratio/CG={r['ratio_vs_cg']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ofdma-cfo", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, workers=True):
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("run", help="Monte-Carlo BER over the SNR grid")
    p.add_argument("scenario")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sinr", help="paired SINR comparison")
    p.add_argument("scenario")
    common(p)
    p.set_defaults(func=cmd_sinr)

    p = sub.add_parser("heatmap", help="interference power maps")
    p.add_argument("scenario")
    common(p, workers=False)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("complexity", help="complex multiplication counts")
    p.add_argument("params")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_complexity)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (SingularMatrixError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
