"""Result files: CSV tables, heatmaps and the provenance record.

CSV files contain only deterministic quantities so that reruns with the same
master seed are byte-identical. Timings and versions go to ``result.meta``.
"""
from __future__ import annotations

import csv
import json
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from ..receiver import write_heatmap
from .scenario import Scenario, to_plain

GENIE_CSI_NOTE = ("channel responses and CFOs are known exactly at the receiver "
                  "(genie CSI); no preamble-based estimation is simulated")


def _fmt(x: float) -> str:
    return repr(float(x))


def _opt(x) -> str:
    return "" if x is None else _fmt(x)


def write_ber_csv(result, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["snr_db", "technique", "bits", "errors", "ber"])
        for snr, label, bits, errors, ber in result.ber_rows():
            w.writerow([_fmt(snr), label, bits, errors, _fmt(ber)])
    return path


def write_sinr_csv(result, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["snr_db", "technique", "frames", "sinr_db", "pooled_sinr_db"])
        for snr, label, frames, sinr, pooled in result.sinr_rows():
            w.writerow([_fmt(snr), label, frames, _opt(sinr), _opt(pooled)])
    return path


def write_complexity_csv(rows, path) -> Path:
    path = Path(path)
    fields = ["case", "technique", "N", "K", "D", "I", "N_w", "cm", "ratio_vs_cg"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "ratio_vs_cg": _fmt(r["ratio_vs_cg"])})
    return path


def write_heatmaps(maps: dict, out_dir) -> list:
    out_dir = Path(out_dir)
    paths = []
    for name, entry in maps.items():
        p = out_dir / f"heatmap_{name}.txt"
        write_heatmap(p, entry["power_db"])
        paths.append(p)
    return paths


def versions() -> dict:
    out = {"python": sys.version.split()[0], "platform": platform.platform()}
    for pkg in ("ofdma-cfo", "numpy", "scipy", "scikit-learn"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def provenance(s: Scenario, command: str, workers: int = 1, extra: dict | None = None) -> dict:
    cfg = s.cfg
    meta = {
        "command": command,
        "scenario": s.describe(),
        "seeds": {"master": s.seed, "allocation": s.allocation_seed, "cfo": s.cfo_seed,
                  "rng": "numpy Philox keyed by (master seed, chunk index, substream)"},
        "lengths": {"N_CP": cfg.n_cp, "N_CS": cfg.n_cs, "N_w": cfg.n_window,
                    "N_GI": cfg.n_guard},
        "workers": workers,
        "csi": GENIE_CSI_NOTE,
        "snr_definition": "per-subcarrier symbol energy over noise variance per sample",
        "versions": versions(),
    }
    if extra:
        meta.update(extra)
    return to_plain(meta)


def write_meta(meta: dict, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.generic, np.ndarray)):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
