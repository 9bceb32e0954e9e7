"""Scenario files: INI-style sections of ``key = value`` pairs.

Schema (``*`` marks required keys)::

    [system]
    subcarriers*  = 128           ; N, power of two
    users*        = 4             ; K
    cp*           = 32            ; N_CP
    cs            = N_w/2         ; N_CS
    window        = 0             ; N_w (even); 0 disables windowed techniques
    inactive      =               ; unused bins, e.g. "0, 253-259"

    [allocation]
    scheme        = generalized   ; generalized | interleaved | blocked
    seed          = 0

    [channel]
    profile       = sui2-like.profile   ; path relative to the scenario file, or bundled name

    [cfo]
    mode          = fixed         ; fixed | uniform
    values        =               ; K comma-separated CFOs (fixed mode)
    seed          = 0             ; uniform mode
    redraw        = false         ; uniform mode: new CFOs every trial

    [modulation]
    order         = 4             ; 4 | 16

    [detection]
    techniques*   = quasi_banded/window, banded/plain
    half_bandwidth =              ; D; defaults to floor(1.1 N / N_w)
    cg_iterations = 32

    [run]
    snr_db*       = 5, 10, 15
    trials*       = 1000
    symbols_per_trial = 1
    chunk         = 500
    seed          = 0

Techniques are ``solver/receiver`` with solver in ``direct_zf``, ``quasi_banded``,
``banded``, ``cg_mmse``, ``mmse`` (dense oracle), ``none`` and receiver in ``window``, ``plain``.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..channel import ChannelProfile, load_profile
from ..exceptions import ScenarioError
from ..numerics import SUPPORTED_QAM_ORDERS
from ..receiver import default_band_halfwidth
from ..waveform import ALLOCATION_SCHEMES, OfdmaConfig

SOLVERS = ("direct_zf", "quasi_banded", "banded", "cg_mmse", "mmse", "none")
RECEIVERS = ("window", "plain")


@dataclass(frozen=True)
class Technique:
    solver: str
    receiver: str

    @property
    def windowed(self) -> bool:
        return self.receiver == "window"

    @property
    def label(self) -> str:
        return f"{self.solver}/{self.receiver}"

    @classmethod
    def parse(cls, text: str) -> "Technique":
        solver, _, receiver = text.strip().partition("/")
        receiver = receiver or "window"
        if solver not in SOLVERS or receiver not in RECEIVERS:
            raise ScenarioError(f"unknown technique {text!r}")
        return cls(solver, receiver)


@dataclass(frozen=True)
class Scenario:
    cfg: OfdmaConfig
    techniques: tuple
    snr_db: tuple
    trials: int
    allocation_scheme: str = "generalized"
    allocation_seed: int = 0
    profile: ChannelProfile = field(default_factory=ChannelProfile.flat)
    profile_source: str = "flat"
    cfo_mode: str = "fixed"
    cfo_values: tuple = None
    cfo_seed: int = 0
    redraw_cfos: bool = False
    order: int = 4
    half_bandwidth: int = None
    cg_iterations: int = 32
    symbols_per_trial: int = 1
    chunk: int = 500
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        self.validate()

    @property
    def band_halfwidth(self) -> int:
        if self.half_bandwidth is not None:
            return self.half_bandwidth
        if self.cfg.n_window == 0:
            raise ScenarioError("half_bandwidth must be set when the window is disabled")
        return default_band_halfwidth(self.cfg.n_subcarriers, self.cfg.n_window)

    @property
    def receivers(self) -> tuple:
        return tuple(r for r in RECEIVERS if any(t.receiver == r for t in self.techniques))

    def validate(self):
        if not self.techniques:
            raise ScenarioError("no detection techniques given")
        if not self.snr_db:
            raise ScenarioError("SNR grid is empty")
        if self.trials < 1 or self.symbols_per_trial < 1 or self.chunk < 1:
            raise ScenarioError("trials, symbols_per_trial and chunk must be positive")
        if self.order not in SUPPORTED_QAM_ORDERS:
            raise ScenarioError(f"unsupported modulation order {self.order}")
        if self.allocation_scheme not in ALLOCATION_SCHEMES:
            raise ScenarioError(f"unknown allocation scheme {self.allocation_scheme!r}")
        if self.cfo_mode not in ("fixed", "uniform"):
            raise ScenarioError(f"unknown CFO mode {self.cfo_mode!r}")
        if self.cfo_mode == "fixed":
            if self.cfo_values is None or len(self.cfo_values) != self.cfg.n_users:
                raise ScenarioError("fixed CFO mode needs one value per user")
        elif self.cfo_values is not None:
            raise ScenarioError("CFO values are only allowed in fixed mode")
        if any(t.windowed for t in self.techniques) and self.cfg.n_window == 0:
            raise ScenarioError("windowed technique requested but window = 0")
        d = self.band_halfwidth if any(t.solver in ("quasi_banded", "banded")
                                       for t in self.techniques) else None
        if d is not None and not 1 <= d <= len(self.cfg.active) // 2:
            raise ScenarioError(f"band half-width {d} out of range")
        n_ch = self.profile.length
        for r in self.receivers:
            limit = self.cfg.max_channel_length(windowed=(r == "window"))
            if n_ch > limit:
                raise ScenarioError(
                    f"channel length {n_ch} exceeds the ISI-free limit {limit} of the {r} receiver"
                )

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)

    def describe(self) -> dict:
        """Plain-data echo of every parameter, for provenance records."""
        out = {
            "name": self.name,
            "system": {
                "subcarriers": self.cfg.n_subcarriers, "users": self.cfg.n_users,
                "cp": self.cfg.n_cp, "cs": self.cfg.n_cs, "window": self.cfg.n_window,
                "guard": self.cfg.n_guard, "extended_length": self.cfg.n_total,
                "active": len(self.cfg.active),
                "inactive": sorted(set(range(self.cfg.n_subcarriers)) - set(self.cfg.active)),
            },
            "allocation": {"scheme": self.allocation_scheme, "seed": self.allocation_seed},
            "channel": {"profile": self.profile_source, "delays": list(self.profile.delays),
                        "powers_db": list(self.profile.powers_db)},
            "cfo": {"mode": self.cfo_mode,
                    "values": None if self.cfo_values is None else list(self.cfo_values),
                    "seed": self.cfo_seed, "redraw": self.redraw_cfos},
            "modulation": {"order": self.order},
            "detection": {"techniques": [t.label for t in self.techniques],
                          "half_bandwidth": self._maybe_band(),
                          "cg_iterations": self.cg_iterations},
            "run": {"snr_db": list(self.snr_db), "trials": self.trials,
                    "symbols_per_trial": self.symbols_per_trial, "chunk": self.chunk,
                    "seed": self.seed},
        }
        return out

    def _maybe_band(self):
        try:
            return self.band_halfwidth
        except ScenarioError:
            return None


def _int_list(text: str) -> list:
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def bundled_scenario(name: str) -> Path:
    path = resources.files("ofdma_cfo.scenarios").joinpath(name)
    return Path(str(path))


def resolve_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_scenario(p.name)
    if bundled.exists():
        return bundled
    raise ScenarioError(f"scenario file {path} not found")


def read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    p = resolve_path(path)
    try:
        with open(p) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ScenarioError(f"{p}: {exc}") from exc
    return parser


def load_scenario(path, seed: int | None = None) -> Scenario:
    """Parse and validate a scenario file; ``seed`` overrides ``[run] seed``."""
    p = resolve_path(path)
    ini = read_ini(p)
    try:
        sysc = ini["system"]
        n_window = sysc.getint("window", 0)
        n = sysc.getint("subcarriers")
        inactive = set(_int_list(sysc.get("inactive", "")))
        active = tuple(k for k in range(n) if k not in inactive) if inactive else None
        cfg = OfdmaConfig(n, sysc.getint("users"), sysc.getint("cp"),
                          sysc.getint("cs", n_window // 2), n_window, active)

        alloc = ini["allocation"] if ini.has_section("allocation") else {}
        chan = ini["channel"] if ini.has_section("channel") else {}
        src = chan.get("profile", "sui2-like.profile")
        prof_path = p.parent / src
        profile = load_profile(prof_path if prof_path.exists() else src)

        cfo = ini["cfo"] if ini.has_section("cfo") else {}
        mode = cfo.get("mode", "fixed")
        values = _float_list(cfo["values"]) if cfo.get("values", "").strip() else None

        det = ini["detection"]
        run = ini["run"]
        hb = det.get("half_bandwidth", "").strip()
        return Scenario(
            cfg=cfg,
            techniques=tuple(Technique.parse(t) for t in det["techniques"].split(",") if t.strip()),
            snr_db=_float_list(run["snr_db"]),
            trials=int(run["trials"]),
            allocation_scheme=alloc.get("scheme", "generalized"),
            allocation_seed=int(alloc.get("seed", 0)),
            profile=profile,
            profile_source=src,
            cfo_mode=mode,
            cfo_values=values,
            cfo_seed=int(cfo.get("seed", 0)),
            redraw_cfos=str(cfo.get("redraw", "false")).lower() in ("1", "true", "yes", "on"),
            order=int(ini["modulation"].get("order", 4)) if ini.has_section("modulation") else 4,
            half_bandwidth=int(hb) if hb else None,
            cg_iterations=int(det.get("cg_iterations", 32)),
            symbols_per_trial=int(run.get("symbols_per_trial", 1)),
            chunk=int(run.get("chunk", 500)),
            seed=int(run.get("seed", 0)) if seed is None else int(seed),
            name=p.stem,
        )
    except ScenarioError:
        raise
    except (KeyError, ValueError, TypeError, FileNotFoundError) as exc:
        raise ScenarioError(f"{p}: {exc}") from exc


def load_complexity_params(path) -> list:
    """``[case.*]`` sections with keys ``n, k, d, iterations, window``."""
    from ..solver.complexity import ComplexityParams

    ini = read_ini(path)
    cases = []
    try:
        for name in ini.sections():
            s = ini[name]
            cases.append((name.partition(".")[2] or name, ComplexityParams(
                n=s.getint("n"), k=s.getint("k"), d=s.getint("d"),
                n_iter=s.getint("iterations", 32), n_window=s.getint("window", 0))))
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    if not cases:
        raise ScenarioError(f"{path}: no parameter sets")
    return cases


def to_plain(obj):
    """Recursively convert numpy scalars/arrays for JSON output."""
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


