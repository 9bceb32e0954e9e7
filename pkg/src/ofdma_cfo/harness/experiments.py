"""Monte-Carlo BER / SINR runs, interference heatmaps and complexity tables.

Trials are split into fixed-size chunks. Chunk ``c`` draws everything from
``RngStream(seed, (c, ...))`` and returns integer error counts plus float power
sums; chunks are merged in index order, so results do not depend on how many
worker processes ran them. Within a chunk, one noise realization per trial is
scaled to every SNR point and every technique sees the same received samples.

SNR is the per-subcarrier symbol-to-noise ratio: unit-energy symbols through
unit-power channels, noise variance ``10**(-snr/10)`` per time sample (and
hence per DFT bin under the unitary transform).
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channel import apply_uplink, draw_cfos, draw_channel
from ..detection import (
    DetectionReport,
    build_composite_channel,
    equalize_and_demap,
    sinr_from_powers,
)
from ..exceptions import ScenarioError
from ..numerics import RngStream, bits_per_symbol, gaussian_noise, idft, qam_map
from ..receiver import (
    OfdmaReceiver,
    build_interference_matrix,
    interference_power_map,
    offband_energy_ratio,
)
from ..solver import CGMMSE, DenseMMSE, DirectZF, NoCompensation, QuasiBandedZF
from ..solver.banded import count_actual_multiplications, factorize_quasi_banded
from ..solver.complexity import TECHNIQUES, ComplexityParams, complexity_cm
from ..waveform import build_allocation, cyclic_extend
from .scenario import Scenario, Technique

# stream ids below the chunk level
_BITS, _CHANNEL, _NOISE, _CFO = 0, 1, 2, 3
_ALLOCATION_STREAM = (1 << 32) - 1
_CFO_STREAM = (1 << 32) - 2


@dataclass
class ScenarioResult:
    scenario: Scenario
    reports: dict                     # (snr_db, technique label) -> DetectionReport
    cfos: np.ndarray = None           # fixed CFOs, when not redrawn per trial
    complexity: list = field(default_factory=list)
    wall_time: float = 0.0

    def ber(self, technique: str, snr_db: float) -> float:
        return self.reports[(snr_db, technique)].ber

    def sinr(self, technique: str, snr_db: float) -> float:
        """Mean per-frame SINR (dB)."""
        return self.reports[(snr_db, technique)].mean_sinr_db

    def pooled_sinr(self, technique: str, snr_db: float) -> float:
        return self.reports[(snr_db, technique)].sinr_db

    def ber_rows(self):
        for t in self.scenario.techniques:
            for snr in self.scenario.snr_db:
                rep = self.reports[(snr, t.label)]
                yield snr, t.label, rep.bits_total, rep.bit_errors, rep.ber

    def sinr_rows(self):
        for t in self.scenario.techniques:
            for snr in self.scenario.snr_db:
                rep = self.reports[(snr, t.label)]
                yield snr, t.label, rep.frames, rep.mean_sinr_db, rep.sinr_db


def scenario_allocation(s: Scenario):
    return build_allocation(s.allocation_scheme, s.cfg,
                            RngStream(s.allocation_seed, _ALLOCATION_STREAM))


def scenario_cfos(s: Scenario) -> np.ndarray | None:
    """CFOs shared by all trials, or ``None`` when they are redrawn per trial."""
    if s.cfo_mode == "fixed":
        return np.asarray(s.cfo_values, dtype=float)
    if s.redraw_cfos:
        return None
    return draw_cfos(s.cfg.n_users, RngStream(s.cfo_seed, _CFO_STREAM))


def _make_compensator(tech: Technique, s: Scenario, noise_var: float):
    if tech.solver == "direct_zf":
        return DirectZF()
    if tech.solver == "quasi_banded":
        return QuasiBandedZF(s.band_halfwidth, corners=True)
    if tech.solver == "banded":
        return QuasiBandedZF(s.band_halfwidth, corners=False)
    if tech.solver == "cg_mmse":
        return CGMMSE(noise_ratio=noise_var, n_iter=s.cg_iterations)
    if tech.solver == "mmse":
        return DenseMMSE(noise_ratio=noise_var)
    return NoCompensation()


def _fit_compensators(s: Scenario, alloc, cfos) -> dict:
    """Fitted compensator per ``(technique label, snr index)``."""
    active = s.cfg.active_bins
    lams = {}
    for r in s.receivers:
        lam = build_interference_matrix(cfos, alloc, s.cfg, windowed=(r == "window"))
        lams[r] = lam.matrix[np.ix_(active, active)]
    out = {}
    for t in s.techniques:
        if t.solver in ("cg_mmse", "mmse"):
            for j, snr in enumerate(s.snr_db):
                out[(t.label, j)] = _make_compensator(t, s, 10.0 ** (-snr / 10.0)).fit(lams[t.receiver])
        else:
            comp = _make_compensator(t, s, 0.0).fit(lams[t.receiver])
            out.update(((t.label, j), comp) for j in range(len(s.snr_db)))
    return out


def scenario_complexity(s: Scenario, comps=None) -> list:
    """Analytic Table-1 counts for the scenario size, plus instrumented quasi-banded counts."""
    d = s.band_halfwidth if s.cfg.n_window or s.half_bandwidth else 1
    p = ComplexityParams(n=s.cfg.n_subcarriers, k=s.cfg.n_users, d=d,
                         n_iter=s.cg_iterations, n_window=s.cfg.n_window)
    rows = [{"technique": tech, "kind": "analytic", "cm": complexity_cm(tech, p)}
            for tech in TECHNIQUES]
    for t in s.techniques:
        if comps is None or t.solver not in ("quasi_banded", "banded"):
            continue
        comp = comps[(t.label, 0)]
        if comp.factorization_ is None:
            continue
        inst = factorize_quasi_banded(comp.approx_, instrument=True)
        rows.append({"technique": t.label, "kind": "instrumented",
                     "cm": count_actual_multiplications(inst)["total"]})
    return rows


def _chunk_plan(trials: int, chunk: int):
    return [(c, min(chunk, trials - c * chunk)) for c in range(-(-trials // chunk))]


def _simulate_chunk(args):
    s, alloc, chunk_idx, count, cfos_fixed, comps = args
    cfg = s.cfg
    n, k = cfg.n_subcarriers, cfg.n_users
    active = cfg.active_bins
    n_act = len(active)
    n_sym = s.symbols_per_trial
    bps = bits_per_symbol(s.order)
    root = RngStream(s.seed, chunk_idx)

    if cfos_fixed is None:
        gen = root.child(_CFO).generator
        cfos = np.stack([draw_cfos(k, gen) for _ in range(count)])       # (B, K)
    else:
        cfos = np.broadcast_to(cfos_fixed, (count, k))
    h = draw_channel(s.profile, root.child(_CHANNEL), size=(count, k))  # (B, K, Nch)
    bits = root.child(_BITS).generator.integers(0, 2, (count, n_sym, n_act * bps), dtype=np.uint8)
    dbar = np.zeros((count, n_sym, n), dtype=complex)
    dbar[..., active] = qam_map(bits, s.order)

    owner = alloc.owner()
    per_user = np.zeros((count, n_sym, k, n), dtype=complex)
    for i in range(k):
        mask = owner == i
        per_user[:, :, i, mask] = dbar[..., mask]
    ext = cyclic_extend(idft(per_user), cfg.n_cp, cfg.n_cs)            # (B, S, K, N_T)
    r_clean = apply_uplink(ext, h[:, None], cfos[:, None, :], 0.0, n_subcarriers=n)
    noise = gaussian_noise(r_clean.shape, 1.0, root.child(_NOISE))

    prepared = {}
    for rx_name in s.receivers:
        windowed = rx_name == "window"
        rx = OfdmaReceiver(cfg, windowed)
        gains = build_composite_channel(h, cfos, alloc, cfg, windowed)[:, None, active]
        prepared[rx_name] = (rx(r_clean)[..., active], rx(noise)[..., active],
                             gains, gains * dbar[..., active])

    x_hat = {}
    if comps is not None:
        for t in s.techniques:
            clean, unit_noise, _, _ = prepared[t.receiver]
            for j, snr in enumerate(s.snr_db):
                rbar = clean + np.sqrt(10.0 ** (-snr / 10.0)) * unit_noise
                x_hat[(j, t.label)] = (comps[(t.label, j)]
                                       .predict(rbar.reshape(-1, n_act)).reshape(rbar.shape))
    else:
        for key in ((j, t.label) for j in range(len(s.snr_db)) for t in s.techniques):
            x_hat[key] = np.empty((count, n_sym, n_act), dtype=complex)
        for b in range(count):
            fitted = _fit_compensators(s, alloc, cfos[b])
            for t in s.techniques:
                clean, unit_noise, _, _ = prepared[t.receiver]
                for j, snr in enumerate(s.snr_db):
                    rbar = clean[b] + np.sqrt(10.0 ** (-snr / 10.0)) * unit_noise[b]
                    x_hat[(j, t.label)][b] = fitted[(t.label, j)].predict(rbar)

    counts = {}
    for t in s.techniques:
        _, _, gains, x_ref = prepared[t.receiver]
        sig_b = np.sum(np.abs(x_ref) ** 2, axis=(1, 2))
        for j in range(len(s.snr_db)):
            est = x_hat[(j, t.label)]
            dec, _, erased = equalize_and_demap(est, gains, s.order)
            wrong = dec != bits
            if np.any(erased):
                wrong |= np.repeat(erased, bps, axis=-1)
            res_b = np.sum(np.abs(est - x_ref) ** 2, axis=(1, 2))
            frame_db = sum(sinr_from_powers(a, r) for a, r in zip(sig_b, res_b))
            counts[(j, t.label)] = (int(np.count_nonzero(wrong)), int(bits.size),
                                    float(sig_b.sum()), float(res_b.sum()), count, frame_db)
    return chunk_idx, counts


def run_ber_experiment(s: Scenario, workers: int = 1) -> ScenarioResult:
    """Monte-Carlo BER (and pooled SINR) for every technique and SNR point."""
    t0 = time.perf_counter()
    alloc = scenario_allocation(s)
    cfos = scenario_cfos(s)
    comps = _fit_compensators(s, alloc, cfos) if cfos is not None else None
    plan = _chunk_plan(s.trials, s.chunk)
    jobs = [(s, alloc, c, count, cfos, comps) for c, count in plan]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_simulate_chunk, jobs))
    else:
        results = [_simulate_chunk(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    reports = {}
    for j, snr in enumerate(s.snr_db):
        for t in s.techniques:
            rep = DetectionReport(seeds={"master": s.seed})
            for _, counts in results:
                e, b, sig, res, frames, frame_db = counts[(j, t.label)]
                rep = rep + DetectionReport(e, b, sig, res, frames=frames,
                                            frame_sinr_db_sum=frame_db)
            reports[(snr, t.label)] = rep
    return ScenarioResult(s, reports, cfos, scenario_complexity(s, comps),
                          wall_time=time.perf_counter() - t0)


def run_sinr_comparison(s: Scenario, workers: int = 1) -> ScenarioResult:
    """Paired SINR of the scenario's techniques on identical received signals.

    Each frame's SINR is measured on the compensator output against the
    interference-free composite symbols ``x = H d`` over all active bins; the
    reported value is the mean over frames, with the pooled ratio alongside.
    """
    return run_ber_experiment(s, workers)


def sinr_gap(result: ScenarioResult, better: str, worse: str, snr_db=None) -> float:
    snr = result.scenario.snr_db[0] if snr_db is None else snr_db
    return result.sinr(better, snr) - result.sinr(worse, snr)


def run_heatmap(s: Scenario) -> dict:
    """Windowed and plain interference power maps (dB) on the scenario's CFOs."""
    if s.cfo_mode != "fixed":
        raise ScenarioError("heatmap needs a fixed CFO list")
    alloc = scenario_allocation(s)
    out = {}
    for name, windowed in (("windowed", True), ("plain", False)):
        if windowed and s.cfg.n_window == 0:
            continue
        lam = build_interference_matrix(s.cfo_values, alloc, s.cfg, windowed)
        out[name] = {
            "power_db": interference_power_map(lam),
            "offband_ratio": offband_energy_ratio(lam, s.band_halfwidth),
            "matrix": lam,
        }
    return out


def complexity_report(cases) -> list:
    """Rows of ``(case, technique, params, count, ratio to CG)``."""
    rows = []
    for name, p in cases:
        cg = complexity_cm("cg", p)
        for tech in TECHNIQUES:
            cm = complexity_cm(tech, p)
            rows.append({"case": name, "technique": tech, "N": p.n, "K": p.k, "D": p.d,
                         "I": p.n_iter, "N_w": p.n_window, "cm": cm, "ratio_vs_cg": cm / cg})
    return rows
