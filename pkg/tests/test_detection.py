import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ofdma_cfo.channel import apply_uplink, draw_channel, load_profile
from ofdma_cfo.detection import (
    SINR_CAP_DB,
    DetectionReport,
    build_composite_channel,
    compute_ber,
    equalize_and_demap,
    measure_sinr,
)
from ofdma_cfo.harness import Technique, load_scenario, run_ber_experiment
from ofdma_cfo.numerics import RngStream, idft, qam_map
from ofdma_cfo.receiver import OfdmaReceiver, build_interference_matrix
from ofdma_cfo.solver import DirectZF, QuasiBandedZF
from ofdma_cfo.waveform import OfdmaConfig, build_allocation, cyclic_extend

from conftest import FIG3_CFOS


def transmit(cfg, alloc, h, eps, bits, order, noise_var=0.0, rng=None):
    """Per-user symbols -> superposed extended received samples."""
    dbar = np.zeros(bits.shape[:-1] + (cfg.n_subcarriers,), dtype=complex)
    dbar[..., cfg.active_bins] = qam_map(bits, order)
    per_user = np.zeros(bits.shape[:-1] + (cfg.n_users, cfg.n_subcarriers), dtype=complex)
    for i, idx in enumerate(alloc.sets):
        per_user[..., i, idx] = dbar[..., idx]
    ext = cyclic_extend(idft(per_user), cfg.n_cp, cfg.n_cs)
    return dbar, apply_uplink(ext, h, eps, noise_var, rng, n_subcarriers=cfg.n_subcarriers)


class TestCompositeChannel:
    def test_flat_zero_cfo(self, fig2_cfg, fig2_alloc):
        g = build_composite_channel(np.ones((4, 1)), np.zeros(4), fig2_alloc, fig2_cfg)
        np.testing.assert_allclose(g, np.ones(32))

    def test_phase_with_full_length_guard(self):
        # N_GI = N needs N_CS > N_w/2 here, which adds the linear phase of a
        # one-sample circular shift of the retained core
        cfg = OfdmaConfig(8, 2, 8, 2, 2)
        assert cfg.n_guard == cfg.n_subcarriers
        alloc = build_allocation("interleaved", cfg)
        g = build_composite_channel(np.ones((2, 1)), [0.25, 0.0], alloc, cfg)
        shift = np.exp(2j * np.pi * np.arange(8) / 8)
        k0, k1 = alloc.sets
        np.testing.assert_allclose(g[k0], np.exp(1j * np.pi / 2) * shift[k0], atol=1e-15)
        np.testing.assert_allclose(g[k1], shift[k1], atol=1e-15)

    def test_plain_receiver_offset(self):
        cfg = OfdmaConfig(8, 1, 4, 4, 4)
        alloc = build_allocation("blocked", cfg)
        g = build_composite_channel(np.ones((1, 1)), [0.25], alloc, cfg, windowed=False)
        np.testing.assert_allclose(g, np.exp(2j * np.pi * 0.25 * 4 / 8))

    def test_eq12_random(self, fig3_cfg, rng):
        alloc = build_allocation("generalized", fig3_cfg, RngStream(1))
        h = draw_channel(load_profile(), RngStream(2), size=4)
        bits = rng.integers(0, 2, (1, 256), dtype=np.uint8)
        dbar, r = transmit(fig3_cfg, alloc, h, np.zeros(4), bits, 4)
        x = OfdmaReceiver(fig3_cfg)(r)
        g = build_composite_channel(h, np.zeros(4), alloc, fig3_cfg)
        np.testing.assert_allclose(x, g * dbar, atol=1e-12)

    def test_inactive_bins_zero(self):
        cfg = OfdmaConfig(16, 2, 4, 2, 4, active=range(1, 15))
        alloc = build_allocation("generalized", cfg, RngStream(0))
        g = build_composite_channel(np.ones((2, 1)), [0.1, 0.2], alloc, cfg)
        assert g[0] == 0 and g[15] == 0 and np.all(g[1:15] != 0)


class TestEqualize:
    def test_gain_two(self, rng):
        bits = rng.integers(0, 2, 64)
        d = qam_map(bits, 16)
        dec, soft, erased = equalize_and_demap(2 * d, np.full(16, 2.0), 16)
        np.testing.assert_array_equal(dec, bits)
        np.testing.assert_allclose(soft, d)
        assert not erased.any()

    def test_erasure(self):
        d = qam_map([0, 0, 1, 1], 4)
        dec, soft, erased = equalize_and_demap(d, np.array([1.0, 0.0]), 4)
        assert erased.tolist() == [False, True] and soft[1] == 0
        rep = compute_ber(dec, np.array([0, 0, 1, 1]), erased, 4)
        assert rep.bit_errors == 2

    def test_active_subset(self, rng):
        d = qam_map(rng.integers(0, 2, 16), 4)
        dec, _, _ = equalize_and_demap(d, np.ones(8), 4, active=[1, 3])
        assert dec.shape == (4,)

    @pytest.mark.parametrize("scheme", ["generalized", "interleaved", "blocked"])
    @pytest.mark.parametrize("dims", [(32, 4, 8), (128, 4, 14), (64, 2, 6), (512, 4, 56)])
    def test_noiseless_zero_cfo_no_errors(self, scheme, dims, rng):
        n, k, n_w = dims
        cfg = OfdmaConfig(n, k, n_w, n_w // 2, n_w)
        alloc = build_allocation(scheme, cfg, RngStream(3))
        h = np.ones((k, 1))
        bits = rng.integers(0, 2, (2, 2 * n), dtype=np.uint8)
        _, r = transmit(cfg, alloc, h, np.zeros(k), bits, 4)
        for windowed in (True, False):
            x = OfdmaReceiver(cfg, windowed)(r)
            g = build_composite_channel(h, np.zeros(k), alloc, cfg, windowed)
            dec, _, _ = equalize_and_demap(x, g, 4)
            assert compute_ber(dec, bits).bit_errors == 0


class TestSinr:
    def test_cap(self):
        x = np.ones(8, dtype=complex)
        assert measure_sinr(x, x) == SINR_CAP_DB

    def test_20db(self, rng):
        ref = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        e = rng.standard_normal(100) + 0j
        e *= np.sqrt(0.01) * np.linalg.norm(ref) / np.linalg.norm(e)
        assert measure_sinr(ref + e, ref) == pytest.approx(20.0)

    @given(st.floats(0, 2 * np.pi), st.integers(0, 2**31 - 1))
    def test_phase_invariance(self, phi, seed):
        g = np.random.default_rng(seed)
        ref = g.standard_normal(32) + 1j * g.standard_normal(32)
        soft = ref + 0.1 * g.standard_normal(32)
        rot = np.exp(1j * phi)
        assert measure_sinr(rot * soft, rot * ref) == pytest.approx(measure_sinr(soft, ref), abs=1e-9)

    def test_errors(self):
        with pytest.raises(ValueError):
            measure_sinr(np.ones(3), np.ones(4))
        with pytest.raises(ValueError):
            measure_sinr(np.ones(3), np.zeros(3))


class TestBer:
    def test_identical(self, rng):
        b = rng.integers(0, 2, 100)
        assert compute_ber(b, b).ber == 0.0

    def test_complementary(self, rng):
        b = rng.integers(0, 2, 100)
        assert compute_ber(1 - b, b).ber == 1.0

    def test_seven_flips(self, rng):
        b = rng.integers(0, 2, 10_000)
        c = b.copy()
        c[rng.choice(10_000, 7, replace=False)] ^= 1
        rep = compute_ber(c, b)
        assert rep.ber == pytest.approx(7e-4) and rep.bit_errors == 7

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compute_ber(np.zeros(4), np.zeros(5))

    @given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=8))
    def test_aggregation_associative(self, parts):
        reps = [DetectionReport(min(e, b), b) for e, b in parts]
        total = DetectionReport(sum(r.bit_errors for r in reps), sum(r.bits_total for r in reps))
        left = reps[0]
        for r in reps[1:]:
            left = left + r
        assert (left.bit_errors, left.bits_total) == (total.bit_errors, total.bits_total)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            DetectionReport(5, 4)
        assert np.isnan(DetectionReport().ber)
        assert DetectionReport().sinr_db is None and DetectionReport().mean_sinr_db is None


class TestEndToEnd:
    def test_fig3_full_zf_35db(self):
        s = load_scenario("fig3.scn").with_overrides(
            snr_db=(35.0,), trials=4000, techniques=(Technique("direct_zf", "window"),))
        rep = run_ber_experiment(s).reports[(35.0, "direct_zf/window")]
        assert rep.bits_total >= 10**6
        assert rep.ber < 1e-3

    def test_quasi_banded_decisions_match_full_zf_at_40db(self):
        s = load_scenario("fig3.scn")
        cfg = s.cfg
        alloc = build_allocation("generalized", cfg, RngStream(s.allocation_seed, 0))
        eps = np.array(FIG3_CFOS)
        lam = build_interference_matrix(eps, alloc, cfg)
        zf, qb = DirectZF().fit(lam), QuasiBandedZF(10).fit(lam)
        rx = OfdmaReceiver(cfg)
        trials = 100
        h = draw_channel(s.profile, RngStream(7, 1), size=(trials, 4))
        bits = RngStream(7, 2).generator.integers(0, 2, (trials, 256), dtype=np.uint8)
        _, r = transmit(cfg, alloc, h[:, None], eps, bits[:, None], 4,
                        10 ** -4, RngStream(7, 3))
        rbar = rx(r)[:, 0]
        g = build_composite_channel(h, eps, alloc, cfg)
        d_zf, _, _ = equalize_and_demap(zf.predict(rbar), g, 4)
        d_qb, _, _ = equalize_and_demap(qb.predict(rbar), g, 4)
        same = np.all(d_zf.reshape(trials, 128, 2) == d_qb.reshape(trials, 128, 2), axis=-1)
        assert same.mean() >= 0.999
