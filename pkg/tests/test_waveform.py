import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ofdma_cfo.numerics import RngStream
from ofdma_cfo.receiver import alias, make_window, receiver_dft, remove_gi
from ofdma_cfo.waveform import (
    AllocationMap,
    OfdmaConfig,
    build_allocation,
    compose_frame,
    cyclic_extend,
    map_subcarriers,
    synthesize_time_symbol,
)


class TestConfig:
    def test_derived_lengths(self, fig3_cfg):
        assert fig3_cfg.n_guard == 32 + 7 - 14
        assert fig3_cfg.n_total == 128 + 39
        assert fig3_cfg.n_per_user == 32
        assert fig3_cfg.full_occupancy

    @pytest.mark.parametrize("kw", [
        dict(n_subcarriers=100, n_users=4, n_cp=8, n_cs=4),
        dict(n_subcarriers=32, n_users=0, n_cp=8, n_cs=4),
        dict(n_subcarriers=32, n_users=4, n_cp=2, n_cs=2, n_window=8),
        dict(n_subcarriers=32, n_users=4, n_cp=8, n_cs=4, n_window=3),
        dict(n_subcarriers=32, n_users=3, n_cp=8, n_cs=4),
        dict(n_subcarriers=32, n_users=4, n_cp=-1, n_cs=4),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            OfdmaConfig(**kw)

    def test_active_subset(self):
        cfg = OfdmaConfig(16, 2, 4, 2, 4, active=range(1, 15))
        assert len(cfg.active) == 14 and not cfg.full_occupancy
        with pytest.raises(ValueError):
            OfdmaConfig(16, 2, 4, 2, 4, active=(1, 1, 2, 3))

    def test_channel_limits(self, fig3_cfg):
        assert fig3_cfg.max_channel_length(windowed=True) == fig3_cfg.n_guard + 1
        assert fig3_cfg.max_channel_length(windowed=False) == fig3_cfg.n_cp + 1


class TestAllocation:
    def test_interleaved(self):
        a = build_allocation("interleaved", OfdmaConfig(8, 2, 2, 1))
        assert [list(s) for s in a.sets] == [[0, 2, 4, 6], [1, 3, 5, 7]]

    def test_blocked(self):
        a = build_allocation("blocked", OfdmaConfig(8, 2, 2, 1))
        assert [list(s) for s in a.sets] == [[0, 1, 2, 3], [4, 5, 6, 7]]

    @given(st.integers(0, 10_000))
    def test_generalized_partition(self, seed):
        cfg = OfdmaConfig(32, 4, 8, 4, 8)
        a = build_allocation("generalized", cfg, RngStream(seed))
        assert all(len(s) == 8 for s in a.sets)
        np.testing.assert_array_equal(np.sort(np.concatenate(a.sets)), np.arange(32))

    def test_generalized_reproducible(self, fig2_cfg):
        a = build_allocation("generalized", fig2_cfg, RngStream(3))
        b = build_allocation("generalized", fig2_cfg, RngStream(3))
        assert all(np.array_equal(x, y) for x, y in zip(a.sets, b.sets))

    def test_guard_bins_unused(self):
        cfg = OfdmaConfig(16, 2, 4, 2, 4, active=range(1, 15))
        a = build_allocation("generalized", cfg, RngStream(0))
        own = a.owner()
        assert own[0] == -1 and own[15] == -1
        assert set(a.active) == set(range(1, 15))

    def test_errors(self, fig2_cfg):
        with pytest.raises(ValueError):
            build_allocation("generalized", fig2_cfg)
        with pytest.raises(ValueError):
            build_allocation("random", fig2_cfg, RngStream(0))
        with pytest.raises(ValueError):
            AllocationMap("x", ([0, 1], [1, 2]), 4)
        with pytest.raises(ValueError):
            AllocationMap("x", ([0, 1], [2]), 4)


class TestMapping:
    def test_gamma(self):
        a = AllocationMap("x", ([1, 3], [0, 2]), 4)
        np.testing.assert_array_equal(map_subcarriers([5, 7], a, 0), [0, 5, 0, 7])

    def test_disjoint_energy_and_reassembly(self, fig2_alloc, rng):
        d = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        mapped = [map_subcarriers(d[i], fig2_alloc, i) for i in range(4)]
        support = np.array([m != 0 for m in mapped])
        assert support.sum(axis=0).max() == 1
        for i in range(4):
            assert np.isclose(np.linalg.norm(mapped[i]), np.linalg.norm(d[i]))
        np.testing.assert_array_equal(sum(mapped), compose_frame(d, fig2_alloc))

    def test_errors(self, fig2_alloc):
        with pytest.raises(IndexError):
            map_subcarriers(np.ones(8), fig2_alloc, 4)
        with pytest.raises(ValueError):
            map_subcarriers(np.ones(7), fig2_alloc, 0)


class TestSynthesis:
    def test_dc(self):
        e0 = np.zeros(16)
        e0[0] = 1
        np.testing.assert_allclose(synthesize_time_symbol(e0), np.full(16, 1 / 4), atol=1e-15)

    def test_unitary_round_trip(self, rng):
        s_f = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        s_t = synthesize_time_symbol(s_f)
        assert np.isclose(np.linalg.norm(s_t), np.linalg.norm(s_f))
        assert np.max(np.abs(receiver_dft(s_t) - s_f)) < 1e-12


class TestCyclicExtend:
    def test_definition(self):
        np.testing.assert_array_equal(cyclic_extend([1, 2, 3, 4], 2, 1), [3, 4, 1, 2, 3, 4, 1])

    def test_identity(self, rng):
        s = rng.standard_normal(8)
        np.testing.assert_array_equal(cyclic_extend(s, 0, 0), s)

    def test_length(self, fig3_cfg, rng):
        s = rng.standard_normal(128)
        assert cyclic_extend(s, fig3_cfg.n_cp, fig3_cfg.n_cs).shape == (fig3_cfg.n_total,)

    def test_too_long(self):
        with pytest.raises(ValueError):
            cyclic_extend(np.ones(4), 5, 0)

    @given(st.sampled_from([(32, 8, 16, 4), (128, 14, 32, 7), (64, 6, 10, 3), (32, 8, 4, 4)]),
           st.integers(0, 2**31 - 1))
    def test_extend_remove_fold_is_identity(self, dims, seed):
        n, n_w, n_cp, n_cs = dims
        cfg = OfdmaConfig(n, 1, n_cp, n_cs, n_w)
        g = np.random.default_rng(seed)
        s = g.standard_normal(n) + 1j * g.standard_normal(n)
        r = remove_gi(cyclic_extend(s, n_cp, n_cs), cfg)
        out = alias(r * make_window(n, n_w).weights, n, n_w)
        shift = n_cs - n_w // 2
        np.testing.assert_allclose(out, np.roll(s, -shift), atol=1e-12)
