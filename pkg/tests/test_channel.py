import numpy as np
import pytest

from fdd_mimo.channel import (
    BF,
    DP,
    ZF,
    SystemConfig,
    draw_downlink,
    draw_uplink,
    trial_stream,
)


def make_config(**overrides):
    defaults = dict(
        n_rx=8, n_tx=8, n_users=8, snr=1000.0, feedback_bits_per_block=80.0
    )
    defaults.update(overrides)
    return SystemConfig(**defaults)


class TestConfigValidation:
    def test_n_tx_cannot_exceed_n_rx(self):
        with pytest.raises(ValueError, match="n_tx"):
            make_config(n_tx=9)

    def test_zf_needs_enough_antennas(self):
        with pytest.raises(ValueError, match="n_tx >= n_users"):
            make_config(scheme=ZF, n_users=9, n_rx=16)

    def test_zf_order_defaults(self):
        assert make_config(scheme=BF).zf_order == 0
        assert make_config(scheme=ZF).zf_order == 7
        assert make_config(scheme=DP).zf_order == 7

    def test_partial_zf_requires_explicit_order(self):
        with pytest.raises(ValueError, match="zf_order"):
            make_config(scheme="partial_zf")
        cfg = make_config(scheme="partial_zf", zf_order=3)
        assert cfg.zf_order == 3

    def test_partial_zf_order_range(self):
        with pytest.raises(ValueError):
            make_config(scheme="partial_zf", zf_order=8)
        with pytest.raises(ValueError, match="n_tx > zf_order"):
            make_config(scheme="partial_zf", zf_order=7, n_tx=7, n_rx=8)

    def test_exactly_one_feedback_field(self):
        with pytest.raises(ValueError, match="exactly one"):
            make_config(feedback_bits_per_block=None)
        with pytest.raises(ValueError, match="exactly one"):
            make_config(feedback_fraction=0.1)
        cfg = make_config(feedback_bits_per_block=None, feedback_fraction=0.1)
        assert cfg.feedback_fraction == 0.1

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            make_config(scheme="mmse")


class TestDraws:
    def test_downlink_shape(self):
        cfg = make_config()
        h = draw_downlink(cfg, trial_stream(0, 0)).downlink
        assert h.shape == (8, 8)
        assert h.dtype == complex

    def test_uplink_shape(self):
        cfg = make_config(n_rx=64)
        real = draw_uplink(cfg, trial_stream(0, 0))
        assert real.uplink.shape == (64, 8)
        assert real.downlink is None

    def test_same_seed_identical(self):
        cfg = make_config(n_rx=64)
        a = draw_uplink(cfg, trial_stream(123, 4, 5)).uplink
        b = draw_uplink(cfg, trial_stream(123, 4, 5)).uplink
        assert np.array_equal(a, b)

    def test_different_branches_differ(self):
        cfg = make_config()
        a = draw_downlink(cfg, trial_stream(123, 0)).downlink
        b = draw_downlink(cfg, trial_stream(123, 1)).downlink
        assert not np.allclose(a, b)


class TestStatistics:
    def test_unit_element_power(self):
        cfg = make_config(n_rx=1000, n_tx=1000, n_users=1000)
        h = draw_downlink(cfg, trial_stream(7, 0)).downlink
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_real_part_variance_half(self):
        cfg = make_config(n_rx=1000, n_tx=1000, n_users=1000)
        h = draw_downlink(cfg, trial_stream(8, 0)).downlink
        assert np.var(h.real) == pytest.approx(0.5, abs=0.01)

    def test_element_independence(self):
        # correlation between distinct entries across 1e5 blocks is 0 within 3 SE
        cfg = make_config(n_rx=2, n_tx=2, n_users=2)
        rng = trial_stream(9, 0)
        blocks = np.stack(
            [draw_downlink(cfg, rng).downlink for _ in range(100_000)]
        ).reshape(100_000, 4)
        n = blocks.shape[0]
        for i in range(4):
            for j in range(i + 1, 4):
                corr = np.mean(blocks[:, i] * np.conj(blocks[:, j]))
                assert abs(corr) < 3.0 / np.sqrt(n)
