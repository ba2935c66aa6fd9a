import numpy as np
import pytest

from herodraft.game import DraftState, GameConfig, parse_draft
from herodraft.pv import (PolicyValueModel, TrainingSample, encode_state,
                          encoding_width, load_samples, make_targets,
                          player_round_values, sample_from_bytes,
                          sample_to_bytes, save_samples, train_policy_value)


def uniform_pis(config, picks):
    """One uniform-over-legal visit distribution per step of a pick list."""
    pis = []
    state = DraftState(config)
    for a in picks:
        legal = state.legal_actions()
        pi = np.zeros(config.n_heroes, dtype=np.float32)
        pi[legal] = 1.0 / len(legal)
        pis.append(pi)
        state = state.apply(a)
    return pis


class TestEncoding:
    def test_width(self, bo2_config):
        assert encoding_width(bo2_config) == 4 * 8 + 2 + 4 + 2
        x = encode_state(DraftState(bo2_config))
        assert x.shape == (encoding_width(bo2_config),)

    def test_initial_state_flags(self, bo2_config):
        x = encode_state(DraftState(bo2_config))
        n, L, D = 8, 4, 2
        assert x[:4 * n].sum() == 0          # no picks anywhere
        assert x[4 * n] == 1.0               # round 0
        assert x[4 * n + D] == 1.0           # step 0 of the round
        assert x[4 * n + D + L] == 1.0       # player1 acting
        assert x[4 * n + D + L + 1] == 1.0   # acting player is camp1

    def test_occupancy_sections(self, bo2_config):
        s = parse_draft(bo2_config, "0,1,2,3")
        # round 1 begins: current-round sections reset, histories persist
        x = encode_state(s)
        n = 8
        assert x[:2 * n].sum() == 0
        assert sorted(np.flatnonzero(x[2 * n:3 * n])) == [0, 3]  # player1 took 0,3
        assert sorted(np.flatnonzero(x[3 * n:4 * n])) == [1, 2]
        assert x[4 * n + 1] == 1.0  # round 1

    def test_camp_split_mid_round(self, small_config):
        s = parse_draft(small_config, "7,2,5")
        x = encode_state(s)
        assert np.flatnonzero(x[:8]).tolist() == [7]       # camp1 picks
        assert np.flatnonzero(x[8:16]).tolist() == [2, 5]  # camp2 picks

    def test_terminal_rejected(self, tiny_config):
        with pytest.raises(ValueError):
            encode_state(parse_draft(tiny_config, "0,1"))


class TestTargets:
    def test_round_values_fixture(self):
        """phis (0.75, 0.5, 0.25) -> player1 round values (0.5, 0, -0.5)."""
        cfg = GameConfig.standard(n_heroes=95, rounds=3)
        vals = player_round_values(cfg, (0.75, 0.5, 0.25), player=0)
        # player1 is camp1 in rounds 0 and 2, camp2 in round 1
        assert vals == pytest.approx([0.5, 0.0, -0.5])
        vals2 = player_round_values(cfg, (0.75, 0.5, 0.25), player=1)
        assert vals2 == pytest.approx([-0.5, 0.0, 0.5])

    def test_long_term_target_normalization(self):
        """Round-0 target for values (0.5, 0, -0.5) is their mean: 0."""
        cfg = GameConfig(n_heroes=8, picks_per_round=4, rounds=3,
                         round_order=(0, 1, 1, 0), first_player=(0, 0, 0))
        picks = [0, 1, 2, 3, 4, 5, 6, 7, 1, 0, 3, 2]
        phis = (0.75, 0.5, 0.25)  # player1 values (0.5, 0, -0.5)
        samples = make_targets(cfg, picks, uniform_pis(cfg, picks), phis,
                               long_term=True)
        p1 = [s for s in samples if s.player == 0]
        assert p1[0].z == pytest.approx(0.0)                # mean of all three
        r1 = [s for s in p1 if s.round_index == 1]
        assert all(s.z == pytest.approx(-0.25) for s in r1)  # mean of (0,-0.5)
        r2 = [s for s in p1 if s.round_index == 2]
        assert all(s.z == pytest.approx(-0.5) for s in r2)

    def test_short_sighted_targets(self):
        cfg = GameConfig(n_heroes=8, picks_per_round=4, rounds=3,
                         round_order=(0, 1, 1, 0), first_player=(0, 0, 0))
        picks = [0, 1, 2, 3, 4, 5, 6, 7, 1, 0, 3, 2]
        samples = make_targets(cfg, picks, uniform_pis(cfg, picks),
                               (0.75, 0.5, 0.25), long_term=False)
        by_round = {s.round_index for s in samples}
        assert by_round == {0, 1, 2}
        for s in samples:
            expected = player_round_values(cfg, (0.75, 0.5, 0.25),
                                           s.player)[s.round_index]
            assert s.z == pytest.approx(expected)

    def test_same_round_same_player_equality(self, bo2_config):
        picks = [0, 1, 2, 3, 4, 5, 6, 7]
        samples = make_targets(bo2_config, picks,
                               uniform_pis(bo2_config, picks), (0.7, 0.4))
        for d in (0, 1):
            for p in (0, 1):
                zs = {s.z for s in samples
                      if s.round_index == d and s.player == p}
                assert len(zs) == 1

    def test_targets_within_tanh_range(self, bo2_config):
        picks = [0, 1, 2, 3, 4, 5, 6, 7]
        for phis in [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0)]:
            for s in make_targets(bo2_config, picks,
                                  uniform_pis(bo2_config, picks), phis):
                assert -1.0 <= s.z <= 1.0

    def test_validation(self, bo2_config):
        with pytest.raises(ValueError):
            make_targets(bo2_config, [0, 1], uniform_pis(bo2_config, [0, 1]),
                         (0.5, 0.5))


class TestModel:
    def test_predict_shapes_and_masking(self, small_config):
        m = PolicyValueModel(small_config, hidden=(16,), seed=0)
        pi, v = m.predict(DraftState(small_config))
        assert pi.shape == (8,)
        assert pi.sum() == pytest.approx(1.0)
        assert -1.0 <= v <= 1.0

    def test_training_reduces_loss(self, bo2_config):
        picks = [0, 1, 2, 3, 4, 5, 6, 7]
        samples = make_targets(bo2_config, picks,
                               uniform_pis(bo2_config, picks), (0.8, 0.3))
        m = PolicyValueModel(bo2_config, hidden=(16,), seed=0)
        hist = train_policy_value(m, samples, batch_size=8, lr=1e-2,
                                  epochs=60)
        assert hist[-1]["loss"] < hist[0]["loss"]

    def test_checkpoint_roundtrip(self, tmp_path, small_config):
        m = PolicyValueModel(small_config, hidden=(8,), seed=1)
        p = tmp_path / "pv.ckpt"
        m.save(p)
        again = PolicyValueModel.load(p, config=small_config, strict=True)
        s = DraftState(small_config)
        pi1, v1 = m.predict(s)
        pi2, v2 = again.predict(s)
        assert np.array_equal(pi1, pi2) and v1 == v2


class TestSampleRecords:
    def test_bytes_roundtrip(self, bo2_config):
        picks = [0, 1, 2, 3, 4, 5, 6, 7]
        samples = make_targets(bo2_config, picks,
                               uniform_pis(bo2_config, picks), (0.7, 0.4))
        s = samples[3]
        record = sample_to_bytes(s)
        (length,) = __import__("struct").unpack("<I", record[:4])
        assert length == len(record) - 4  # uint32 length frame
        again = sample_from_bytes(record[4:])
        assert np.array_equal(again.encoding, s.encoding)
        assert np.array_equal(again.pi, s.pi)
        assert again.z == pytest.approx(s.z, abs=1e-7)
        assert (again.round_index, again.player) == (s.round_index, s.player)

    def test_file_roundtrip(self, tmp_path, bo2_config):
        picks = [0, 1, 2, 3, 4, 5, 6, 7]
        samples = make_targets(bo2_config, picks,
                               uniform_pis(bo2_config, picks), (0.7, 0.4))
        p = tmp_path / "samples.bin"
        save_samples(p, samples)
        again = load_samples(p)
        assert len(again) == len(samples)
        assert np.array_equal(again[0].encoding, samples[0].encoding)
