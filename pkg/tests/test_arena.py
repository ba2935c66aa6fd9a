import json

import numpy as np
import pytest

from herodraft.arena import (PairResult, TournamentReport, play_game,
                             run_pairing, run_tournament)
from herodraft.game import GameConfig
from herodraft.oracle import generate_matches, sample_oracle
from herodraft.strategies import StrategySpec
from herodraft.winrate import hero_stats
from conftest import strength_oracle


class TestPlayGame:
    def test_score_is_round_averaged(self, bo2_config, small_oracle):
        from herodraft.strategies import build_strategy
        row = build_strategy(StrategySpec(kind="random"), seed=0)
        col = build_strategy(StrategySpec(kind="random"), seed=1)
        lat = {"row": [], "col": []}
        score = play_game(row, col, 0, bo2_config, small_oracle, lat)
        assert 0.0 <= score <= 1.0
        assert len(lat["row"]) + len(lat["col"]) == bo2_config.total_steps

    def test_strong_strategy_scores_high(self, small_config):
        from herodraft.strategies import build_strategy
        o = strength_oracle([3, 2, 1, 0, -1, -2, -3, -4])
        good = build_strategy(StrategySpec(kind="rollout_mcts", iterations=200),
                              seed=0, predictor=o)
        bad = build_strategy(StrategySpec(kind="random"), seed=0)
        lat = {"row": [], "col": []}
        score = play_game(good, bad, 0, small_config, o, lat)
        assert score > 0.5


class TestRunPairing:
    def test_deterministic_and_balanced(self, small_config, small_oracle):
        a = StrategySpec(kind="random", name="a")
        b = StrategySpec(kind="random", name="b")
        r1 = run_pairing(a, b, 10, small_oracle, small_config, seed=3)
        r2 = run_pairing(a, b, 10, small_oracle, small_config, seed=3)
        assert r1.scores == r2.scores
        assert r1.n_games == 10 and r1.failures == 0
        assert 0.0 <= r1.mean <= 1.0 and r1.ci_half > 0

    def test_latency_reported(self, small_config, small_oracle):
        a = StrategySpec(kind="rollout_mcts", iterations=50, name="mcts")
        b = StrategySpec(kind="random", name="rnd")
        r = run_pairing(a, b, 4, small_oracle, small_config, seed=0)
        assert r.latency["row"]["strategy"] == "mcts"
        assert r.latency["row"]["mean"] > r.latency["col"]["mean"]
        assert r.latency["row"]["p95"] >= r.latency["row"]["mean"] * 0.5

    def test_search_beats_random(self, small_config, small_oracle):
        a = StrategySpec(kind="longterm_mcts", iterations=400, name="search")
        b = StrategySpec(kind="random", name="rnd")
        r = run_pairing(a, b, 12, small_oracle, small_config, seed=1)
        assert r.mean > 0.5


class TestTournament:
    def build_report(self, config, oracle, games=6):
        ds = generate_matches(oracle, 2000, lineup_size=2, seed=0)
        specs = [StrategySpec(kind="random", name="rd"),
                 StrategySpec(kind="top_winrate", name="hwr"),
                 StrategySpec(kind="rollout_mcts", iterations=80, name="da")]
        return run_tournament(specs, games, oracle, config, seed=0,
                              resources={"stats": hero_stats(ds, 8)})

    def test_all_pairs_present(self, small_config, small_oracle):
        rep = self.build_report(small_config, small_oracle)
        assert rep.cell("rd", "hwr") is not None
        assert rep.cell("hwr", "da") is not None
        assert rep.cell("rd", "da") is not None

    def test_cell_complement(self, small_config, small_oracle):
        rep = self.build_report(small_config, small_oracle)
        m1, _ = rep.cell("rd", "hwr")
        m2, _ = rep.cell("hwr", "rd")
        assert m1 + m2 == pytest.approx(1.0)

    def test_mean_vs_field_and_ordering(self, small_config, small_oracle):
        rep = self.build_report(small_config, small_oracle)
        means = {n: rep.mean_vs_field(n) for n in ("rd", "hwr", "da")}
        assert all(0.0 <= m <= 1.0 for m in means.values())
        ordered = [rep.mean_vs_field(n) for n in rep.order]
        assert ordered == sorted(ordered)

    def test_render_and_json(self, small_config, small_oracle, tmp_path):
        rep = self.build_report(small_config, small_oracle)
        text = rep.render_text()
        for name in ("rd", "hwr", "da"):
            assert name in text
        p = tmp_path / "report.json"
        rep.save_json(p)
        blob = json.loads(p.read_text())
        assert set(blob["order"]) == {"rd", "hwr", "da"}
        csv_path = tmp_path / "scores.csv"
        rep.save_scores_csv(csv_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("row,col,game,score")

    def test_duplicate_names_rejected(self, small_config, small_oracle):
        specs = [StrategySpec(kind="random"), StrategySpec(kind="random")]
        with pytest.raises(ValueError):
            run_tournament(specs, 2, small_oracle, small_config)
