"""Pairwise tournament evaluation with predicted-winrate scoring.

A game's score for the row strategy is the mean over rounds of the
predicted winning rate from the row player's side; pairings swap
first-pick rights halfway through for fairness, and results aggregate
mean +/- a 95% normal-approximation confidence interval.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .game import PLAYER1, PLAYER2, DraftState, GameConfig, round_winrates
from .strategies import StrategySpec, build_strategy


@dataclass
class PairResult:
    row: str
    col: str
    n_games: int
    scores: list[float]
    mean: float
    ci_half: float
    latency: dict            # per strategy name: {"mean": s, "p95": s}
    failures: int = 0

    def summary(self) -> str:
        return f"{self.row} vs {self.col}: {self.mean:.3f} ± {self.ci_half:.3f}"


def _confidence_interval(scores) -> tuple[float, float]:
    arr = np.asarray(scores, dtype=np.float64)
    mean = float(arr.mean())
    if len(arr) < 2:
        return mean, float("inf")
    half = 1.96 * float(arr.std(ddof=1)) / np.sqrt(len(arr))
    return mean, half


def play_game(strat_row, strat_col, row_player: int, config: GameConfig,
              predictor, latencies: dict) -> float:
    """One full draft; returns the row strategy's round-averaged winrate."""
    strat_row.reset()
    strat_col.reset()
    state = DraftState(config)
    by_player = {row_player: strat_row, 1 - row_player: strat_col}
    names = {row_player: "row", 1 - row_player: "col"}
    while not state.is_terminal:
        strat = by_player[state.acting_player]
        t0 = time.perf_counter()
        action = strat.pick(state, mode="arena")
        latencies[names[state.acting_player]].append(time.perf_counter() - t0)
        state = state.apply(action)
    phis = round_winrates(state, predictor)
    scores = []
    for d, phi in enumerate(phis):
        row_is_camp1 = config.first_player[d] == row_player
        scores.append(phi if row_is_camp1 else 1.0 - phi)
    return float(np.mean(scores))


def run_pairing(spec_row: StrategySpec, spec_col: StrategySpec, n_games: int,
                predictor, config: GameConfig, seed: int = 0,
                resources: dict | None = None) -> PairResult:
    """Play ``n_games`` between two specs; row first-picks for the first half."""
    resources = resources or {}
    scores = []
    latencies = {"row": [], "col": []}
    failures = 0
    for g in range(n_games):
        row_player = PLAYER1 if g < n_games // 2 else PLAYER2
        game_seed = np.random.SeedSequence([seed, g]).generate_state(1)[0]
        strat_row = _build(spec_row, int(game_seed), predictor, config, resources)
        strat_col = _build(spec_col, int(game_seed) + 1, predictor, config, resources)
        try:
            scores.append(play_game(strat_row, strat_col, row_player, config,
                                    predictor, latencies))
        except Exception:
            failures += 1
    mean, half = _confidence_interval(scores)
    lat = {}
    for side, name in (("row", spec_row.name), ("col", spec_col.name)):
        vals = np.asarray(latencies[side])
        lat[side] = {"strategy": name,
                     "mean": float(vals.mean()) if len(vals) else 0.0,
                     "p95": float(np.percentile(vals, 95)) if len(vals) else 0.0}
    return PairResult(spec_row.name, spec_col.name, len(scores), scores,
                      mean, half, lat, failures)


def _build(spec, seed, predictor, config, resources):
    return build_strategy(
        spec, seed=seed, predictor=predictor,
        stats=resources.get("stats"),
        model=resources.get("models", {}).get(spec.name),
        config=config)


@dataclass
class TournamentReport:
    specs: list[str]
    pairings: dict                  # (row, col) name tuple -> PairResult
    order: list[str] = field(default_factory=list)   # ascending strength

    def mean_vs_field(self, name: str) -> float:
        vals = []
        for (r, c), res in self.pairings.items():
            if r == name:
                vals.append(res.mean)
            elif c == name:
                vals.append(1.0 - res.mean)
        return float(np.mean(vals)) if vals else 0.5

    def cell(self, row: str, col: str) -> tuple[float, float] | None:
        if (row, col) in self.pairings:
            r = self.pairings[(row, col)]
            return r.mean, r.ci_half
        if (col, row) in self.pairings:
            r = self.pairings[(col, row)]
            return 1.0 - r.mean, r.ci_half
        return None

    def render_text(self) -> str:
        names = self.order or self.specs
        width = max(len(n) for n in names) + 2
        lines = ["Row/Col".ljust(width) + "".join(n.ljust(width + 12) for n in names[:-1])]
        for i, row in enumerate(names):
            cells = []
            for col in names[:i]:
                m, h = self.cell(row, col)
                cells.append(f"{m:.3f} ± {h:.3f}".ljust(width + 12))
            for _ in range(i, len(names) - 1):
                cells.append("-".ljust(width + 12))
            lines.append(row.ljust(width) + "".join(cells))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "specs": self.specs,
            "order": self.order,
            "pairings": [
                {"row": r, "col": c, "mean": p.mean, "ci95": p.ci_half,
                 "n_games": p.n_games, "failures": p.failures,
                 "latency": p.latency}
                for (r, c), p in self.pairings.items()
            ],
        }

    def save_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2)

    def save_scores_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["row", "col", "game", "score"])
            for (r, c), p in self.pairings.items():
                for g, s in enumerate(p.scores):
                    w.writerow([r, c, g, s])


def run_tournament(specs: list[StrategySpec], n_games: int, predictor,
                   config: GameConfig, seed: int = 0,
                   resources: dict | None = None,
                   progress=None) -> TournamentReport:
    """All unordered pairs; report sorted ascending by mean-vs-field."""
    if len(specs) < 2:
        raise ValueError("need at least two strategies")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("strategy names must be unique")
    pairings = {}
    pairs = [(i, j) for i in range(len(specs)) for j in range(i + 1, len(specs))]
    for k, (i, j) in enumerate(pairs):
        res = run_pairing(specs[i], specs[j], n_games, predictor, config,
                          seed=np.random.SeedSequence([seed, 7919, k]).generate_state(1)[0].item() % (2**31),
                          resources=resources)
        pairings[(names[i], names[j])] = res
        if progress:
            progress(k + 1, len(pairs), res)
    report = TournamentReport(names, pairings)
    report.order = sorted(names, key=report.mean_vs_field)
    return report
