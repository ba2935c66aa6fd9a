"""Drafting strategies behind one ``pick`` interface.

Five kinds:
  random         uniform over legal heroes
  top_winrate    greedy on historical per-hero winrates
  rollout_mcts   in-round UCT with random rollouts to the round end
  net_mcts       PUCT with the policy/value net, no cross-round value flow
  longterm_mcts  full PUCT with round-boundary value accumulation

In arena/self-play mode the very first pick of a game is sampled to
spread scenarios; all later picks (and every pick in assistant mode) are
deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .game import PLAYER1, DraftState, GameConfig, round_sign, transformed_winrate
from .pv import PolicyValueModel
from .search import SearchParams, run_search, sample_action
from .winrate import HeroStats

KINDS = ("random", "top_winrate", "rollout_mcts", "net_mcts", "longterm_mcts")


@dataclass
class StrategySpec:
    kind: str
    iterations: int = 1600
    c_puct: float = 1.0
    c_vl: float = 3.0
    exploration: float = 1.0       # UCB1 constant for rollout_mcts
    workers: int = 1
    checkpoint: str | None = None  # policy/value checkpoint for net kinds
    reuse_tree: bool = False
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.name is None:
            self.name = self.kind

    @classmethod
    def from_json(cls, block: dict) -> "StrategySpec":
        return cls(**block)


def move_schedule(step_index: int, mode: str) -> float:
    """Sampling temperature for a pick; 0 means deterministic argmax."""
    if mode == "assistant":
        return 0.0
    if mode in ("arena", "selfplay"):
        return 1.0 if step_index == 0 else 0.0
    raise ValueError(f"unknown mode {mode!r}")


class Strategy:
    """One game's worth of picking; per-instance rng and tree state."""

    def __init__(self, spec: StrategySpec, seed: int = 0):
        self.spec = spec
        self.rng = np.random.default_rng(seed)

    def pick(self, state: DraftState, mode: str = "arena") -> int:
        raise NotImplementedError

    def reset(self):
        """Called between games; clears any per-game state."""


class RandomStrategy(Strategy):
    def pick(self, state, mode="arena"):
        legal = state.legal_actions()
        return int(legal[self.rng.integers(len(legal))])


class TopWinrateStrategy(Strategy):
    """Greedy on historical winrates; first arena pick is softmax-sampled."""

    FIRST_PICK_TEMPERATURE = 0.1

    def __init__(self, spec, stats: HeroStats, seed=0):
        super().__init__(spec, seed)
        self.stats = stats

    def pick(self, state, mode="arena"):
        legal = state.legal_actions()
        rates = np.array([self.stats.winrate(h) for h in legal])
        if move_schedule(state.t, mode) > 0:
            logits = rates / self.FIRST_PICK_TEMPERATURE
            w = np.exp(logits - logits.max())
            return int(self.rng.choice(legal, p=w / w.sum()))
        return int(legal[int(np.argmax(rates))])


class _RolloutNode:
    __slots__ = ("state", "sign", "untried", "actions", "C", "W", "children")

    def __init__(self, state: DraftState, round_end: int):
        self.state = state
        self.sign = 0 if state.t >= round_end else (
            1 if state.acting_player == PLAYER1 else -1)
        self.untried = list(state.legal_actions()) if state.t < round_end else []
        self.actions = []
        self.C = []
        self.W = []
        self.children = []


class RolloutMctsStrategy(Strategy):
    """UCT restricted to the current round, random rollouts to the round end.

    Rewards are the zero-centered winning rate of the current round only in
    player1-centric terms; later rounds are invisible to this strategy.
    """

    def __init__(self, spec, predictor, seed=0):
        super().__init__(spec, seed)
        self.predictor = predictor

    def _round_value(self, state: DraftState, d: int) -> float:
        c1, c2 = state.round_lineups(d)
        phi = self.predictor.winrate(c1, c2)
        return round_sign(state.config, d) * transformed_winrate(phi)

    def _rollout(self, state: DraftState, round_end: int) -> DraftState:
        while state.t < round_end:
            legal = state.legal_actions()
            state = state.apply(int(legal[self.rng.integers(len(legal))]))
        return state

    def pick(self, state, mode="arena"):
        cfg = state.config
        d = state.round_index
        round_end = (d + 1) * cfg.picks_per_round
        root = _RolloutNode(state, round_end)
        c = self.spec.exploration
        for _ in range(self.spec.iterations):
            node, path = root, []
            # selection down fully-expanded nodes
            while not node.untried and node.state.t < round_end:
                total = sum(node.C)
                logn = math.log(max(total, 1))
                best_i, best_s = 0, -math.inf
                for i in range(len(node.actions)):
                    s = node.sign * node.W[i] / node.C[i] + c * math.sqrt(logn / node.C[i])
                    if s > best_s:
                        best_i, best_s = i, s
                path.append((node, best_i))
                node = node.children[best_i]
            if node.state.t < round_end:
                # expand one untried action (random order)
                j = int(self.rng.integers(len(node.untried)))
                a = node.untried.pop(j)
                child = _RolloutNode(node.state.apply(a), round_end)
                node.actions.append(a)
                node.C.append(0)
                node.W.append(0.0)
                node.children.append(child)
                path.append((node, len(node.actions) - 1))
                node = child
            z = self._round_value(self._rollout(node.state, round_end), d)
            for parent, i in path:
                parent.C[i] += 1
                parent.W[i] += z
        visits = np.asarray(root.C)
        order = np.argsort(root.actions)  # lowest-id tie-break under argmax
        actions = np.asarray(root.actions)[order]
        visits = visits[order]
        tau = move_schedule(state.t, mode)
        if tau > 0:
            return sample_action(actions, visits / visits.sum(), tau, self.rng)
        return int(actions[int(np.argmax(visits))])


class PuctStrategy(Strategy):
    """Policy/value-guided PUCT; ``long_term`` switches boundary accumulation."""

    def __init__(self, spec, model: PolicyValueModel, predictor, long_term: bool,
                 seed=0, noise: bool = False):
        super().__init__(spec, seed)
        self.model = model
        self.predictor = predictor
        self.long_term = long_term
        self.noise = noise
        self._root = None

    def reset(self):
        self._root = None

    def search_params(self) -> SearchParams:
        return SearchParams(
            iterations=self.spec.iterations, c_puct=self.spec.c_puct,
            c_vl=self.spec.c_vl, workers=self.spec.workers,
            long_term=self.long_term,
            dirichlet_alpha=0.3 if self.noise else None)

    def _advance_root(self, state: DraftState):
        if not self.spec.reuse_tree or self._root is None:
            return None
        # find the subtree matching `state` up to two plies below the old root
        frontier = [self._root]
        for _ in range(2):
            nxt = []
            for n in frontier:
                if n.state == state:
                    return n
                if n.expanded and n.children:
                    nxt.extend(c for c in n.children if c is not None)
            frontier = nxt
        return None

    def search(self, state: DraftState):
        result = run_search(state, self.model, self.predictor,
                            self.search_params(), rng=self.rng,
                            reuse_root=self._advance_root(state))
        if self.spec.reuse_tree:
            self._root = result.root
        return result

    def pick(self, state, mode="arena"):
        result = self.search(state)
        tau = move_schedule(state.t, mode)
        return sample_action(result.actions, result.pi, tau, self.rng)


def build_strategy(spec: StrategySpec, seed: int = 0, predictor=None,
                   stats: HeroStats | None = None,
                   model: PolicyValueModel | None = None,
                   config: GameConfig | None = None,
                   noise: bool = False) -> Strategy:
    """Wire a strategy from its spec plus the resources its kind needs."""
    if spec.kind == "random":
        return RandomStrategy(spec, seed)
    if spec.kind == "top_winrate":
        if stats is None:
            raise ValueError("top_winrate requires a hero-stats table")
        return TopWinrateStrategy(spec, stats, seed)
    if spec.kind == "rollout_mcts":
        if predictor is None:
            raise ValueError("rollout_mcts requires a winrate predictor")
        return RolloutMctsStrategy(spec, predictor, seed)
    # net-guided kinds; without a model they run pure-prior search
    # (uniform priors, zero leaf values)
    if model is None and spec.checkpoint is not None:
        model = PolicyValueModel.load(spec.checkpoint, config=config,
                                      strict=config is not None)
    if predictor is None:
        raise ValueError(f"{spec.kind} requires a winrate predictor")
    return PuctStrategy(spec, model, predictor,
                        long_term=(spec.kind == "longterm_mcts"),
                        seed=seed, noise=noise)


def load_strategy_spec(path_or_dict) -> StrategySpec:
    if isinstance(path_or_dict, dict):
        return StrategySpec.from_json(path_or_dict)
    with open(path_or_dict) as f:
        return StrategySpec.from_json(json.load(f))
