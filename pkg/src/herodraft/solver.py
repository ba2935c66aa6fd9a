"""Exhaustive minimax solver for small draft configurations.

Serves as the correctness oracle for the tree search: full-depth minimax
over legal actions with the same terminal value as ``terminal_reward``
(player1 maximizes, player2 minimizes).  States are memoized on a
canonical key that forgets pick order inside a round, since the
winning-rate function only sees hero sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .game import CAMP1, PLAYER1, DraftState, GameConfig, round_sign, transformed_winrate


class BudgetExceededError(RuntimeError):
    pass


@dataclass
class SolveResult:
    value: float                    # full-game value, player1 perspective
    optimal_actions: frozenset[int]  # for the acting player at the queried state
    leaf_evaluations: int = 0
    memo_hits: int = 0


@dataclass
class _Ctx:
    config: GameConfig
    predictor: object
    budget: int
    memo: dict = field(default_factory=dict)
    leaves: int = 0
    hits: int = 0


def _canonical_key(state: DraftState):
    cfg = state.config
    cur1, cur2 = [], []
    for i, h in enumerate(state.current_round_picks()):
        (cur1 if cfg.round_order[i] == CAMP1 else cur2).append(h)
    return (
        state.t,
        state.player_history(PLAYER1),
        state.player_history(1 - PLAYER1),
        frozenset(cur1),
        frozenset(cur2),
    )


def _future_value(ctx: _Ctx, state: DraftState) -> float:
    """Sum of signed round values for rounds not yet complete at ``state``."""
    if state.is_terminal:
        return 0.0
    key = _canonical_key(state)
    cached = ctx.memo.get(key)
    if cached is not None:
        ctx.hits += 1
        return cached
    cfg = state.config
    maximizing = state.acting_player == PLAYER1
    best = None
    for a in state.legal_actions():
        child = state.apply(a)
        v = _child_value(ctx, state, child)
        if best is None or (v > best if maximizing else v < best):
            best = v
    ctx.memo[key] = best
    return best


def _child_value(ctx: _Ctx, parent: DraftState, child: DraftState) -> float:
    """Future value of ``child`` plus the round value if the pick closed a round."""
    v = 0.0
    if child.t % child.config.picks_per_round == 0:
        d = child.t // child.config.picks_per_round - 1
        c1, c2 = child.round_lineups(d)
        ctx.leaves += 1
        if ctx.leaves > ctx.budget:
            raise BudgetExceededError(
                f"exceeded {ctx.budget} winrate evaluations; config too large")
        v += round_sign(child.config, d) * transformed_winrate(
            ctx.predictor.winrate(c1, c2))
    return v + _future_value(ctx, child)


def exact_solve(config: GameConfig, predictor, state: DraftState | None = None,
                budget: int = 100_000_000) -> SolveResult:
    """Solve the remaining game by minimax.

    Returns the full-game value from player1's perspective (completed
    rounds included) and the set of optimal actions for the acting player.
    """
    if state is None:
        state = DraftState(config)
    ctx = _Ctx(config, predictor, budget)
    done_value = 0.0
    done = state.t // config.picks_per_round
    for d in range(done):
        c1, c2 = state.round_lineups(d)
        done_value += round_sign(config, d) * transformed_winrate(
            predictor.winrate(c1, c2))
    if state.is_terminal:
        return SolveResult(done_value, frozenset(), ctx.leaves, ctx.hits)

    maximizing = state.acting_player == PLAYER1
    values = {}
    for a in state.legal_actions():
        values[a] = _child_value(ctx, state, state.apply(a))
    best = max(values.values()) if maximizing else min(values.values())
    optimal = frozenset(a for a, v in values.items() if abs(v - best) < 1e-12)
    return SolveResult(done_value + best, optimal, ctx.leaves, ctx.hits)


def action_values(config: GameConfig, predictor, state: DraftState | None = None,
                  budget: int = 100_000_000) -> dict[int, float]:
    """Minimax value (player1 view, future rounds only) of every legal action."""
    if state is None:
        state = DraftState(config)
    ctx = _Ctx(config, predictor, budget)
    return {a: _child_value(ctx, state, state.apply(a)) for a in state.legal_actions()}
