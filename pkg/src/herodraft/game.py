"""Multi-round hero drafting game: configuration, state, legality, rewards.

A full game is D rounds; each round drafts L heroes following a fixed
camp order (camp1 always picks first within a round).  Which player is
camp1 in a given round is set by ``first_player``.  A player may never
reuse a hero it picked in an earlier round, and no hero appears twice
within one round.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property

PLAYER1 = 0
PLAYER2 = 1
CAMP1 = 0
CAMP2 = 1

#: Standard 10-pick camp order: 1-2-2-1-1-2-2-1-1-2.
STANDARD_ROUND_ORDER = (0, 1, 1, 0, 0, 1, 1, 0, 0, 1)


class IllegalActionError(ValueError):
    """Raised when a pick violates draft legality.

    ``reason`` is one of ``"repeat-in-round"``, ``"own-history"``,
    ``"out-of-range"``, ``"terminal"``.
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class GameConfig:
    """Immutable definition of a best-of-N drafting game."""

    n_heroes: int
    picks_per_round: int
    rounds: int
    round_order: tuple[int, ...]
    first_player: tuple[int, ...]

    def __post_init__(self):
        L, D = self.picks_per_round, self.rounds
        if L < 2 or L % 2 != 0:
            raise ValueError(f"picks_per_round must be even and >= 2, got {L}")
        if D < 1:
            raise ValueError(f"rounds must be >= 1, got {D}")
        order = tuple(self.round_order)
        if len(order) != L:
            raise ValueError(f"round_order must have length {L}")
        if order.count(CAMP1) != L // 2 or order.count(CAMP2) != L // 2:
            raise ValueError("round_order must contain L/2 picks per camp")
        if order[0] != CAMP1:
            raise ValueError("camp1 always picks first within a round")
        fp = tuple(self.first_player)
        if len(fp) != D:
            raise ValueError(f"first_player must have length {D}")
        if any(p not in (PLAYER1, PLAYER2) for p in fp):
            raise ValueError("first_player entries must be PLAYER1 or PLAYER2")
        # A player drafts L/2 heroes per round and can never repeat one, so
        # it needs (L/2)*D distinct heroes, while the current round also
        # forbids the opponent's L/2 in-round picks.
        needed = (L // 2) * D + L // 2
        if self.n_heroes < needed:
            raise ValueError(
                f"n_heroes={self.n_heroes} can dead-end legality; "
                f"need at least (L/2)*D + L/2 = {needed}"
            )
        object.__setattr__(self, "round_order", order)
        object.__setattr__(self, "first_player", fp)

    @classmethod
    def standard(cls, n_heroes: int = 95, rounds: int = 1) -> "GameConfig":
        """The 1-2-2-1-1-2-2-1-1-2 order with players alternating first pick."""
        fp = tuple(d % 2 for d in range(rounds))
        return cls(n_heroes, 10, rounds, STANDARD_ROUND_ORDER, fp)

    @property
    def total_steps(self) -> int:
        return self.picks_per_round * self.rounds

    @cached_property
    def camp_of_step(self) -> tuple[int, ...]:
        return tuple(self.round_order[t % self.picks_per_round] for t in range(self.total_steps))

    @cached_property
    def player_of_step(self) -> tuple[int, ...]:
        out = []
        for t in range(self.total_steps):
            d = t // self.picks_per_round
            camp = self.round_order[t % self.picks_per_round]
            first = self.first_player[d]
            out.append(first if camp == CAMP1 else 1 - first)
        return tuple(out)

    def turn_player(self, t: int) -> int:
        """Which player acts at time-step ``t``."""
        if not 0 <= t < self.total_steps:
            raise ValueError(f"t={t} out of range [0, {self.total_steps})")
        return self.player_of_step[t]

    def config_hash(self) -> str:
        payload = json.dumps(
            [self.n_heroes, self.picks_per_round, self.rounds,
             list(self.round_order), list(self.first_player)]
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "n_heroes": self.n_heroes,
            "picks_per_round": self.picks_per_round,
            "rounds": self.rounds,
            "round_order": list(self.round_order),
            "first_player": list(self.first_player),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        return cls(
            n_heroes=d["n_heroes"],
            picks_per_round=d["picks_per_round"],
            rounds=d["rounds"],
            round_order=tuple(d["round_order"]),
            first_player=tuple(d["first_player"]),
        )


@dataclass(frozen=True)
class DraftState:
    """An in-progress pick sequence.  Immutable; ``apply`` returns a new state."""

    config: GameConfig
    picks: tuple[int, ...] = ()

    @property
    def t(self) -> int:
        return len(self.picks)

    @property
    def round_index(self) -> int:
        """Round of the next pick (== rounds when terminal)."""
        return self.t // self.config.picks_per_round

    @property
    def is_terminal(self) -> bool:
        return self.t >= self.config.total_steps

    @property
    def acting_player(self) -> int:
        return self.config.turn_player(self.t)

    def current_round_picks(self) -> tuple[int, ...]:
        L = self.config.picks_per_round
        return self.picks[self.round_index * L:]

    def player_history(self, player: int) -> frozenset[int]:
        """Heroes picked by ``player`` in completed earlier rounds."""
        L = self.config.picks_per_round
        cutoff = self.round_index * L
        pmap = self.config.player_of_step
        return frozenset(h for i, h in enumerate(self.picks[:cutoff]) if pmap[i] == player)

    def legal_actions(self) -> list[int]:
        """Sorted hero ids legal for the acting player."""
        if self.is_terminal:
            raise IllegalActionError("terminal", "no legal actions in a terminal state")
        forbidden = set(self.current_round_picks())
        forbidden |= self.player_history(self.acting_player)
        return [h for h in range(self.config.n_heroes) if h not in forbidden]

    def apply(self, action: int) -> "DraftState":
        if self.is_terminal:
            raise IllegalActionError("terminal", "cannot pick in a terminal state")
        if not 0 <= action < self.config.n_heroes:
            raise IllegalActionError("out-of-range", f"hero id {action} out of range")
        if action in self.current_round_picks():
            raise IllegalActionError(
                "repeat-in-round", f"hero {action} already picked in this round")
        if action in self.player_history(self.acting_player):
            raise IllegalActionError(
                "own-history", f"hero {action} already used by player in an earlier round")
        return DraftState(self.config, self.picks + (action,))

    def round_lineups(self, d: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(camp1, camp2) lineups of completed round ``d``, each sorted."""
        L = self.config.picks_per_round
        if (d + 1) * L > self.t:
            raise ValueError(f"round {d} is not complete")
        camp1, camp2 = [], []
        for l in range(L):
            h = self.picks[d * L + l]
            (camp1 if self.config.round_order[l] == CAMP1 else camp2).append(h)
        return tuple(sorted(camp1)), tuple(sorted(camp2))


def round_sign(config: GameConfig, d: int) -> int:
    """+1 if player1 is camp1 in round ``d``, else -1."""
    return 1 if config.first_player[d] == PLAYER1 else -1


def transformed_winrate(phi: float) -> float:
    """Map a camp1 winning rate in [0, 1] to a zero-centered value in [-1, 1]."""
    return (phi - 0.5) * 2.0


def round_winrates(state: DraftState, predictor) -> list[float]:
    """Camp1-view winning rate of every completed round."""
    done = state.t // state.config.picks_per_round
    out = []
    for d in range(done):
        c1, c2 = state.round_lineups(d)
        out.append(predictor.winrate(c1, c2))
    return out


def terminal_reward(state: DraftState, predictor) -> float:
    """Signed reward for player1 over the whole series.

    Sum over rounds of the zero-centered round value, signed so that a
    round where player1 is camp2 counts the camp1 winning rate against it.
    """
    if not state.is_terminal:
        raise ValueError("terminal_reward requires a terminal state")
    phis = round_winrates(state, predictor)
    return sum(round_sign(state.config, d) * transformed_winrate(p)
               for d, p in enumerate(phis))


def format_draft(state: DraftState) -> str:
    """Canonical text form: rounds joined by '|', picks in pick order."""
    L = state.config.picks_per_round
    chunks = [state.picks[i:i + L] for i in range(0, len(state.picks), L)]
    return "|".join(",".join(str(h) for h in c) for c in chunks)


def parse_draft(config: GameConfig, text: str) -> DraftState:
    """Parse the canonical text form, validating legality pick by pick."""
    state = DraftState(config)
    if not text:
        return state
    for chunk in text.split("|"):
        for tok in chunk.split(","):
            state = state.apply(int(tok))
    return state
