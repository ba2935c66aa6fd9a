"""Policy/value model: state encoding, training targets, training.

The draft state is encoded as a fixed-width float vector: current-round
camp occupancies, per-player history occupancies over completed rounds,
round and step-in-round one-hots, and two flags identifying the acting
player and whether it is camp1.  Value targets for a step in round d sum
the acting player's zero-centered round values over rounds >= d and are
normalized by the number of remaining rounds so they fit the tanh head;
the search rescales net values back by the remaining-round count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .game import CAMP1, PLAYER1, DraftState, GameConfig, round_sign, transformed_winrate
from .net import AdamState, DenseNet, load_checkpoint, save_checkpoint, train_step


def encoding_width(config: GameConfig) -> int:
    return 4 * config.n_heroes + config.rounds + config.picks_per_round + 2


def encode_state(state: DraftState) -> np.ndarray:
    """Feature vector for a non-terminal state; order-invariant per section."""
    if state.is_terminal:
        raise ValueError("cannot encode a terminal state")
    cfg = state.config
    n, L, D = cfg.n_heroes, cfg.picks_per_round, cfg.rounds
    x = np.zeros(encoding_width(cfg), dtype=np.float32)
    for i, h in enumerate(state.current_round_picks()):
        camp = cfg.round_order[i]
        x[(0 if camp == CAMP1 else n) + h] = 1.0
    for h in state.player_history(PLAYER1):
        x[2 * n + h] = 1.0
    for h in state.player_history(1 - PLAYER1):
        x[3 * n + h] = 1.0
    d = state.round_index
    step = state.t % L
    x[4 * n + d] = 1.0
    x[4 * n + D + step] = 1.0
    acting = state.acting_player
    x[4 * n + D + L] = 1.0 if acting == PLAYER1 else 0.0
    x[4 * n + D + L + 1] = 1.0 if cfg.first_player[d] == acting else 0.0
    return x


@dataclass
class TrainingSample:
    encoding: np.ndarray   # float32, encoding_width
    pi: np.ndarray         # float32, N; zero on illegal actions
    z: float               # value target in [-1, 1], acting-player view
    round_index: int
    player: int


class PolicyValueModel:
    """Two-headed net over encoded states; value is acting-player view."""

    def __init__(self, config: GameConfig, hidden=(512, 256), seed: int = 0,
                 net: DenseNet | None = None):
        self.config = config
        self.net = net or DenseNet(encoding_width(config), tuple(hidden),
                                   "policy_value", n_actions=config.n_heroes,
                                   seed=seed)
        if self.net.input_dim != encoding_width(config):
            raise ValueError("net width does not match the game config")
        if self.net.n_actions != config.n_heroes:
            raise ValueError("net action count does not match the hero pool")

    def predict(self, state: DraftState) -> tuple[np.ndarray, float]:
        """(policy over all N heroes, value in (-1, 1) for the acting player)."""
        p, v = self.net.forward(encode_state(state)[None, :])
        return p[0], float(v[0])

    def predict_batch(self, states) -> tuple[np.ndarray, np.ndarray]:
        x = np.stack([encode_state(s) for s in states])
        return self.net.forward(x)

    def copy(self) -> "PolicyValueModel":
        return PolicyValueModel(self.config, net=self.net.copy())

    def save(self, path, adam=None, extra: dict | None = None):
        meta = {"model": "policy_value", "config": self.config.to_dict(),
                "config_hash": self.config.config_hash()}
        meta.update(extra or {})
        save_checkpoint(self.net, path, adam=adam, metadata=meta)

    @classmethod
    def load(cls, path, config: GameConfig | None = None, strict: bool = False):
        expected = config.config_hash() if config else None
        net, _, meta = load_checkpoint(path, expected_config_hash=expected,
                                       strict=strict)
        cfg = config or GameConfig.from_dict(meta["config"])
        return cls(cfg, net=net)


def player_round_values(config: GameConfig, round_phis, player: int) -> list[float]:
    """Zero-centered round values from ``player``'s perspective.

    ``round_phis`` are camp1-view winning rates, one per round.
    """
    sign = 1 if player == PLAYER1 else -1
    return [sign * round_sign(config, d) * transformed_winrate(phi)
            for d, phi in enumerate(round_phis)]


def make_targets(config: GameConfig, picks, pis, round_phis,
                 long_term: bool = True) -> list[TrainingSample]:
    """Build supervision tuples from a completed draft.

    ``pis``: one root visit distribution (length N) per step.  With
    ``long_term`` the value target for a step in round d is the mean of
    the acting player's round values over rounds >= d; without it, the
    target is the step's own round value only.
    """
    if len(picks) != config.total_steps:
        raise ValueError("record does not cover a full game")
    if len(pis) != len(picks):
        raise ValueError("need one visit distribution per step")
    if len(round_phis) != config.rounds:
        raise ValueError("need one winning rate per round")
    D = config.rounds
    per_player = {p: player_round_values(config, round_phis, p) for p in (0, 1)}
    samples = []
    state = DraftState(config)
    for t, (a, pi) in enumerate(zip(picks, pis)):
        d = t // config.picks_per_round
        player = config.turn_player(t)
        zs = per_player[player]
        if long_term:
            z = sum(zs[d:]) / (D - d)
        else:
            z = zs[d]
        samples.append(TrainingSample(
            encoding=encode_state(state),
            pi=np.asarray(pi, dtype=np.float32),
            z=float(z),
            round_index=d,
            player=player,
        ))
        state = state.apply(a)
    if not state.is_terminal:
        raise ValueError("record does not reach a terminal state")
    return samples


def train_policy_value(model: PolicyValueModel, samples, batch_size: int = 400,
                       lr: float = 1e-4, l2: float = 1e-4, epochs: int = 1,
                       seed: int = 0, adam: AdamState | None = None) -> list[dict]:
    """Train in place on (state, pi, z) tuples; returns per-step loss records."""
    if not samples:
        raise ValueError("no samples to train on")
    x = np.stack([s.encoding for s in samples])
    pi = np.stack([s.pi for s in samples])
    z = np.asarray([s.z for s in samples], dtype=np.float32)
    adam = adam or AdamState(model.net, lr=lr)
    adam.lr = lr
    rng = np.random.default_rng(seed)
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(samples))
        for i in range(0, len(order), batch_size):
            idx = order[i:i + batch_size]
            loss, comps = train_step(model.net, adam, x[idx], (pi[idx], z[idx]),
                                     "policy_value", l2)
            history.append({"epoch": epoch, "loss": float(loss), **comps})
    return history


def random_draft_samples(config: GameConfig, predictor, n_games: int,
                         seed: int = 0, long_term: bool = True) -> list[TrainingSample]:
    """Label every prefix of random drafts with its realized series value.

    Random games are cheap to generate and their oracle round outcomes give
    each visited state a low-variance estimate of the value under random
    completion — the same quantity per-simulation rollouts estimate with a
    handful of samples.  Policy targets are uniform over legal actions.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(n_games):
        state = DraftState(config)
        steps = []
        while not state.is_terminal:
            legal = state.legal_actions()
            pi = np.zeros(config.n_heroes, dtype=np.float32)
            pi[legal] = 1.0 / len(legal)
            steps.append((encode_state(state), pi, state.round_index,
                          state.acting_player))
            state = state.apply(int(legal[rng.integers(len(legal))]))
        phis = [predictor.winrate(*state.round_lineups(d))
                for d in range(config.rounds)]
        per_player = {p: player_round_values(config, phis, p) for p in (0, 1)}
        D = config.rounds
        for enc, pi, d, player in steps:
            zs = per_player[player]
            z = (sum(zs[d:]) / (D - d)) if long_term else zs[d]
            samples.append(TrainingSample(enc, pi, float(z), d, player))
    return samples


def pretrain_value(model: PolicyValueModel, predictor, n_games: int = 4000,
                   long_term: bool = True, batch_size: int = 512,
                   lr: float = 1e-3, l2: float = 1e-5, epochs: int = 2,
                   seed: int = 0) -> list[dict]:
    """Warm-start the value head on random-completion drafts (in place)."""
    samples = random_draft_samples(model.config, predictor, n_games,
                                   seed=seed, long_term=long_term)
    return train_policy_value(model, samples, batch_size=batch_size, lr=lr,
                              l2=l2, epochs=epochs, seed=seed)


# -- binary sample records -------------------------------------------------

SAMPLE_FORMAT_VERSION = 1


def sample_to_bytes(s: TrainingSample) -> bytes:
    enc = np.asarray(s.encoding, dtype="<f4").tobytes()
    pi = np.asarray(s.pi, dtype="<f4").tobytes()
    payload = struct.pack("<HHfBB", len(s.encoding), len(s.pi), s.z,
                          s.round_index, s.player) + enc + pi
    return struct.pack("<I", len(payload)) + payload


def sample_from_bytes(payload: bytes) -> TrainingSample:
    enc_len, pi_len, z, d, player = struct.unpack_from("<HHfBB", payload)
    off = struct.calcsize("<HHfBB")
    enc = np.frombuffer(payload, dtype="<f4", count=enc_len, offset=off).copy()
    pi = np.frombuffer(payload, dtype="<f4", count=pi_len,
                       offset=off + 4 * enc_len).copy()
    return TrainingSample(enc, pi, float(z), int(d), int(player))


def save_samples(path, samples):
    with open(path, "wb") as f:
        f.write(bytes([SAMPLE_FORMAT_VERSION]))
        for s in samples:
            f.write(sample_to_bytes(s))


def load_samples(path) -> list[TrainingSample]:
    with open(path, "rb") as f:
        raw = f.read()
    if not raw or raw[0] != SAMPLE_FORMAT_VERSION:
        raise ValueError("bad sample file version")
    out, off = [], 1
    while off < len(raw):
        (n,) = struct.unpack_from("<I", raw, off)
        off += 4
        out.append(sample_from_bytes(raw[off:off + n]))
        off += n
    return out
