"""Self-play training loop: samplers -> sample pool -> trainer -> model pool.

Desk-scale rendition of the distributed loop: sampler workers play both
sides of a draft with the latest published model snapshot, completed
games become training samples in a bounded pool, the trainer consumes
uniform batches, and new snapshots are published atomically back to the
samplers.  An optional socket mode streams the binary sample records
from a sampler child process to the trainer over TCP.
"""

from __future__ import annotations

import json
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .game import DraftState, GameConfig, round_winrates
from .pv import (PolicyValueModel, TrainingSample, make_targets, sample_from_bytes,
                 sample_to_bytes, train_policy_value)
from .net import AdamState
from .search import SearchParams, run_search, sample_action
from .strategies import move_schedule


@dataclass
class GameRecord:
    config_hash: str
    picks: tuple[int, ...]
    pis: list[np.ndarray]          # per-step root visit distribution over N
    round_phis: list[float]        # camp1-view winning rate per round
    net_version: int = 0
    seed: int = 0

    def validate(self, config: GameConfig):
        if self.config_hash != config.config_hash():
            raise ValueError("record belongs to a different game config")
        if len(self.picks) != config.total_steps or len(self.pis) != len(self.picks):
            raise ValueError("record is incomplete")


class SamplePool:
    """Bounded FIFO buffer with uniform batch sampling; drops oldest when full."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[TrainingSample] = []
        self._lock = threading.Lock()
        self.produced = 0
        self.consumed = 0
        self.dropped = 0

    def __len__(self):
        with self._lock:
            return len(self._items)

    def push(self, samples):
        with self._lock:
            for s in samples:
                if len(self._items) >= self.capacity:
                    self._items.pop(0)
                    self.dropped += 1
                self._items.append(s)
                self.produced += 1

    def sample_batch(self, batch_size: int, rng: np.random.Generator):
        """Uniform without replacement within the batch; None if empty."""
        with self._lock:
            if not self._items:
                return None
            k = min(batch_size, len(self._items))
            idx = rng.choice(len(self._items), size=k, replace=False)
            self.consumed += k
            return [self._items[i] for i in idx]

    def counters(self) -> dict:
        with self._lock:
            return {"size": len(self._items), "produced": self.produced,
                    "consumed": self.consumed, "dropped": self.dropped}


class ModelPool:
    """Versioned model snapshots; publish is atomic, readers see old or new."""

    def __init__(self, model: PolicyValueModel):
        self._lock = threading.Lock()
        self._version = 0
        self._model = model.copy()

    def publish(self, model: PolicyValueModel) -> int:
        snapshot = model.copy()   # copy before swapping so readers never see a mix
        with self._lock:
            self._version += 1
            self._model = snapshot
            return self._version

    def latest(self) -> tuple[int, PolicyValueModel]:
        with self._lock:
            return self._version, self._model


def play_selfplay_game(model: PolicyValueModel, predictor, config: GameConfig,
                       params: SearchParams, seed: int,
                       net_version: int = 0) -> GameRecord:
    """Both sides played by the same snapshot; first move sampled at tau=1."""
    rng = np.random.default_rng(seed)
    state = DraftState(config)
    pis = []
    while not state.is_terminal:
        result = run_search(state, model, predictor, params, rng=rng)
        full_pi = np.zeros(config.n_heroes, dtype=np.float32)
        full_pi[result.actions] = result.pi
        pis.append(full_pi)
        tau = move_schedule(state.t, "selfplay")
        state = state.apply(sample_action(result.actions, result.pi, tau, rng))
    phis = round_winrates(state, predictor)
    return GameRecord(config.config_hash(), state.picks, pis, phis,
                      net_version=net_version, seed=seed)


@dataclass
class TrainingSchedule:
    games: int = 200
    search_iterations: int = 128
    workers: int = 1               # sampler threads
    pool_capacity: int = 20_000
    batch_size: int = 400
    lr: float = 1e-4
    l2: float = 1e-4
    train_steps_per_game: int = 4
    min_pool_size: int = 400
    publish_every_steps: int = 32
    long_term: bool = True
    dirichlet_alpha: float | None = 0.3
    c_puct: float = 1.0
    c_vl: float = 3.0
    seed: int = 0
    hidden: tuple[int, ...] = (64, 64)
    probe_every_games: int = 0     # 0 disables arena probes
    probe_games: int = 20


def training_loop(schedule: TrainingSchedule, predictor, config: GameConfig,
                  metrics_path=None, progress=None, initial_model=None):
    """Run the sampler/trainer loop; returns (trained model, metrics history).

    Single-process with sampler threads.  The winrate predictor stays
    frozen throughout; only the policy/value net learns.  Pass
    ``initial_model`` to fine-tune a warm-started net in place.
    """
    model = initial_model or PolicyValueModel(config, hidden=schedule.hidden,
                                              seed=schedule.seed)
    pool = SamplePool(schedule.pool_capacity)
    model_pool = ModelPool(model)
    adam = AdamState(model.net, lr=schedule.lr)
    params = SearchParams(
        iterations=schedule.search_iterations, c_puct=schedule.c_puct,
        c_vl=schedule.c_vl, long_term=schedule.long_term,
        dirichlet_alpha=schedule.dirichlet_alpha)
    history = []
    rng = np.random.default_rng(schedule.seed + 1)
    train_steps = 0
    lag_samples = []

    metrics_file = open(metrics_path, "w") if metrics_path else None

    def emit(entry):
        history.append(entry)
        if metrics_file:
            metrics_file.write(json.dumps(entry) + "\n")
            metrics_file.flush()

    games_done = 0
    game_lock = threading.Lock()
    errors = []

    def sampler(worker_id: int):
        nonlocal games_done
        while True:
            with game_lock:
                if games_done >= schedule.games:
                    return
                games_done += 1
                game_index = games_done
            version, snapshot = model_pool.latest()
            try:
                record = play_selfplay_game(
                    snapshot, predictor, config, params,
                    seed=schedule.seed * 100_003 + game_index,
                    net_version=version)
            except Exception as e:   # discard the game, keep sampling
                errors.append(e)
                continue
            samples = make_targets(config, record.picks, record.pis,
                                   record.round_phis,
                                   long_term=schedule.long_term)
            pool.push(samples)
            lag_samples.append(model_pool.latest()[0] - version)

    def train_some():
        nonlocal train_steps
        if pool.counters()["size"] < schedule.min_pool_size:
            return
        for _ in range(schedule.train_steps_per_game):
            batch = pool.sample_batch(schedule.batch_size, rng)
            if not batch:
                return
            rec = train_policy_value(model, batch, batch_size=len(batch),
                                     lr=schedule.lr, l2=schedule.l2,
                                     adam=adam, seed=train_steps)
            train_steps += 1
            entry = {"step": train_steps, "games": games_done,
                     "policy_loss": rec[-1]["policy_ce"],
                     "value_loss": rec[-1]["value_mse"],
                     **pool.counters()}
            emit(entry)
            if (schedule.publish_every_steps
                    and train_steps % schedule.publish_every_steps == 0):
                model_pool.publish(model)

    try:
        if schedule.workers <= 1:
            # interleave one game of sampling with a few trainer steps
            while games_done < schedule.games:
                sampler_once(schedule, predictor, config, params, model_pool,
                             pool, errors)
                games_done += 1
                train_some()
                if progress:
                    progress(games_done, schedule.games)
        else:
            threads = [threading.Thread(target=sampler, args=(i,))
                       for i in range(schedule.workers)]
            for t in threads:
                t.start()
            while any(t.is_alive() for t in threads):
                train_some()
                time.sleep(0.01)
            for t in threads:
                t.join()
            train_some()
        model_pool.publish(model)
        emit({"done": True, "games": games_done, "train_steps": train_steps,
              "discarded_games": len(errors),
              "max_version_lag": max(lag_samples, default=0),
              **pool.counters()})
    finally:
        if metrics_file:
            metrics_file.close()
    return model, history


def sampler_once(schedule, predictor, config, params, model_pool, pool, errors):
    version, snapshot = model_pool.latest()
    seed = schedule.seed * 100_003 + pool.produced + len(errors)
    try:
        record = play_selfplay_game(snapshot, predictor, config, params,
                                    seed=seed, net_version=version)
    except Exception as e:
        errors.append(e)
        return
    samples = make_targets(config, record.picks, record.pis, record.round_phis,
                           long_term=schedule.long_term)
    pool.push(samples)


# -- optional two-process mode --------------------------------------------

def stream_samples(host: str, port: int, samples):
    """Send binary sample records to a listening trainer."""
    with socket.create_connection((host, port)) as conn:
        for s in samples:
            conn.sendall(sample_to_bytes(s))
        conn.shutdown(socket.SHUT_WR)


def receive_samples(port: int, pool: SamplePool, host: str = "127.0.0.1",
                    max_connections: int = 1):
    """Accept sampler connections and feed records into the pool."""
    srv = socket.create_server((host, port))
    try:
        for _ in range(max_connections):
            conn, _addr = srv.accept()
            buf = b""
            with conn:
                while True:
                    chunk = conn.recv(65536)
                    if not chunk:
                        break
                    buf += chunk
                    while len(buf) >= 4:
                        (n,) = struct.unpack_from("<I", buf)
                        if len(buf) < 4 + n:
                            break
                        pool.push([sample_from_bytes(buf[4:4 + n])])
                        buf = buf[4 + n:]
    finally:
        srv.close()
