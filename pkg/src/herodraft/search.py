"""Parallel PUCT search over the drafting game.

Node values are stored player1-centric; the selection rule flips sign
for the minimizing player instead of negating per ply, because the
1-2-2-1 pick order is not strictly alternating.  Every node whose last
action completed a round caches that round's zero-centered winning rate;
back-propagation accumulates those cached values on the way up, so a
node in round d absorbs the leaf estimate plus all round outcomes
between d and the leaf.  Disabling ``long_term`` turns this off and is
exactly inert on single-round games.

Virtual loss marks in-flight selections so concurrent workers diversify;
every mark is removed by the matching back-propagation (or unwound when
a worker backs off a leaf someone else is expanding), so all VL returns
to zero once the search quiesces and visit conservation holds exactly.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .game import PLAYER1, DraftState, round_sign, transformed_winrate


@dataclass
class SearchParams:
    iterations: int = 1600
    c_puct: float = 1.0
    c_vl: float = 3.0
    tau: float = 1.0
    workers: int = 1
    long_term: bool = True
    dirichlet_alpha: float | None = None
    dirichlet_eps: float = 0.25

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.c_vl < 0:
            raise ValueError("c_vl must be >= 0")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")


class SearchNode:
    __slots__ = ("state", "sign", "round_index", "terminal", "has_boundary",
                 "boundary_z", "expanded", "pending", "actions", "P", "C", "W",
                 "VL", "children", "Qs", "Pc", "inv1pC", "child_total")

    def __init__(self, state: DraftState, predictor, stats=None):
        self.state = state
        self.terminal = state.is_terminal
        self.sign = 0
        self.round_index = min(state.round_index, state.config.rounds - 1)
        if not self.terminal:
            self.sign = 1 if state.acting_player == PLAYER1 else -1
        L = state.config.picks_per_round
        self.has_boundary = state.t > 0 and state.t % L == 0
        self.boundary_z = 0.0
        if self.has_boundary:
            d = state.t // L - 1
            c1, c2 = state.round_lineups(d)
            phi = predictor.winrate(c1, c2)
            self.boundary_z = round_sign(state.config, d) * transformed_winrate(phi)
            if stats is not None:
                stats["phi_calls"] += 1
        self.expanded = False
        self.pending = False
        self.actions = None
        self.P = self.C = self.W = self.VL = None
        self.children = None

    def remaining_rounds(self) -> int:
        return self.state.config.rounds - self.round_index


@dataclass
class SearchResult:
    actions: np.ndarray          # legal actions at the root, ascending
    pi: np.ndarray               # visit distribution over actions
    q: np.ndarray                # mean child value per action, player1 view
    visit_counts: np.ndarray
    root: SearchNode
    diagnostics: dict = field(default_factory=dict)


def _apply_expansion(node: SearchNode, policy, stats):
    legal = node.state.legal_actions()
    node.actions = np.asarray(legal, dtype=np.int64)
    k = len(legal)
    if policy is not None:
        p = np.asarray(policy, dtype=np.float64)[node.actions]
        total = p.sum()
        if total < 1e-12 or not np.isfinite(total):
            p = np.full(k, 1.0 / k)  # adversarial/underflowed priors: uniform
        else:
            p = p / total
    else:
        p = np.full(k, 1.0 / k)
    node.P = p
    node.C = np.zeros(k, dtype=np.int64)
    node.W = np.zeros(k, dtype=np.float64)
    node.VL = np.zeros(k, dtype=np.float64)
    node.children = [None] * k
    # incrementally maintained selection terms: Qs = sign*W/C (0 unvisited),
    # Pc = P/(1+C), inv1pC = 1/(1+C)
    node.Qs = np.zeros(k, dtype=np.float64)
    node.Pc = p.copy()
    node.inv1pC = np.ones(k, dtype=np.float64)
    node.child_total = 0
    node.expanded = True
    stats["nodes_expanded"] += 1


def _select(node: SearchNode, c_puct: float, c_vl: float, use_vl: bool) -> int:
    score = node.Qs + (c_puct * math.sqrt(node.child_total)) * node.Pc
    if use_vl:
        score = score - node.VL * node.inv1pC
    idx = int(score.argmax())
    if use_vl:
        node.VL[idx] += c_vl
    return idx


def _descend(root: SearchNode, predictor, params: SearchParams, stats,
             use_vl: bool = True):
    """Walk from the root to a leaf, marking virtual loss along the way.

    Virtual loss is skipped in single-worker mode, where it is provably
    zero at every selection (the same simulation that marks it removes it
    before any other selection happens).
    """
    path = []
    node = root
    while node.expanded and not node.terminal:
        idx = _select(node, params.c_puct, params.c_vl, use_vl)
        path.append((node, idx))
        child = node.children[idx]
        if child is None:
            child = SearchNode(node.state.apply(int(node.actions[idx])),
                               predictor, stats)
            node.children[idx] = child
            stats["nodes_created"] += 1
        node = child
    stats["max_depth"] = max(stats["max_depth"], len(path))
    return path, node


def _terminal_value(node: SearchNode, params: SearchParams) -> float:
    return 0.0 if params.long_term else node.boundary_z


def _scaled_net_value(node: SearchNode, value: float, params: SearchParams) -> float:
    # Without cross-round accumulation a leaf that has just completed a
    # round is still valued by that round's predictor outcome (same as a
    # terminal leaf); the net only evaluates mid-round leaves.  With
    # accumulation the leaf's boundary z is added during backpropagation
    # instead, and the net estimate covers the remaining rounds.
    if not params.long_term and node.has_boundary:
        return node.boundary_z
    v = node.sign * float(value)
    return v * node.remaining_rounds() if params.long_term else v


def _backpropagate(path, leaf: SearchNode, leaf_value: float,
                   params: SearchParams, use_vl: bool = True):
    g = leaf_value
    long_term = params.long_term
    for parent, idx in reversed(path):
        child = parent.children[idx]
        if long_term and child.has_boundary:
            g += child.boundary_z
        c = parent.C[idx] + 1
        parent.C[idx] = c
        w = parent.W[idx] + g
        parent.W[idx] = w
        parent.child_total += 1
        parent.Qs[idx] = parent.sign * w / c
        inv = 1.0 / (1.0 + c)
        parent.inv1pC[idx] = inv
        parent.Pc[idx] = parent.P[idx] * inv
        if use_vl:
            parent.VL[idx] -= params.c_vl
            assert parent.VL[idx] >= -1e-9, "virtual-loss underflow"


def _unwind_virtual_loss(path, c_vl: float):
    for parent, idx in path:
        parent.VL[idx] -= c_vl
        assert parent.VL[idx] >= -1e-9, "virtual-loss underflow"


def _boundary_leaf(node: SearchNode, path, params: SearchParams) -> bool:
    """Round-completing nodes are leaves when values do not cross rounds.

    Without cross-round accumulation, values from a deeper round cannot be
    combined coherently with the current round's, so the search horizon
    ends at the round boundary and the leaf is valued by the predictor's
    round outcome — the root itself (start of a new round) still expands.
    """
    return not params.long_term and node.has_boundary and bool(path)


def _simulate(root: SearchNode, model, predictor, params: SearchParams, stats):
    path, node = _descend(root, predictor, params, stats, use_vl=False)
    if node.terminal or _boundary_leaf(node, path, params):
        value = _terminal_value(node, params)
    else:
        if model is not None:
            policy, raw = model.predict(node.state)
            stats["net_calls"] += 1
        else:
            policy, raw = None, 0.0
        _apply_expansion(node, policy, stats)
        value = _scaled_net_value(node, raw, params)
    _backpropagate(path, node, value, params, use_vl=False)


def _simulate_locked(root, model, predictor, params, stats, lock):
    while True:
        with lock:
            path, node = _descend(root, predictor, params, stats)
            if node.terminal or _boundary_leaf(node, path, params):
                _backpropagate(path, node, _terminal_value(node, params), params)
                return
            if node.pending:
                # another worker is evaluating this leaf; back off and retry
                _unwind_virtual_loss(path, params.c_vl)
                stats["collisions"] += 1
            else:
                node.pending = True
                break
        time.sleep(1e-4)
    try:
        if model is not None:
            policy, raw = model.predict(node.state)
        else:
            policy, raw = None, 0.0
        with lock:
            if model is not None:
                stats["net_calls"] += 1
            _apply_expansion(node, policy, stats)
            _backpropagate(path, node, _scaled_net_value(node, raw, params), params)
    finally:
        node.pending = False


def run_search(root_state: DraftState, model, predictor,
               params: SearchParams, rng: np.random.Generator | None = None,
               reuse_root: SearchNode | None = None) -> SearchResult:
    """Run PUCT simulations from ``root_state`` and extract the visit policy.

    ``model`` may be None for pure-prior search (uniform priors, zero leaf
    values).  ``predictor`` supplies round winning rates at boundaries.
    """
    if root_state.is_terminal:
        raise ValueError("cannot search from a terminal state")
    stats = {"nodes_created": 0, "nodes_expanded": 0, "phi_calls": 0,
             "net_calls": 0, "max_depth": 0, "collisions": 0}
    t0 = time.perf_counter()
    if reuse_root is not None and reuse_root.state == root_state:
        root = reuse_root
    else:
        root = SearchNode(root_state, predictor, stats)
    if not root.expanded:
        if model is not None:
            policy, _ = model.predict(root_state)
            stats["net_calls"] += 1
        else:
            policy = None
        _apply_expansion(root, policy, stats)
    if params.dirichlet_alpha:
        rng = rng or np.random.default_rng()
        noise = rng.dirichlet([params.dirichlet_alpha] * len(root.actions))
        root.P = (1.0 - params.dirichlet_eps) * root.P + params.dirichlet_eps * noise
        root.Pc = root.P * root.inv1pC

    if params.workers <= 1:
        for _ in range(params.iterations):
            _simulate(root, model, predictor, params, stats)
    else:
        lock = threading.Lock()
        counter = {"left": params.iterations}
        errors = []

        def worker():
            try:
                while True:
                    with lock:
                        if counter["left"] <= 0:
                            return
                        counter["left"] -= 1
                    _simulate_locked(root, model, predictor, params, stats, lock)
            except BaseException as e:  # surfaced after join
                errors.append(e)

        threads = [threading.Thread(target=worker) for _ in range(params.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]

    counts = root.C.astype(np.float64)
    if params.tau <= 1e-6:
        pi = np.zeros_like(counts)
        pi[int(np.argmax(counts))] = 1.0
    else:
        w = counts ** (1.0 / params.tau)
        total = w.sum()
        pi = w / total if total > 0 else np.full(len(counts), 1.0 / len(counts))
    q = np.divide(root.W, root.C, out=np.zeros_like(root.W), where=root.C > 0)
    stats.update(iterations=params.iterations,
                 elapsed=time.perf_counter() - t0)
    return SearchResult(actions=root.actions.copy(), pi=pi, q=q,
                        visit_counts=root.C.copy(), root=root,
                        diagnostics=stats)


def sample_action(actions, pi, tau: float, rng: np.random.Generator) -> int:
    """Sample proportional to pi^(1/tau); tau=0 is argmax, lowest id on ties."""
    actions = np.asarray(actions)
    pi = np.asarray(pi, dtype=np.float64)
    if len(actions) == 0:
        raise ValueError("empty action set")
    if tau <= 1e-6:
        return int(actions[int(np.argmax(pi))])
    w = pi ** (1.0 / tau)
    total = w.sum()
    w = w / total if total > 0 else np.full(len(pi), 1.0 / len(pi))
    return int(rng.choice(actions, p=w))


def check_tree_invariants(root: SearchNode, root_visits: int | None = None):
    """Visit conservation and zero virtual loss on every expanded node.

    ``root_visits`` is the number of times the root itself was visited,
    i.e. iterations + 1 counting its expansion.
    """
    stack = [(root, root_visits)]
    while stack:
        node, own_visits = stack.pop()
        if not node.expanded:
            continue
        assert np.all(node.VL == 0), "virtual loss nonzero after quiescence"
        child_total = int(node.C.sum())
        if own_visits is not None:
            assert own_visits == 1 + child_total, (
                f"visit conservation violated: {own_visits} != 1 + {child_total}")
        for idx, child in enumerate(node.children):
            if child is not None:
                stack.append((child, int(node.C[idx])))
