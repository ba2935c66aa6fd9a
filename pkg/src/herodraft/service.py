"""HTTP session service powering the draft-assistant UI.

Endpoints (all JSON):
  POST /api/sessions               {config?, human_player?, engine_spec?} -> {id, view}
  GET  /api/sessions/{id}          -> view
  POST /api/sessions/{id}/picks    {hero_id, request_id?} -> view
  POST /api/sessions/{id}/engine-move   {request_id?} -> {hero_id, latency_s, view}
  GET  /api/sessions/{id}/recommendations?top_k=K -> {recommendations}
  POST /api/sessions/{id}/whatif   {hero_id} -> {hero_id, recommendations}
  POST /api/sessions/{id}/undo     {request_id?} -> view
  GET  /api/heroes                 -> {heroes: [{id, winrate}]}

Errors are returned as {code, message}; illegal picks and out-of-turn
mutations are 409.  Mutations are idempotent under retry with a
client-supplied request id (the cached response is replayed).
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .game import (DraftState, GameConfig, IllegalActionError, format_draft,
                   round_winrates)
from .strategies import StrategySpec, build_strategy


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(session_id: str) -> ApiError:
    return ApiError(404, "session-not-found", f"no session {session_id!r}")


class DraftSession:
    """One live draft: state, engine, undo stack, idempotency cache."""

    def __init__(self, session_id: str, config: GameConfig, predictor,
                 spec: StrategySpec, human_player: int, seed: int):
        self.id = session_id
        self.config = config
        self.predictor = predictor
        self.human_player = human_player
        self.engine_spec = spec
        self.engine = build_strategy(spec, seed=seed, predictor=predictor,
                                     config=config)
        # recommendations always come from a PUCT search, independent of the
        # engine kind, on a separate instance so tree reuse cannot leak
        # hypothetical states into the live engine
        adv_kind = spec.kind if spec.kind in ("net_mcts", "longterm_mcts") \
            else "longterm_mcts"
        adv_spec = replace(spec, kind=adv_kind, reuse_tree=False,
                           name="advisor")
        self.advisor = build_strategy(adv_spec, seed=seed + 1,
                                      predictor=predictor, config=config)
        self.state = DraftState(config)
        self.undo_stack: list[DraftState] = []
        self.request_cache: dict[str, dict] = {}
        self.lock = threading.Lock()
        self.seed = seed

    # -- views -------------------------------------------------------------
    def view(self) -> dict:
        st = self.state
        cfg = self.config
        rounds = []
        for d in range(cfg.rounds):
            start = d * cfg.picks_per_round
            chunk = st.picks[start:start + cfg.picks_per_round]
            camps = ([], [])
            for k, hero in enumerate(chunk):
                camps[cfg.round_order[k]].append(hero)
            rounds.append({"camp1": camps[0], "camp2": camps[1]})
        completed = len(st.picks) // cfg.picks_per_round
        phis = round_winrates(st, self.predictor) if completed else []
        return {
            "id": self.id,
            "config": cfg.to_dict(),
            "human_player": self.human_player,
            "step": len(st.picks),
            "round_index": min(st.round_index, cfg.rounds - 1),
            "terminal": st.is_terminal,
            "picks": list(st.picks),
            "turn_player": None if st.is_terminal else st.acting_player,
            "turn_camp": (None if st.is_terminal
                          else cfg.camp_of_step[len(st.picks)]),
            "legal_actions": ([] if st.is_terminal else st.legal_actions()),
            "rounds": rounds,
            "series_phi": [float(p) for p in phis[:completed]],
            "draft_text": format_draft(st),
        }

    # -- mutations (caller holds the lock) ---------------------------------
    def apply_pick(self, hero_id: int, by_human: bool) -> None:
        if self.state.is_terminal:
            raise ApiError(409, "terminal", "the series is complete")
        turn = self.state.acting_player
        if by_human and turn != self.human_player:
            raise ApiError(409, "wrong-turn", "it is the engine's turn")
        if not by_human and turn == self.human_player:
            raise ApiError(409, "wrong-turn", "it is the human's turn")
        try:
            next_state = self.state.apply(hero_id)
        except IllegalActionError as e:
            raise ApiError(409, f"illegal-{e.reason}", str(e)) from e
        self.undo_stack.append(self.state)
        self.state = next_state

    def undo(self) -> None:
        if not self.undo_stack:
            raise ApiError(409, "nothing-to-undo", "no picks to undo")
        # rewind past engine replies so the human is back on the move
        self.state = self.undo_stack.pop()
        while (self.undo_stack and not self.state.is_terminal
               and self.state.acting_player != self.human_player):
            self.state = self.undo_stack.pop()

    # -- analysis ----------------------------------------------------------
    def recommendations(self, state: DraftState, top_k: int) -> list[dict]:
        if state.is_terminal:
            raise ApiError(409, "terminal", "the series is complete")
        result = self.advisor.search(state)
        order = np.argsort(-result.visit_counts, kind="stable")[:top_k]
        recs = []
        for i in order:
            hero = int(result.actions[i])
            recs.append({
                "hero_id": hero,
                "prior": float(result.root.P[i]),
                "visits": int(result.visit_counts[i]),
                "q": float(result.q[i]),
                "phi_if_picked": self._phi_if_picked(state, hero),
            })
        return recs

    def _phi_if_picked(self, state: DraftState, hero: int) -> float:
        """Current-round winrate estimate for the acting player's camp.

        Heuristic: after the candidate pick, both sides complete the round
        greedily by hero strength badge (strongest remaining hero first);
        the predictor then scores the completed round.  An estimate, not a
        search value.
        """
        cfg = self.config
        s = state.apply(hero)
        badges = _hero_badges(self.predictor, cfg)
        while len(s.picks) % cfg.picks_per_round != 0:
            legal = s.legal_actions()
            s = s.apply(max(legal, key=lambda h: badges[h]))
        # score the round the candidate pick belongs to
        d = len(state.picks) // cfg.picks_per_round
        c1, c2 = s.round_lineups(d)
        phi = self.predictor.winrate(c1, c2)
        camp = cfg.camp_of_step[len(state.picks)]
        return float(phi if camp == 0 else 1.0 - phi)


_badge_cache: dict[int, np.ndarray] = {}


def _hero_badges(predictor, config: GameConfig,
                 samples: int = 40) -> np.ndarray:
    """Per-hero winrate badge: mean φ over random matches containing the hero.

    Deterministic, cached per predictor instance.  Informative only.
    """
    key = id(predictor)
    cached = _badge_cache.get(key)
    if cached is not None:
        return cached
    n = config.n_heroes
    k = config.picks_per_round // 2
    rng = np.random.default_rng(np.random.Philox(12345))
    badges = np.empty(n)
    for h in range(n):
        total = 0.0
        for _ in range(samples):
            others = rng.choice([x for x in range(n) if x != h],
                                size=2 * k - 1, replace=False)
            c1 = sorted([h, *others[:k - 1]])
            c2 = sorted(others[k - 1:])
            total += predictor.winrate(c1, c2)
        badges[h] = total / samples
    _badge_cache[key] = badges
    return badges


def create_app(config: GameConfig, predictor, engine_spec: StrategySpec,
               seed: int = 0, static_dir=None) -> FastAPI:
    if isinstance(engine_spec, dict):
        engine_spec = StrategySpec.from_json(engine_spec)
    app = FastAPI(title="herodraft")
    sessions: dict[str, DraftSession] = {}
    registry_lock = threading.Lock()
    counter = {"n": 0}

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    def get_session(session_id: str) -> DraftSession:
        with registry_lock:
            sess = sessions.get(session_id)
        if sess is None:
            raise _not_found(session_id)
        return sess

    def idempotent(sess: DraftSession, request_id, compute):
        """Replay the cached response when a request id is retried."""
        if request_id is not None and request_id in sess.request_cache:
            return sess.request_cache[request_id]
        response = compute()
        if request_id is not None:
            sess.request_cache[request_id] = response
        return response

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict | None = None):
        body = body or {}
        cfg = config
        if body.get("config"):
            merged = {**config.to_dict(), **body["config"]}
            try:
                cfg = GameConfig.from_dict(merged)
            except (ValueError, KeyError, TypeError) as e:
                raise ApiError(400, "bad-config", str(e))
            if cfg.n_heroes != config.n_heroes:
                raise ApiError(400, "bad-config",
                               "hero pool is fixed by the server predictor")
        human = int(body.get("human_player", 0))
        if human not in (0, 1):
            raise ApiError(400, "bad-request", "human_player must be 0 or 1")
        spec = engine_spec
        if body.get("engine_spec"):
            try:
                spec = StrategySpec.from_json(body["engine_spec"])
            except (ValueError, TypeError) as e:
                raise ApiError(400, "bad-engine-spec", str(e))
        with registry_lock:
            counter["n"] += 1
            session_seed = seed + counter["n"]
        sess = DraftSession(uuid.uuid4().hex[:12], cfg, predictor, spec,
                            human, session_seed)
        with registry_lock:
            sessions[sess.id] = sess
        return {"id": sess.id, "view": sess.view()}

    @app.get("/api/sessions/{session_id}")
    def get_view(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            return sess.view()

    @app.post("/api/sessions/{session_id}/picks")
    def post_pick(session_id: str, body: dict):
        sess = get_session(session_id)
        if "hero_id" not in body:
            raise ApiError(400, "bad-request", "hero_id is required")
        with sess.lock:
            def compute():
                sess.apply_pick(int(body["hero_id"]), by_human=True)
                return sess.view()
            return idempotent(sess, body.get("request_id"), compute)

    @app.post("/api/sessions/{session_id}/engine-move")
    def engine_move(session_id: str, body: dict | None = None):
        body = body or {}
        sess = get_session(session_id)
        with sess.lock:
            def compute():
                if sess.state.is_terminal:
                    raise ApiError(409, "terminal", "the series is complete")
                if sess.state.acting_player == sess.human_player:
                    raise ApiError(409, "wrong-turn", "it is the human's turn")
                t0 = time.perf_counter()
                hero = sess.engine.pick(sess.state, mode="assistant")
                latency = time.perf_counter() - t0
                sess.apply_pick(hero, by_human=False)
                return {"hero_id": hero, "latency_s": latency,
                        "view": sess.view()}
            return idempotent(sess, body.get("request_id"), compute)

    @app.get("/api/sessions/{session_id}/recommendations")
    def recommendations(session_id: str, top_k: int = 5):
        sess = get_session(session_id)
        if top_k < 1:
            raise ApiError(400, "bad-request", "top_k must be >= 1")
        with sess.lock:
            return {"recommendations":
                    sess.recommendations(sess.state, top_k)}

    @app.post("/api/sessions/{session_id}/whatif")
    def whatif(session_id: str, body: dict):
        sess = get_session(session_id)
        if "hero_id" not in body:
            raise ApiError(400, "bad-request", "hero_id is required")
        hero = int(body["hero_id"])
        top_k = int(body.get("top_k", 5))
        with sess.lock:
            if sess.state.is_terminal:
                raise ApiError(409, "terminal", "the series is complete")
            try:
                hypothetical = sess.state.apply(hero)
            except IllegalActionError as e:
                raise ApiError(409, f"illegal-{e.reason}", str(e)) from e
            phi = sess._phi_if_picked(sess.state, hero)
            recs = ([] if hypothetical.is_terminal
                    else sess.recommendations(hypothetical, top_k))
            return {"hero_id": hero, "phi_if_picked": phi,
                    "recommendations": recs}

    @app.post("/api/sessions/{session_id}/undo")
    def undo(session_id: str, body: dict | None = None):
        body = body or {}
        sess = get_session(session_id)
        with sess.lock:
            def compute():
                sess.undo()
                return sess.view()
            return idempotent(sess, body.get("request_id"), compute)

    @app.get("/api/heroes")
    def heroes():
        badges = _hero_badges(predictor, config)
        return {"heroes": [{"id": h, "winrate": float(badges[h])}
                           for h in range(config.n_heroes)]}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="frontend")

    return app
