import { ApiError, DraftApi, makeRequestId } from "./api";
import {
  assertRankedByVisits,
  canPick,
  formatPhi,
  heroCellState,
  isHumanTurn,
  pickOrderStrip,
  roundColumns,
  seriesScore,
  turnLabel,
} from "./board";
import type { Hero, Recommendation, SessionView } from "./types";

const POLL_INTERVAL_MS = 1000;
const TOP_K = 5;

const api = new DraftApi("");
let sessionId: string | null = null;
let view: SessionView | null = null;
let heroes: Hero[] = [];
let recommendations: Recommendation[] = [];
let recsForStep = -1;
let busy = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 3000);
}

async function guard<T>(work: () => Promise<T>): Promise<T | null> {
  if (busy) return null;
  busy = true;
  try {
    return await work();
  } catch (err) {
    if (err instanceof ApiError) {
      toast(`${err.code}: ${err.message}`);
      if (sessionId) view = await api.getView(sessionId); // re-sync
    } else {
      toast(String(err));
    }
    return null;
  } finally {
    busy = false;
    render();
  }
}

function render(): void {
  if (!view) return;
  el("turn").textContent = turnLabel(view);
  const score = seriesScore(view);
  el("score").textContent = `series ${score.won}–${score.lost}`;

  const strip = el("order-strip");
  strip.replaceChildren(
    ...pickOrderStrip(view).map((slot) => {
      const s = document.createElement("span");
      s.className = `slot camp${slot.camp}${slot.current ? " current" : ""}${
        slot.done ? " done" : ""
      }`;
      s.textContent = slot.camp === 0 ? "1" : "2";
      return s;
    }),
  );

  const roundsBox = el("rounds");
  roundsBox.replaceChildren(
    ...roundColumns(view).map((round) => {
      const div = document.createElement("div");
      div.className = `round${
        round.roundIndex === view!.round_index ? " active" : ""
      }`;
      const phi = round.phi === null ? "" : ` · ${formatPhi(round.phi)}`;
      div.innerHTML =
        `<h3>round ${round.roundIndex + 1}${phi}</h3>` +
        `<div class="cols"><div class="ally">ally: ${round.ally.join(", ")}</div>` +
        `<div class="enemy">enemy: ${round.enemy.join(", ")}</div></div>`;
      return div;
    }),
  );

  const grid = el("hero-grid");
  grid.replaceChildren(
    ...heroes.map((hero) => {
      const btn = document.createElement("button");
      const state = heroCellState(view!, hero.id);
      btn.className = `hero ${state}`;
      btn.textContent = `#${hero.id} (${formatPhi(hero.winrate)})`;
      btn.disabled = !canPick(view!, hero.id);
      btn.onclick = () => submitPick(hero.id);
      btn.oncontextmenu = (e) => {
        e.preventDefault();
        requestWhatif(hero.id);
      };
      return btn;
    }),
  );

  el<HTMLButtonElement>("engine-move").disabled =
    view.terminal || isHumanTurn(view);
  el<HTMLButtonElement>("undo").disabled = view.picks.length === 0;

  const recsBox = el("recommendations");
  if (recommendations.length === 0) {
    recsBox.textContent = isHumanTurn(view)
      ? "thinking…"
      : "recommendations appear on your turn";
  } else {
    recsBox.replaceChildren(
      ...recommendations.map((rec) => {
        const row = document.createElement("div");
        row.className = "rec";
        row.textContent =
          `#${rec.hero_id} — ${rec.visits} visits, ` +
          `series ${formatPhi(rec.phi_if_picked)}`;
        return row;
      }),
    );
  }
}

async function refreshRecommendations(): Promise<void> {
  if (!sessionId || !view || view.terminal || !isHumanTurn(view)) {
    recommendations = [];
    return;
  }
  if (recsForStep === view.step) return;
  const res = await api.recommendations(sessionId, TOP_K);
  recommendations = assertRankedByVisits(res.recommendations);
  recsForStep = view.step;
}

function submitPick(heroId: number): void {
  void guard(async () => {
    if (!sessionId || !view || !canPick(view, heroId)) return;
    view = await api.submitPick(sessionId, heroId, makeRequestId());
    recommendations = [];
    recsForStep = -1;
  });
}

function requestWhatif(heroId: number): void {
  void guard(async () => {
    if (!sessionId || !view || !view.legal_actions.includes(heroId)) return;
    const res = await api.whatif(sessionId, heroId);
    toast(
      `what-if #${heroId}: series ${formatPhi(res.phi_if_picked)}; ` +
        `reply ${res.recommendations
          .slice(0, 3)
          .map((r) => `#${r.hero_id}`)
          .join(" ")}`,
    );
  });
}

function requestEngineMove(): void {
  void guard(async () => {
    if (!sessionId) return;
    const res = await api.engineMove(sessionId, makeRequestId());
    view = res.view;
    recommendations = [];
    recsForStep = -1;
    toast(`engine picked #${res.hero_id} in ${res.latency_s.toFixed(2)}s`);
  });
}

function requestUndo(): void {
  void guard(async () => {
    if (!sessionId) return;
    view = await api.undo(sessionId);
    recommendations = [];
    recsForStep = -1;
  });
}

async function poll(): Promise<void> {
  if (sessionId && !busy) {
    try {
      view = await api.getView(sessionId);
      await refreshRecommendations();
      render();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        sessionId = null;
        toast("session expired — start a new one");
      }
    }
  }
  setTimeout(() => void poll(), POLL_INTERVAL_MS);
}

async function start(): Promise<void> {
  const humanPlayer = Number(
    el<HTMLSelectElement>("human-player").value,
  );
  const created = await api.createSession(humanPlayer);
  sessionId = created.id;
  view = created.view;
  recommendations = [];
  recsForStep = -1;
  render();
}

async function init(): Promise<void> {
  heroes = (await api.heroes()).heroes;
  el<HTMLButtonElement>("start").onclick = () => void guard(start);
  el<HTMLButtonElement>("engine-move").onclick = requestEngineMove;
  el<HTMLButtonElement>("undo").onclick = requestUndo;
  await guard(start);
  void poll();
}

void init();
