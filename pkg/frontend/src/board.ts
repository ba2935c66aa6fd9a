// Pure view-model helpers: everything the DOM layer renders is derived
// here from the server view, so it can be unit-tested without a browser.

import type { Recommendation, SessionView } from "./types";

export type HeroCellState =
  | "picked-ally"
  | "picked-enemy"
  | "legal"
  | "disabled";

/** Which camp (0 or 1) the given player occupies in round d. */
export function campOfPlayer(
  view: SessionView,
  player: number,
  roundIndex: number,
): number {
  return view.config.first_player[roundIndex] === player ? 0 : 1;
}

/** The ally/enemy pick columns for one round, from the human's side. */
export interface RoundColumns {
  roundIndex: number;
  ally: number[];
  enemy: number[];
  phi: number | null; // human-view winning rate once the round completed
}

export function roundColumns(view: SessionView): RoundColumns[] {
  return view.rounds.map((round, d) => {
    const humanCamp = campOfPlayer(view, view.human_player, d);
    const ally = humanCamp === 0 ? round.camp1 : round.camp2;
    const enemy = humanCamp === 0 ? round.camp2 : round.camp1;
    let phi: number | null = null;
    if (d < view.series_phi.length) {
      const camp1Phi = view.series_phi[d];
      phi = humanCamp === 0 ? camp1Phi : 1 - camp1Phi;
    }
    return { roundIndex: d, ally, enemy, phi };
  });
}

/** Rounds won/lost from the human's side, counting completed rounds only. */
export function seriesScore(view: SessionView): { won: number; lost: number } {
  let won = 0;
  let lost = 0;
  for (const { phi } of roundColumns(view)) {
    if (phi === null) continue;
    if (phi > 0.5) won += 1;
    else if (phi < 0.5) lost += 1;
  }
  return { won, lost };
}

export function heroCellState(view: SessionView, heroId: number): HeroCellState {
  const round = view.rounds[Math.min(view.round_index, view.rounds.length - 1)];
  if (round) {
    const humanCamp = campOfPlayer(view, view.human_player, view.round_index);
    const allyPicks = humanCamp === 0 ? round.camp1 : round.camp2;
    const enemyPicks = humanCamp === 0 ? round.camp2 : round.camp1;
    if (allyPicks.includes(heroId)) return "picked-ally";
    if (enemyPicks.includes(heroId)) return "picked-enemy";
  }
  return view.legal_actions.includes(heroId) ? "legal" : "disabled";
}

/** True only when the human may submit this hero right now. */
export function canPick(view: SessionView, heroId: number): boolean {
  return (
    !view.terminal &&
    view.turn_player === view.human_player &&
    view.legal_actions.includes(heroId)
  );
}

export function isHumanTurn(view: SessionView): boolean {
  return !view.terminal && view.turn_player === view.human_player;
}

export function turnLabel(view: SessionView): string {
  if (view.terminal) return "series over";
  return isHumanTurn(view) ? "your pick" : "engine to move";
}

/** The 1-2-2-1-style pick-order strip with the current slot flagged. */
export interface OrderSlot {
  camp: number;
  current: boolean;
  done: boolean;
}

export function pickOrderStrip(view: SessionView): OrderSlot[] {
  const inRound = view.step % view.config.picks_per_round;
  return view.config.round_order.map((camp, i) => ({
    camp,
    current: !view.terminal && i === inRound,
    done: view.terminal || i < inRound,
  }));
}

/** Recommendations are rendered in the server's order; verify, don't sort. */
export function assertRankedByVisits(recs: Recommendation[]): Recommendation[] {
  for (let i = 1; i < recs.length; i++) {
    if (recs[i].visits > recs[i - 1].visits) {
      throw new Error("recommendation order does not match server ranking");
    }
  }
  return recs;
}

export function formatPhi(phi: number): string {
  return `${(phi * 100).toFixed(1)}%`;
}
