// Shapes of the draft service's JSON responses. The client renders these
// verbatim; the only rule logic it applies is disabling heroes that are
// not in the server's legal set.

export interface GameConfigView {
  n_heroes: number;
  picks_per_round: number;
  rounds: number;
  round_order: number[];
  first_player: number[];
}

export interface RoundPicks {
  camp1: number[];
  camp2: number[];
}

export interface SessionView {
  id: string;
  config: GameConfigView;
  human_player: number;
  step: number;
  round_index: number;
  terminal: boolean;
  picks: number[];
  turn_player: number | null;
  turn_camp: number | null;
  legal_actions: number[];
  rounds: RoundPicks[];
  series_phi: number[];
  draft_text: string;
}

export interface CreateSessionResponse {
  id: string;
  view: SessionView;
}

export interface EngineMoveResponse {
  hero_id: number;
  latency_s: number;
  view: SessionView;
}

export interface Recommendation {
  hero_id: number;
  prior: number;
  visits: number;
  q: number;
  phi_if_picked: number;
}

export interface RecommendationsResponse {
  recommendations: Recommendation[];
}

export interface WhatifResponse {
  hero_id: number;
  phi_if_picked: number;
  recommendations: Recommendation[];
}

export interface Hero {
  id: number;
  winrate: number;
}

export interface HeroesResponse {
  heroes: Hero[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
