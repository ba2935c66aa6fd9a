import type {
  ApiErrorBody,
  CreateSessionResponse,
  EngineMoveResponse,
  HeroesResponse,
  RecommendationsResponse,
  SessionView,
  WhatifResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export function makeRequestId(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `req-${Date.now()}-${Math.random().toString(36).slice(2, 10)}`;
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetch(`${base}${path}`, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: Partial<ApiErrorBody> = {};
    try {
      body = (await response.json()) as ApiErrorBody;
    } catch {
      // non-JSON error body; fall through to the generic message
    }
    throw new ApiError(
      response.status,
      body.code ?? "http-error",
      body.message ?? `request failed: ${response.status}`,
    );
  }
  return (await response.json()) as T;
}

/** Thin typed client over the draft service; one instance per session. */
export class DraftApi {
  constructor(private readonly base: string = "") {}

  createSession(humanPlayer: number): Promise<CreateSessionResponse> {
    return request(this.base, "/api/sessions", {
      method: "POST",
      body: JSON.stringify({ human_player: humanPlayer }),
    });
  }

  getView(sessionId: string): Promise<SessionView> {
    return request(this.base, `/api/sessions/${sessionId}`);
  }

  submitPick(
    sessionId: string,
    heroId: number,
    requestId: string,
  ): Promise<SessionView> {
    return request(this.base, `/api/sessions/${sessionId}/picks`, {
      method: "POST",
      body: JSON.stringify({ hero_id: heroId, request_id: requestId }),
    });
  }

  engineMove(sessionId: string, requestId: string): Promise<EngineMoveResponse> {
    return request(this.base, `/api/sessions/${sessionId}/engine-move`, {
      method: "POST",
      body: JSON.stringify({ request_id: requestId }),
    });
  }

  recommendations(
    sessionId: string,
    topK: number,
  ): Promise<RecommendationsResponse> {
    return request(
      this.base,
      `/api/sessions/${sessionId}/recommendations?top_k=${topK}`,
    );
  }

  whatif(sessionId: string, heroId: number): Promise<WhatifResponse> {
    return request(this.base, `/api/sessions/${sessionId}/whatif`, {
      method: "POST",
      body: JSON.stringify({ hero_id: heroId }),
    });
  }

  undo(sessionId: string): Promise<SessionView> {
    return request(this.base, `/api/sessions/${sessionId}/undo`, {
      method: "POST",
      body: JSON.stringify({}),
    });
  }

  heroes(): Promise<HeroesResponse> {
    return request(this.base, "/api/heroes");
  }
}
