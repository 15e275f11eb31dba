import {
  MoveDelta,
  Mutation,
  MutationRejectedError,
  MutationResult,
  RevisionConflictError,
  View,
} from "./types.js";

/** Everything the console needs from the gateway; mocked in tests. */
export interface GatewayClient {
  fetchView(): Promise<View>;
  whatIf(paper: string, target: string): Promise<MoveDelta>;
  mutate(mutation: Mutation): Promise<MutationResult>;
}

export class HttpGatewayClient implements GatewayClient {
  constructor(private baseUrl: string = "") {}

  async fetchView(): Promise<View> {
    const res = await fetch(`${this.baseUrl}/view`);
    if (!res.ok) throw new Error(`GET /view failed: ${res.status}`);
    return (await res.json()) as View;
  }

  async whatIf(paper: string, target: string): Promise<MoveDelta> {
    const params = new URLSearchParams({ paper, target });
    const res = await fetch(`${this.baseUrl}/whatif?${params}`);
    if (!res.ok) {
      const body = await res.json().catch(() => ({}));
      throw new MutationRejectedError(body?.detail?.error ?? `GET /whatif failed: ${res.status}`);
    }
    return (await res.json()) as MoveDelta;
  }

  async mutate(mutation: Mutation): Promise<MutationResult> {
    const res = await fetch(`${this.baseUrl}/mutate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(mutation),
    });
    if (res.status === 409) {
      const body = await res.json().catch(() => ({}));
      throw new RevisionConflictError(body?.detail?.revision ?? null);
    }
    if (!res.ok) {
      const body = await res.json().catch(() => ({}));
      throw new MutationRejectedError(body?.detail?.error ?? `POST /mutate failed: ${res.status}`);
    }
    return (await res.json()) as MutationResult;
  }
}
