/**
 * Wire types mirroring the gateway's JSON schemas. The console never derives
 * metrics of its own: everything rendered traces back to one of these fields.
 */

export interface SessionInfo {
  session_id: string;
  papers: string[];
  coherence: number;
  popularity: number;
}

export interface GridCell {
  slot_id: string;
  room_id: string;
  capacity: number;
  session: SessionInfo | null;
  overflow: number;
}

export interface GridRow {
  slot_id: string;
  day: number;
  start: number;
  duration: number;
  conflict_heat: number;
  cells: GridCell[];
}

export interface ViewMetrics {
  conflict_count: number;
  author_clashes: [string, string][];
  room_overflow: number;
  coherence_total: number;
}

export interface ConflictPair {
  p: string;
  q: string;
  affinity: number;
  slot: string;
}

export interface View {
  revision: number;
  sessions: SessionInfo[];
  grid: GridRow[];
  metrics: ViewMetrics;
  top_conflicting_pairs: ConflictPair[];
  warnings: string[];
}

export interface MoveDelta {
  d_conflicts: number;
  d_coherence: number;
  new_violations: [string, string][];
  feasible: boolean;
}

export interface Mutation {
  kind: "move_paper" | "swap_sessions" | "swap_slots" | "reoptimize" | "undo";
  payload: Record<string, unknown>;
  expected_revision: number;
}

export interface MutationResult {
  revision: number;
  metrics: ViewMetrics;
}

/** Gateway answered 409: the client's revision is stale. */
export class RevisionConflictError extends Error {
  constructor(public currentRevision: number | null) {
    super("draft changed on the server; refresh required");
    this.name = "RevisionConflictError";
  }
}

/** Gateway answered 400: the mutation cannot be applied; state unchanged. */
export class MutationRejectedError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MutationRejectedError";
  }
}
