import { GatewayClient } from "../src/client.js";
import {
  MoveDelta,
  Mutation,
  MutationRejectedError,
  MutationResult,
  RevisionConflictError,
  View,
} from "../src/types.js";

export function sampleView(revision = 0): View {
  return {
    revision,
    sessions: [
      { session_id: "S01", papers: ["c1", "c2", "c3", "c4"], coherence: 12, popularity: 2 },
      { session_id: "S02", papers: ["c5", "c6", "c7", "c8"], coherence: 12, popularity: 2 },
    ],
    grid: [
      {
        slot_id: "t1",
        day: 0,
        start: 540,
        duration: 80,
        conflict_heat: 3.5,
        cells: [
          {
            slot_id: "t1",
            room_id: "r1",
            capacity: 60,
            session: {
              session_id: "S01",
              papers: ["c1", "c2", "c3", "c4"],
              coherence: 12,
              popularity: 2,
            },
            overflow: 0,
          },
          { slot_id: "t1", room_id: "r2", capacity: 30, session: null, overflow: 0 },
        ],
      },
      {
        slot_id: "t2",
        day: 0,
        start: 660,
        duration: 80,
        conflict_heat: 1.25,
        cells: [
          {
            slot_id: "t2",
            room_id: "r1",
            capacity: 60,
            session: {
              session_id: "S02",
              papers: ["c5", "c6", "c7", "c8"],
              coherence: 12,
              popularity: 7,
            },
            overflow: 4,
          },
          { slot_id: "t2", room_id: "r2", capacity: 30, session: null, overflow: 0 },
        ],
      },
    ],
    metrics: {
      conflict_count: 4.75,
      author_clashes: [["alice", "t1"]],
      room_overflow: 4,
      coherence_total: 24,
    },
    top_conflicting_pairs: [{ p: "c1", q: "c5", affinity: 2, slot: "t1" }],
    warnings: [],
  };
}

export interface Call {
  method: "fetchView" | "whatIf" | "mutate";
  args: unknown[];
}

/** Scripted gateway double: serves a current view plus staged ones, records calls. */
export class MockGateway implements GatewayClient {
  calls: Call[] = [];
  whatIfResults = new Map<string, MoveDelta>();
  mutateBehavior: "accept" | "conflict" | "reject" = "accept";
  private current: View;
  private pending: View[] = [];
  private revision: number;

  constructor(initial: View) {
    this.current = initial;
    this.revision = initial.revision;
  }

  get mutateCalls(): Mutation[] {
    return this.calls.filter((c) => c.method === "mutate").map((c) => c.args[0] as Mutation);
  }

  /** Stage what the next fetch returns (a change made elsewhere). */
  queueView(view: View): void {
    this.pending.push(view);
  }

  setWhatIf(paper: string, target: string, delta: MoveDelta): void {
    this.whatIfResults.set(`${paper}->${target}`, delta);
  }

  async fetchView(): Promise<View> {
    this.calls.push({ method: "fetchView", args: [] });
    if (this.pending.length) {
      this.current = this.pending.shift()!;
      this.revision = this.current.revision;
    }
    return structuredClone(this.current);
  }

  async whatIf(paper: string, target: string): Promise<MoveDelta> {
    this.calls.push({ method: "whatIf", args: [paper, target] });
    const delta = this.whatIfResults.get(`${paper}->${target}`);
    if (!delta) throw new MutationRejectedError(`unknown ids ${paper}/${target}`);
    return structuredClone(delta);
  }

  async mutate(mutation: Mutation): Promise<MutationResult> {
    this.calls.push({ method: "mutate", args: [mutation] });
    if (this.mutateBehavior === "conflict") throw new RevisionConflictError(this.revision);
    if (this.mutateBehavior === "reject") throw new MutationRejectedError("target session is full");
    this.revision = mutation.expected_revision + 1;
    const next = structuredClone(this.current);
    next.revision = this.revision;
    this.current = next;
    return { revision: this.revision, metrics: structuredClone(next.metrics) };
  }
}
