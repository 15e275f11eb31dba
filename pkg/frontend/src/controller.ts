import { GatewayClient } from "./client.js";
import {
  MoveDelta,
  MutationRejectedError,
  RevisionConflictError,
  View,
} from "./types.js";
import {
  GridViewModel,
  PendingWhatIf,
  buildGridViewModel,
  sessionOfPaper,
  validateView,
} from "./viewmodel.js";

export type DropOutcome =
  | { kind: "applied"; revision: number }
  | { kind: "blocked"; reason: string }
  | { kind: "stale" }
  | { kind: "rejected"; reason: string };

/**
 * Single-page state machine around the gateway. One in-flight mutation at a
 * time; a drop commits only after a feasible what-if preview for exactly that
 * (paper, target) pair was fetched against the current revision.
 */
export class ConsoleController {
  view: View | null = null;
  selectedPaper: string | null = null;
  pendingWhatIf: PendingWhatIf | null = null;
  banner: string | null = null;
  inlineError: { session: string; message: string } | null = null;
  private mutationInFlight = false;

  constructor(private client: GatewayClient) {}

  async load(): Promise<void> {
    const view = await this.client.fetchView();
    validateView(view);
    this.view = view;
    this.pendingWhatIf = null;
    this.inlineError = null;
  }

  /** Poll-by-revision: swap the view only when the revision moved. */
  async poll(): Promise<boolean> {
    if (this.mutationInFlight || this.view === null) return false;
    const fresh = await this.client.fetchView();
    if (fresh.revision === this.view.revision) return false;
    validateView(fresh);
    this.view = fresh;
    this.pendingWhatIf = null;
    return true;
  }

  selectPaper(paper: string | null): void {
    this.selectedPaper = paper;
  }

  /** Fetch the mandatory preview for a prospective drop. */
  async previewMove(paper: string, targetSession: string): Promise<MoveDelta> {
    const delta = await this.client.whatIf(paper, targetSession);
    this.pendingWhatIf = { paper, targetSession, delta };
    return delta;
  }

  /** True when a drop on this target may commit (preview fetched + feasible). */
  canDrop(paper: string, targetSession: string): boolean {
    const p = this.pendingWhatIf;
    return (
      p !== null && p.paper === paper && p.targetSession === targetSession && p.delta.feasible
    );
  }

  /**
   * Commit a drag-and-drop. Without a feasible matching preview this emits no
   * request at all. A revision conflict discards the drag and refetches.
   */
  async commitMove(paper: string, targetSession: string): Promise<DropOutcome> {
    if (this.view === null) return { kind: "blocked", reason: "no view loaded" };
    if (!this.canDrop(paper, targetSession)) {
      return { kind: "blocked", reason: "no feasible what-if preview for this drop" };
    }
    if (this.mutationInFlight) return { kind: "blocked", reason: "another mutation is in flight" };
    this.mutationInFlight = true;
    try {
      const result = await this.client.mutate({
        kind: "move_paper",
        payload: { paper, target_session: targetSession },
        expected_revision: this.view.revision,
      });
      this.mutationInFlight = false;
      await this.load();
      return { kind: "applied", revision: result.revision };
    } catch (err) {
      this.mutationInFlight = false;
      this.pendingWhatIf = null;
      if (err instanceof RevisionConflictError) {
        this.banner = "the draft changed on the server; the drag was discarded";
        await this.load();
        return { kind: "stale" };
      }
      if (err instanceof MutationRejectedError) {
        const source = sessionOfPaper(this.view, paper);
        await this.load();
        this.inlineError = { session: source ?? targetSession, message: err.message };
        return { kind: "rejected", reason: err.message };
      }
      throw err;
    }
  }

  async undo(): Promise<DropOutcome> {
    return this.simpleMutation("undo", {});
  }

  async reoptimize(): Promise<DropOutcome> {
    return this.simpleMutation("reoptimize", {});
  }

  private async simpleMutation(
    kind: "undo" | "reoptimize",
    payload: Record<string, unknown>,
  ): Promise<DropOutcome> {
    if (this.view === null) return { kind: "blocked", reason: "no view loaded" };
    if (this.mutationInFlight) return { kind: "blocked", reason: "another mutation is in flight" };
    this.mutationInFlight = true;
    try {
      const result = await this.client.mutate({
        kind,
        payload,
        expected_revision: this.view.revision,
      });
      this.mutationInFlight = false;
      await this.load();
      return { kind: "applied", revision: result.revision };
    } catch (err) {
      this.mutationInFlight = false;
      if (err instanceof RevisionConflictError) {
        this.banner = "the draft changed on the server";
        await this.load();
        return { kind: "stale" };
      }
      if (err instanceof MutationRejectedError) {
        await this.load();
        return { kind: "rejected", reason: err.message };
      }
      throw err;
    }
  }

  viewModel(): GridViewModel {
    if (this.view === null) throw new Error("view not loaded");
    return buildGridViewModel(this.view, this.selectedPaper, this.pendingWhatIf);
  }
}
