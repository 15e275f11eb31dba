import { GridCell, GridRow, MoveDelta, View } from "./types.js";

/**
 * The render-ready projection of a gateway View. Strictly a pass-through:
 * every number here is copied from a View field, never computed locally.
 */
export interface GridViewModel {
  revision: number;
  rows: GridRow[];
  slotHeat: Record<string, number>;
  metrics: View["metrics"];
  warnings: string[];
  topConflicts: View["top_conflicting_pairs"];
  selectedPaper: string | null;
  pendingWhatIf: PendingWhatIf | null;
}

export interface PendingWhatIf {
  paper: string;
  targetSession: string;
  delta: MoveDelta;
}

export class MalformedViewError extends Error {
  constructor(detail: string) {
    super(`malformed view: ${detail}`);
    this.name = "MalformedViewError";
  }
}

function checkCell(cell: GridCell, where: string): void {
  if (typeof cell.room_id !== "string" || typeof cell.capacity !== "number") {
    throw new MalformedViewError(`cell ${where} is missing room fields`);
  }
  if (cell.session !== null) {
    const s = cell.session;
    if (
      typeof s.session_id !== "string" ||
      !Array.isArray(s.papers) ||
      typeof s.coherence !== "number" ||
      typeof s.popularity !== "number"
    ) {
      throw new MalformedViewError(`session in cell ${where} is incomplete`);
    }
  }
}

/** Validate the full view before building anything; no partial results. */
export function validateView(view: View): void {
  if (typeof view?.revision !== "number") throw new MalformedViewError("missing revision");
  if (!Array.isArray(view.grid)) throw new MalformedViewError("missing grid");
  if (!view.metrics || typeof view.metrics.conflict_count !== "number") {
    throw new MalformedViewError("missing metrics");
  }
  const width = view.grid.length ? view.grid[0].cells.length : 0;
  for (const row of view.grid) {
    if (typeof row.slot_id !== "string" || typeof row.conflict_heat !== "number") {
      throw new MalformedViewError(`slot row ${String(row.slot_id)} is incomplete`);
    }
    if (!Array.isArray(row.cells) || row.cells.length !== width) {
      throw new MalformedViewError(`ragged grid at slot ${row.slot_id}`);
    }
    for (const cell of row.cells) checkCell(cell, `${row.slot_id}/${cell.room_id}`);
  }
}

export function buildGridViewModel(
  view: View,
  selectedPaper: string | null = null,
  pendingWhatIf: PendingWhatIf | null = null,
): GridViewModel {
  validateView(view);
  const slotHeat: Record<string, number> = {};
  for (const row of view.grid) slotHeat[row.slot_id] = row.conflict_heat;
  return {
    revision: view.revision,
    rows: view.grid,
    slotHeat,
    metrics: view.metrics,
    warnings: view.warnings ?? [],
    topConflicts: view.top_conflicting_pairs ?? [],
    selectedPaper,
    pendingWhatIf,
  };
}

/** Session lookup used by drag handlers; pass-through over the view. */
export function sessionOfPaper(view: View, paper: string): string | null {
  for (const s of view.sessions) {
    if (s.papers.includes(paper)) return s.session_id;
  }
  return null;
}
