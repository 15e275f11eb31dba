import { GridCell } from "./types.js";
import { GridViewModel, MalformedViewError } from "./viewmodel.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(2);
}

function minutes(start: number): string {
  const h = Math.floor(start / 60);
  const m = start % 60;
  return `${String(h).padStart(2, "0")}:${String(m).padStart(2, "0")}`;
}

function renderCell(cell: GridCell, vm: GridViewModel): string {
  const id = `cell-${esc(cell.slot_id)}-${esc(cell.room_id)}`;
  if (cell.session === null) {
    return (
      `<td id="${id}" class="cell empty drop-target" data-slot="${esc(cell.slot_id)}" ` +
      `data-room="${esc(cell.room_id)}"><span class="hint">empty</span></td>`
    );
  }
  const s = cell.session;
  const overflow =
    cell.overflow > 0 ? `<span class="badge overflow">+${fmt(cell.overflow)} over</span>` : "";
  const selected = vm.selectedPaper;
  const chips = s.papers
    .map((p) => {
      const cls = p === selected ? "chip selected" : "chip";
      return `<span class="${cls}" draggable="true" data-paper="${esc(p)}">${esc(p)}</span>`;
    })
    .join("");
  return (
    `<td id="${id}" class="cell session drop-target" data-slot="${esc(cell.slot_id)}" ` +
    `data-room="${esc(cell.room_id)}" data-session="${esc(s.session_id)}">` +
    `<div class="head"><span class="sid">${esc(s.session_id)}</span>` +
    `<span class="coherence">coh ${fmt(s.coherence)}</span>` +
    `<span class="popularity">pop ${fmt(s.popularity)}</span>${overflow}</div>` +
    `<div class="chips">${chips}</div></td>`
  );
}

/** Render the whole grid as an HTML string; throws on malformed input. */
export function renderGrid(vm: GridViewModel): string {
  if (vm.rows.length === 0) {
    return `<div class="grid empty-venue">no slots in the venue</div>`;
  }
  const rooms = vm.rows[0].cells.map(
    (c) => `<th class="room">${esc(c.room_id)} (${fmt(c.capacity)})</th>`,
  );
  const body = vm.rows
    .map((row) => {
      const header =
        `<th class="slot" data-slot="${esc(row.slot_id)}">` +
        `<span class="slot-id">${esc(row.slot_id)}</span>` +
        `<span class="when">d${row.day} ${minutes(row.start)}</span>` +
        `<span class="heat" data-heat="${row.conflict_heat}">heat ${fmt(row.conflict_heat)}</span></th>`;
      return `<tr>${header}${row.cells.map((c) => renderCell(c, vm)).join("")}</tr>`;
    })
    .join("");
  const whatif = vm.pendingWhatIf
    ? `<div class="whatif" data-feasible="${vm.pendingWhatIf.delta.feasible}">` +
      `moving ${esc(vm.pendingWhatIf.paper)} to ${esc(vm.pendingWhatIf.targetSession)}: ` +
      `conflicts ${fmt(vm.pendingWhatIf.delta.d_conflicts)}, ` +
      `coherence ${fmt(vm.pendingWhatIf.delta.d_coherence)}</div>`
    : "";
  const totals =
    `<div class="totals">` +
    `<span class="metric conflicts">conflicts ${fmt(vm.metrics.conflict_count)}</span>` +
    `<span class="metric clashes">author clashes ${vm.metrics.author_clashes.length}</span>` +
    `<span class="metric overflow">overflow ${fmt(vm.metrics.room_overflow)}</span>` +
    `<span class="metric coherence">coherence ${fmt(vm.metrics.coherence_total)}</span>` +
    `<span class="metric revision">rev ${vm.revision}</span></div>`;
  return (
    `<div class="grid" data-revision="${vm.revision}">${totals}${whatif}` +
    `<table><thead><tr><th class="corner"></th>${rooms.join("")}</tr></thead>` +
    `<tbody>${body}</tbody></table></div>`
  );
}

/** Error banner shown instead of the grid when the view fails validation. */
export function renderErrorBanner(error: unknown): string {
  const message = error instanceof MalformedViewError ? error.message : "failed to load the draft";
  return `<div class="banner error">${esc(message)}</div>`;
}
