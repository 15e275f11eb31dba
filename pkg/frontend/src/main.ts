import { HttpGatewayClient } from "./client.js";
import { ConsoleController } from "./controller.js";
import { renderErrorBanner, renderGrid } from "./render.js";

const POLL_MS = 2000;

function mount(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const controller = new ConsoleController(new HttpGatewayClient(""));

  const redraw = () => {
    try {
      root.innerHTML = renderGrid(controller.viewModel());
      if (controller.banner) {
        root.insertAdjacentHTML("afterbegin", `<div class="banner info">${controller.banner}</div>`);
        controller.banner = null;
      }
      if (controller.inlineError) {
        const cell = root.querySelector(`[data-session="${controller.inlineError.session}"]`);
        cell?.insertAdjacentHTML(
          "beforeend",
          `<div class="inline-error">${controller.inlineError.message}</div>`,
        );
      }
      wire(root);
    } catch (err) {
      root.innerHTML = renderErrorBanner(err);
    }
  };

  const wire = (scope: HTMLElement) => {
    scope.querySelectorAll<HTMLElement>(".chip").forEach((chip) => {
      chip.addEventListener("dragstart", (ev) => {
        const paper = chip.dataset.paper ?? "";
        controller.selectPaper(paper);
        ev.dataTransfer?.setData("text/plain", paper);
      });
      chip.addEventListener("click", () => {
        controller.selectPaper(chip.dataset.paper ?? null);
        redraw();
      });
    });
    scope.querySelectorAll<HTMLElement>(".drop-target").forEach((cell) => {
      const target = cell.dataset.session;
      if (!target) return; // empty cells accept no paper moves (sessions move via reoptimize)
      cell.addEventListener("dragover", (ev) => {
        const paper = controller.selectedPaper;
        if (!paper) return;
        if (controller.canDrop(paper, target)) {
          ev.preventDefault(); // must be synchronous to allow the drop
          return;
        }
        const pending = controller.pendingWhatIf;
        if (!pending || pending.paper !== paper || pending.targetSession !== target) {
          void controller.previewMove(paper, target).then(() => redraw());
        }
      });
      cell.addEventListener("drop", (ev) => {
        ev.preventDefault();
        const paper = ev.dataTransfer?.getData("text/plain") ?? controller.selectedPaper;
        if (!paper) return;
        void controller.commitMove(paper, target).then(redraw);
      });
    });
  };

  document.getElementById("undo")?.addEventListener("click", () => {
    void controller.undo().then(redraw);
  });
  document.getElementById("reoptimize")?.addEventListener("click", () => {
    void controller.reoptimize().then(redraw);
  });

  controller
    .load()
    .then(redraw)
    .catch((err) => {
      root.innerHTML = renderErrorBanner(err);
    });
  setInterval(() => {
    void controller.poll().then((changed) => {
      if (changed) redraw();
    });
  }, POLL_MS);
}

mount();
