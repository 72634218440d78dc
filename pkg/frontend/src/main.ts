/** Map explorer wiring: fetch, controls, canvas interaction, animation. */
import { backgroundUrl, getMap, listMaps, thumbUrl } from "./api.js";
import { drawScene, ThumbCache } from "./renderer.js";
import {
  buildScene,
  fitCamera,
  gridLevel,
  hitTest,
  layoutBounds,
  positionOf,
  screenToWorld,
  type Mark,
} from "./scene.js";
import { clampZoom, filterItems, genreOptions, initialView, toggledMode } from "./state.js";
import { Tooltip } from "./tooltip.js";
import type { MapDocument, ViewState } from "./types.js";

const TOGGLE_MS = 300;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

class App {
  private view: ViewState = initialView();
  private doc: MapDocument | null = null;
  private marks: Mark[] = [];
  private animating: { from: Map<string, [number, number]>; start: number } | null = null;
  private fetchController: AbortController | null = null;
  private background: HTMLImageElement | null = null;
  private dragging = false;
  private lastPointer: [number, number] = [0, 0];

  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private tooltip: Tooltip;
  private thumbs = new ThumbCache(() => this.requestDraw());
  private mapSelect = el("select");
  private searchBox = el("input");
  private modeButton = el("button", "control", "placement: scatter");
  private backgroundCheck = el("input");
  private countLabel = el("div", "count");
  private emptyState = el("div", "empty hidden", "No items match the current filters.");
  private errorState = el("div", "error hidden");
  private genreList = el("div", "genres");
  private drawQueued = false;

  constructor(root: HTMLElement) {
    const sidebar = el("div", "sidebar");
    const stage = el("div", "stage");
    root.append(sidebar, stage);

    sidebar.appendChild(el("h1", undefined, "metalmap"));
    sidebar.appendChild(this.mapSelect);
    this.searchBox.placeholder = "search band names";
    sidebar.appendChild(this.searchBox);
    sidebar.appendChild(this.modeButton);

    const backgroundRow = el("label", "control");
    this.backgroundCheck.type = "checkbox";
    this.backgroundCheck.checked = true;
    backgroundRow.append(this.backgroundCheck, document.createTextNode(" genre background"));
    sidebar.appendChild(backgroundRow);

    sidebar.appendChild(this.countLabel);
    sidebar.appendChild(el("h2", undefined, "genres"));
    sidebar.appendChild(this.genreList);

    this.canvas = el("canvas");
    stage.append(this.canvas, this.emptyState, this.errorState);
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.tooltip = new Tooltip(stage);

    this.mapSelect.addEventListener("change", () => void this.loadMap(this.mapSelect.value));
    this.searchBox.addEventListener("input", () => {
      this.view = { ...this.view, query: this.searchBox.value };
      this.refreshScene();
    });
    this.modeButton.addEventListener("click", () => this.toggleMode());
    this.backgroundCheck.addEventListener("change", () => {
      this.view = { ...this.view, showBackground: this.backgroundCheck.checked };
      this.requestDraw();
    });
    this.bindCanvas();
    new ResizeObserver(() => this.resize()).observe(stage);
    this.resize();
  }

  async start(): Promise<void> {
    try {
      const names = await listMaps();
      for (const name of names) {
        const option = el("option", undefined, name);
        option.value = name;
        this.mapSelect.appendChild(option);
      }
      if (names.length > 0) {
        await this.loadMap(names[0]);
      } else {
        this.showError("no maps are published");
      }
    } catch (err) {
      this.showError(String(err));
    }
  }

  private async loadMap(name: string): Promise<void> {
    this.fetchController?.abort();
    const controller = new AbortController();
    this.fetchController = controller;
    try {
      const doc = await getMap(name, controller.signal);
      this.doc = doc;
      this.view = {
        ...initialView(),
        mapName: name,
        mode: this.view.mode,
        showBackground: this.backgroundCheck.checked,
      };
      this.searchBox.value = "";
      this.view.camera = fitCamera(doc, this.canvas.width, this.canvas.height);
      this.background = new Image();
      this.background.src = backgroundUrl(name);
      this.background.addEventListener("load", () => this.requestDraw());
      this.errorState.classList.add("hidden");
      this.renderGenreFilters();
      this.refreshScene();
    } catch (err) {
      if (!controller.signal.aborted) {
        this.doc = null;
        this.marks = [];
        this.showError(`failed to load map: ${String(err)}`);
      }
    }
  }

  private showError(message: string): void {
    this.errorState.textContent = message;
    this.errorState.classList.remove("hidden");
    this.requestDraw();
  }

  private renderGenreFilters(): void {
    this.genreList.innerHTML = "";
    if (!this.doc) return;
    for (const tag of genreOptions(this.doc.items)) {
      const row = el("label", "genre-row");
      const box = el("input");
      box.type = "checkbox";
      box.addEventListener("change", () => {
        const active = new Set(this.view.genreFilters);
        if (box.checked) active.add(tag);
        else active.delete(tag);
        this.view = { ...this.view, genreFilters: [...active].sort() };
        this.refreshScene();
      });
      row.append(box, document.createTextNode(` ${tag}`));
      this.genreList.appendChild(row);
    }
  }

  private toggleMode(): void {
    if (!this.doc) return;
    const from = new Map(this.marks.map((mark) => [mark.item.id, [mark.x, mark.y] as [number, number]]));
    this.view = { ...this.view, mode: toggledMode(this.view.mode) };
    this.modeButton.textContent = `placement: ${this.view.mode}`;
    this.refreshScene();
    this.animating = { from, start: performance.now() };
    this.animate();
  }

  private animate(): void {
    if (!this.animating) return;
    const t = Math.min(1, (performance.now() - this.animating.start) / TOGGLE_MS);
    this.drawInterpolated(t);
    if (t < 1) {
      requestAnimationFrame(() => this.animate());
    } else {
      this.animating = null;
      this.requestDraw();
    }
  }

  private drawInterpolated(t: number): void {
    if (!this.doc || !this.animating) return;
    const blended = this.marks.map((mark) => {
      const origin = this.animating!.from.get(mark.item.id);
      if (!origin) return mark;
      return {
        ...mark,
        x: origin[0] + (mark.x - origin[0]) * t,
        y: origin[1] + (mark.y - origin[1]) * t,
      };
    });
    drawScene(this.ctx, this.doc, this.view, blended, this.view.camera, this.background, this.thumbs, thumbUrl);
  }

  private refreshScene(): void {
    if (!this.doc) return;
    this.marks = buildScene(this.doc, this.view);
    const total = this.doc.items.length;
    this.countLabel.textContent = `${this.marks.length} of ${total} items`;
    this.emptyState.classList.toggle("hidden", this.marks.length > 0);
    this.requestDraw();
  }

  private bindCanvas(): void {
    this.canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      const { camera } = this.view;
      const [wx, wy] = screenToWorld(camera, this.canvas.width, this.canvas.height, event.offsetX, event.offsetY);
      const factor = Math.exp(-event.deltaY / 400);
      const zoom = clampZoom(camera.zoom * factor);
      const scale = zoom / camera.zoom;
      this.view = {
        ...this.view,
        camera: {
          zoom,
          cx: wx - (wx - camera.cx) / scale,
          cy: wy - (wy - camera.cy) / scale,
        },
      };
      this.requestDraw();
    }, { passive: false });

    this.canvas.addEventListener("pointerdown", (event) => {
      this.dragging = true;
      this.lastPointer = [event.offsetX, event.offsetY];
      this.canvas.setPointerCapture(event.pointerId);
    });
    this.canvas.addEventListener("pointerup", () => (this.dragging = false));
    this.canvas.addEventListener("pointermove", (event) => {
      if (this.dragging) {
        const dx = event.offsetX - this.lastPointer[0];
        const dy = event.offsetY - this.lastPointer[1];
        this.lastPointer = [event.offsetX, event.offsetY];
        const { camera } = this.view;
        this.view = {
          ...this.view,
          camera: { ...camera, cx: camera.cx - dx / camera.zoom, cy: camera.cy + dy / camera.zoom },
        };
        this.tooltip.hide();
        this.requestDraw();
        return;
      }
      this.hover(event.offsetX, event.offsetY);
    });
    this.canvas.addEventListener("pointerleave", () => {
      this.view = { ...this.view, hoveredId: null };
      this.tooltip.hide();
      this.requestDraw();
    });
  }

  private hover(px: number, py: number): void {
    const mark = hitTest(
      this.marks, this.view.camera, this.canvas.width, this.canvas.height, px, py, 14,
    );
    const hoveredId = mark?.item.id ?? null;
    if (hoveredId !== this.view.hoveredId) {
      this.view = { ...this.view, hoveredId };
      this.requestDraw();
    }
    if (mark) {
      this.tooltip.show(mark.item, px, py);
    } else {
      this.tooltip.hide();
    }
  }

  private resize(): void {
    const stage = this.canvas.parentElement;
    if (!stage) return;
    const rect = stage.getBoundingClientRect();
    this.canvas.width = Math.max(200, Math.floor(rect.width));
    this.canvas.height = Math.max(200, Math.floor(rect.height));
    if (this.doc) {
      this.view = { ...this.view, camera: fitCamera(this.doc, this.canvas.width, this.canvas.height) };
    }
    this.requestDraw();
  }

  private requestDraw(): void {
    if (this.drawQueued) return;
    this.drawQueued = true;
    requestAnimationFrame(() => {
      this.drawQueued = false;
      if (this.doc && !this.animating) {
        drawScene(this.ctx, this.doc, this.view, this.marks, this.view.camera, this.background, this.thumbs, thumbUrl);
      }
    });
  }
}

const root = document.getElementById("app");
if (root) {
  void new App(root).start();
}

// re-exported for direct use in tests and the console
export { buildScene, fitCamera, filterItems, gridLevel, hitTest, layoutBounds, positionOf };
