/** Hover detail panel; falls back to text when the thumbnail fails. */
import { tooltipModel } from "./state.js";
import type { MapItem } from "./types.js";

export class Tooltip {
  private root: HTMLElement;

  constructor(container: HTMLElement) {
    this.root = document.createElement("div");
    this.root.className = "tooltip hidden";
    container.appendChild(this.root);
  }

  show(item: MapItem, px: number, py: number): void {
    const model = tooltipModel(item);
    this.root.innerHTML = "";

    const img = document.createElement("img");
    img.alt = "";
    img.src = model.thumbUrl;
    img.addEventListener("error", () => {
      img.replaceWith(Object.assign(document.createElement("div"), {
        className: "thumb-fallback",
        textContent: "(no image)",
      }));
    });
    this.root.appendChild(img);

    const name = document.createElement("div");
    name.className = "tooltip-name";
    name.textContent = model.name;
    this.root.appendChild(name);

    for (const line of [model.genres, `${model.status} · ${model.label}`]) {
      const div = document.createElement("div");
      div.className = "tooltip-line";
      div.textContent = line;
      this.root.appendChild(div);
    }

    this.root.style.left = `${px + 14}px`;
    this.root.style.top = `${py + 14}px`;
    this.root.classList.remove("hidden");
  }

  hide(): void {
    this.root.classList.add("hidden");
  }
}
