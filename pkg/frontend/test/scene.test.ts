import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  buildScene,
  fitCamera,
  gridLevel,
  hitTest,
  layoutBounds,
  positionOf,
  worldToScreen,
} from "../src/scene.js";
import { initialView } from "../src/state.js";
import type { MapDocument, ViewState } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const doc: MapDocument = JSON.parse(
  readFileSync(join(here, "fixtures", "map_fixture.json"), "utf-8"),
);

function view(overrides: Partial<ViewState> = {}): ViewState {
  return { ...initialView(), mapName: doc.name, ...overrides };
}

describe("scene over the 200-item fixture", () => {
  it("fixture really has 200 items", () => {
    expect(doc.items).toHaveLength(200);
  });

  it("renders exactly one mark per item with no filters", () => {
    const marks = buildScene(doc, view());
    expect(marks).toHaveLength(200);
    const ids = new Set(marks.map((m) => m.item.id));
    expect(ids.size).toBe(200);
  });

  it("grid mode renders the same item set at different positions", () => {
    const scatter = buildScene(doc, view({ mode: "scatter" }));
    const grid = buildScene(doc, view({ mode: "grid" }));
    expect(grid.map((m) => m.item.id)).toEqual(scatter.map((m) => m.item.id));
    const moved = grid.filter(
      (mark, i) => mark.x !== scatter[i].x || mark.y !== scatter[i].y,
    );
    expect(moved.length).toBeGreaterThan(0);
  });

  it("scatter<->grid toggle is an involution on positions", () => {
    const first = buildScene(doc, view({ mode: "scatter" }));
    const there = buildScene(doc, view({ mode: "grid" }));
    const back = buildScene(doc, view({ mode: "scatter" }));
    expect(back).toEqual(first);
    expect(there).not.toEqual(first);
  });

  it("grid positions land inside the scatter bounding box", () => {
    const bounds = layoutBounds(doc);
    const level = gridLevel(doc);
    for (const item of doc.items) {
      const [x, y] = positionOf(item, "grid", level, bounds);
      expect(x).toBeGreaterThanOrEqual(bounds.minX);
      expect(x).toBeLessThanOrEqual(bounds.minX + bounds.spanX);
      expect(y).toBeGreaterThanOrEqual(bounds.minY);
      expect(y).toBeLessThanOrEqual(bounds.minY + bounds.spanY);
    }
  });

  it("grid positions are distinct per item (collision-free cells)", () => {
    const bounds = layoutBounds(doc);
    const level = gridLevel(doc);
    const keys = new Set(
      doc.items.map((item) => positionOf(item, "grid", level, bounds).join(",")),
    );
    expect(keys.size).toBe(doc.items.length);
  });

  it("fitCamera centers the layout and hitTest finds the hovered item", () => {
    const camera = fitCamera(doc, 800, 600);
    const marks = buildScene(doc, view());
    const target = marks[25];
    const [sx, sy] = worldToScreen(camera, 800, 600, target.x, target.y);
    const hit = hitTest(marks, camera, 800, 600, sx + 1, sy + 1, 12);
    expect(hit).not.toBeNull();
    // nearest mark to the cursor; with overlapping points any of them is
    // acceptable, but it must sit within the hit radius
    const [hx, hy] = worldToScreen(camera, 800, 600, hit!.x, hit!.y);
    expect((hx - sx - 1) ** 2 + (hy - sy - 1) ** 2).toBeLessThanOrEqual(12 * 12);
  });

  it("hitTest misses empty space", () => {
    const camera = fitCamera(doc, 800, 600);
    const marks = buildScene(doc, view());
    expect(hitTest(marks, camera, 800, 600, -4000, -4000, 12)).toBeNull();
  });

  it("does not mutate the document", () => {
    const snapshot = JSON.stringify(doc);
    buildScene(doc, view({ mode: "grid", genreFilters: [doc.items[0].genres[0]] }));
    expect(JSON.stringify(doc)).toBe(snapshot);
  });
});
