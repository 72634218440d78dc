/** Scene computation: where every visible item sits, in world coordinates.
 *
 * Grid placement maps cell centers into the scatter layout's bounding box,
 * so both modes share one coordinate system: the camera survives toggles
 * and the toggle animation interpolates between the two placements.
 */
import { filterItems } from "./state.js";
import type { Camera, MapDocument, MapItem, PlacementMode, ViewState } from "./types.js";

export interface Bounds {
  minX: number;
  minY: number;
  spanX: number;
  spanY: number;
}

export interface Mark {
  item: MapItem;
  x: number;
  y: number;
}

export function layoutBounds(doc: MapDocument): Bounds {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const item of doc.items) {
    minX = Math.min(minX, item.x);
    maxX = Math.max(maxX, item.x);
    minY = Math.min(minY, item.y);
    maxY = Math.max(maxY, item.y);
  }
  if (doc.items.length === 0) {
    return { minX: 0, minY: 0, spanX: 1, spanY: 1 };
  }
  return {
    minX,
    minY,
    spanX: maxX > minX ? maxX - minX : 1,
    spanY: maxY > minY ? maxY - minY : 1,
  };
}

export function gridLevel(doc: MapDocument): number {
  const level = doc.provenance["grid_level"];
  return typeof level === "number" ? level : 0;
}

export function positionOf(
  item: MapItem,
  mode: PlacementMode,
  level: number,
  bounds: Bounds,
): [number, number] {
  if (mode === "scatter") {
    return [item.x, item.y];
  }
  const side = 2 ** level;
  return [
    bounds.minX + ((item.gx + 0.5) / side) * bounds.spanX,
    bounds.minY + ((item.gy + 0.5) / side) * bounds.spanY,
  ];
}

/** Every item passing the view's filters, placed once, in document order. */
export function buildScene(doc: MapDocument, view: ViewState): Mark[] {
  const visible = filterItems(doc.items, view.genreFilters, view.query);
  const bounds = layoutBounds(doc);
  const level = gridLevel(doc);
  return visible.map((item) => {
    const [x, y] = positionOf(item, view.mode, level, bounds);
    return { item, x, y };
  });
}

export function fitCamera(doc: MapDocument, width: number, height: number): Camera {
  const bounds = layoutBounds(doc);
  const pad = 1.15;
  const zoom = Math.min(width / (bounds.spanX * pad), height / (bounds.spanY * pad));
  return {
    cx: bounds.minX + bounds.spanX / 2,
    cy: bounds.minY + bounds.spanY / 2,
    zoom,
  };
}

export function worldToScreen(
  camera: Camera,
  width: number,
  height: number,
  x: number,
  y: number,
): [number, number] {
  // y grows upward in world space, downward on canvas
  return [
    width / 2 + (x - camera.cx) * camera.zoom,
    height / 2 - (y - camera.cy) * camera.zoom,
  ];
}

export function screenToWorld(
  camera: Camera,
  width: number,
  height: number,
  px: number,
  py: number,
): [number, number] {
  return [
    camera.cx + (px - width / 2) / camera.zoom,
    camera.cy - (py - height / 2) / camera.zoom,
  ];
}

/** Nearest mark within `radius` screen pixels of (px, py), or null. */
export function hitTest(
  marks: readonly Mark[],
  camera: Camera,
  width: number,
  height: number,
  px: number,
  py: number,
  radius: number,
): Mark | null {
  let best: Mark | null = null;
  let bestDist = radius * radius;
  for (const mark of marks) {
    const [sx, sy] = worldToScreen(camera, width, height, mark.x, mark.y);
    const d2 = (sx - px) ** 2 + (sy - py) ** 2;
    if (d2 <= bestDist) {
      best = mark;
      bestDist = d2;
    }
  }
  return best;
}
