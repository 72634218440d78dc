/** Pure view-state transitions and the client-side item filter.
 *
 * The filter must behave exactly like the server's /items endpoint:
 * conjunction of exact lowercased genre tags, then a case-insensitive
 * substring match on the band name. Nothing in here mutates the fetched
 * document.
 */
import type { MapItem, PlacementMode, ViewState } from "./types.js";

export const ZOOM_MIN = 0.05;
export const ZOOM_MAX = 400;

export function initialView(): ViewState {
  return {
    mapName: null,
    camera: { cx: 0, cy: 0, zoom: 1 },
    mode: "scatter",
    genreFilters: [],
    query: "",
    showBackground: true,
    hoveredId: null,
  };
}

export function clampZoom(zoom: number): number {
  return Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, zoom));
}

export function toggledMode(mode: PlacementMode): PlacementMode {
  return mode === "scatter" ? "grid" : "scatter";
}

export function withFilters(view: ViewState, genres: string[], query: string): ViewState {
  return { ...view, genreFilters: [...genres], query };
}

export function filterItems(items: readonly MapItem[], genres: readonly string[], query: string): MapItem[] {
  let visible = items.slice();
  for (const genre of genres) {
    const tag = genre.toLowerCase();
    visible = visible.filter((item) => item.genres.includes(tag));
  }
  if (query) {
    const needle = query.toLowerCase();
    visible = visible.filter((item) => item.name.toLowerCase().includes(needle));
  }
  return visible;
}

/** Distinct genre tags in the document, most frequent first. */
export function genreOptions(items: readonly MapItem[]): string[] {
  const counts = new Map<string, number>();
  for (const item of items) {
    for (const tag of item.genres) {
      counts.set(tag, (counts.get(tag) ?? 0) + 1);
    }
  }
  return [...counts.entries()]
    .sort((a, b) => (b[1] - a[1]) || (a[0] < b[0] ? -1 : 1))
    .map(([tag]) => tag);
}

export interface TooltipModel {
  id: string;
  name: string;
  genres: string;
  status: string;
  label: string;
  thumbUrl: string;
}

export function tooltipModel(item: MapItem): TooltipModel {
  return {
    id: item.id,
    name: item.name,
    genres: item.genres.join(", "),
    status: item.status,
    label: item.label ?? "unsigned",
    thumbUrl: `/thumbs/${encodeURIComponent(item.id)}`,
  };
}
