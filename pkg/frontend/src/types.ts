/** Wire types mirroring the map-document JSON served under /api/maps. */

export interface MapItem {
  id: string;
  name: string;
  genres: string[];
  themes: string[];
  status: string;
  label: string | null;
  x: number;
  y: number;
  gx: number;
  gy: number;
  thumb: string;
}

export interface BackgroundRaster {
  width: number;
  height: number;
  genres: string[];
  colors: string[];
}

export interface MapDocument {
  schema_version: number;
  name: string;
  items: MapItem[];
  provenance: Record<string, unknown>;
  background: BackgroundRaster | null;
}

export type PlacementMode = "scatter" | "grid";

export interface Camera {
  /** world-space center */
  cx: number;
  cy: number;
  /** pixels per world unit */
  zoom: number;
}

export interface ViewState {
  mapName: string | null;
  camera: Camera;
  mode: PlacementMode;
  genreFilters: string[];
  query: string;
  showBackground: boolean;
  hoveredId: string | null;
}
