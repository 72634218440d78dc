/** Thin fetch client for the read-only map API. */
import type { MapDocument } from "./types.js";

export async function listMaps(signal?: AbortSignal): Promise<string[]> {
  const response = await fetch("/api/maps", { signal });
  if (!response.ok) {
    throw new Error(`listing maps failed: ${response.status}`);
  }
  return (await response.json()) as string[];
}

export async function getMap(name: string, signal?: AbortSignal): Promise<MapDocument> {
  const response = await fetch(`/api/maps/${encodeURIComponent(name)}`, { signal });
  if (!response.ok) {
    throw new Error(`loading map ${name} failed: ${response.status}`);
  }
  return (await response.json()) as MapDocument;
}

export function backgroundUrl(name: string): string {
  return `/api/maps/${encodeURIComponent(name)}/background`;
}

export function thumbUrl(id: string): string {
  return `/thumbs/${encodeURIComponent(id)}`;
}
