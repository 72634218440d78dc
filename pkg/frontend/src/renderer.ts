/** Canvas renderer: background layer beneath marks, thumbnails when close. */
import { layoutBounds, worldToScreen, type Mark } from "./scene.js";
import type { Camera, MapDocument, ViewState } from "./types.js";

/** Above this zoom (pixels per world unit across the thumb box) logos replace dots. */
export const THUMB_ZOOM = 24;
const POINT_RADIUS = 3.5;
const THUMB_WORLD_SIZE = 1.0;

export class ThumbCache {
  private images = new Map<string, HTMLImageElement>();

  constructor(private onLoad: () => void) {}

  get(id: string, url: string): HTMLImageElement | null {
    let img = this.images.get(id);
    if (!img) {
      img = new Image();
      img.src = url;
      img.addEventListener("load", this.onLoad);
      this.images.set(id, img);
    }
    return img.complete && img.naturalWidth > 0 ? img : null;
  }
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  doc: MapDocument,
  view: ViewState,
  marks: readonly Mark[],
  camera: Camera,
  background: HTMLImageElement | null,
  thumbs: ThumbCache,
  thumbUrl: (id: string) => string,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#14161a";
  ctx.fillRect(0, 0, width, height);

  if (view.showBackground && background && background.complete && background.naturalWidth > 0) {
    const bounds = layoutBounds(doc);
    const [left, bottom] = worldToScreen(camera, width, height, bounds.minX, bounds.minY);
    const [right, top] = worldToScreen(
      camera, width, height, bounds.minX + bounds.spanX, bounds.minY + bounds.spanY,
    );
    ctx.save();
    ctx.imageSmoothingEnabled = false;
    ctx.globalAlpha = 0.35;
    ctx.drawImage(background, left, top, right - left, bottom - top);
    ctx.restore();
  }

  const showThumbs = camera.zoom >= THUMB_ZOOM;
  for (const mark of marks) {
    const [sx, sy] = worldToScreen(camera, width, height, mark.x, mark.y);
    if (sx < -40 || sy < -40 || sx > width + 40 || sy > height + 40) {
      continue;
    }
    const hovered = view.hoveredId === mark.item.id;
    if (showThumbs) {
      const img = thumbs.get(mark.item.id, thumbUrl(mark.item.id));
      const size = THUMB_WORLD_SIZE * camera.zoom;
      if (img) {
        ctx.drawImage(img, sx - size / 2, sy - size / 2, size, size);
      } else {
        ctx.fillStyle = "#3c4350";
        ctx.fillRect(sx - size / 2, sy - size / 2, size, size);
      }
      if (hovered) {
        ctx.strokeStyle = "#ffd700";
        ctx.lineWidth = 2;
        ctx.strokeRect(sx - size / 2, sy - size / 2, size, size);
      }
    } else {
      ctx.beginPath();
      ctx.arc(sx, sy, hovered ? POINT_RADIUS + 2 : POINT_RADIUS, 0, Math.PI * 2);
      ctx.fillStyle = hovered ? "#ffd700" : "#9fb4d0";
      ctx.fill();
    }
  }
}
