import type { Stroke } from "./types.js";

export const UNMARKED = 0;
export const FG = 1;
export const BG = 2;

const CLASS_CODE = { erase: UNMARKED, fg: FG, bg: BG } as const;

/** Stamp brush disks along the stroke's polyline; later pixels win. */
export function rasterizeStroke(
  labels: Uint8Array,
  width: number,
  height: number,
  stroke: Stroke,
): void {
  const code = CLASS_CODE[stroke.class];
  const r = stroke.radius;
  const pts = stroke.points;
  const centers: [number, number][] = [];
  for (let k = 0; k + 1 < pts.length; k++) {
    const [ax, ay] = pts[k];
    const [bx, by] = pts[k + 1];
    const len = Math.hypot(bx - ax, by - ay);
    const steps = Math.max(Math.ceil(len / Math.max(r / 2, 0.5)), 1);
    for (let s = 0; s < steps; s++) {
      centers.push([ax + ((bx - ax) * s) / steps, ay + ((by - ay) * s) / steps]);
    }
  }
  centers.push(pts[pts.length - 1]);

  const ri = Math.ceil(r);
  for (const [cx, cy] of centers) {
    const px = Math.round(cx);
    const py = Math.round(cy);
    for (let dy = -ri; dy <= ri; dy++) {
      for (let dx = -ri; dx <= ri; dx++) {
        if (dx * dx + dy * dy > r * r) continue;
        const x = px + dx;
        const y = py + dy;
        if (x < 0 || x >= width || y < 0 || y >= height) continue;
        labels[y * width + x] = code;
      }
    }
  }
}

/** Rebuild the scribble layer from scratch; the history is the truth. */
export function replayStrokes(
  width: number,
  height: number,
  strokes: readonly Stroke[],
): Uint8Array {
  const labels = new Uint8Array(width * height);
  for (const stroke of strokes) {
    rasterizeStroke(labels, width, height, stroke);
  }
  return labels;
}

/** A stroke that wipes the whole canvas (server-side reset primitive). */
export function fullEraseStroke(width: number, height: number): Stroke {
  return {
    class: "erase",
    points: [[(width - 1) / 2, (height - 1) / 2]],
    radius: Math.hypot(width, height),
  };
}
