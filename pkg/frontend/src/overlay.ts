import { BG, FG } from "./scribble.js";

/** Grayscale mask bytes to a binary foreground field (threshold 128). */
export function binarizeMask(gray: Uint8Array): Uint8Array {
  const out = new Uint8Array(gray.length);
  for (let i = 0; i < gray.length; i++) out[i] = gray[i] >= 128 ? 1 : 0;
  return out;
}

function isContour(mask: Uint8Array, w: number, h: number, i: number): boolean {
  const x = i % w;
  const y = (i - x) / w;
  if (x === 0 || y === 0 || x === w - 1 || y === h - 1) return true;
  return (
    !mask[i - 1] || !mask[i + 1] || !mask[i - w] || !mask[i + w]
  );
}

/**
 * Segmentation overlay: semi-transparent fill over foreground plus an
 * opaque contour line, since boundary quality is what the user inspects.
 */
export function maskOverlayRgba(
  mask: Uint8Array,
  width: number,
  height: number,
  opacity: number,
): Uint8ClampedArray {
  const rgba = new Uint8ClampedArray(width * height * 4);
  const fillAlpha = Math.round(255 * Math.min(Math.max(opacity, 0), 1));
  for (let i = 0; i < mask.length; i++) {
    if (!mask[i]) continue;
    const o = i * 4;
    if (isContour(mask, width, height, i)) {
      rgba[o] = 255;
      rgba[o + 1] = 210;
      rgba[o + 2] = 40;
      rgba[o + 3] = 255;
    } else {
      rgba[o] = 80;
      rgba[o + 1] = 220;
      rgba[o + 2] = 120;
      rgba[o + 3] = fillAlpha;
    }
  }
  return rgba;
}

/** Scribble layer colors: red foreground seeds, blue background seeds. */
export function scribbleRgba(
  labels: Uint8Array,
  width: number,
  height: number,
): Uint8ClampedArray {
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < labels.length; i++) {
    const o = i * 4;
    if (labels[i] === FG) {
      rgba[o] = 255;
      rgba[o + 3] = 200;
    } else if (labels[i] === BG) {
      rgba[o + 2] = 255;
      rgba[o + 3] = 200;
    }
  }
  return rgba;
}
