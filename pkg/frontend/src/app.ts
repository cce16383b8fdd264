import { MissingClassError, SessionClient } from "./api.js";
import { binarizeMask, maskOverlayRgba, scribbleRgba } from "./overlay.js";
import { fullEraseStroke, replayStrokes } from "./scribble.js";
import { StrokeHistory } from "./state.js";
import type { RunParams, SegmentResponse, Stroke, Tool } from "./types.js";
import { defaultParams } from "./types.js";

/** Where pixels go; the DOM binds this to a canvas, tests to a buffer. */
export interface PixelSurface {
  resize(width: number, height: number): void;
  putPixels(rgba: Uint8ClampedArray, width: number, height: number): void;
}

export interface ReportView {
  showReport(report: SegmentResponse): void;
  showError(message: string): void;
  clear(): void;
}

/** Decodes the mask PNG the service returns into grayscale bytes. */
export interface MaskDecoder {
  decode(pngBase64: string): Promise<{ width: number; height: number; gray: Uint8Array }>;
}

export interface AppDeps {
  api: SessionClient;
  scribbleSurface: PixelSurface;
  overlaySurface: PixelSurface;
  report: ReportView;
  maskDecoder: MaskDecoder;
  onBusyChange?: (busy: boolean) => void;
}

/**
 * Controller of the scribble-and-refine loop. Pure client: every
 * segmentation is a service call, nothing is computed locally.
 */
export class ScribbleApp {
  readonly history = new StrokeHistory();
  tool: Tool = "fg";
  brushRadius = 3;
  overlayOpacity = 0.45;
  params: RunParams = defaultParams();

  private sessionId: string | null = null;
  private width = 0;
  private height = 0;
  private currentStroke: Stroke | null = null;
  private inFlight = false;
  private lastOverlay: Uint8ClampedArray | null = null;
  private lastReport: SegmentResponse | null = null;

  constructor(private readonly deps: AppDeps) {}

  get hasSession(): boolean {
    return this.sessionId !== null;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  get size(): { width: number; height: number } {
    return { width: this.width, height: this.height };
  }

  report(): SegmentResponse | null {
    return this.lastReport;
  }

  /** Copy of the last rendered overlay pixels (tests compare these). */
  overlayPixels(): Uint8ClampedArray | null {
    return this.lastOverlay ? new Uint8ClampedArray(this.lastOverlay) : null;
  }

  async open(image: Blob, config: Record<string, unknown> = {}): Promise<void> {
    const info = await this.deps.api.createSession(image, config);
    this.sessionId = info.id;
    this.width = info.width;
    this.height = info.height;
    this.history.clear();
    this.lastOverlay = null;
    this.lastReport = null;
    this.deps.scribbleSurface.resize(info.width, info.height);
    this.deps.overlaySurface.resize(info.width, info.height);
    this.deps.report.clear();
    this.renderScribbles();
  }

  beginStroke(x: number, y: number): void {
    if (!this.sessionId) return;
    this.currentStroke = {
      class: this.tool,
      points: [[x, y]],
      radius: this.brushRadius,
    };
  }

  extendStroke(x: number, y: number): void {
    if (!this.currentStroke) return;
    this.currentStroke.points.push([x, y]);
    this.previewStroke();
  }

  endStroke(): void {
    if (!this.currentStroke) return;
    this.history.push(this.currentStroke);
    this.currentStroke = null;
    this.renderScribbles();
  }

  undo(): boolean {
    const did = this.history.undo();
    if (did) this.renderScribbles();
    return did;
  }

  redo(): boolean {
    const did = this.history.redo();
    if (did) this.renderScribbles();
    return did;
  }

  setOverlayOpacity(opacity: number): void {
    this.overlayOpacity = opacity;
    if (this.lastReport) {
      // re-render the existing mask at the new opacity
      void this.renderMask(this.lastReport.mask_png_base64);
    }
  }

  /** Current scribble layer, replayed from the stroke history. */
  scribbleLabels(): Uint8Array {
    const strokes = [...this.history.list()];
    if (this.currentStroke) strokes.push(this.currentStroke);
    return replayStrokes(this.width, this.height, strokes);
  }

  private previewStroke(): void {
    this.deps.scribbleSurface.putPixels(
      scribbleRgba(this.scribbleLabels(), this.width, this.height),
      this.width, this.height);
  }

  private renderScribbles(): void {
    this.previewStroke();
  }

  private async renderMask(pngBase64: string): Promise<void> {
    const { width, height, gray } = await this.deps.maskDecoder.decode(pngBase64);
    const mask = binarizeMask(gray);
    const rgba = maskOverlayRgba(mask, width, height, this.overlayOpacity);
    this.lastOverlay = rgba;
    this.deps.overlaySurface.putPixels(rgba, width, height);
  }

  /**
   * Sync scribbles and request a segmentation. At most one request is in
   * flight; the server sees a wipe plus the full history so undo states
   * round-trip exactly.
   */
  async run(): Promise<boolean> {
    if (!this.sessionId || this.inFlight) return false;
    if (!this.history.hasBothClasses()) {
      this.deps.report.showError(
        "add at least one foreground and one background stroke");
      return false;
    }
    this.inFlight = true;
    this.deps.onBusyChange?.(true);
    try {
      const strokes = [
        fullEraseStroke(this.width, this.height),
        ...this.history.list(),
      ];
      await this.deps.api.putScribbles(this.sessionId, strokes);
      const report = await this.deps.api.segment(this.sessionId, this.params);
      this.lastReport = report;
      await this.renderMask(report.mask_png_base64);
      this.deps.report.showReport(report);
      return true;
    } catch (err) {
      if (err instanceof MissingClassError) {
        this.deps.report.showError(`add the missing class: ${err.message}`);
        return false;
      }
      this.deps.report.showError(String(err));
      return false;
    } finally {
      this.inFlight = false;
      this.deps.onBusyChange?.(false);
    }
  }
}
