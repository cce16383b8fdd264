import type { Stroke } from "./types.js";

/** Undoable stroke history; replaying it reproduces the scribble layer. */
export class StrokeHistory {
  private strokes: Stroke[] = [];
  private undone: Stroke[] = [];

  push(stroke: Stroke): void {
    this.strokes.push(stroke);
    this.undone = [];
  }

  undo(): boolean {
    const s = this.strokes.pop();
    if (!s) return false;
    this.undone.push(s);
    return true;
  }

  redo(): boolean {
    const s = this.undone.pop();
    if (!s) return false;
    this.strokes.push(s);
    return true;
  }

  clear(): void {
    this.strokes = [];
    this.undone = [];
  }

  list(): readonly Stroke[] {
    return this.strokes;
  }

  get length(): number {
    return this.strokes.length;
  }

  /** True when at least one stroke of each seed class is present. */
  hasBothClasses(): boolean {
    let fg = false;
    let bg = false;
    for (const s of this.strokes) {
      if (s.class === "fg") fg = true;
      if (s.class === "bg") bg = true;
    }
    return fg && bg;
  }
}
