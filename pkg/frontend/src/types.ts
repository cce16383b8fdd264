export type Tool = "fg" | "bg" | "erase";

export interface Stroke {
  class: Tool;
  points: [number, number][];
  radius: number;
}

/** The knobs the engine varies or leaves open, mirrored in the panel. */
export interface RunParams {
  divergence: "bregman" | "kl" | "hellinger";
  mode: "similarity" | "literal";
  tau: number;
  degree: number;
  sigma: number;
  beta: number;
  seed: number;
}

export function defaultParams(): RunParams {
  return {
    divergence: "kl",
    mode: "similarity",
    tau: 1.0,
    degree: 30,
    sigma: 1.0,
    beta: 1.0,
    seed: 0,
  };
}

export interface BoundsFlags {
  p_lower: number;
  p_upper: number;
  implied_p: number;
  lower_ok: boolean;
  upper_ok: boolean;
  epsilon: number;
}

export interface SegmentResponse {
  mask_png_base64: string;
  energy: number;
  degree_mean: number;
  edges: number;
  gamma: number;
  seed: number;
  bounds: BoundsFlags;
  timings: Record<string, number>;
  config: Record<string, unknown>;
}

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
}
