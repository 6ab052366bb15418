/** Wire types for the linkbrush session protocol (UTF-8 JSON frames). */

export interface Envelope {
  type: string;
  session?: string;
  seq: number;
  reply_to?: number;
  payload?: unknown;
}

export interface PointsGroup {
  kind: "points";
  x: number[];
  y: number[];
  /** per-point colors (main layer) */
  colors?: string[];
  /** single color (brush layer) */
  color?: string;
}

export interface RectsGroup {
  kind: "rects";
  x0: number[];
  x1: number[];
  y0: number[];
  y1: number[];
  color: string;
  fill: number[];
}

export interface TextGroup {
  kind: "text";
  x: number[];
  y: number[];
  text: string[];
}

export type PrimitiveGroup = PointsGroup | RectsGroup | TextGroup;

export interface LayerPayload {
  z: number;
  primitives: PrimitiveGroup[];
}

export interface CuePayload {
  cue: string;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

/** [xmin, xmax, ymin, ymax] in data space. */
export type LimitsTuple = [number, number, number, number];

export interface ScenePayload {
  plot: string;
  kind: string;
  limits: LimitsTuple;
  layers: Record<string, LayerPayload>;
  cues: CuePayload[];
  meta: Record<string, unknown>;
  full: boolean;
}

export interface QueryResultPayload {
  plot: string;
  pos: [number, number];
  result: Record<string, unknown> | null;
}

export type InputKind =
  | "pointer-down"
  | "pointer-move"
  | "pointer-up"
  | "wheel"
  | "key"
  | "query";

export interface InputEventPayload {
  plot: string;
  kind: InputKind;
  /** pixel position inside the plot viewport; the engine owns the
   *  pixel-to-data conversion through its current limits */
  pos?: [number, number];
  viewport?: [number, number];
  wheel?: number;
  key?: string;
  modifiers?: string[];
}

export function parseMessage(raw: string): Envelope {
  return JSON.parse(raw) as Envelope;
}
