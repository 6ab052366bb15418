/** Layered canvas rendering of scene payloads.
 *
 * One canvas per engine layer, stacked by z-order, plus a client-local
 * overlay canvas on top for the transient brush rectangle and cue feedback.
 * A scene diff for layer L clears and repaints canvas L and nothing else;
 * the heavy main layer stays untouched while the brush moves.
 *
 * The view holds no data and computes no selections: it projects the data
 * space primitives it was sent through the scene's limits.
 */
import type {
  CuePayload,
  LimitsTuple,
  PrimitiveGroup,
  ScenePayload,
} from "./protocol.js";

export interface Size {
  width: number;
  height: number;
}

/** The 2D context slice the renderer needs; tests inject recorders. */
export interface DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export interface CanvasLike {
  width: number;
  height: number;
  style: CSSStyleDeclaration | Record<string, string>;
  getContext(kind: "2d"): DrawContext | null;
}

export type CanvasFactory = () => CanvasLike;

const POINT_SIZE = 3;

function domCanvasFactory(): CanvasLike {
  return document.createElement("canvas") as unknown as CanvasLike;
}

function styleLayerCanvas(canvas: CanvasLike, z: number): void {
  const style = canvas.style as Record<string, string>;
  style.position = "absolute";
  style.left = "0";
  style.top = "0";
  style.zIndex = String(z);
}

export class ClientPlotView {
  readonly plotId: string;
  kind = "plot";
  readonly size: Size;
  limits: LimitsTuple = [0, 1, 0, 1];
  cues: CuePayload[] = [];
  /** clear+repaint count per layer canvas, for the no-wasted-redraw checks */
  readonly repaintCounts: Record<string, number> = {};

  private readonly factory: CanvasFactory;
  private readonly layers = new Map<string, { canvas: CanvasLike; z: number }>();
  readonly overlay: CanvasLike;

  constructor(plotId: string, size: Size, factory?: CanvasFactory) {
    this.plotId = plotId;
    this.size = size;
    this.factory = factory ?? domCanvasFactory;
    this.overlay = this.makeCanvas(1000);
  }

  private makeCanvas(z: number): CanvasLike {
    const canvas = this.factory();
    canvas.width = this.size.width;
    canvas.height = this.size.height;
    styleLayerCanvas(canvas, z);
    return canvas;
  }

  layerCanvas(name: string): CanvasLike | undefined {
    return this.layers.get(name)?.canvas;
  }

  layerNames(): string[] {
    return [...this.layers.keys()];
  }

  /** Stacked canvases bottom to top (layers by z, overlay last). */
  canvases(): CanvasLike[] {
    const entries = [...this.layers.values()].sort((a, b) => a.z - b.z);
    return [...entries.map((e) => e.canvas), this.overlay];
  }

  applyScene(scene: ScenePayload): void {
    this.kind = scene.kind;
    this.limits = scene.limits;
    this.cues = scene.cues ?? [];
    for (const [name, payload] of Object.entries(scene.layers)) {
      let entry = this.layers.get(name);
      if (!entry) {
        entry = { canvas: this.makeCanvas(payload.z), z: payload.z };
        this.layers.set(name, entry);
      }
      this.repaint(name, entry.canvas, payload.primitives);
    }
  }

  dataToPixel(x: number, y: number): [number, number] {
    const [xmin, xmax, ymin, ymax] = this.limits;
    const px = ((x - xmin) / (xmax - xmin)) * this.size.width;
    const py = ((ymax - y) / (ymax - ymin)) * this.size.height;
    return [px, py];
  }

  private repaint(name: string, canvas: CanvasLike, groups: PrimitiveGroup[]): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.size.width, this.size.height);
    for (const group of groups) {
      if (group.kind === "points") {
        this.drawPoints(ctx, group.x, group.y, group.colors, group.color);
      } else if (group.kind === "rects") {
        this.drawRects(ctx, group);
      } else {
        this.drawText(ctx, group.x, group.y, group.text);
      }
    }
    this.repaintCounts[name] = (this.repaintCounts[name] ?? 0) + 1;
  }

  private drawPoints(
    ctx: DrawContext,
    xs: number[],
    ys: number[],
    colors?: string[],
    color?: string,
  ): void {
    const half = POINT_SIZE / 2;
    if (color !== undefined) ctx.fillStyle = cssColor(color);
    for (let i = 0; i < xs.length; i++) {
      if (colors !== undefined) ctx.fillStyle = cssColor(colors[i]);
      const [px, py] = this.dataToPixel(xs[i], ys[i]);
      ctx.fillRect(px - half, py - half, POINT_SIZE, POINT_SIZE);
    }
  }

  private drawRects(
    ctx: DrawContext,
    group: { x0: number[]; x1: number[]; y0: number[]; y1: number[]; color: string },
  ): void {
    ctx.fillStyle = cssColor(group.color);
    for (let i = 0; i < group.x0.length; i++) {
      const [px0, py0] = this.dataToPixel(group.x0[i], group.y1[i]); // top-left
      const [px1, py1] = this.dataToPixel(group.x1[i], group.y0[i]); // bottom-right
      ctx.fillRect(px0, py0, px1 - px0, py1 - py0);
    }
  }

  private drawText(ctx: DrawContext, xs: number[], ys: number[], texts: string[]): void {
    ctx.fillStyle = "#222222";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    for (let i = 0; i < xs.length; i++) {
      const [px, py] = this.dataToPixel(xs[i], ys[i]);
      ctx.fillText(texts[i], px, py + 12);
    }
  }

  /** Client-local echo of the drag rectangle; never part of the protocol. */
  drawOverlayRect(p0: [number, number], p1: [number, number]): void {
    const ctx = this.overlay.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.size.width, this.size.height);
    ctx.strokeStyle = "#d4a017";
    ctx.lineWidth = 1;
    ctx.setLineDash([4, 3]);
    const x = Math.min(p0[0], p1[0]);
    const y = Math.min(p0[1], p1[1]);
    ctx.strokeRect(x, y, Math.abs(p1[0] - p0[0]), Math.abs(p1[1] - p0[1]));
  }

  clearOverlay(): void {
    const ctx = this.overlay.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.size.width, this.size.height);
  }

  /** Pixel-space cue zones (histogram anchor/binwidth handles). */
  cueZonesPx(): { cue: string; x0: number; y0: number; x1: number; y1: number }[] {
    return this.cues.map((c) => {
      const [px0, py0] = this.dataToPixel(c.x0, c.y1);
      const [px1, py1] = this.dataToPixel(c.x1, c.y0);
      return { cue: c.cue, x0: px0, y0: py0, x1: px1, y1: py1 };
    });
  }
}

function cssColor(hex8: string): string {
  // engine colors are #rrggbbaa; canvas wants rgba()
  if (hex8.length === 9 && hex8.startsWith("#")) {
    const r = parseInt(hex8.slice(1, 3), 16);
    const g = parseInt(hex8.slice(3, 5), 16);
    const b = parseInt(hex8.slice(5, 7), 16);
    const a = parseInt(hex8.slice(7, 9), 16) / 255;
    return `rgba(${r}, ${g}, ${b}, ${a})`;
  }
  return hex8;
}
