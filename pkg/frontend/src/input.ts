/** DOM input capture: pointer, wheel and key events become protocol
 * messages carrying pixel coordinates plus the viewport size. The engine
 * owns the pixel-to-data conversion, so the client never interprets
 * positions; it only echoes the drag rectangle locally and manages the
 * hover-dwell query timer and cue-zone cursor feedback. */
import type { InputEventPayload, InputKind } from "./protocol.js";
import type { ClientPlotView } from "./view.js";

export const DWELL_MS = 150;

export interface InputSink {
  sendInput(payload: InputEventPayload): void;
}

interface TimerHost {
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(id: number): void;
}

export interface InputCaptureOptions {
  dwellMs?: number;
  timers?: TimerHost;
  onHoverQuery?: (px: number, py: number) => void;
}

function eventModifiers(e: MouseEvent | KeyboardEvent): string[] {
  const mods: string[] = [];
  if (e.shiftKey) mods.push("shift");
  if (e.ctrlKey) mods.push("control");
  if (e.altKey) mods.push("alt");
  if ("button" in e && e.button === 1) mods.push("pan");
  return mods;
}

export class InputCapture {
  private readonly view: ClientPlotView;
  private readonly target: HTMLElement;
  private readonly sink: InputSink;
  private readonly dwellMs: number;
  private readonly timers: TimerHost;
  private readonly onHoverQuery?: (px: number, py: number) => void;

  private dragging = false;
  private dragStart: [number, number] | null = null;
  private dragIsCue = false;
  private dwellTimer: number | null = null;
  private lastHover: [number, number] | null = null;

  constructor(view: ClientPlotView, target: HTMLElement, sink: InputSink,
              options: InputCaptureOptions = {}) {
    this.view = view;
    this.target = target;
    this.sink = sink;
    this.dwellMs = options.dwellMs ?? DWELL_MS;
    this.timers = options.timers ?? {
      setTimeout: (fn, ms) => globalThis.setTimeout(fn, ms) as unknown as number,
      clearTimeout: (id) => globalThis.clearTimeout(id),
    };
    this.onHoverQuery = options.onHoverQuery;
  }

  attach(): void {
    this.target.addEventListener("mousedown", (e) => this.onDown(e as MouseEvent));
    this.target.addEventListener("mousemove", (e) => this.onMove(e as MouseEvent));
    this.target.addEventListener("mouseup", (e) => this.onUp(e as MouseEvent));
    this.target.addEventListener("mouseleave", () => this.cancelDwell());
    this.target.addEventListener("wheel", (e) => this.onWheel(e as WheelEvent));
    this.target.addEventListener("keydown", (e) => this.onKey(e as KeyboardEvent));
  }

  private pixelPos(e: MouseEvent): [number, number] {
    const rect = this.target.getBoundingClientRect();
    return [e.clientX - rect.left, e.clientY - rect.top];
  }

  private viewport(): [number, number] {
    return [this.view.size.width, this.view.size.height];
  }

  private send(kind: InputKind, extra: Partial<InputEventPayload>): void {
    this.sink.sendInput({
      plot: this.view.plotId,
      kind,
      viewport: this.viewport(),
      ...extra,
    });
  }

  private insideCue(pos: [number, number]): boolean {
    return this.view.cueZonesPx().some(
      (z) => pos[0] >= z.x0 && pos[0] <= z.x1 && pos[1] >= z.y0 && pos[1] <= z.y1,
    );
  }

  private onDown(e: MouseEvent): void {
    this.cancelDwell();
    const pos = this.pixelPos(e);
    this.dragging = true;
    this.dragStart = pos;
    this.dragIsCue = this.insideCue(pos);
    this.send("pointer-down", { pos, modifiers: eventModifiers(e) });
  }

  private onMove(e: MouseEvent): void {
    const pos = this.pixelPos(e);
    if (this.dragging) {
      this.send("pointer-move", { pos, modifiers: eventModifiers(e) });
      if (!this.dragIsCue && this.dragStart) {
        this.view.drawOverlayRect(this.dragStart, pos);
      }
      return;
    }
    // hover: update the cursor over cue zones, restart the dwell timer
    const style = this.target.style as unknown as Record<string, string>;
    style.cursor = this.insideCue(pos) ? "col-resize" : "default";
    this.lastHover = pos;
    this.restartDwell();
  }

  private onUp(e: MouseEvent): void {
    if (!this.dragging) return;
    const pos = this.pixelPos(e);
    this.dragging = false;
    this.dragStart = null;
    this.send("pointer-up", { pos, modifiers: eventModifiers(e) });
  }

  private onWheel(e: WheelEvent): void {
    this.cancelDwell();
    const pos = this.pixelPos(e);
    // wheel up zooms in: one wheel notch is one zoom step
    const delta = -e.deltaY / 100;
    this.send("wheel", { pos, wheel: delta, modifiers: eventModifiers(e) });
  }

  private onKey(e: KeyboardEvent): void {
    this.send("key", { key: e.key, modifiers: eventModifiers(e) });
  }

  private restartDwell(): void {
    this.cancelDwell();
    this.dwellTimer = this.timers.setTimeout(() => {
      this.dwellTimer = null;
      if (this.lastHover === null) return;
      const [px, py] = this.lastHover;
      this.send("query", { pos: [px, py], modifiers: [] });
      this.onHoverQuery?.(px, py);
    }, this.dwellMs);
  }

  private cancelDwell(): void {
    if (this.dwellTimer !== null) {
      this.timers.clearTimeout(this.dwellTimer);
      this.dwellTimer = null;
    }
  }
}
