/** Test doubles: recording canvases (jsdom has no 2D context) and a scripted
 * socket that replays a transcript recorded from the real engine. */
import type { Envelope } from "../src/protocol.js";
import type { CanvasLike, DrawContext } from "../src/view.js";
import type { SocketLike } from "../src/client.js";

export interface DrawCall {
  op: string;
  args: unknown[];
  fillStyle: string;
}

export class RecordingContext implements DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern = "#000";
  strokeStyle: string | CanvasGradient | CanvasPattern = "#000";
  lineWidth = 1;
  font = "";
  textAlign: CanvasTextAlign = "left";
  calls: DrawCall[] = [];

  private record(op: string, args: unknown[]): void {
    this.calls.push({ op, args, fillStyle: String(this.fillStyle) });
  }

  clearRect(...args: number[]): void {
    this.record("clearRect", args);
  }

  fillRect(...args: number[]): void {
    this.record("fillRect", args);
  }

  strokeRect(...args: number[]): void {
    this.record("strokeRect", args);
  }

  fillText(text: string, x: number, y: number): void {
    this.record("fillText", [text, x, y]);
  }

  setLineDash(segments: number[]): void {
    this.record("setLineDash", [segments]);
  }

  ops(op: string): DrawCall[] {
    return this.calls.filter((c) => c.op === op);
  }

  /** Calls belonging to the most recent repaint (after the last clearRect). */
  lastRepaint(op: string): DrawCall[] {
    let start = 0;
    for (let i = 0; i < this.calls.length; i++) {
      if (this.calls[i].op === "clearRect") start = i + 1;
    }
    return this.calls.slice(start).filter((c) => c.op === op);
  }

  reset(): void {
    this.calls = [];
  }
}

export class FakeCanvas implements CanvasLike {
  width = 0;
  height = 0;
  style: Record<string, string> = {};
  readonly context = new RecordingContext();

  getContext(_kind: "2d"): DrawContext {
    return this.context;
  }
}

export function fakeCanvasFactory(created: FakeCanvas[] = []) {
  const factory = () => {
    const canvas = new FakeCanvas();
    created.push(canvas);
    return canvas;
  };
  factory.created = created;
  return factory;
}

export interface TranscriptStep {
  send: Envelope;
  replies: Envelope[];
}

export interface Transcript {
  viewport: [number, number];
  drag: { down: [number, number]; move: [number, number]; up: [number, number] };
  hover_pixel: [number, number];
  expected: Record<string, number | string>;
  connect: Envelope[];
  steps: TranscriptStep[];
}

/** Plays the recorded engine: validates each outbound message against the
 * transcript, then emits the recorded replies. */
export class TranscriptSocket implements SocketLike {
  onmessage: ((data: string) => void) | null = null;
  readonly sent: Envelope[] = [];
  mismatches: string[] = [];
  private step = 0;

  constructor(private readonly transcript: Transcript) {}

  open(): void {
    for (const msg of this.transcript.connect) {
      this.onmessage?.(JSON.stringify(msg));
    }
  }

  send(data: string): void {
    const msg = JSON.parse(data) as Envelope;
    this.sent.push(msg);
    const expected = this.transcript.steps[this.step];
    if (!expected) {
      this.mismatches.push(`unexpected extra message ${data}`);
      return;
    }
    const diff = compareMessages(expected.send, msg);
    if (diff) {
      this.mismatches.push(`step ${this.step}: ${diff}`);
    }
    this.step += 1;
    for (const reply of expected.replies) {
      this.onmessage?.(JSON.stringify(reply));
    }
  }

  stepsConsumed(): number {
    return this.step;
  }
}

function compareMessages(expected: Envelope, got: Envelope): string | null {
  if (expected.type !== got.type) {
    return `type ${got.type} != ${expected.type}`;
  }
  if (expected.seq !== got.seq) {
    return `seq ${got.seq} != ${expected.seq}`;
  }
  const ep = (expected.payload ?? {}) as Record<string, unknown>;
  const gp = (got.payload ?? {}) as Record<string, unknown>;
  for (const key of Object.keys(ep)) {
    const want = JSON.stringify(ep[key]);
    const have = JSON.stringify(gp[key]);
    if (want !== have) {
      return `payload.${key}: ${have} != ${want}`;
    }
  }
  return null;
}

export function mouse(type: string, x: number, y: number,
                      init: MouseEventInit = {}): MouseEvent {
  return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true, ...init });
}
