/** Session client: wires a socket to plot views, input capture and the
 * tooltip. All data logic stays engine-side; the client renders the scenes
 * it receives and forwards raw input. */
import { InputCapture, type InputCaptureOptions } from "./input.js";
import {
  parseMessage,
  type Envelope,
  type InputEventPayload,
  type QueryResultPayload,
  type ScenePayload,
} from "./protocol.js";
import { Tooltip } from "./tooltip.js";
import { ClientPlotView, type CanvasFactory, type Size } from "./view.js";

export interface SocketLike {
  send(data: string): void;
  close?(): void;
  onmessage: ((data: string) => void) | null;
}

export interface ClientOptions {
  size?: Size;
  canvasFactory?: CanvasFactory;
  dwellMs?: number;
  session?: string;
  document?: Document;
}

const DEFAULT_SIZE: Size = { width: 800, height: 600 };

export class SessionClient {
  readonly views = new Map<string, ClientPlotView>();
  readonly tooltip: Tooltip;
  readonly errors: string[] = [];

  private readonly socket: SocketLike;
  private readonly root: HTMLElement | null;
  private readonly size: Size;
  private readonly canvasFactory?: CanvasFactory;
  private readonly dwellMs?: number;
  private readonly session?: string;
  private readonly doc: Document;
  private readonly containers = new Map<string, HTMLElement>();
  private seq = 0;
  private lastQueryPixel: [number, number] = [0, 0];
  private queryPlot: string | null = null;

  constructor(socket: SocketLike, root: HTMLElement | null = null,
              options: ClientOptions = {}) {
    this.socket = socket;
    this.root = root;
    this.size = options.size ?? DEFAULT_SIZE;
    this.canvasFactory = options.canvasFactory;
    this.dwellMs = options.dwellMs;
    this.session = options.session;
    this.doc = options.document ?? (typeof document !== "undefined" ? document : (null as unknown as Document));
    this.tooltip = new Tooltip(this.doc);
    if (this.root) {
      this.root.appendChild(this.tooltip.element);
    }
    socket.onmessage = (data) => this.handleRaw(data);
  }

  handleRaw(data: string): void {
    const msg = parseMessage(data);
    switch (msg.type) {
      case "scene_full":
      case "scene_diff":
        this.applyScene(msg.payload as ScenePayload);
        break;
      case "query_result":
        this.handleQueryResult(msg.payload as QueryResultPayload);
        break;
      case "api_value":
        break;
      case "error":
        this.errors.push(String((msg.payload as { message?: string })?.message));
        break;
      default:
        this.errors.push(`unknown message type ${msg.type}`);
    }
  }

  view(plotId: string): ClientPlotView {
    const existing = this.views.get(plotId);
    if (existing) return existing;
    const view = new ClientPlotView(plotId, this.size, this.canvasFactory);
    this.views.set(plotId, view);
    this.mountView(view);
    return view;
  }

  private mountView(view: ClientPlotView): void {
    const container = this.doc ? this.doc.createElement("div") : null;
    if (!container) return;
    container.style.position = "relative";
    container.style.width = `${this.size.width}px`;
    container.style.height = `${this.size.height}px`;
    container.style.display = "inline-block";
    container.tabIndex = 0;
    container.dataset.plot = view.plotId;
    for (const canvas of view.canvases()) {
      // real DOM canvases only; tests inject non-element recorders
      if (typeof Node !== "undefined" && canvas instanceof Node) {
        container.appendChild(canvas);
      }
    }
    this.containers.set(view.plotId, container);
    if (this.root) this.root.appendChild(container);
    const captureOptions: InputCaptureOptions = {
      dwellMs: this.dwellMs,
      onHoverQuery: (px, py) => {
        this.lastQueryPixel = [px, py];
        this.queryPlot = view.plotId;
      },
    };
    new InputCapture(view, container, {
      sendInput: (payload) => this.sendInput(payload),
    }, captureOptions).attach();
  }

  container(plotId: string): HTMLElement | undefined {
    return this.containers.get(plotId);
  }

  private applyScene(scene: ScenePayload): void {
    this.view(scene.plot).applyScene(scene);
  }

  private handleQueryResult(payload: QueryResultPayload): void {
    if (payload.plot !== this.queryPlot && this.queryPlot !== null) {
      // stale reply for a plot the cursor has left; still show it on its view
    }
    const [px, py] = this.lastQueryPixel;
    this.tooltip.show(payload.result, px, py);
  }

  sendInput(payload: InputEventPayload): void {
    if (payload.kind === "query" && payload.pos) {
      this.lastQueryPixel = payload.pos;
      this.queryPlot = payload.plot;
    } else if (payload.kind === "pointer-down" || payload.kind === "pointer-move") {
      this.tooltip.hide();
    }
    this.sendEnvelope("input_event", payload);
  }

  apiSet(target: string, path: string, value: unknown): void {
    this.sendEnvelope("api_set", { target, path, value });
  }

  apiGet(target: string, path: string): void {
    this.sendEnvelope("api_get", { target, path });
  }

  registerLink(spec: Record<string, unknown>): void {
    this.sendEnvelope("register_link", spec);
  }

  private sendEnvelope(type: string, payload: unknown): void {
    this.seq += 1;
    const envelope: Envelope = { type, seq: this.seq, payload };
    if (this.session) envelope.session = this.session;
    this.socket.send(JSON.stringify(envelope));
  }
}

/** Browser entry point: connect to a serve endpoint and mount under root. */
export function connect(url: string, root: HTMLElement,
                        options: ClientOptions = {}): SessionClient {
  const ws = new WebSocket(url);
  const socket: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onmessage: null,
  };
  ws.onmessage = (event) => socket.onmessage?.(String(event.data));
  return new SessionClient(socket, root, options);
}
