export { SessionClient, connect } from "./client.js";
export type { SocketLike, ClientOptions } from "./client.js";
export { InputCapture, DWELL_MS } from "./input.js";
export { Tooltip, formatResult } from "./tooltip.js";
export { ClientPlotView } from "./view.js";
export type { CanvasFactory, CanvasLike, DrawContext, Size } from "./view.js";
export * from "./protocol.js";
