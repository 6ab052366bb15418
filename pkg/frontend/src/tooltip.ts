/** Query tooltip: follows the cursor with a fixed offset, filled from
 * query_result payloads. The engine formats the text; the client shows it. */

const OFFSET_X = 12;
const OFFSET_Y = 12;

export class Tooltip {
  readonly element: HTMLElement;
  visible = false;

  constructor(doc: Document = document) {
    this.element = doc.createElement("div");
    const style = this.element.style;
    style.position = "absolute";
    style.pointerEvents = "none";
    style.background = "rgba(32, 32, 32, 0.92)";
    style.color = "#f2f2f2";
    style.padding = "4px 7px";
    style.font = "11px sans-serif";
    style.borderRadius = "3px";
    style.whiteSpace = "pre";
    style.display = "none";
    style.zIndex = "2000";
  }

  /** Render a query result at a cursor position; hides on null results. */
  show(result: Record<string, unknown> | null, px: number, py: number): void {
    if (result === null) {
      this.hide();
      return;
    }
    this.element.textContent = formatResult(result);
    this.element.style.left = `${px + OFFSET_X}px`;
    this.element.style.top = `${py + OFFSET_Y}px`;
    this.element.style.display = "block";
    this.visible = true;
  }

  moveTo(px: number, py: number): void {
    if (!this.visible) return;
    this.element.style.left = `${px + OFFSET_X}px`;
    this.element.style.top = `${py + OFFSET_Y}px`;
  }

  hide(): void {
    this.element.style.display = "none";
    this.visible = false;
  }
}

export function formatResult(result: Record<string, unknown>): string {
  if (typeof result.text === "string" && result.text.length > 0) {
    return result.text;
  }
  return Object.entries(result)
    .filter(([key]) => key !== "text")
    .map(([key, value]) => `${key}: ${String(value)}`)
    .join("\n");
}
