/**
 * Control sender with rate coalescing. Slider drags produce floods of cc
 * values; only the newest value per controller is sent, at most once per
 * interval. Switch-type transitions (measure press/release, axis switch)
 * are edges and are NEVER coalesced away: any pending slider values flush
 * first so ordering is preserved, then the edge goes out immediately.
 */

import { encodeControl, type ControlMessage } from "./protocol.js";

export class ControlSender {
  private pending = new Map<number, number>();
  private pendingOrder: number[] = [];
  private lastFlushAt = -Infinity;
  private timerHandle: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (encoded: string) => void,
    private readonly intervalMs: number,
    private readonly now: () => number = () => Date.now(),
    private readonly schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> = setTimeout,
  ) {}

  /** Coalesced path for continuous controls (rotation and volume sliders). */
  setSlider(controller: number, value: number): void {
    if (!this.pending.has(controller)) this.pendingOrder.push(controller);
    this.pending.set(controller, value);
    const elapsed = this.now() - this.lastFlushAt;
    if (elapsed >= this.intervalMs) {
      this.flush();
    } else if (this.timerHandle === null) {
      this.timerHandle = this.schedule(() => {
        this.timerHandle = null;
        this.flush();
      }, this.intervalMs - elapsed);
    }
  }

  /** Uncoalesced path for switch transitions; pending sliders flush first. */
  sendEdge(message: ControlMessage): void {
    this.flush();
    this.send(encodeControl(message));
  }

  /** Momentary emulation: one click is one rising edge at the engine. */
  clickMomentary(controller: number): void {
    this.sendEdge({ type: "cc", controller, value: 127 });
    this.sendEdge({ type: "cc", controller, value: 0 });
  }

  setSwitch(controller: number, on: boolean): void {
    this.sendEdge({ type: "cc", controller, value: on ? 127 : 0 });
  }

  flush(): void {
    if (this.timerHandle !== null) {
      clearTimeout(this.timerHandle);
      this.timerHandle = null;
    }
    if (this.pendingOrder.length > 0) {
      for (const controller of this.pendingOrder) {
        const value = this.pending.get(controller)!;
        this.send(encodeControl({ type: "cc", controller, value }));
      }
      this.pending.clear();
      this.pendingOrder = [];
      this.lastFlushAt = this.now();
    }
  }
}
