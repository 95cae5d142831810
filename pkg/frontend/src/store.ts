/**
 * UI state: the latest snapshot, connection health, widget positions, and
 * the measurement flash. The store never simulates physics — the displayed
 * state is always the last snapshot received, and the collapse animation
 * only interpolates between two received snapshots.
 */

import type { BlochVector, TelemetrySnapshot } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "stale" | "disconnected";

export const STALE_AFTER_MS = 1500;
export const FLASH_MS = 600;

export interface PedalPositions {
  rotationA: number; // 0..127
  rotationB: number;
  axisSwitchOn: boolean;
  classicalVolume: number;
  quantumVolume: number;
}

export class UiStore {
  snapshot: TelemetrySnapshot | null = null;
  previous: TelemetrySnapshot | null = null;
  pedals: PedalPositions = {
    rotationA: 0,
    rotationB: 0,
    axisSwitchOn: false,
    classicalVolume: 127,
    quantumVolume: 127,
  };

  private socketOpen = false;
  private lastSnapshotAt = -Infinity;
  private flashStartedAt = -Infinity;
  private collapseFrom: BlochVector | null = null;
  private lastMeasurementTime: number | null = null;

  markOpen(): void {
    this.socketOpen = true;
  }

  markClosed(): void {
    this.socketOpen = false;
  }

  applySnapshot(snapshot: TelemetrySnapshot, nowMs: number): void {
    this.previous = this.snapshot;
    this.snapshot = snapshot;
    this.lastSnapshotAt = nowMs;
    const measurement = snapshot.last_measurement;
    if (measurement && measurement.time !== this.lastMeasurementTime) {
      this.lastMeasurementTime = measurement.time;
      this.flashStartedAt = nowMs;
      this.collapseFrom = this.previous ? this.previous.bloch : snapshot.bloch;
    }
  }

  status(nowMs: number): ConnectionStatus {
    if (!this.socketOpen) return this.snapshot ? "disconnected" : "connecting";
    if (this.snapshot === null) return "connecting";
    return nowMs - this.lastSnapshotAt > STALE_AFTER_MS ? "stale" : "connected";
  }

  widgetsEnabled(nowMs: number): boolean {
    return this.status(nowMs) === "connected";
  }

  measurementFlash(nowMs: number): number {
    const age = nowMs - this.flashStartedAt;
    if (age < 0 || age >= FLASH_MS) return 0;
    return 1 - age / FLASH_MS;
  }

  /**
   * Marker position for rendering. During the collapse flash the marker
   * animates from the last pre-measurement snapshot to the received
   * post-collapse snapshot; otherwise it is the snapshot verbatim.
   */
  markerPosition(nowMs: number): BlochVector | null {
    if (!this.snapshot) return null;
    const target = this.snapshot.bloch;
    const flash = this.measurementFlash(nowMs);
    if (flash <= 0 || !this.collapseFrom) return target;
    const progress = 1 - flash;
    const eased = progress * progress * (3 - 2 * progress); // smoothstep
    const from = this.collapseFrom;
    return {
      x: from.x + (target.x - from.x) * eased,
      y: from.y + (target.y - from.y) * eased,
      z: from.z + (target.z - from.z) * eased,
    };
  }
}
