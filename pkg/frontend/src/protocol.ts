/**
 * Telemetry wire schema (newline-delimited JSON over the WebSocket bridge)
 * and the control messages the engine accepts. Schema version 1.
 */

export interface BlochVector {
  x: number;
  y: number;
  z: number;
}

export interface MeasurementInfo {
  time: number;
  basis: "Z" | "X";
  bit: 0 | 1;
  pre_probability: number;
  string?: number;
}

export interface ActiveNote {
  string: number;
  note: number;
  bend: number;
}

export interface TelemetrySnapshot {
  v: number;
  time: number;
  bloch: BlochVector;
  bus_gains: { classical: number; quantum: number };
  active_notes: ActiveNote[];
  last_measurement: MeasurementInfo | null;
  axis: "X" | "Y" | "Z";
}

export type ControlMessage =
  | { type: "cc"; controller: number; value: number }
  | { type: "measure"; basis: "Z" | "X" };

const isFiniteNumber = (value: unknown): value is number =>
  typeof value === "number" && Number.isFinite(value);

function isBloch(value: unknown): value is BlochVector {
  if (typeof value !== "object" || value === null) return false;
  const vec = value as Record<string, unknown>;
  return isFiniteNumber(vec.x) && isFiniteNumber(vec.y) && isFiniteNumber(vec.z);
}

function isMeasurement(value: unknown): value is MeasurementInfo {
  if (typeof value !== "object" || value === null) return false;
  const m = value as Record<string, unknown>;
  return (
    isFiniteNumber(m.time) &&
    (m.basis === "Z" || m.basis === "X") &&
    (m.bit === 0 || m.bit === 1) &&
    isFiniteNumber(m.pre_probability)
  );
}

/** Parse one telemetry line; returns null for anything malformed. */
export function parseSnapshot(raw: string): TelemetrySnapshot | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const snap = data as Record<string, unknown>;
  if (snap.v !== 1) return null;
  if (!isFiniteNumber(snap.time) || !isBloch(snap.bloch)) return null;
  const gains = snap.bus_gains as Record<string, unknown> | undefined;
  if (!gains || !isFiniteNumber(gains.classical) || !isFiniteNumber(gains.quantum)) return null;
  if (snap.last_measurement !== null && !isMeasurement(snap.last_measurement)) return null;
  if (snap.axis !== "X" && snap.axis !== "Y" && snap.axis !== "Z") return null;
  const notes = Array.isArray(snap.active_notes) ? (snap.active_notes as ActiveNote[]) : [];
  return {
    v: 1,
    time: snap.time,
    bloch: snap.bloch,
    bus_gains: { classical: gains.classical as number, quantum: gains.quantum as number },
    active_notes: notes,
    last_measurement: (snap.last_measurement as MeasurementInfo | null) ?? null,
    axis: snap.axis,
  };
}

export function encodeControl(message: ControlMessage): string {
  if (message.type === "cc") {
    const { controller, value } = message;
    if (!Number.isInteger(controller) || controller < 0 || controller > 127) {
      throw new Error(`controller out of range: ${controller}`);
    }
    if (!Number.isInteger(value) || value < 0 || value > 127) {
      throw new Error(`value out of range: ${value}`);
    }
  }
  return JSON.stringify(message);
}
