/**
 * Bloch sphere geometry: a slowly orbiting camera, 3D-to-2D projection,
 * wireframe circles, and a fading trail of recent marker positions.
 * Pure math here; the canvas drawing lives in main.ts.
 */

import type { BlochVector } from "./protocol.js";

export interface Camera {
  azimuth: number; // radians around the vertical (z) axis
  elevation: number; // radians above the equator
  distance: number; // in sphere radii, for mild perspective
}

export interface Projected {
  x: number; // screen-plane horizontal, sphere radius = 1
  y: number; // screen-plane vertical, positive up
  depth: number; // toward the viewer; negative means behind the sphere
  scale: number; // perspective factor
}

export const DEFAULT_CAMERA: Camera = { azimuth: 0.6, elevation: 0.35, distance: 6 };

export function orbit(camera: Camera, dtSeconds: number, speed = 0.15): Camera {
  return { ...camera, azimuth: camera.azimuth + dtSeconds * speed };
}

/** Project a point on/in the unit sphere to screen coordinates. */
export function project(point: BlochVector, camera: Camera): Projected {
  const ca = Math.cos(camera.azimuth);
  const sa = Math.sin(camera.azimuth);
  const x1 = point.x * ca + point.y * sa;
  const y1 = -point.x * sa + point.y * ca;
  const ce = Math.cos(camera.elevation);
  const se = Math.sin(camera.elevation);
  const depth = y1 * ce - point.z * se; // toward the viewer
  const up = y1 * se + point.z * ce;
  const scale = camera.distance / (camera.distance - depth);
  return { x: x1 * scale, y: up * scale, depth, scale };
}

/** Points of a circle of constant latitude z = h (unit sphere). */
export function latitudeCircle(h: number, segments = 48): BlochVector[] {
  const r = Math.sqrt(Math.max(0, 1 - h * h));
  const points: BlochVector[] = [];
  for (let i = 0; i <= segments; i++) {
    const phi = (2 * Math.PI * i) / segments;
    points.push({ x: r * Math.cos(phi), y: r * Math.sin(phi), z: h });
  }
  return points;
}

/** Points of the meridian through azimuth phi (unit sphere). */
export function meridianCircle(phi: number, segments = 48): BlochVector[] {
  const points: BlochVector[] = [];
  for (let i = 0; i <= segments; i++) {
    const theta = (2 * Math.PI * i) / segments;
    points.push({
      x: Math.sin(theta) * Math.cos(phi),
      y: Math.sin(theta) * Math.sin(phi),
      z: Math.cos(theta),
    });
  }
  return points;
}

/** Fixed-capacity trail of recent positions, newest last. */
export class Trail {
  private points: BlochVector[] = [];

  constructor(private readonly capacity = 90) {}

  push(point: BlochVector): void {
    const last = this.points[this.points.length - 1];
    if (last && last.x === point.x && last.y === point.y && last.z === point.z) return;
    this.points.push(point);
    if (this.points.length > this.capacity) this.points.shift();
  }

  clear(): void {
    this.points = [];
  }

  /** Oldest-to-newest with alpha in (0, 1]. */
  segments(): Array<{ point: BlochVector; alpha: number }> {
    const n = this.points.length;
    return this.points.map((point, i) => ({ point, alpha: (i + 1) / n }));
  }
}
