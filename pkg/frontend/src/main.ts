/**
 * Browser entry point: WebSocket wiring, the canvas render loop, and the
 * virtual pedalboard. All physics shown here comes from telemetry; widgets
 * only emit the same CC values a hardware pedal would.
 */

import { DEFAULT_CAMERA, latitudeCircle, meridianCircle, orbit, project, Trail, type Camera } from "./bloch.js";
import { ControlSender } from "./coalesce.js";
import { parseSnapshot, type BlochVector } from "./protocol.js";
import { UiStore } from "./store.js";

const params = new URLSearchParams(window.location.search);
const CC = {
  rotationA: Number(params.get("rotA") ?? 11),
  rotationB: Number(params.get("rotB") ?? 1),
  axisSwitch: Number(params.get("switch") ?? 80),
  measure: Number(params.get("measure") ?? 82),
  classical: Number(params.get("classical") ?? 7),
  quantum: Number(params.get("quantum") ?? 8),
};
const SEND_INTERVAL_MS = Number(params.get("interval") ?? 33);
const wsTarget = params.get("ws") ?? window.location.host;

const store = new UiStore();
const trail = new Trail();
let socket: WebSocket | null = null;

const sender = new ControlSender((encoded) => {
  if (socket && socket.readyState === WebSocket.OPEN) socket.send(encoded);
}, SEND_INTERVAL_MS);

function connect(): void {
  socket = new WebSocket(`ws://${wsTarget}/`);
  socket.onopen = () => store.markOpen();
  socket.onmessage = (event) => {
    const snapshot = parseSnapshot(String(event.data));
    if (snapshot) {
      store.applySnapshot(snapshot, performance.now());
      trail.push(snapshot.bloch);
    }
  };
  socket.onclose = () => {
    store.markClosed();
    setTimeout(connect, 1000);
  };
  socket.onerror = () => socket?.close();
}

// --- pedalboard -------------------------------------------------------------

const el = <T extends HTMLElement>(id: string): T => {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
};

const rotationA = el<HTMLInputElement>("rotation-a");
const rotationB = el<HTMLInputElement>("rotation-b");
const axisSwitch = el<HTMLButtonElement>("axis-switch");
const measureButton = el<HTMLButtonElement>("measure");
const classicalVolume = el<HTMLInputElement>("classical-volume");
const quantumVolume = el<HTMLInputElement>("quantum-volume");
const statusLabel = el<HTMLSpanElement>("status");
const readout = el<HTMLDivElement>("readout");

rotationA.addEventListener("input", () => {
  store.pedals.rotationA = Number(rotationA.value);
  sender.setSlider(CC.rotationA, store.pedals.rotationA);
});
rotationB.addEventListener("input", () => {
  store.pedals.rotationB = Number(rotationB.value);
  sender.setSlider(CC.rotationB, store.pedals.rotationB);
});
classicalVolume.addEventListener("input", () => {
  store.pedals.classicalVolume = Number(classicalVolume.value);
  sender.setSlider(CC.classical, store.pedals.classicalVolume);
});
quantumVolume.addEventListener("input", () => {
  store.pedals.quantumVolume = Number(quantumVolume.value);
  sender.setSlider(CC.quantum, store.pedals.quantumVolume);
});
measureButton.addEventListener("click", () => {
  sender.clickMomentary(CC.measure); // 127 then 0: one rising edge per click
});
axisSwitch.addEventListener("click", () => {
  store.pedals.axisSwitchOn = !store.pedals.axisSwitchOn;
  sender.setSwitch(CC.axisSwitch, store.pedals.axisSwitchOn);
});

// --- canvas -----------------------------------------------------------------

const canvas = el<HTMLCanvasElement>("sphere");
const context = canvas.getContext("2d")!;
let camera: Camera = { ...DEFAULT_CAMERA };
let lastFrame = performance.now();

function toScreen(point: BlochVector): { x: number; y: number; depth: number } {
  const projected = project(point, camera);
  const radius = Math.min(canvas.width, canvas.height) * 0.42;
  return {
    x: canvas.width / 2 + projected.x * radius,
    y: canvas.height / 2 - projected.y * radius,
    depth: projected.depth,
  };
}

function strokePath(points: BlochVector[], style: string, width = 1): void {
  context.beginPath();
  let started = false;
  for (const point of points) {
    const s = toScreen(point);
    if (started) context.lineTo(s.x, s.y);
    else {
      context.moveTo(s.x, s.y);
      started = true;
    }
  }
  context.strokeStyle = style;
  context.lineWidth = width;
  context.stroke();
}

function drawFrame(now: number): void {
  const dt = (now - lastFrame) / 1000;
  lastFrame = now;
  camera = orbit(camera, dt);

  const status = store.status(now);
  const dimmed = status !== "connected";
  context.clearRect(0, 0, canvas.width, canvas.height);
  context.globalAlpha = dimmed ? 0.35 : 1.0;

  // sphere outline and wireframe
  const radius = Math.min(canvas.width, canvas.height) * 0.42;
  context.beginPath();
  context.arc(canvas.width / 2, canvas.height / 2, radius, 0, 2 * Math.PI);
  context.strokeStyle = "#4a5568";
  context.lineWidth = 1.5;
  context.stroke();
  for (const h of [-0.6, 0, 0.6]) {
    strokePath(latitudeCircle(h), h === 0 ? "#4a5568" : "#2d3748");
  }
  strokePath(meridianCircle(0), "#2d3748");
  strokePath(meridianCircle(Math.PI / 2), "#2d3748");

  // axes ticks
  const top = toScreen({ x: 0, y: 0, z: 1.12 });
  const bottom = toScreen({ x: 0, y: 0, z: -1.12 });
  context.fillStyle = "#a0aec0";
  context.font = "14px system-ui";
  context.fillText("|0⟩", top.x - 8, top.y);
  context.fillText("|1⟩", bottom.x - 8, bottom.y + 8);

  // trail
  for (const { point, alpha } of trail.segments()) {
    const s = toScreen(point);
    context.globalAlpha = (dimmed ? 0.2 : 0.6) * alpha;
    context.fillStyle = "#63b3ed";
    context.beginPath();
    context.arc(s.x, s.y, 2, 0, 2 * Math.PI);
    context.fill();
  }
  context.globalAlpha = dimmed ? 0.35 : 1.0;

  // marker with collapse flash
  const marker = store.markerPosition(now);
  if (marker) {
    const s = toScreen(marker);
    const flash = store.measurementFlash(now);
    if (flash > 0) {
      context.globalAlpha = flash;
      context.strokeStyle = "#f6e05e";
      context.lineWidth = 3;
      context.beginPath();
      context.arc(s.x, s.y, 10 + 24 * (1 - flash), 0, 2 * Math.PI);
      context.stroke();
      context.globalAlpha = dimmed ? 0.35 : 1.0;
    }
    context.fillStyle = s.depth >= 0 ? "#f56565" : "#9b2c2c";
    context.beginPath();
    context.arc(s.x, s.y, 7, 0, 2 * Math.PI);
    context.fill();
  }

  context.globalAlpha = 1.0;
  if (dimmed) {
    context.fillStyle = "#e2e8f0";
    context.font = "16px system-ui";
    const message = status === "stale" ? "telemetry stalled…" : "reconnecting…";
    context.fillText(message, canvas.width / 2 - 60, canvas.height / 2);
  }

  updatePanel(now, status);
  requestAnimationFrame(drawFrame);
}

function updatePanel(now: number, status: string): void {
  statusLabel.textContent = status;
  statusLabel.className = `status-${status}`;
  const enabled = store.widgetsEnabled(now);
  for (const widget of [rotationA, rotationB, classicalVolume, quantumVolume]) {
    widget.disabled = !enabled;
  }
  measureButton.disabled = !enabled;
  axisSwitch.disabled = !enabled;
  axisSwitch.textContent = store.pedals.axisSwitchOn ? "axis: alternate" : "axis: primary";

  const snap = store.snapshot;
  if (!snap) {
    readout.textContent = "waiting for telemetry…";
    return;
  }
  const b = snap.bloch;
  const notes = snap.active_notes.map((n) => `s${n.string}:${n.note}`).join(" ") || "–";
  const last = snap.last_measurement
    ? `${snap.last_measurement.basis}→${snap.last_measurement.bit} (p=${snap.last_measurement.pre_probability.toFixed(3)})`
    : "–";
  readout.textContent =
    `t=${snap.time.toFixed(2)}s  axis=${snap.axis}\n` +
    `bloch  x=${b.x.toFixed(3)}  y=${b.y.toFixed(3)}  z=${b.z.toFixed(3)}\n` +
    `gains  classical=${snap.bus_gains.classical.toFixed(2)}  quantum=${snap.bus_gains.quantum.toFixed(2)}\n` +
    `notes  ${notes}\n` +
    `last measurement  ${last}`;
}

connect();
requestAnimationFrame(drawFrame);
