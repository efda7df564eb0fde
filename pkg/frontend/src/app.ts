/**
 * Browser wiring: DOM, input listeners, the 10 Hz command stream and the
 * render loop. Everything testable lives in the sibling modules; this file
 * only glues them to window/document/WebSocket.
 *
 * Query params: ?host=127.0.0.1&port=8642&res=0.1&d0=0.9&vmax=2&vzmax=1&wmax=1
 */

import { BridgeClient } from "./client.js";
import { CommandStream, DEFAULT_LIMITS } from "./encoder.js";
import { InputHub } from "./input.js";
import { renderSlice, defaultView, type Ctx2D } from "./render2d.js";
import { OrbitCamera, renderCloud } from "./render3d.js";
import { TelemetryStore } from "./telemetry.js";

function num(params: URLSearchParams, key: string, fallback: number): number {
  const raw = params.get(key);
  const val = raw === null ? NaN : Number(raw);
  return Number.isFinite(val) ? val : fallback;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? (window.location.hostname || "127.0.0.1");
  const port = num(params, "port", 8642);
  const res = num(params, "res", 0.1);

  const root = document.getElementById("app") ?? document.body;
  const status = document.createElement("div");
  status.className = "status";
  const slice = document.createElement("canvas");
  const cloud = document.createElement("canvas");
  slice.width = cloud.width = 640;
  slice.height = cloud.height = 480;
  slice.className = "view";
  cloud.className = "view";
  const row = document.createElement("div");
  row.className = "views";
  row.append(slice, cloud);
  root.append(status, row);

  const store = new TelemetryStore();
  const client = new BridgeClient(`ws://${host}:${port}/ws`, store);
  const stream = new CommandStream({
    send: client.send,
    limits: {
      vMaxXY: num(params, "vmax", DEFAULT_LIMITS.vMaxXY),
      vMaxZ: num(params, "vzmax", DEFAULT_LIMITS.vMaxZ),
      yawRateMax: num(params, "wmax", DEFAULT_LIMITS.yawRateMax),
    },
  });
  const hub = new InputHub();

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    if (hub.keyEvent(ev.code, true)) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => {
    if (hub.keyEvent(ev.code, false)) ev.preventDefault();
  });
  window.addEventListener("blur", () => hub.keyboard.releaseAll());

  const cam = new OrbitCamera();
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  cloud.addEventListener("mousedown", (ev) => {
    dragging = true;
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    cam.rotate(ev.clientX - lastX, ev.clientY - lastY);
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  cloud.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    cam.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
  });

  const sliceCtx = slice.getContext("2d") as unknown as Ctx2D;
  const cloudCtx = cloud.getContext("2d") as unknown as Ctx2D;
  const sliceView = defaultView(slice.width, slice.height);
  sliceView.res = res;
  sliceView.d0 = num(params, "d0", sliceView.d0);
  const cloudView = {
    width: cloud.width,
    height: cloud.height,
    res,
    followVehicle: true,
  };

  const frame = () => {
    // Gamepads only surface through polling; the hub also arbitrates the
    // keyboard-vs-pad exclusive-source rule each frame.
    const pads = navigator.getGamepads ? navigator.getGamepads() : [];
    hub.pollPad(pads.find((p) => p && p.connected) ?? null);
    stream.update(hub.sample());

    const now = Date.now();
    renderSlice(sliceCtx, sliceView, store, now);
    renderCloud(cloudCtx, cam, cloudView, store);

    const sent = `${stream.sentCount} sent / ${stream.droppedCount} dropped`;
    const fs = stream.failsafe ? " | FAILSAFE HOVER" : "";
    status.textContent = `${client.status} ${client.url} | joy ${sent}${fs}`;
    window.requestAnimationFrame(frame);
  };

  client.connect();
  stream.start();
  window.requestAnimationFrame(frame);
}

main();
