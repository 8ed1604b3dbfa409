// Page wiring: one websocket, one canvas, one input loop. Socket callbacks
// update the view state, the animation loop draws whatever is latest, and a
// fixed-rate timer turns held keys or a gamepad into cmd messages.

import {
  CommandCadence,
  isNeutral,
  stickFromAxes,
  stickFromKeys,
  type Stick,
} from "./input.js";
import { Teleop, wsUrlFromQuery } from "./net.js";
import { MODES, type Mode } from "./protocol.js";
import { emptyView, pushTrail, renderFrame } from "./render.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as CanvasRenderingContext2D;
const statusDot = document.getElementById("status") as HTMLSpanElement;
const lambdaSlider = document.getElementById("lambda") as HTMLInputElement;
const lambdaLabel = document.getElementById("lambda-val") as HTMLSpanElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;
const modeButtons = Array.from(
  document.querySelectorAll<HTMLButtonElement>("button[data-mode]"),
);

const view = emptyView();

function markMode(mode: string): void {
  for (const btn of modeButtons) {
    btn.classList.toggle("active", btn.dataset["mode"] === mode);
  }
}

const teleop = new Teleop(wsUrlFromQuery(location.search, location.hostname), {
  onMessage(msg) {
    if (msg.type === "init") {
      view.init = msg;
      view.tick = null;
      view.trail = [];
      view.lambda = msg.lambda;
      lambdaSlider.value = msg.lambda.toFixed(2);
      lambdaLabel.textContent = msg.lambda.toFixed(2);
      markMode(msg.mode);
    } else if (msg.type === "tick") {
      view.tick = msg;
      view.lastTickAtMs = performance.now();
      pushTrail(view.trail, msg.pose[0], msg.pose[1]);
      markMode(msg.mode);
    } else {
      console.warn("server:", msg.message);
    }
  },
  onStatus(connected) {
    view.connected = connected;
    statusDot.classList.toggle("up", connected);
  },
});
teleop.start();

// -- input ------------------------------------------------------------------

const DRIVE_KEYS = new Set([
  "w", "a", "s", "d", "arrowup", "arrowdown", "arrowleft", "arrowright",
]);
const held = new Set<string>();

window.addEventListener("keydown", (e) => {
  const key = e.key.toLowerCase();
  if (DRIVE_KEYS.has(key)) {
    held.add(key);
    e.preventDefault();
  }
});
window.addEventListener("keyup", (e) => {
  held.delete(e.key.toLowerCase());
});
window.addEventListener("blur", () => held.clear());

function gamepadStick(): Stick {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  for (const pad of pads) {
    if (pad && pad.connected) {
      return stickFromAxes(pad.axes[0] ?? 0, pad.axes[1] ?? 0);
    }
  }
  return { x: 0, y: 0 };
}

const cadence = new CommandCadence((v, w) => {
  teleop.send({ type: "cmd", v, w });
});

setInterval(() => {
  let stick = stickFromKeys(held);
  if (isNeutral(stick)) stick = gamepadStick();
  view.stick = stick;
  cadence.update(stick, view.init?.limits ?? null, view.connected, performance.now());
}, 25);

// -- controls -----------------------------------------------------------------

for (const btn of modeButtons) {
  btn.addEventListener("click", () => {
    const mode = btn.dataset["mode"] as Mode;
    if ((MODES as readonly string[]).includes(mode)) {
      teleop.send({ type: "set_mode", mode });
    }
  });
}

lambdaSlider.addEventListener("input", () => {
  lambdaLabel.textContent = Number(lambdaSlider.value).toFixed(2);
});
lambdaSlider.addEventListener("change", () => {
  const lam = Number(lambdaSlider.value);
  view.lambda = lam;
  teleop.send({ type: "set_lambda", lambda: lam });
});

resetBtn.addEventListener("click", (e) => {
  // plain click replays the same episode; shift-click reseeds
  if (e.shiftKey) {
    teleop.send({ type: "reset", seed: Math.floor(Math.random() * 10000) });
  } else {
    teleop.send({ type: "reset" });
  }
});

// -- render loop --------------------------------------------------------------

function resize(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
}
window.addEventListener("resize", resize);
resize();

function frame(): void {
  renderFrame(ctx, view, performance.now(), canvas.width, canvas.height);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
