// SPDX-License-Identifier: MIT OR Apache-2.0
import init, { simulate, calibrate, detect } from "./pkg/clusterscan_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const status = (text) => { $("status").textContent = text; };

let signal = null;
let detection = null;

function windowSize() {
  const k = num("k");
  return k > 0 ? k : Math.floor(Math.sqrt(num("p")));
}

function plot(canvas, ys, { offset = 0, length = ys.length, bands = [], lines = [], overlay = null }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const all = ys.concat(overlay ?? [], lines.map((l) => l.y));
  const lo = Math.min(...all), hi = Math.max(...all);
  const x = (i) => ((i - 1) / Math.max(length - 1, 1)) * w;
  const y = (v) => h - 8 - ((v - lo) / (hi - lo || 1)) * (h - 16);
  ctx.fillStyle = "rgba(230, 120, 20, 0.18)";
  for (const [a, b] of bands) ctx.fillRect(x(a), 0, x(b) - x(a), h);
  const path = (vals, color, lw) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = lw;
    ctx.beginPath();
    vals.forEach((v, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, x(i + 1 + offset), y(v)));
    ctx.stroke();
  };
  path(ys, "#456", 1);
  if (overlay) path(overlay, "#c22", 2);
  for (const { y: v, color } of lines) {
    ctx.strokeStyle = color;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(0, y(v));
    ctx.lineTo(w, y(v));
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function redraw() {
  if (!signal) return;
  const bands = detection ? detection.clusters : [];
  plot($("series"), signal.values, { bands, overlay: signal.means });
  if (detection) {
    plot($("trace"), detection.trace, {
      offset: detection.trace_offset,
      length: signal.values.length,
      bands,
      lines: [
        { y: detection.gamma, color: "#c22" },
        { y: detection.delta, color: "#28a" },
      ],
    });
  } else {
    $("trace").getContext("2d").clearRect(0, 0, $("trace").width, $("trace").height);
  }
}

function guarded(fn) {
  return () => {
    try {
      fn();
    } catch (err) {
      status(`error: ${err}`);
    }
  };
}

$("simulate").onclick = guarded(() => {
  signal = JSON.parse(simulate(num("p"), $("noise").value, num("seed")));
  detection = null;
  redraw();
  status(`simulated p=${signal.values.length}; true break-points ${signal.breakpoints.join(", ")}`);
});

$("calibrate").onclick = guarded(() => {
  const t0 = performance.now();
  const g = calibrate(num("p"), windowSize(), num("alpha"), num("reps"), 0);
  status(`cutoff for unit-variance noise, p=${num("p")}, k=${windowSize()}: ${g.toPrecision(6)} ` +
    `(${(performance.now() - t0).toFixed(0)} ms)`);
});

$("detect").onclick = guarded(() => {
  if (!signal) $("simulate").onclick();
  const t0 = performance.now();
  detection = JSON.parse(detect(new Float64Array(signal.values), num("k"), num("alpha"), num("reps"), 0));
  redraw();
  const found = detection.clusters.map(([a, b]) => `[${a}, ${b})`).join(" ") || "none";
  status(
    `k=${detection.k}  omnibus=${detection.rejected}  gamma=${detection.gamma.toPrecision(4)}  ` +
    `delta=${detection.delta.toPrecision(4)}  sigma2_hat=${detection.sigma2_hat?.toPrecision(4) ?? "-"}\n` +
    `break-points: ${detection.breakpoints.join(", ") || "none"} (true ${signal.breakpoints.join(", ")})\n` +
    `clusters: ${found}  (${(performance.now() - t0).toFixed(0)} ms)`);
});

await init();
status("ready");
$("simulate").onclick();
