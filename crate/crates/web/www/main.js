// Glue for index.html. Expects the wasm-bindgen output (target "web") in ./pkg.
import init, { single_sided_curve, two_sided_map, evaluate, version } from "./pkg/ghzdyn_web.js";

const COLORS = { C12_3: "#1f77b4", C13_2: "#ff7f0e", C23_1: "#2ca02c", tau3: "#222" };
const $ = (id) => document.getElementById(id);

function column(table, name) {
  const k = table.header.indexOf(name);
  return table.rows.map((r) => (typeof r[k] === "number" ? r[k] : NaN));
}

function guarded(errEl, fn) {
  errEl.textContent = "";
  try {
    fn();
  } catch (e) {
    errEl.textContent = String(e);
  }
}

function plotCurves() {
  guarded($("ss-err"), () => {
    const table = JSON.parse(single_sided_curve($("ss-family").value, Number($("ss-points").value)));
    const p = column(table, "p_q3");
    const canvas = $("ss-plot");
    const ctx = canvas.getContext("2d");
    const W = canvas.width, H = canvas.height, pad = 36;
    ctx.clearRect(0, 0, W, H);
    const x = (v) => pad + v * (W - 2 * pad);
    const y = (v) => H - pad - v * (H - 2 * pad);

    ctx.strokeStyle = "#999";
    ctx.fillStyle = "#444";
    ctx.font = "12px system-ui";
    ctx.beginPath();
    ctx.moveTo(x(0), y(0)); ctx.lineTo(x(1), y(0));
    ctx.moveTo(x(0), y(0)); ctx.lineTo(x(0), y(1));
    ctx.stroke();
    for (const t of [0, 0.25, 0.5, 0.75, 1]) {
      ctx.fillText(t.toString(), x(t) - 8, y(0) + 16);
      ctx.fillText(t.toString(), 4, y(t) + 4);
    }
    ctx.fillText("p", x(1) - 6, y(0) - 6);

    for (const [name, color] of Object.entries(COLORS)) {
      const ys = column(table, name);
      ctx.strokeStyle = color;
      ctx.lineWidth = name === "tau3" ? 2.5 : 1.5;
      ctx.beginPath();
      ys.forEach((v, i) => (i ? ctx.lineTo(x(p[i]), y(v)) : ctx.moveTo(x(p[i]), y(v))));
      ctx.stroke();
    }
    $("ss-legend").innerHTML = Object.entries(COLORS)
      .map(([n, c]) => `<span><i class="swatch" style="background:${c}"></i>${n === "tau3" ? "τ₃" : n.replace("_", "|")}</span>`)
      .join("");
  });
}

function shade(v) {
  // white at 0, dark blue at 1
  const t = Math.max(0, Math.min(1, v));
  const r = Math.round(255 * (1 - 0.85 * t)), g = Math.round(255 * (1 - 0.65 * t)), b = Math.round(255 * (1 - 0.25 * t));
  return `rgb(${r},${g},${b})`;
}

function plotMap() {
  guarded($("ts-err"), () => {
    const n = Number($("ts-points").value);
    const table = JSON.parse(two_sided_map($("ts-a").value, $("ts-b").value, n));
    const tau = column(table, "tau3");
    const canvas = $("ts-plot");
    const ctx = canvas.getContext("2d");
    const cell = canvas.width / n;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    // rows are ordered with the q2 probability slowest
    tau.forEach((v, idx) => {
      const i = Math.floor(idx / n), j = idx % n;
      ctx.fillStyle = shade(v);
      ctx.fillRect(j * cell, canvas.height - (i + 1) * cell, Math.ceil(cell), Math.ceil(cell));
    });
    const min = Math.min(...tau), max = Math.max(...tau);
    $("ts-info").textContent =
      `Horizontal: p on q3, vertical: p on q2 (origin bottom left). τ₃ ranges from ${min.toFixed(4)} to ${max.toFixed(4)}.`;
  });
}

function runEvaluate() {
  guarded($("ev-err"), () => {
    const out = JSON.parse(evaluate($("ev-state").value, $("ev-channels").value));
    const rows = out.report.cuts.map((c) => {
      const pred = out.prediction && out.prediction.concurrences;
      const k = ["12|3", "13|2", "23|1"].indexOf(c.cut);
      const analytic = pred ? pred[k].toFixed(8) : "n/a";
      return `<tr><td>C<sup>${c.cut}</sup></td><td>${c.concurrence.toFixed(8)}</td><td>${analytic}</td></tr>`;
    });
    const predTau = out.prediction && out.prediction.tau3 != null ? out.prediction.tau3.toFixed(8) : "n/a";
    rows.push(`<tr><td>τ₃</td><td>${out.report.tau3.toFixed(8)}</td><td>${predTau}</td></tr>`);
    $("ev-out").innerHTML =
      `<table><tr><th></th><th>numerical</th><th>closed form</th></tr>${rows.join("")}</table>`;
  });
}

async function main() {
  await init();
  $("status").textContent = `ghzdyn ${version()}`;
  for (const id of ["ss-family", "ss-points"]) $(id).addEventListener("change", plotCurves);
  for (const id of ["ts-a", "ts-b", "ts-points"]) $(id).addEventListener("change", plotMap);
  $("ev-run").addEventListener("click", runEvaluate);
  plotCurves();
  plotMap();
  runEvaluate();
}

main().catch((e) => {
  $("status").textContent = `Failed to load: ${e}`;
});
