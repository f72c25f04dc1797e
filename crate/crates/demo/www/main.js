import init, { exponentSet, levelCeilingCurve, Relaxation, coefficientSlice } from "./pkg/landau_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// Diverging colour map centred on zero, or sequential when all values share a sign.
function heatmap(canvas, values, n) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const signed = lo < 0 && hi > 0;
  const span = signed ? Math.max(-lo, hi) : (hi - lo) || 1;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = values[i * n + j];
      const o = 4 * ((n - 1 - j) * n + i);
      if (signed) {
        const s = v / span;
        img.data[o] = s > 0 ? 255 : 255 * (1 + s);
        img.data[o + 1] = 255 * (1 - Math.abs(s));
        img.data[o + 2] = s < 0 ? 255 : 255 * (1 - s);
      } else {
        const s = (v - lo) / span;
        img.data[o] = 255 * s;
        img.data[o + 1] = 80 + 120 * s;
        img.data[o + 2] = 255 * (1 - s);
      }
      img.data[o + 3] = 255;
    }
  }
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
  return [lo, hi];
}

function lineChart(canvas, xs, series, { logY = false, labels = [] } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 36;
  ctx.clearRect(0, 0, W, H);
  const f = (y) => (logY ? Math.log10(Math.max(y, 1e-300)) : y);
  const all = series.flat().map(f).filter(Number.isFinite);
  if (!all.length || xs.length < 2) return;
  const [x0, x1] = [xs[0], xs[xs.length - 1]];
  let [y0, y1] = [Math.min(...all), Math.max(...all)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const py = (y) => H - pad - ((f(y) - y0) / (y1 - y0)) * (H - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(logY ? `1e${y1.toFixed(1)}` : y1.toPrecision(3), 2, pad);
  ctx.fillText(logY ? `1e${y0.toFixed(1)}` : y0.toPrecision(3), 2, H - pad);
  ctx.fillText(x1.toPrecision(3), W - pad - 20, H - pad + 14);
  const colours = ["#c33", "#36c", "#393"];
  series.forEach((ys, k) => {
    ctx.strokeStyle = colours[k % colours.length];
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
    if (labels[k]) { ctx.fillStyle = ctx.strokeStyle; ctx.fillText(labels[k], pad + 6, pad + 14 * (k + 1)); }
  });
}

function showExponents() {
  const out = $("exp-out");
  try {
    const [g, b0, b1, b2, a, q, mt] = exponentSet(num("p"), num("m"));
    out.innerHTML = `<table><tr><th>γ</th><th>β₀</th><th>β₁</th><th>β₂</th><th>α</th><th>q</th><th>m threshold</th></tr>
      <tr>${[g, b0, b1, b2, a, q, mt].map((x) => `<td>${x.toFixed(6)}</td>`).join("")}</tr></table>`;
    const curve = levelCeilingCurve(num("p"), num("m"), num("e0"), num("T"), 1.0, 80);
    const ts = [], ks = [];
    for (let i = 0; i < curve.length; i += 2) { ts.push(Math.log10(curve[i])); ks.push(curve[i + 1]); }
    lineChart($("k-plot"), ts, [ks], { logY: true, labels: ["K(t) with C = 1 against log₁₀ t"] });
  } catch (e) {
    out.innerHTML = `<span class="err">${e.message ?? e}</span>`;
    $("k-plot").getContext("2d").clearRect(0, 0, 480, 220);
  }
}

let run = null, timer = null;

function frame() {
  if (!run) return;
  try {
    const t = run.advance(1);
    const n = run.n();
    heatmap($("h-slice"), run.perturbationSlice(), n);
    const h = run.history();
    const ts = [], linf = [], l2 = [];
    for (let i = 0; i < h.length; i += 4) { ts.push(h[i]); linf.push(h[i + 1]); l2.push(h[i + 2]); }
    lineChart($("h-curve"), ts, [linf, l2], { logY: true, labels: ["‖h‖∞", "‖h‖₂"] });
    $("run-status").textContent = `t = ${t.toFixed(3)}, steps ${ts.length - 1}`;
    timer = requestAnimationFrame(frame);
  } catch (e) {
    $("run-status").textContent = `stopped: ${e.message ?? e}`;
    run = null;
  }
}

function start() {
  cancelAnimationFrame(timer);
  try {
    run = new Relaxation(num("n"), 8.0, $("datum").value, num("strength"));
    timer = requestAnimationFrame(frame);
  } catch (e) {
    $("run-status").textContent = e.message ?? e;
  }
}

function slice() {
  const n = 32;
  try {
    const values = coefficientSlice(n, 8.0, $("c-datum").value, 0.4, $("component").value);
    const [lo, hi] = heatmap($("c-slice"), values, n);
    $("c-status").textContent = `range [${lo.toExponential(3)}, ${hi.toExponential(3)}] on v₃ = 0`;
  } catch (e) {
    $("c-status").textContent = e.message ?? e;
  }
}

await init();
for (const id of ["p", "m", "e0", "T"]) $(id).addEventListener("input", showExponents);
$("start").addEventListener("click", start);
$("stop").addEventListener("click", () => { cancelAnimationFrame(timer); run = null; });
$("slice").addEventListener("click", slice);
showExponents();
slice();
