import init, {
  orbitSlice,
  criticalSigma,
  phase,
  passageCurve,
  learnerTrajectories,
} from "./pkg/langcontact_wasm.js";

const $ = (id) => document.getElementById(id);

// Keep the <output> next to each slider in sync with its value.
function bind(id, fmt, onChange) {
  const input = $(id);
  const out = input.parentElement.querySelector("output");
  const update = () => {
    if (out) out.textContent = fmt(Number(input.value));
    onChange();
  };
  input.addEventListener("input", update);
  return update;
}

function axes(ctx, w, h, pad, xMax, yMax, xLabel, yLabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "11px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillText(xLabel, w / 2, h - 6);
  ctx.fillText(yLabel, 4, pad / 2 + 4);
  ctx.fillText("0", pad - 10, h - pad + 12);
  ctx.fillText(String(xMax), w - pad, h - pad + 12);
  ctx.fillText(String(yMax), 4, pad / 2 + 16);
  const sx = (x) => pad + (x / xMax) * (w - 1.5 * pad);
  const sy = (y) => h - pad - (y / yMax) * (h - 1.5 * pad);
  return { sx, sy };
}

function polyline(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  let pen = false;
  for (const [x, y] of pts) {
    if (!Number.isFinite(y)) {
      pen = false;
      continue;
    }
    pen ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    pen = true;
  }
  ctx.stroke();
}

function drawOrbit() {
  const alpha = Number($("o-alpha").value);
  const d = Number($("o-d").value);
  const canvas = $("o-canvas");
  const ctx = canvas.getContext("2d");
  const n = 201;
  const data = orbitSlice(alpha, d, n);
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, 36, 1, 1, "sigma", "p*, q*");
  const p = [], q = [];
  for (let i = 0; i < n; i++) {
    const s = i / (n - 1);
    p.push([sx(s), sy(data[2 * i])]);
    q.push([sx(s), sy(data[2 * i + 1])]);
  }
  ctx.lineWidth = 2;
  polyline(ctx, p, "#1f77b4");
  polyline(ctx, q, "#ff7f0e");
  ctx.lineWidth = 1;
  const crit = criticalSigma(alpha, d);
  if (Number.isFinite(crit)) {
    ctx.setLineDash([4, 4]);
    polyline(ctx, [[sx(crit), sy(0)], [sx(crit), sy(1)]], "#c00");
    ctx.setLineDash([]);
  }
  const mid = phase(alpha, d, 0.5);
  $("o-note").textContent = Number.isFinite(crit)
    ? `sigma_crit = ${crit.toFixed(4)}; blue p*, orange q*.`
    : `sigma does not decide the outcome here (at sigma = 0.5 the grammar is ${mid}).`;
}

function drawPassage() {
  const sigma = Number($("p-sigma").value);
  const q0 = Number($("p-q0").value);
  const canvas = $("p-canvas");
  const ctx = canvas.getContext("2d");
  const dMax = 20, n = 200;
  const data = passageCurve(sigma, q0, dMax, n, 10000);
  let yMax = 10;
  for (let i = 0; i < n; i++) if (Number.isFinite(data[2 * i + 1])) yMax = Math.max(yMax, data[2 * i + 1]);
  yMax = Math.ceil(yMax / 10) * 10;
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, 36, dMax, yMax, "d", "generations");
  const pts = [];
  for (let i = 0; i < n; i++) pts.push([sx(data[2 * i]), sy(data[2 * i + 1])]);
  ctx.lineWidth = 2;
  polyline(ctx, pts, "#2ca02c");
  ctx.lineWidth = 1;
  ctx.setLineDash([4, 4]);
  polyline(ctx, [[sx(0), sy(5)], [sx(dMax), sy(5)]], "#999");
  ctx.setLineDash([]);
}

function drawLearners() {
  const gamma = Math.pow(10, Number($("l-gamma").value));
  const d = Number($("l-d").value);
  const seed = Math.max(0, Math.floor(Number($("l-seed").value) || 0));
  const canvas = $("l-canvas");
  const ctx = canvas.getContext("2d");
  const tokens = 10000;
  const data = learnerTrajectories(gamma, d, 0.5, 0.25, 0.2, 10, tokens, seed);
  const m = data[0];
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, 36, tokens, 1, "iteration", "p");
  for (let l = 0, off = 1; off < data.length; l++, off += m + 1) {
    const color = data[off] === 1 ? "#1f77b4" : "#ff7f0e";
    const pts = [];
    for (let k = 0; k < m; k++) pts.push([sx(Math.min(k * 100, tokens)), sy(data[off + 1 + k])]);
    polyline(ctx, pts, color);
  }
}

async function main() {
  await init();
  const orbit = [bind("o-alpha", (v) => v.toFixed(2), drawOrbit), bind("o-d", (v) => v.toFixed(1), drawOrbit)];
  const passage = [bind("p-sigma", (v) => v.toFixed(2), drawPassage), bind("p-q0", (v) => v.toFixed(2), drawPassage)];
  const learners = [
    bind("l-gamma", (v) => Math.pow(10, v).toPrecision(2), drawLearners),
    bind("l-d", (v) => v.toFixed(1), drawLearners),
  ];
  $("l-seed").addEventListener("change", drawLearners);
  [...orbit, ...passage, ...learners].forEach((f) => f());
}

main();
