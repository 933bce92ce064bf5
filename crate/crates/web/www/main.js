import init, { solve, spin_curves, delta_t_grid } from "./pkg/swm_web.js";

const COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function readLengths(form) {
  return Float64Array.from(["l1", "l2", "l3", "l4"].map((k) => Number(form.elements[k].value)));
}

function fmt(x, d = 3) {
  return x.toFixed(d);
}

function showError(el, err) {
  el.className = "error";
  el.textContent = String(err.message ?? err);
}

function renderSolve() {
  const form = document.getElementById("solve-form");
  const summary = document.getElementById("solve-summary");
  const tableEl = document.getElementById("solve-table");
  const canvas = document.getElementById("solve-canvas");
  tableEl.innerHTML = "";
  canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
  let r;
  try {
    r = JSON.parse(solve(readLengths(form)));
  } catch (err) {
    showError(summary, err);
    return;
  }
  summary.className = "";
  if (r.outcome === "single-cable") {
    const phi = r.phi.map(([a, b]) => `[${fmt(a)}, ${fmt(b)}]`).join(" ∪ ");
    summary.textContent = `Cable ${r.taut[0]} carries the platform alone; it can spin through φ = ${phi} rad, so the pose is not determined.`;
    return;
  }
  if (r.outcome === "infeasible") {
    summary.textContent = "No tension state holds for these lengths.";
    return;
  }
  summary.textContent = `Taut cables {${r.taut.join(", ")}} (${r.branch} branch).`;
  const rows = [["B1", r.pose.B1], ["B2", r.pose.B2], ["B3", r.pose.B3], ["B4", r.b4], ["C", r.pose.C]];
  let html = "<table><tr><th>point</th><th>x (m)</th><th>y (m)</th><th>z (m)</th></tr>";
  for (const [name, p] of rows) html += `<tr><td>${name}</td>${p.map((v) => `<td>${fmt(v)}</td>`).join("")}</tr>`;
  html += "</table><table><tr><th>cable</th><th>tension (kN)</th></tr>";
  r.tensions.forEach((t, i) => (html += `<tr><td>${i + 1}</td><td>${fmt(t / 1000)}</td></tr>`));
  tableEl.innerHTML = html + "</table>";
  drawPose(canvas, r);
}

// Oblique projection of anchors, cables and platform.
function drawPose(canvas, r) {
  const ctx = canvas.getContext("2d");
  const pts = [r.pose.B1, r.pose.B2, r.pose.B3, r.b4];
  const project = ([x, y, z]) => [canvas.width / 2 + 34 * (x + 0.45 * y), 20 - 9.5 * (z - 0.25 * y)];
  ctx.lineWidth = 1.5;
  r.anchors.forEach((a, i) => {
    const [ax, ay] = project(a);
    const [bx, by] = project(pts[i]);
    ctx.strokeStyle = COLOURS[i];
    ctx.setLineDash(r.tensions[i] > 0 ? [] : [4, 4]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
    ctx.fillStyle = COLOURS[i];
    ctx.fillText(String(i + 1), ax + 4, ay - 4);
  });
  ctx.setLineDash([]);
  ctx.strokeStyle = "#333";
  ctx.beginPath();
  pts.forEach((p, i) => (i ? ctx.lineTo(...project(p)) : ctx.moveTo(...project(p))));
  ctx.closePath();
  ctx.stroke();
  const [cx, cy] = project(r.pose.C);
  ctx.strokeStyle = "#aaa";
  for (const p of pts) {
    ctx.beginPath();
    ctx.moveTo(...project(p));
    ctx.lineTo(cx, cy);
    ctx.stroke();
  }
  ctx.fillStyle = "#000";
  ctx.beginPath();
  ctx.arc(cx, cy, 4, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillText("C", cx + 6, cy);
}

function renderSpin() {
  const form = document.getElementById("spin-form");
  const summary = document.getElementById("spin-summary");
  const canvas = document.getElementById("spin-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let r;
  try {
    r = JSON.parse(spin_curves(readLengths(form), 720));
  } catch (err) {
    showError(summary, err);
    return;
  }
  summary.className = "";
  if (!r.applicable) {
    summary.textContent = "Not applicable: all lengths are equal.";
    return;
  }
  const phi = r.phi.length ? r.phi.map(([a, b]) => `[${fmt(a)}, ${fmt(b)}]`).join(" ∪ ") : "empty";
  summary.textContent = `Shortest cable ${r.shortest}; φ = ${phi} rad` +
    (r.phi.length ? ", the platform can hang from it alone." : ", no single-cable suspension.");

  const pad = { l: 50, r: 70, t: 10, b: 30 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const values = r.curves.flatMap((c) => [...c.distance, c.length]);
  const lo = Math.min(...values) - 0.1;
  const hi = Math.max(...values) + 0.1;
  const X = (t) => pad.l + (w * t) / (2 * Math.PI);
  const Y = (v) => pad.t + (h * (hi - v)) / (hi - lo);

  ctx.fillStyle = "rgba(0, 160, 0, 0.12)";
  for (const [a, b] of r.phi) ctx.fillRect(X(a), pad.t, X(b) - X(a), h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#333";
  for (let k = 0; k <= 6; k++) ctx.fillText(String(k), X(k) - 3, pad.t + h + 15);
  ctx.fillText("θ (rad)", pad.l + w / 2, pad.t + h + 28);
  for (let k = 0; k <= 4; k++) {
    const v = lo + ((hi - lo) * k) / 4;
    ctx.fillText(fmt(v, 2), 5, Y(v) + 4);
  }
  r.curves.forEach((c) => {
    const colour = COLOURS[c.cable - 1];
    ctx.strokeStyle = colour;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    c.distance.forEach((d, i) => (i ? ctx.lineTo(X(r.theta[i]), Y(d)) : ctx.moveTo(X(r.theta[i]), Y(d))));
    ctx.stroke();
    ctx.setLineDash([5, 4]);
    ctx.beginPath();
    ctx.moveTo(X(0), Y(c.length));
    ctx.lineTo(X(2 * Math.PI), Y(c.length));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = colour;
    ctx.fillText(`l${c.cable} = ${c.length}`, pad.l + w + 6, Y(c.length) + 4);
  });
}

// Sequential colour map: dark blue at 0, yellow at the maximum.
function colour(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.6 * t - 0.3)));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.2 * t)));
  const b = Math.round(255 * Math.max(0, 0.55 - 0.6 * t));
  return [r, g, b];
}

function renderGrid() {
  const form = document.getElementById("grid-form");
  const summary = document.getElementById("grid-summary");
  const canvas = document.getElementById("grid-canvas");
  const ctx = canvas.getContext("2d");
  let r;
  try {
    r = JSON.parse(delta_t_grid(Number(form.elements.n.value)));
  } catch (err) {
    showError(summary, err);
    return;
  }
  const max = Math.max(...r.delta_t_over_mg);
  summary.className = "";
  summary.textContent = `ΔT_min over k1 (horizontal) and k2 (vertical) in (−1, 1); 0 (dark) to ${fmt(max)} mg (bright).`;
  const img = ctx.createImageData(r.n, r.n);
  for (let i = 0; i < r.n; i++) {
    for (let j = 0; j < r.n; j++) {
      const [cr, cg, cb] = colour(r.delta_t_over_mg[i * r.n + j] / max);
      const o = 4 * ((r.n - 1 - j) * r.n + i);
      img.data.set([cr, cg, cb, 255], o);
    }
  }
  const off = new OffscreenCanvas(r.n, r.n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function bind(id, render) {
  document.getElementById(id).addEventListener("submit", (e) => {
    e.preventDefault();
    render();
  });
}

await init();
bind("solve-form", renderSolve);
bind("spin-form", renderSpin);
bind("grid-form", renderGrid);
renderSolve();
renderSpin();
renderGrid();
