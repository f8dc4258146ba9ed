import init, { frontier, screening, ranking } from "./pkg/dea_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (v, d = 4) => Number(v).toFixed(d);

function call(fn, errorEl) {
  errorEl.textContent = "";
  try {
    return JSON.parse(fn());
  } catch (e) {
    errorEl.textContent = String(e);
    return null;
  }
}

// Frontier explorer

const initialPoints = [
  { id: "A", x: 1, y: 1 },
  { id: "B", x: 3, y: 4 },
  { id: "C", x: 2, y: 2 },
];
let points = initialPoints.map((p) => ({ ...p }));
let nextId = 0;
const X_MAX = 10;
const Y_MAX = 10;
const PAD = 30;

function freshId() {
  let id;
  do {
    id = "D" + nextId++;
  } while (points.some((p) => p.id === id));
  return id;
}

function toCanvas(c, x, y) {
  return [PAD + (x / X_MAX) * (c.width - 2 * PAD), c.height - PAD - (y / Y_MAX) * (c.height - 2 * PAD)];
}

function fromCanvas(c, px, py) {
  return [((px - PAD) / (c.width - 2 * PAD)) * X_MAX, ((c.height - PAD - py) / (c.height - 2 * PAD)) * Y_MAX];
}

function drawAxes(ctx, c) {
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#777";
  ctx.beginPath();
  ctx.moveTo(...toCanvas(c, 0, Y_MAX));
  ctx.lineTo(...toCanvas(c, 0, 0));
  ctx.lineTo(...toCanvas(c, X_MAX, 0));
  ctx.stroke();
  for (let t = 2; t <= 10; t += 2) {
    const [px, py0] = toCanvas(c, t, 0);
    ctx.fillText(t, px - 4, py0 + 14);
    const [px0, py] = toCanvas(c, 0, t);
    ctx.fillText(t, px0 - 18, py + 4);
  }
  ctx.fillText("input x", c.width - PAD - 40, c.height - 4);
  ctx.fillText("output y", 4, PAD - 12);
}

function renderFrontier() {
  const c = $("frontier-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  drawAxes(ctx, c);
  const table = $("frontier-table");
  table.innerHTML = "<tr><th>DMU</th><th>x</th><th>y</th><th>θ</th><th>peers</th></tr>";
  if (points.length === 0) return;
  const kind = document.querySelector("input[name=frontier]:checked").value;
  const view = call(() => frontier(JSON.stringify(points), kind), $("frontier-error"));
  if (!view) return;

  ctx.strokeStyle = "#2a6";
  ctx.lineWidth = 2;
  ctx.beginPath();
  view.polyline.forEach(([x, y], i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, ...toCanvas(c, x, y)));
  ctx.stroke();
  ctx.lineWidth = 1;

  for (const p of view.points) {
    const [px, py] = toCanvas(c, p.x, p.y);
    if (!p.efficient) {
      ctx.setLineDash([4, 3]);
      ctx.strokeStyle = "#c63";
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(...toCanvas(c, p.x, p.target_y));
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.fillStyle = p.efficient ? "#2a6" : "#c63";
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#222";
    ctx.fillText(p.id, px + 7, py - 7);

    const peers = p.peers.map((q) => `${q.id}:${fmt(q.weight, 3)}`).join("; ");
    const row = table.insertRow();
    for (const v of [p.id, fmt(p.x, 2), fmt(p.y, 2), fmt(p.theta), peers]) row.insertCell().textContent = v;
  }
}

$("frontier-canvas").addEventListener("click", (ev) => {
  const c = ev.currentTarget;
  const r = c.getBoundingClientRect();
  const [x, y] = fromCanvas(c, ev.clientX - r.left, ev.clientY - r.top);
  if (ev.shiftKey) {
    if (points.length === 0) return;
    const dist = (p) => (p.x - x) ** 2 + (p.y - y) ** 2;
    const nearest = points.reduce((a, b) => (dist(a) <= dist(b) ? a : b));
    points = points.filter((p) => p !== nearest);
  } else {
    if (x <= 0 || y <= 0 || x > X_MAX || y > Y_MAX) return;
    points.push({ id: freshId(), x: Math.round(x * 100) / 100, y: Math.round(y * 100) / 100 });
  }
  renderFrontier();
});
document.querySelectorAll("input[name=frontier]").forEach((el) => el.addEventListener("change", renderFrontier));
$("frontier-reset").addEventListener("click", () => {
  points = initialPoints.map((p) => ({ ...p }));
  renderFrontier();
});

// Screening heatmap

function renderScreening() {
  const t = Number($("screen-t").value);
  $("screen-t-value").textContent = t.toFixed(2);
  const view = call(
    () => screening(Number($("screen-seed").value), Number($("screen-n").value), t),
    $("screen-error"),
  );
  const c = $("screen-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const list = $("screen-dropped");
  list.innerHTML = "";
  if (!view) return;

  const p = view.variables.length;
  const label = 150;
  const cell = (c.width - label) / p;
  const dropped = new Set(view.dropped.map(([id]) => id));
  ctx.font = "11px system-ui";
  view.variables.forEach(([id, role], i) => {
    ctx.fillStyle = dropped.has(id) ? "#b00" : role === "input" ? "#246" : "#264";
    ctx.fillText((dropped.has(id) ? "✕ " : "") + id, 2, label + i * cell + cell * 0.7);
    ctx.save();
    ctx.translate(label + i * cell + cell * 0.7, label - 4);
    ctx.rotate(-Math.PI / 2);
    ctx.fillText(id, 0, 0);
    ctx.restore();
  });
  for (let a = 0; a < p; a++) {
    for (let b = 0; b < p; b++) {
      const r = view.matrix[a][b];
      let color = "#ddd";
      if (r !== null) {
        const m = Math.round(255 * (1 - Math.abs(r)));
        color = r >= 0 ? `rgb(255,${m},${m})` : `rgb(${m},${m},255)`;
      }
      ctx.fillStyle = color;
      ctx.fillRect(label + b * cell, label + a * cell, cell - 1, cell - 1);
      const sameRole = view.variables[a][1] === view.variables[b][1];
      if (a !== b && r !== null && sameRole && Math.abs(r) >= t) {
        ctx.strokeStyle = "#000";
        ctx.strokeRect(label + b * cell + 0.5, label + a * cell + 0.5, cell - 2, cell - 2);
      }
    }
  }
  for (const [id, reason] of view.dropped) {
    const li = document.createElement("li");
    li.textContent = `${id}: ${reason}`;
    list.appendChild(li);
  }
  if (view.dropped.length === 0) list.innerHTML = "<li class=muted>none</li>";
}

for (const id of ["screen-seed", "screen-n", "screen-t"]) $(id).addEventListener("input", renderScreening);

// Ranking

function renderRanking() {
  const view = call(
    () =>
      ranking(
        Number($("rank-seed").value),
        Number($("rank-n").value),
        Number($("rank-k").value),
        $("rank-order").value,
        $("rank-frontier").value,
      ),
    $("rank-error"),
  );
  const c = $("rank-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const table = $("rank-table");
  table.innerHTML = "<tr><th>rank</th><th>country</th><th>θ</th><th>share</th></tr>";
  if (!view) return;
  const meta = view.metadata;
  $("rank-summary").textContent =
    `${view.efficient.length} of ${meta.n_dmus} countries efficient; ` +
    `${meta.variables.length} variables after screening` +
    (meta.dropped_variables.length ? ` (dropped ${meta.dropped_variables.join(", ")})` : "");

  const shown = view.efficient.slice(0, 40);
  const maxShare = Math.max(...shown.map((e) => e.share));
  const selected = new Set(view.selection.map((m) => m.country));
  const bar = c.width / Math.max(shown.length, 1);
  shown.forEach((e, i) => {
    const h = (e.share / maxShare) * (c.height - 40);
    ctx.fillStyle = selected.has(e.country) ? "#2a6" : "#bbb";
    ctx.fillRect(i * bar + 1, c.height - 20 - h, bar - 2, h);
  });
  ctx.fillStyle = "#555";
  ctx.fillText(`first ${shown.length} efficient countries in ranking order; bar height = import share`, 4, c.height - 5);

  for (const m of view.selection) {
    const row = table.insertRow();
    for (const v of [m.rank, m.country, fmt(m.theta, 6), (100 * m.share).toFixed(3) + "%"]) row.insertCell().textContent = v;
  }
}

$("rank-run").addEventListener("click", renderRanking);

await init();
renderFrontier();
renderScreening();
renderRanking();
