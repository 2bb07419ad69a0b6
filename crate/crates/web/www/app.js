import init, { hilbert_mumford, refine, p1n_classify } from "./pkg/gitstrata_web.js";

const $ = (id) => document.getElementById(id);

// "p/q" -> float, for drawing only.
const num = (s) => {
  const [p, q] = s.split("/");
  return q === undefined ? Number(p) : Number(p) / Number(q);
};

// Andrew's monotone chain.
function hull(pts) {
  const ps = [...pts].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  if (ps.length < 3) return ps;
  const cross = (o, a, b) => (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const half = (list) => {
    const out = [];
    for (const p of list) {
      while (out.length >= 2 && cross(out[out.length - 2], out[out.length - 1], p) <= 0) out.pop();
      out.push(p);
    }
    out.pop();
    return out;
  };
  return half(ps).concat(half([...ps].reverse()));
}

function draw(geometry) {
  const ctx = $("hm-canvas").getContext("2d");
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  if (geometry.dim !== 2) {
    ctx.fillText("plot available for two-dimensional tori", 10, 20);
    return;
  }
  const pts = geometry.weights.map((v) => v.map(num));
  const beta = geometry.beta.map(num);
  const r = Math.max(1, ...pts.flat().map(Math.abs), ...beta.map(Math.abs)) * 1.2;
  const to = ([x, y]) => [w / 2 + (x / r) * (w / 2), h / 2 - (y / r) * (h / 2)];

  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();

  const sel = hull(geometry.support.map((i) => pts[i]));
  ctx.fillStyle = "rgba(60, 120, 220, 0.2)";
  ctx.strokeStyle = "#3c78dc";
  ctx.beginPath();
  sel.forEach((p, k) => (k ? ctx.lineTo(...to(p)) : ctx.moveTo(...to(p))));
  ctx.closePath();
  ctx.fill();
  ctx.stroke();

  pts.forEach((p, i) => {
    const [x, y] = to(p);
    ctx.fillStyle = geometry.support.includes(i) ? "#3c78dc" : "#999";
    ctx.beginPath(); ctx.arc(x, y, 4, 0, 2 * Math.PI); ctx.fill();
    ctx.fillText(String(i), x + 6, y - 6);
  });

  const [bx, by] = to(beta);
  ctx.strokeStyle = "#d33";
  ctx.beginPath(); ctx.moveTo(w / 2, h / 2); ctx.lineTo(bx, by); ctx.stroke();
  ctx.fillStyle = "#d33";
  ctx.beginPath(); ctx.arc(bx, by, 4, 0, 2 * Math.PI); ctx.fill();
  ctx.fillText(`beta = (${geometry.beta.join(", ")})`, 8, h - 8);
}

function show(id, text) {
  const v = JSON.parse(text);
  $(id).textContent = JSON.stringify(v, null, 2);
  return v;
}

await init();

$("hm-run").onclick = () => {
  const v = show("hm-out", hilbert_mumford($("hm-problem").value, $("hm-support").value));
  if (v.geometry) {
    draw(v.geometry);
    $("hm-out").textContent = JSON.stringify(v.report.result, null, 2);
  }
};

$("refine-run").onclick = () => {
  const v = JSON.parse(refine($("refine-input").value));
  if (v.error) {
    $("refine-out").textContent = JSON.stringify(v, null, 2);
    return;
  }
  const r = v.report.result;
  const leaves = r.leaves.map((l) => `${l.index}\t${l.label}\t[${l.cases.join(" > ")}]`).join("\n");
  $("refine-out").textContent = `outcome: ${v.report.outcome}\n\n${leaves}`;
};

$("p1n-run").onclick = () => show("p1n-out", p1n_classify(Number($("p1n-n").value), $("p1n-input").value));
