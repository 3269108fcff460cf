import init, { DemoSimulation } from "./pkg/echo_pathways_wasm.js";

const $ = (id) => document.getElementById(id);
let sim = null;
let trail = [];
let playing = false;

function config() {
  return JSON.stringify({
    n: Number($("n").value),
    k_o: 15,
    epsilon: 0.45,
    alpha: Number($("alpha").value),
    q: Number($("q").value),
    p: 0.1,
    strategy: $("strategy").value,
    seed: Number($("seed").value),
  });
}

function report(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function reset() {
  try {
    sim?.free();
    sim = new DemoSimulation(config());
    trail = [];
    report(null);
    draw();
  } catch (e) {
    report(e);
  }
}

function drawHistogram() {
  const c = $("hist").getContext("2d");
  const counts = sim.histogram(50);
  const max = Math.max(...counts, 1);
  const w = c.canvas.width / counts.length;
  c.clearRect(0, 0, c.canvas.width, c.canvas.height);
  c.fillStyle = "#31688e";
  counts.forEach((v, k) => {
    const h = (v / max) * (c.canvas.height - 10);
    c.fillRect(k * w, c.canvas.height - h, w - 1, h);
  });
}

function drawPhase() {
  const c = $("phase").getContext("2d");
  const s = c.canvas.width;
  c.clearRect(0, 0, s, s);
  c.strokeStyle = "#ddd";
  c.beginPath();
  c.moveTo(0, s);
  c.lineTo(s, 0);
  c.stroke();
  c.strokeStyle = "#440154";
  c.beginPath();
  trail.forEach(([p, h], k) => {
    const x = p * s;
    const y = s - h * s;
    k ? c.lineTo(x, y) : c.moveTo(x, y);
  });
  c.stroke();
}

function drawPotential(view) {
  const c = $("potential").getContext("2d");
  const { width: w, height: h } = c.canvas;
  c.clearRect(0, 0, w, h);
  if (!view) return;
  const lo = Math.min(...view.potential);
  const hi = Math.max(...view.potential);
  const sy = (v) => h - 10 - ((v - lo) / (hi - lo || 1)) * (h - 20);
  const sx = (x) => ((x + 1) / 2) * w;
  c.strokeStyle = "#35b779";
  c.beginPath();
  view.x.forEach((x, k) => (k ? c.lineTo(sx(x), sy(view.potential[k])) : c.moveTo(sx(x), sy(view.potential[k]))));
  c.stroke();
  c.fillStyle = "#b00";
  view.minima.forEach((x) => c.fillRect(sx(x) - 2, h - 8, 4, 6));
}

function draw() {
  const ix = JSON.parse(sim.indices());
  trail.push([ix.i_p, ix.i_h]);
  $("status").textContent =
    `step ${ix.step}  rho ${ix.rho.toFixed(3)}  I_h ${ix.i_h.toFixed(3)}  ` +
    `I_p ${ix.i_p.toFixed(3)}  I_s ${ix.i_s.toFixed(3)}${ix.finished ? "  (finished)" : ""}`;
  drawHistogram();
  drawPhase();
  if (ix.finished) stop();
}

function advance(n) {
  try {
    sim.step(n);
    draw();
  } catch (e) {
    report(e);
    stop();
  }
}

function stop() {
  playing = false;
  $("play").textContent = "Run";
}

function loop() {
  if (!playing) return;
  advance(5);
  requestAnimationFrame(loop);
}

await init();
reset();

$("reset").onclick = () => {
  stop();
  reset();
};
$("step").onclick = () => advance(10);
$("play").onclick = () => {
  playing = !playing;
  $("play").textContent = playing ? "Pause" : "Run";
  loop();
};
$("switch").onclick = () => {
  try {
    sim.intervene(JSON.stringify({ kind: "set_strategy", strategy: $("strategy").value, k_h: 2 }));
    report(null);
  } catch (e) {
    report(e);
  }
};
$("landscape").onclick = () => {
  try {
    drawPotential(JSON.parse(sim.landscape()));
    report(null);
  } catch (e) {
    report(e);
  }
};
