// Glue between the page and the wasm module built into ./pkg.
import init, { Scene, Settings } from "./pkg/jeo_web.js";

const $ = (id) => document.getElementById(id);
let scene = null;
let recon = null;

function draw(id, values, n, scale = 1) {
  const canvas = $(id);
  canvas.width = n;
  canvas.height = n;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  for (let i = 0; i < n * n; i++) {
    const v = Math.max(0, Math.min(255, Math.round((255 * values[i]) / scale)));
    img.data[4 * i] = img.data[4 * i + 1] = img.data[4 * i + 2] = v;
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

function num(id) {
  return Number($(id).value);
}

function status(msg) {
  $("status").textContent = msg;
}

function simulate() {
  try {
    scene?.free();
    scene = new Scene(num("size"), num("coils"), num("accel"), $("scheme").value, num("noise"), num("seed"));
  } catch (e) {
    status(String(e));
    return;
  }
  status("");
  const n = scene.size();
  draw("gt", scene.ground_truth(), n);
  draw("mask", scene.mask(), n);
  draw("zf", scene.zero_filled(), n);
  draw("pne", scene.initial_nonedge(), n);
  $("maskcap").textContent = `k-space mask (${(100 * scene.sampled_fraction()).toFixed(1)}% sampled)`;
  $("zfcap").textContent = `zero-filled, ${scene.zero_filled_psnr().toFixed(2)} dB`;
  reconstruct();
}

function reconstruct() {
  if (!scene) return;
  const s = new Settings();
  s.stages = num("stages");
  s.rho = num("rho");
  s.alpha = num("alpha");
  s.beta = num("beta");
  s.step = num("step");
  s.shrink = num("shrink");
  s.edge = $("edge").checked;
  try {
    recon?.free();
    recon = scene.reconstruct(s);
  } catch (e) {
    status(String(e));
    return;
  }
  status("");
  const n = scene.size();
  draw("recon", recon.image(), n);
  $("reconcap").textContent = `reconstruction, ${recon.psnr().toFixed(2)} dB`;
  $("metrics").textContent = `PSNR ${recon.psnr().toFixed(2)} dB, SSIM ${recon.ssim().toFixed(3)}`;
  const slider = $("stage");
  slider.max = Math.max(0, recon.map_count() - 1);
  slider.value = slider.max;
  slider.disabled = recon.map_count() === 0;
  showStage();
}

function showStage() {
  if (!recon || recon.map_count() === 0) return;
  const k = num("stage");
  $("stageval").textContent = k;
  draw("pne", recon.nonedge(k), scene.size());
}

await init();
$("simulate").onclick = simulate;
$("reconstruct").onclick = reconstruct;
$("stage").oninput = showStage;
simulate();
