/** Page wiring: file loading, pointer controls, info panel. */

import { TmpiFormatError } from "./format.js";
import { TmpiViewer } from "./viewer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function start(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const info = el<HTMLElement>("info");
  const frameTime = el<HTMLElement>("frame-time");
  const status = el<HTMLElement>("status");
  const fileInput = el<HTMLInputElement>("file-input");

  const viewer = new TmpiViewer(canvas);
  viewer.onInfo = (text) => {
    info.textContent = text;
  };
  viewer.onFrameTime = (ms) => {
    frameTime.textContent = `${ms.toFixed(1)} ms`;
  };

  const loadBuffer = (buffer: ArrayBuffer, name: string) => {
    try {
      viewer.load(buffer);
      status.textContent = `loaded ${name}`;
    } catch (err) {
      if (err instanceof TmpiFormatError) {
        status.textContent = `could not load ${name}: ${err.message}`;
      } else {
        throw err;
      }
    }
  };

  const loadFile = (file: File) => {
    file.arrayBuffer().then((buf) => loadBuffer(buf, file.name));
  };

  fileInput.addEventListener("change", () => {
    if (fileInput.files?.length) loadFile(fileInput.files[0]);
  });
  document.addEventListener("dragover", (e) => e.preventDefault());
  document.addEventListener("drop", (e) => {
    e.preventDefault();
    if (e.dataTransfer?.files.length) loadFile(e.dataTransfer.files[0]);
  });

  // pointer drag -> (x, y) parallax; wheel -> z dolly
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging || !viewer.state) return;
    // full canvas width spans the whole parallax box
    const pixelsPerUnit = canvas.clientWidth / (2 * viewer.state.box.x);
    viewer.state.drag(e.clientX - lastX, e.clientY - lastY, pixelsPerUnit);
    lastX = e.clientX;
    lastY = e.clientY;
    viewer.requestRedraw();
  });
  canvas.addEventListener("wheel", (e) => {
    if (!viewer.state) return;
    e.preventDefault();
    viewer.state.dolly((e.deltaY / 500) * viewer.state.box.z);
    viewer.requestRedraw();
  });
  canvas.addEventListener("dblclick", () => {
    viewer.state?.reset();
    viewer.requestRedraw();
  });
}

start();
