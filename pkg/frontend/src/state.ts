/** Viewer interaction state: a camera offset bounded to a parallax box. */

import { GpuTmpi } from "./geometry.js";
import { ViewOffset } from "./compositor.js";

export interface ParallaxBox {
  x: number;
  y: number;
  z: number;
}

/** Default box: +/- 5% of the scene's median plane depth per axis. */
export const BOX_FRACTION = 0.05;

export function defaultParallaxBox(gpu: GpuTmpi): ParallaxBox {
  const r = BOX_FRACTION * gpu.medianDepth;
  return { x: r, y: r, z: r };
}

export function clampOffset(off: ViewOffset, box: ParallaxBox): ViewOffset {
  const clamp = (v: number, r: number) => Math.min(r, Math.max(-r, v));
  return { x: clamp(off.x, box.x), y: clamp(off.y, box.y), z: clamp(off.z, box.z) };
}

export class ViewerState {
  offset: ViewOffset = { x: 0, y: 0, z: 0 };
  readonly box: ParallaxBox;

  constructor(gpu: GpuTmpi, box?: ParallaxBox) {
    this.box = box ?? defaultParallaxBox(gpu);
  }

  /** Pointer drag in screen pixels -> (x, y) offset. Dragging right moves
   *  the camera right (content appears to shift left, near more than far). */
  drag(dxPixels: number, dyPixels: number, pixelsPerUnit: number): void {
    this.offset = clampOffset(
      {
        x: this.offset.x + dxPixels / pixelsPerUnit,
        y: this.offset.y + dyPixels / pixelsPerUnit,
        z: this.offset.z,
      },
      this.box,
    );
  }

  /** Scroll / pinch -> z offset (dolly). */
  dolly(delta: number): void {
    this.offset = clampOffset(
      { x: this.offset.x, y: this.offset.y, z: this.offset.z + delta },
      this.box,
    );
  }

  reset(): void {
    this.offset = { x: 0, y: 0, z: 0 };
  }
}
