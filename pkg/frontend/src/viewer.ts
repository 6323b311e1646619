/**
 * WebGL viewer: draws every (tile, plane) quad as textured geometry in the
 * source camera frame, back-to-front with standard alpha blending and the
 * depth test off. The camera is the source camera translated by the
 * interaction offset, so all warping happens in the rasterizer.
 */

import { parseTmpi, planeCount, textureBytes, TmpiFile } from "./format.js";
import { buildGpuTmpi, checkDrawOrder, GpuTmpi } from "./geometry.js";
import { defaultParallaxBox, ViewerState } from "./state.js";

const VERT = `
attribute vec3 aPos;
attribute vec2 aUv;
uniform vec3 uOffset;     // camera world offset, pre-rotated into cam frame
uniform vec4 uIntrinsics; // fx, fy, cx, cy
uniform vec2 uViewport;   // W, H in source pixels
varying vec2 vUv;
void main() {
  vec3 xt = aPos - uOffset;
  vec2 pix = vec2(uIntrinsics.x * xt.x + uIntrinsics.z * xt.z,
                  uIntrinsics.y * xt.y + uIntrinsics.w * xt.z);
  float w = xt.z;
  float xc = (2.0 * pix.x + (1.0 - uViewport.x) * w) / uViewport.x;
  float yc = -(2.0 * pix.y + (1.0 - uViewport.y) * w) / uViewport.y;
  gl_Position = vec4(xc, yc, 0.0, w);
  vUv = aUv;
}`;

const FRAG = `
precision mediump float;
uniform sampler2D uTex;
varying vec2 vUv;
void main() {
  gl_FragColor = texture2D(uTex, vUv);
}`;

function compile(gl: WebGLRenderingContext, type: number, src: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, src);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

interface SceneResources {
  gpu: GpuTmpi;
  textures: WebGLTexture[];
  vertexBuffer: WebGLBuffer;
}

export class TmpiViewer {
  readonly canvas: HTMLCanvasElement;
  state: ViewerState | null = null;
  onInfo: (text: string) => void = () => undefined;
  onFrameTime: (ms: number) => void = () => undefined;

  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private scene: SceneResources | null = null;
  private needsRedraw = false;

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
    const gl = canvas.getContext("webgl", { premultipliedAlpha: false });
    if (!gl) throw new Error("WebGL is not available");
    this.gl = gl;
    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERT));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FRAG));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
    }
    this.program = program;
    canvas.addEventListener("webglcontextlost", (e) => {
      e.preventDefault();
      this.onInfo("WebGL context lost — reload the page");
    });
  }

  /** Parse and upload a scene, releasing any previous one. */
  load(buffer: ArrayBuffer): TmpiFile {
    const file = parseTmpi(buffer);
    const gpu = buildGpuTmpi(file);
    if (!checkDrawOrder(gpu)) {
      throw new Error("draw order violates back-to-front invariant");
    }
    this.disposeScene();
    const gl = this.gl;
    const h = file.tileSize;
    const textures = gpu.quads.map((quad) => {
      const tex = gl.createTexture()!;
      gl.bindTexture(gl.TEXTURE_2D, tex);
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, h, h, 0, gl.RGBA,
        gl.UNSIGNED_BYTE, quad.rgba);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
      return tex;
    });
    // two triangles per quad, interleaved xyz + uv
    const verts = new Float32Array(gpu.quads.length * 6 * 5);
    gpu.quads.forEach((quad, qi) => {
      const v = quad.vertices;
      const corners = [
        [v[0], v[1], v[2], 0, 0],
        [v[3], v[4], v[5], 1, 0],
        [v[6], v[7], v[8], 0, 1],
        [v[9], v[10], v[11], 1, 1],
      ];
      const tri = [0, 1, 2, 2, 1, 3];
      tri.forEach((c, i) => verts.set(corners[c], (qi * 6 + i) * 5));
    });
    const vertexBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, vertexBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, verts, gl.STATIC_DRAW);

    this.scene = { gpu, textures, vertexBuffer };
    this.state = new ViewerState(gpu);
    this.canvas.width = file.imageWidth;
    this.canvas.height = file.imageHeight;
    this.onInfo(describe(file, gpu));
    this.requestRedraw();
    return file;
  }

  /** Redraw only when the state changed since the last frame. */
  requestRedraw(): void {
    if (this.needsRedraw) return;
    this.needsRedraw = true;
    requestAnimationFrame(() => {
      this.needsRedraw = false;
      this.renderFrame();
    });
  }

  renderFrame(): void {
    const scene = this.scene;
    const state = this.state;
    if (!scene || !state) return;
    const start = performance.now();
    const gl = this.gl;
    const file = scene.gpu.file;
    const cam = file.camera;
    const R = cam.rotation;
    const off = state.offset;
    // offset rotated into the source camera frame
    const camOff = [
      R[0] * off.x + R[1] * off.y + R[2] * off.z,
      R[3] * off.x + R[4] * off.y + R[5] * off.z,
      R[6] * off.x + R[7] * off.y + R[8] * off.z,
    ];

    gl.viewport(0, 0, this.canvas.width, this.canvas.height);
    gl.disable(gl.DEPTH_TEST);
    gl.enable(gl.BLEND);
    gl.blendFunc(gl.SRC_ALPHA, gl.ONE_MINUS_SRC_ALPHA);
    gl.clearColor(0, 0, 0, 1);
    gl.clear(gl.COLOR_BUFFER_BIT);
    gl.useProgram(this.program);

    gl.bindBuffer(gl.ARRAY_BUFFER, scene.vertexBuffer);
    const aPos = gl.getAttribLocation(this.program, "aPos");
    const aUv = gl.getAttribLocation(this.program, "aUv");
    gl.enableVertexAttribArray(aPos);
    gl.enableVertexAttribArray(aUv);
    gl.vertexAttribPointer(aPos, 3, gl.FLOAT, false, 20, 0);
    gl.vertexAttribPointer(aUv, 2, gl.FLOAT, false, 20, 12);
    gl.uniform3f(gl.getUniformLocation(this.program, "uOffset"),
      camOff[0], camOff[1], camOff[2]);
    gl.uniform4f(gl.getUniformLocation(this.program, "uIntrinsics"),
      cam.fx, cam.fy, cam.cx, cam.cy);
    gl.uniform2f(gl.getUniformLocation(this.program, "uViewport"),
      file.imageWidth, file.imageHeight);
    const uTex = gl.getUniformLocation(this.program, "uTex");
    gl.uniform1i(uTex, 0);
    gl.activeTexture(gl.TEXTURE0);

    for (const qi of scene.gpu.drawOrder) {
      gl.bindTexture(gl.TEXTURE_2D, scene.textures[qi]);
      gl.drawArrays(gl.TRIANGLES, qi * 6, 6);
    }
    this.onFrameTime(performance.now() - start);
  }

  private disposeScene(): void {
    if (!this.scene) return;
    const gl = this.gl;
    this.scene.textures.forEach((t) => gl.deleteTexture(t));
    gl.deleteBuffer(this.scene.vertexBuffer);
    this.scene = null;
    this.state = null;
  }

  dispose(): void {
    this.disposeScene();
  }
}

export function describe(file: TmpiFile, gpu: GpuTmpi): string {
  const box = defaultParallaxBox(gpu);
  const mb = (textureBytes(file) / (1024 * 1024)).toFixed(2);
  return [
    `image ${file.imageWidth}x${file.imageHeight}`,
    `tiles ${file.tiles.length} (${file.tileSize}px, stride ${file.stride})`,
    `planes ${planeCount(file)} (max ${file.maxPlanes}/tile)`,
    `texture memory ${mb} MiB`,
    `parallax box ±${box.x.toFixed(3)}`,
  ].join("\n");
}
