import { SessionClient } from "./api.js";
import type { MaskDecoder, PixelSurface, ReportView } from "./app.js";
import { ScribbleApp } from "./app.js";
import type { SegmentResponse, Tool } from "./types.js";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function canvasSurface(canvas: HTMLCanvasElement): PixelSurface {
  return {
    resize(width, height) {
      canvas.width = width;
      canvas.height = height;
    },
    putPixels(rgba, width, height) {
      const ctx = canvas.getContext("2d")!;
      ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
    },
  };
}

const browserDecoder: MaskDecoder = {
  decode(pngBase64) {
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => {
        const c = document.createElement("canvas");
        c.width = img.width;
        c.height = img.height;
        const ctx = c.getContext("2d")!;
        ctx.drawImage(img, 0, 0);
        const data = ctx.getImageData(0, 0, img.width, img.height).data;
        const gray = new Uint8Array(img.width * img.height);
        for (let i = 0; i < gray.length; i++) gray[i] = data[i * 4];
        resolve({ width: img.width, height: img.height, gray });
      };
      img.onerror = () => reject(new Error("mask decode failed"));
      img.src = `data:image/png;base64,${pngBase64}`;
    });
  },
};

function reportView(): ReportView {
  const panel = $("report");
  const error = $("error");
  return {
    showReport(r: SegmentResponse) {
      error.textContent = "";
      const flags = r.bounds.lower_ok && r.bounds.upper_ok
        ? "bounds ok"
        : `bounds: lower ${r.bounds.lower_ok ? "ok" : "VIOLATED"}, ` +
          `upper ${r.bounds.upper_ok ? "ok" : "VIOLATED"}`;
      panel.innerHTML = [
        `<b>energy</b> ${r.energy.toFixed(3)}`,
        `<b>edges</b> ${r.edges}`,
        `<b>mean degree</b> ${r.degree_mean.toFixed(2)}`,
        `<b>gamma</b> ${r.gamma.toExponential(3)}`,
        `<b>seed</b> ${r.seed}`,
        `<b>total</b> ${Math.round(r.timings.total_ms)} ms`,
        flags,
      ].join(" &middot; ");
    },
    showError(message: string) {
      error.textContent = message;
    },
    clear() {
      panel.textContent = "upload an image, paint seeds, then segment";
      error.textContent = "";
    },
  };
}

function readParams(app: ScribbleApp): void {
  app.params = {
    divergence: ($("divergence") as HTMLSelectElement).value as
      "bregman" | "kl" | "hellinger",
    mode: ($("mode") as HTMLSelectElement).value as "similarity" | "literal",
    tau: Number(($("tau") as HTMLInputElement).value),
    degree: Number(($("degree") as HTMLInputElement).value),
    sigma: Number(($("sigma") as HTMLInputElement).value),
    beta: Number(($("beta") as HTMLInputElement).value),
    seed: Number(($("seed") as HTMLInputElement).value),
  };
}

function main(): void {
  const baseCanvas = $("base") as HTMLCanvasElement;
  const overlayCanvas = $("overlay") as HTMLCanvasElement;
  const scribbleCanvas = $("scribbles") as HTMLCanvasElement;
  const runButton = $("run") as HTMLButtonElement;

  const app = new ScribbleApp({
    api: new SessionClient(""),
    scribbleSurface: canvasSurface(scribbleCanvas),
    overlaySurface: canvasSurface(overlayCanvas),
    report: reportView(),
    maskDecoder: browserDecoder,
    onBusyChange(busy) {
      runButton.disabled = busy;
      runButton.textContent = busy ? "segmenting..." : "segment";
    },
  });

  ($("file") as HTMLInputElement).addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    await app.open(file);
    const { width, height } = app.size;
    baseCanvas.width = width;
    baseCanvas.height = height;
    const img = new Image();
    img.onload = () =>
      baseCanvas.getContext("2d")!.drawImage(img, 0, 0, width, height);
    img.src = URL.createObjectURL(file);
  });

  for (const tool of ["fg", "bg", "erase"] as Tool[]) {
    $(`tool-${tool}`).addEventListener("click", () => {
      app.tool = tool;
      for (const t of ["fg", "bg", "erase"]) {
        $(`tool-${t}`).classList.toggle("active", t === tool);
      }
    });
  }
  $("radius").addEventListener("input", (ev) => {
    app.brushRadius = Number((ev.target as HTMLInputElement).value);
  });
  $("opacity").addEventListener("input", (ev) => {
    app.setOverlayOpacity(Number((ev.target as HTMLInputElement).value) / 100);
  });
  $("undo").addEventListener("click", () => app.undo());
  $("redo").addEventListener("click", () => app.redo());

  const pointerPos = (ev: PointerEvent): [number, number] => {
    const rect = scribbleCanvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * scribbleCanvas.width;
    const y = ((ev.clientY - rect.top) / rect.height) * scribbleCanvas.height;
    return [x, y];
  };
  scribbleCanvas.addEventListener("pointerdown", (ev) => {
    scribbleCanvas.setPointerCapture(ev.pointerId);
    app.beginStroke(...pointerPos(ev));
  });
  scribbleCanvas.addEventListener("pointermove", (ev) => {
    if (ev.buttons) app.extendStroke(...pointerPos(ev));
  });
  scribbleCanvas.addEventListener("pointerup", () => app.endStroke());

  runButton.addEventListener("click", () => {
    readParams(app);
    void app.run();
  });
}

main();
