// Canvas drawing of a SceneModel. Intended geometry is light blue,
// perceived geometry dark blue; diverged points render as open markers.

import { SceneModel, Viewport, fitViewport, worldToScreen } from "./scene.js";
import { ViewTab } from "./state.js";

export const COLORS = {
    intended: "#a6cbe8",
    perceived: "#1f4e79",
    diverged: "#b04a4a",
    segment: "#9aa7b5",
    eye: "#c0392b",
    cop: "#2c3e50",
    camera: "#8e44ad",
    displayLine: "#7f8c8d",
};

const AXIS_LABELS: Record<ViewTab, { u: string; v: string }> = {
    top: { u: "x (m)", v: "z (m)" },
    side: { u: "z (m)", v: "y (m)" },
    front: { u: "x (m)", v: "y (m)" },
};

export function drawScene(
    ctx: CanvasRenderingContext2D,
    scene: SceneModel,
    view: ViewTab,
    stale: boolean,
): void {
    const { width, height } = ctx.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, width, height);
    const vp: Viewport = fitViewport(scene.bounds, width, height);

    if (scene.displayLine) {
        ctx.strokeStyle = COLORS.displayLine;
        ctx.setLineDash([6, 4]);
        ctx.beginPath();
        if (scene.displayLine.axis === "v") {
            const a = worldToScreen(vp, scene.bounds.uMin, scene.displayLine.value);
            const b = worldToScreen(vp, scene.bounds.uMax, scene.displayLine.value);
            ctx.moveTo(0, a.y);
            ctx.lineTo(width, b.y);
        } else {
            const a = worldToScreen(vp, scene.displayLine.value, scene.bounds.vMin);
            ctx.moveTo(a.x, 0);
            ctx.lineTo(a.x, height);
        }
        ctx.stroke();
        ctx.setLineDash([]);
    }

    ctx.strokeStyle = COLORS.segment;
    ctx.lineWidth = 1;
    for (const seg of scene.segments) {
        const a = worldToScreen(vp, seg.u1, seg.v1);
        const b = worldToScreen(vp, seg.u2, seg.v2);
        ctx.beginPath();
        ctx.moveTo(a.x, a.y);
        ctx.lineTo(b.x, b.y);
        ctx.stroke();
    }

    for (const marker of scene.markers) {
        const { x, y } = worldToScreen(vp, marker.u, marker.v);
        ctx.beginPath();
        switch (marker.kind) {
            case "intended":
                ctx.fillStyle = COLORS.intended;
                ctx.arc(x, y, 3, 0, 2 * Math.PI);
                ctx.fill();
                break;
            case "perceived":
                ctx.fillStyle = COLORS.perceived;
                ctx.arc(x, y, 3, 0, 2 * Math.PI);
                ctx.fill();
                break;
            case "diverged":
                ctx.strokeStyle = COLORS.diverged;
                ctx.arc(x, y, 4, 0, 2 * Math.PI);
                ctx.stroke();
                break;
            case "eye":
                ctx.fillStyle = COLORS.eye;
                ctx.arc(x, y, 5, 0, 2 * Math.PI);
                ctx.fill();
                break;
            case "cop":
                ctx.strokeStyle = COLORS.cop;
                ctx.lineWidth = 2;
                ctx.moveTo(x - 5, y);
                ctx.lineTo(x + 5, y);
                ctx.moveTo(x, y - 5);
                ctx.lineTo(x, y + 5);
                ctx.stroke();
                ctx.lineWidth = 1;
                break;
            case "camera":
                ctx.fillStyle = COLORS.camera;
                ctx.fillRect(x - 4, y - 3, 8, 6);
                break;
        }
    }

    ctx.fillStyle = "#444444";
    ctx.font = "12px sans-serif";
    const labels = AXIS_LABELS[view];
    ctx.fillText(labels.u, width - 48, height - 8);
    ctx.save();
    ctx.translate(12, 48);
    ctx.rotate(-Math.PI / 2);
    ctx.fillText(labels.v, -36, 0);
    ctx.restore();

    if (scene.nDiverged > 0) {
        ctx.fillStyle = COLORS.diverged;
        ctx.fillText(`${scene.nDiverged} diverged point(s) shown as open markers`, 12, 16);
    }
    if (stale) {
        ctx.fillStyle = "#a05a00";
        ctx.fillText("showing stale field (last request failed)", 12, 32);
    }
}
