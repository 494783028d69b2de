// Pure scene construction: turns a fetched distortion field plus the UI
// state into 2D drawing primitives. The only math here is axis selection,
// the frame re-anchoring translation (derived from the service's own
// hmd/egocentric pair) and the affine world-to-screen fit.

import { FieldPoint, FieldResponse } from "./api.js";
import { ExplorerState, FrameKind, ViewTab } from "./state.js";

export type MarkerKind = "intended" | "perceived" | "diverged" | "eye" | "cop" | "camera";

export interface Marker {
    u: number;
    v: number;
    kind: MarkerKind;
}

export interface Segment {
    u1: number;
    v1: number;
    u2: number;
    v2: number;
}

export interface AxisLine {
    axis: "u" | "v";
    value: number;
}

export interface Bounds {
    uMin: number;
    uMax: number;
    vMin: number;
    vMax: number;
}

export interface SceneModel {
    markers: Marker[];
    segments: Segment[];
    displayLine: AxisLine | null;
    bounds: Bounds;
    nDiverged: number;
}

type Vec3 = [number, number, number];

// Cyclopean eye position in HMD coordinates, recovered from the service's
// paired outputs (hmd minus egocentric); zero when nothing converged.
export function frameShift(points: FieldPoint[]): Vec3 {
    for (const p of points) {
        if (p.status === "converged" && p.perceived_hmd && p.perceived_ego) {
            return [
                p.perceived_hmd[0] - p.perceived_ego[0],
                p.perceived_hmd[1] - p.perceived_ego[1],
                p.perceived_hmd[2] - p.perceived_ego[2],
            ];
        }
    }
    return [0, 0, 0];
}

// Axis selection per view tab: top is the x-z slice, side is z-y, front is x-y.
export function projectAxes(view: ViewTab, p: Vec3): { u: number; v: number } {
    switch (view) {
        case "top":
            return { u: p[0], v: p[2] };
        case "side":
            return { u: p[2], v: p[1] };
        case "front":
            return { u: p[0], v: p[1] };
    }
}

function shifted(p: Vec3, shift: Vec3, frame: FrameKind): Vec3 {
    if (frame === "hmd") return p;
    return [p[0] - shift[0], p[1] - shift[1], p[2] - shift[2]];
}

// Eye/CoP chrome positions from the slider values (display only; perceived
// geometry always comes from the service).
export function rigMarkers(state: ExplorerState): { eyes: Vec3[]; cops: Vec3[]; cameras: Vec3[] } {
    const magnitude = state.family === "none" ? 0 : state.clampedMagnitude();
    const iad = state.family === "ipd-iad" ? state.ipd + magnitude : state.ipd;
    const eyeZ = state.family === "eye-relief" ? magnitude : 0;
    const eyes: Vec3[] = [[-state.ipd / 2, 0, eyeZ], [state.ipd / 2, 0, eyeZ]];
    const cops: Vec3[] = [[-iad / 2, 0, 0], [iad / 2, 0, 0]];
    const cameras: Vec3[] = [];
    if (state.family === "passthrough") {
        cameras.push([-iad / 2, 0, magnitude], [iad / 2, 0, magnitude]);
    } else if (state.family === "custom") {
        const o = state.renderOffset;
        cameras.push([-iad / 2 + o.x, o.y, o.z], [iad / 2 + o.x, o.y, o.z]);
    }
    return { eyes, cops, cameras };
}

export function buildScene(state: ExplorerState, field: FieldResponse): SceneModel {
    const shift = frameShift(field.points);
    const frame = state.frame;
    const view = state.view;
    const markers: Marker[] = [];
    const segments: Segment[] = [];
    let nDiverged = 0;

    const place = (p: Vec3, kind: MarkerKind) => {
        const { u, v } = projectAxes(view, shifted(p, shift, frame));
        markers.push({ u, v, kind });
        return { u, v };
    };

    for (const point of field.points) {
        const intended = place(point.intended, "intended");
        if (point.status === "converged" && point.perceived_hmd) {
            const perceived = place(point.perceived_hmd, "perceived");
            segments.push({ u1: intended.u, v1: intended.v, u2: perceived.u, v2: perceived.v });
        } else {
            nDiverged += 1;
            markers.push({ u: intended.u, v: intended.v, kind: "diverged" });
        }
    }

    const rig = rigMarkers(state);
    rig.eyes.forEach((p) => place(p, "eye"));
    rig.cops.forEach((p) => place(p, "cop"));
    rig.cameras.forEach((p) => place(p, "camera"));

    // The virtual display plane z = vid appears as a line in the top and
    // side views and is parallel to the front view.
    let displayLine: AxisLine | null = null;
    const vidShifted = frame === "hmd" ? state.vid : state.vid - shift[2];
    if (view === "top") displayLine = { axis: "v", value: vidShifted };
    else if (view === "side") displayLine = { axis: "u", value: vidShifted };

    let uMin = Infinity, uMax = -Infinity, vMin = Infinity, vMax = -Infinity;
    for (const m of markers) {
        uMin = Math.min(uMin, m.u);
        uMax = Math.max(uMax, m.u);
        vMin = Math.min(vMin, m.v);
        vMax = Math.max(vMax, m.v);
    }
    if (displayLine?.axis === "v") {
        vMin = Math.min(vMin, displayLine.value);
        vMax = Math.max(vMax, displayLine.value);
    } else if (displayLine?.axis === "u") {
        uMin = Math.min(uMin, displayLine.value);
        uMax = Math.max(uMax, displayLine.value);
    }
    if (!Number.isFinite(uMin)) {
        uMin = -1; uMax = 1; vMin = -1; vMax = 1;
    }
    if (uMax - uMin < 1e-9) { uMin -= 0.1; uMax += 0.1; }
    if (vMax - vMin < 1e-9) { vMin -= 0.1; vMax += 0.1; }

    return { markers, segments, displayLine, bounds: { uMin, uMax, vMin, vMax }, nDiverged };
}

export interface Viewport {
    scale: number;
    originX: number;
    originY: number;
}

// Uniform-scale affine fit of the scene bounds into a canvas, v up.
export function fitViewport(bounds: Bounds, width: number, height: number, margin = 30): Viewport {
    const spanU = bounds.uMax - bounds.uMin;
    const spanV = bounds.vMax - bounds.vMin;
    const scale = Math.min((width - 2 * margin) / spanU, (height - 2 * margin) / spanV);
    const originX = margin + (width - 2 * margin - spanU * scale) / 2 - bounds.uMin * scale;
    const originY = height - margin - (height - 2 * margin - spanV * scale) / 2 + bounds.vMin * scale;
    return { scale, originX, originY };
}

export function worldToScreen(vp: Viewport, u: number, v: number): { x: number; y: number } {
    return { x: vp.originX + u * vp.scale, y: vp.originY - v * vp.scale };
}
