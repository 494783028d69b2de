// Persistent explorer state: error sliders, headset parameters, frame and
// view toggles, grid spec. Fully serializable to a URL query string so a
// configuration can be shared; the round trip must reproduce the identical
// field request body.

export type ErrorFamily = "none" | "passthrough" | "ipd-iad" | "eye-relief" | "custom";
export type FrameKind = "hmd" | "egocentric";
export type ViewTab = "top" | "side" | "front";

export interface GridSpec {
    xMin: number;
    xMax: number;
    nx: number;
    zMin: number;
    zMax: number;
    nz: number;
    y: number;
}

export interface Vec3 {
    x: number;
    y: number;
    z: number;
}

// Slider ranges mirror the service sanity bounds (meters).
export const RENDER_OFFSET_LIMIT = 0.2;
export const VIEW_OFFSET_LIMIT = 0.1;
export const PARALLAX_LIMIT = 0.01;

export const MAGNITUDE_LIMITS: Record<ErrorFamily, number> = {
    none: 0,
    passthrough: RENDER_OFFSET_LIMIT,
    "ipd-iad": VIEW_OFFSET_LIMIT,
    "eye-relief": VIEW_OFFSET_LIMIT,
    custom: RENDER_OFFSET_LIMIT,
};

export const DEFAULT_GRID: GridSpec = {
    xMin: -0.5, xMax: 0.5, nx: 21,
    zMin: 0.2, zMax: 3.0, nz: 29,
    y: 0,
};

const FAMILIES: ErrorFamily[] = ["none", "passthrough", "ipd-iad", "eye-relief", "custom"];

export interface FieldRequestGrid {
    x_min_m: number;
    x_max_m: number;
    nx: number;
    z_min_m: number;
    z_max_m: number;
    nz: number;
    y_m: number;
}

export interface FieldRequest {
    family: string;
    magnitude_m?: number;
    render_offset_m?: [number, number, number];
    ipd_m: number;
    vid_m: number;
    parallax_m: number;
    grid: FieldRequestGrid;
}

function clamp(value: number, lo: number, hi: number): number {
    return Math.min(hi, Math.max(lo, value));
}

function parseNumber(raw: string | null, fallback: number): number {
    if (raw === null) return fallback;
    const value = Number(raw);
    return Number.isFinite(value) ? value : fallback;
}

export class ExplorerState {
    family: ErrorFamily = "none";
    magnitude = 0;
    renderOffset: Vec3 = { x: 0, y: 0, z: 0 };
    parallax = 0;
    ipd = 0.064;
    vid = 1.3;
    frame: FrameKind = "hmd";
    view: ViewTab = "top";
    grid: GridSpec = { ...DEFAULT_GRID };

    clampedMagnitude(): number {
        const limit = MAGNITUDE_LIMITS[this.family];
        return clamp(this.magnitude, -limit, limit);
    }

    // The exact body for POST /api/field; all geometry math happens on the
    // service side.
    fieldRequestBody(): FieldRequest {
        const body: FieldRequest = {
            family: this.family,
            ipd_m: this.ipd,
            vid_m: this.vid,
            parallax_m: clamp(this.parallax, 0, PARALLAX_LIMIT),
            grid: {
                x_min_m: this.grid.xMin,
                x_max_m: this.grid.xMax,
                nx: this.grid.nx,
                z_min_m: this.grid.zMin,
                z_max_m: this.grid.zMax,
                nz: this.grid.nz,
                y_m: this.grid.y,
            },
        };
        if (this.family === "custom") {
            const limit = RENDER_OFFSET_LIMIT;
            body.render_offset_m = [
                clamp(this.renderOffset.x, -limit, limit),
                clamp(this.renderOffset.y, -limit, limit),
                clamp(this.renderOffset.z, -limit, limit),
            ];
        } else if (this.family !== "none") {
            body.magnitude_m = this.clampedMagnitude();
        }
        return body;
    }

    toQuery(): string {
        const params = new URLSearchParams();
        params.set("family", this.family);
        params.set("mag", String(this.magnitude));
        if (this.family === "custom") {
            params.set("ro", `${this.renderOffset.x},${this.renderOffset.y},${this.renderOffset.z}`);
        }
        params.set("parallax", String(this.parallax));
        params.set("ipd", String(this.ipd));
        params.set("vid", String(this.vid));
        params.set("frame", this.frame);
        params.set("view", this.view);
        const g = this.grid;
        params.set("grid", [g.xMin, g.xMax, g.nx, g.zMin, g.zMax, g.nz, g.y].join(","));
        return params.toString();
    }

    static fromQuery(query: string): ExplorerState {
        const params = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
        const state = new ExplorerState();

        const family = params.get("family");
        if (family && (FAMILIES as string[]).includes(family)) {
            state.family = family as ErrorFamily;
        }
        state.magnitude = parseNumber(params.get("mag"), state.magnitude);
        const ro = params.get("ro");
        if (ro) {
            const parts = ro.split(",").map(Number);
            if (parts.length === 3 && parts.every(Number.isFinite)) {
                state.renderOffset = { x: parts[0], y: parts[1], z: parts[2] };
            }
        }
        state.parallax = parseNumber(params.get("parallax"), state.parallax);
        state.ipd = parseNumber(params.get("ipd"), state.ipd);
        state.vid = parseNumber(params.get("vid"), state.vid);
        const frame = params.get("frame");
        if (frame === "hmd" || frame === "egocentric") state.frame = frame;
        const view = params.get("view");
        if (view === "top" || view === "side" || view === "front") state.view = view;

        const grid = params.get("grid");
        if (grid) {
            const parts = grid.split(",").map(Number);
            if (parts.length === 7 && parts.every(Number.isFinite)) {
                const [xMin, xMax, nx, zMin, zMax, nz, y] = parts;
                if (xMin < xMax && zMin < zMax && zMin > 0 && nx >= 2 && nz >= 2) {
                    state.grid = { xMin, xMax, nx: Math.round(nx), zMin, zMax, nz: Math.round(nz), y };
                }
            }
        }
        return state;
    }
}
