// DOM wiring: controls on the left, canvas on the right. Parameter changes
// update the URL, trigger a rate-limited field fetch and redraw; frame and
// view toggles redraw from the cached field without refetching.

import { FieldClient, FieldResponse, ServiceError } from "./api.js";
import { rateLimit } from "./debounce.js";
import { drawScene } from "./render.js";
import { buildScene } from "./scene.js";
import { ErrorFamily, ExplorerState, MAGNITUDE_LIMITS } from "./state.js";

const FETCH_INTERVAL_MS = 100; // at most 10 requests/second while dragging

const PRESET_MAGNITUDES: Record<string, number> = {
    passthrough: 0.055,
    "ipd-iad": -0.012,
    "eye-relief": 0.03,
};

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

function defaultBaseUrl(): string {
    const fromQuery = new URLSearchParams(window.location.search).get("api");
    return fromQuery ?? "http://127.0.0.1:8000";
}

class ExplorerApp {
    private state: ExplorerState;
    private client: FieldClient;
    private field: FieldResponse | null = null;
    private stale = false;
    private readonly canvas: HTMLCanvasElement;
    private readonly banner: HTMLElement;
    private readonly requestField = rateLimit(() => void this.fetchNow(), FETCH_INTERVAL_MS);

    constructor() {
        this.state = ExplorerState.fromQuery(window.location.search);
        this.client = new FieldClient(defaultBaseUrl());
        this.canvas = el<HTMLCanvasElement>("scene");
        this.banner = el<HTMLElement>("banner");
        this.bindControls();
        this.syncControls();
        void this.fetchNow();
    }

    private bindControls(): void {
        el<HTMLSelectElement>("family").addEventListener("change", (event) => {
            const family = (event.target as HTMLSelectElement).value as ErrorFamily;
            this.state.family = family;
            this.state.magnitude = PRESET_MAGNITUDES[family] ?? 0;
            this.syncControls();
            this.onParameterChange();
        });

        const magnitudeSlider = el<HTMLInputElement>("magnitude");
        magnitudeSlider.addEventListener("input", () => {
            this.state.magnitude = Number(magnitudeSlider.value);
            el<HTMLElement>("magnitude-value").textContent =
                `${(this.state.magnitude * 1000).toFixed(1)} mm`;
            this.onParameterChange();
        });

        for (const axis of ["x", "y", "z"] as const) {
            const slider = el<HTMLInputElement>(`ro-${axis}`);
            slider.addEventListener("input", () => {
                this.state.renderOffset[axis] = Number(slider.value);
                this.onParameterChange();
            });
        }

        const parallax = el<HTMLInputElement>("parallax");
        parallax.addEventListener("input", () => {
            this.state.parallax = Number(parallax.value);
            el<HTMLElement>("parallax-value").textContent =
                `${(this.state.parallax * 1000).toFixed(1)} mm`;
            this.onParameterChange();
        });

        for (const key of ["ipd", "vid"] as const) {
            const input = el<HTMLInputElement>(key);
            input.addEventListener("change", () => {
                const value = Number(input.value);
                if (!Number.isFinite(value) || value <= 0) {
                    input.classList.add("invalid");
                    return; // inline validation: no request for bad entries
                }
                input.classList.remove("invalid");
                this.state[key] = value;
                this.onParameterChange();
            });
        }

        el<HTMLSelectElement>("frame").addEventListener("change", (event) => {
            this.state.frame = (event.target as HTMLSelectElement).value as "hmd" | "egocentric";
            this.pushUrl();
            this.redraw(); // both frames are already in the field; no fetch
        });
        el<HTMLSelectElement>("view").addEventListener("change", (event) => {
            this.state.view = (event.target as HTMLSelectElement).value as "top" | "side" | "front";
            this.pushUrl();
            this.redraw();
        });

        const base = el<HTMLInputElement>("base-url");
        base.value = defaultBaseUrl();
        base.addEventListener("change", () => {
            this.client.setBaseUrl(base.value);
            this.onParameterChange();
        });
    }

    private syncControls(): void {
        el<HTMLSelectElement>("family").value = this.state.family;
        const magnitudeSlider = el<HTMLInputElement>("magnitude");
        const limit = MAGNITUDE_LIMITS[this.state.family];
        magnitudeSlider.min = String(-limit);
        magnitudeSlider.max = String(limit);
        magnitudeSlider.step = "0.001";
        magnitudeSlider.value = String(this.state.magnitude);
        magnitudeSlider.disabled = this.state.family === "none" || this.state.family === "custom";
        el<HTMLElement>("magnitude-value").textContent =
            `${(this.state.magnitude * 1000).toFixed(1)} mm`;
        el<HTMLElement>("custom-offsets").style.display =
            this.state.family === "custom" ? "block" : "none";
        el<HTMLInputElement>("parallax").value = String(this.state.parallax);
        el<HTMLElement>("parallax-value").textContent =
            `${(this.state.parallax * 1000).toFixed(1)} mm`;
        el<HTMLInputElement>("ipd").value = String(this.state.ipd);
        el<HTMLInputElement>("vid").value = String(this.state.vid);
        el<HTMLSelectElement>("frame").value = this.state.frame;
        el<HTMLSelectElement>("view").value = this.state.view;
    }

    private onParameterChange(): void {
        this.pushUrl();
        this.requestField();
    }

    private pushUrl(): void {
        const query = this.state.toQuery();
        window.history.replaceState(null, "", `${window.location.pathname}?${query}`);
    }

    private async fetchNow(): Promise<void> {
        try {
            this.field = await this.client.fetchField(this.state.fieldRequestBody());
            this.stale = false;
            this.banner.style.display = "none";
        } catch (error) {
            if ((error as Error).name === "AbortError") return; // superseded
            this.stale = true;
            this.banner.textContent = error instanceof ServiceError
                ? `service error: ${error.message}`
                : `service unreachable: ${(error as Error).message}`;
            this.banner.style.display = "block";
        }
        this.redraw();
    }

    private redraw(): void {
        if (!this.field) return;
        const ctx = this.canvas.getContext("2d");
        if (!ctx) return;
        drawScene(ctx, buildScene(this.state, this.field), this.state.view, this.stale);
    }
}

window.addEventListener("DOMContentLoaded", () => new ExplorerApp());
