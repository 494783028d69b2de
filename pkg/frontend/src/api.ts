// Client for the prediction service. All perceived coordinates come from
// the service; the UI never re-derives geometry. At most one field request
// is in flight: starting a new one aborts the previous (latest wins).

import { FieldRequest } from "./state.js";

export interface FieldPoint {
    intended: [number, number, number];
    perceived_hmd: [number, number, number] | null;
    perceived_ego: [number, number, number] | null;
    residual: number | null;
    status: string;
}

export interface FieldResponse {
    grid: Record<string, number>;
    points: FieldPoint[];
}

export class ServiceError extends Error {
    constructor(message: string, readonly status: number) {
        super(message);
    }
}

export class FieldClient {
    private inflight: AbortController | null = null;

    constructor(private baseUrl: string) {}

    setBaseUrl(url: string): void {
        this.baseUrl = url.replace(/\/+$/, "");
    }

    async health(): Promise<boolean> {
        try {
            const response = await fetch(`${this.baseUrl}/api/health`);
            return response.ok;
        } catch {
            return false;
        }
    }

    async fetchField(body: FieldRequest): Promise<FieldResponse> {
        this.inflight?.abort();
        const controller = new AbortController();
        this.inflight = controller;
        const response = await fetch(`${this.baseUrl}/api/field`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
            signal: controller.signal,
        });
        if (this.inflight === controller) {
            this.inflight = null;
        }
        if (!response.ok) {
            let message = `service returned ${response.status}`;
            try {
                const payload = await response.json();
                if (payload?.error?.message) message = payload.error.message;
            } catch {
                // keep the status-based message
            }
            throw new ServiceError(message, response.status);
        }
        return (await response.json()) as FieldResponse;
    }
}
