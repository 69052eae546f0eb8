/**
 * Session-local state: the context form, what-if overrides, and an
 * append-only history of every server query made this session.
 *
 * Nothing is persisted; the service is stateless and so is the console.
 * Export gives the operator a JSON file of {request, response, timestamp}
 * records for the shift log.
 */

import type { OptimizeResult } from './client.js';
import type {
    ContextInput,
    CostInput,
    GridInput,
    LimitsInput,
    OptimizeRequest,
    OptimizeResponse,
} from './types.js';
import { fnv1a64 } from './digest.js';

export interface HistoryEntry {
    request: OptimizeRequest;
    response: OptimizeResponse;
    /** FNV-1a of the raw response body. */
    digest: string;
    timestamp: string;
}

export interface WhatIfOverrides {
    context?: Partial<ContextInput>;
    limits?: LimitsInput;
    cost?: CostInput;
    grid?: GridInput;
}

function assertFiniteValues(label: string, doc: object): void {
    for (const [key, value] of Object.entries(doc)) {
        if (typeof value !== 'number' || !Number.isFinite(value)) {
            throw new Error(`${label}.${key} must be a finite number`);
        }
    }
}

export class SessionState {
    context: ContextInput;
    limits: LimitsInput = {};
    cost: CostInput = {};
    grid: GridInput = {};

    private entries: HistoryEntry[] = [];
    lastResponse: OptimizeResponse | null = null;
    lastDigest: string | null = null;
    /** Set when the latest response came from a different model build. */
    modelChanged = false;

    constructor(context: ContextInput) {
        assertFiniteValues('context', context);
        this.context = { ...context };
    }

    applyOverrides(overrides: WhatIfOverrides): void {
        if (overrides.context) {
            assertFiniteValues('context', overrides.context);
            this.context = { ...this.context, ...overrides.context };
        }
        if (overrides.limits) {
            assertFiniteValues('limits', overrides.limits);
            this.limits = { ...this.limits, ...overrides.limits };
        }
        if (overrides.cost) {
            assertFiniteValues('cost', overrides.cost);
            this.cost = { ...this.cost, ...overrides.cost };
        }
        if (overrides.grid) {
            assertFiniteValues('grid', overrides.grid);
            this.grid = { ...this.grid, ...overrides.grid };
        }
    }

    /** Request for the current form state; empty override groups are
     * omitted so the server's defaults stay in charge. */
    buildRequest(): OptimizeRequest {
        const request: OptimizeRequest = {
            context: { ...this.context },
            include_grid: true,
        };
        if (Object.keys(this.limits).length > 0) request.limits = { ...this.limits };
        if (Object.keys(this.cost).length > 0) request.cost = { ...this.cost };
        if (Object.keys(this.grid).length > 0) request.grid = { ...this.grid };
        return request;
    }

    record(request: OptimizeRequest, result: OptimizeResult): HistoryEntry {
        const digest = fnv1a64(result.raw);
        const previous = this.lastResponse;
        this.modelChanged =
            previous !== null &&
            previous.model_digest !== result.response.model_digest;
        this.lastResponse = result.response;
        this.lastDigest = digest;
        const entry: HistoryEntry = {
            request,
            response: result.response,
            digest,
            timestamp: new Date().toISOString(),
        };
        this.entries.push(entry);
        return entry;
    }

    get history(): readonly HistoryEntry[] {
        return this.entries.slice();
    }

    get queryCount(): number {
        return this.entries.length;
    }

    /** JSON array of {request, response, timestamp}. */
    exportHistory(): string {
        return JSON.stringify(
            this.entries.map(({ request, response, timestamp }) => ({
                request,
                response,
                timestamp,
            })),
            null,
            2,
        );
    }
}
