/**
 * Operator console state machine.
 *
 * One rule above all: the console never optimizes anything itself. The
 * displayed recommendation, cost and feasible count are copied verbatim
 * from the last /optimize response, and the heatmap is a filter over the
 * masks that response carried. Overrides that change the server-side
 * problem (context, limits, cost, grid) trigger exactly one query each;
 * constraint-layer toggles re-render locally with no traffic.
 */

import { AdvisorClient, LatestWins, SupersededError } from './client.js';
import type { OptimizeResult } from './client.js';
import { ALL_ON, buildHeatmap } from './heatmap.js';
import type { ConstraintToggles, HeatmapModel } from './heatmap.js';
import { SessionState } from './session.js';
import type { HistoryEntry, WhatIfOverrides } from './session.js';
import type {
    ConstraintName,
    ContextInput,
    CostBreakdown,
    OptimizeRequest,
    OptimizeResponse,
} from './types.js';

export interface ConsoleView {
    /** 'idle' until the first query lands. */
    status: 'idle' | 'optimal' | 'infeasible' | 'error';
    banner: string | null;
    optimum: { p: number; rpm: number } | null;
    predicted: OptimizeResponse['predicted'];
    pr: number | null;
    cost: CostBreakdown | null;
    feasibleCount: number | null;
    /** Cells passing the currently enabled layers (client-side filter). */
    candidateCount: number | null;
    pMinMm: number | null;
    modelDigest: string | null;
    responseDigest: string | null;
    toggles: ConstraintToggles;
    heatmap: HeatmapModel | null;
    statusLine: string;
}

export function fmt(x: number, digits = 2): string {
    const fixed = x.toFixed(digits);
    return fixed.includes('.') ? fixed.replace(/\.?0+$/, '') : fixed;
}

export class OperatorConsole {
    readonly session: SessionState;
    private readonly scheduler: LatestWins<OptimizeRequest, OptimizeResult>;
    private toggles: ConstraintToggles = { ...ALL_ON };
    private lastError: string | null = null;
    private staleNotice: string | null = null;

    constructor(
        private readonly client: AdvisorClient,
        context: ContextInput,
    ) {
        this.session = new SessionState(context);
        this.scheduler = new LatestWins((req) => this.client.optimizeRaw(req));
    }

    /** Query the server with the current form state. */
    async submit(): Promise<ConsoleView> {
        const request = this.session.buildRequest();
        try {
            const result = await this.scheduler.schedule(request);
            this.session.record(request, result);
            this.lastError = null;
            this.staleNotice = null;
        } catch (err) {
            if (err instanceof SupersededError) {
                // a newer query is already on its way; keep the view as is
                return this.view();
            }
            // server unreachable or rejected: retain last good state
            this.lastError = err instanceof Error ? err.message : String(err);
        }
        return this.view();
    }

    /** Apply overrides and re-query; one call, one server query. */
    async whatIf(overrides: WhatIfOverrides): Promise<ConsoleView> {
        this.session.applyOverrides(overrides);
        return this.submit();
    }

    /** Pure display filter; re-renders from cached masks, no traffic. */
    setToggle(name: ConstraintName, enabled: boolean): ConsoleView {
        this.toggles = { ...this.toggles, [name]: enabled };
        return this.view();
    }

    getToggles(): ConstraintToggles {
        return { ...this.toggles };
    }

    /** Compare the live model digest against the displayed response. */
    async checkModel(): Promise<ConsoleView> {
        const last = this.session.lastResponse;
        if (last) {
            const health = await this.client.healthz();
            this.staleNotice =
                health.model_digest === last.model_digest
                    ? null
                    : 'model changed on the server; displayed region is stale, re-query';
        }
        return this.view();
    }

    exportHistory(): string {
        return this.session.exportHistory();
    }

    get history(): readonly HistoryEntry[] {
        return this.session.history;
    }

    view(): ConsoleView {
        const response = this.session.lastResponse;
        const base: ConsoleView = {
            status: 'idle',
            banner: null,
            optimum: null,
            predicted: null,
            pr: null,
            cost: null,
            feasibleCount: null,
            candidateCount: null,
            pMinMm: null,
            modelDigest: null,
            responseDigest: this.session.lastDigest,
            toggles: { ...this.toggles },
            heatmap: null,
            statusLine: 'no query yet',
        };
        if (this.lastError !== null) {
            base.banner = `server error: ${this.lastError}`;
            base.status = response ? 'error' : 'idle';
        }
        if (!response) return base;

        const heatmap = response.grid
            ? buildHeatmap(response, this.toggles)
            : null;
        const view: ConsoleView = {
            ...base,
            status: this.lastError !== null ? 'error' : response.status,
            optimum: response.optimum,
            predicted: response.predicted,
            pr: response.pr,
            cost: response.cost,
            feasibleCount: response.feasible_count,
            candidateCount: heatmap ? heatmap.candidateCount : null,
            pMinMm: response.p_min_mm,
            modelDigest: response.model_digest,
            heatmap,
        };
        if (view.banner === null && this.staleNotice !== null) {
            view.banner = this.staleNotice;
        }
        if (view.banner === null && response.status === 'infeasible') {
            view.banner =
                'infeasible: no operating point satisfies the enabled limits';
        }
        view.statusLine = this.statusLine(response);
        return view;
    }

    private statusLine(response: OptimizeResponse): string {
        if (response.status !== 'optimal' || !response.optimum || !response.cost) {
            return `infeasible | ${response.feasible_count} feasible cells | p_min ${fmt(response.p_min_mm)} mm/r`;
        }
        return (
            `optimal: p=${fmt(response.optimum.p)} mm/r, rpm=${fmt(response.optimum.rpm)}` +
            ` | cost ${fmt(response.cost.c_t)} /m` +
            ` | ${response.feasible_count} feasible cells`
        );
    }
}
