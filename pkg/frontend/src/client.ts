/**
 * Thin typed client for the advisor service.
 *
 * The fetch implementation is injectable so tests can replay recorded
 * responses without a network. optimizeRaw returns the raw body text next
 * to the parsed document because the session history fingerprints the
 * exact bytes the server sent.
 */

import type {
    ErrorResponse,
    HealthzResponse,
    ModelInfoResponse,
    OptimizeRequest,
    OptimizeResponse,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        message: string,
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

/** A queued request was replaced by a newer one before it was sent. */
export class SupersededError extends Error {
    constructor() {
        super('request superseded by a newer one');
        this.name = 'SupersededError';
    }
}

export interface OptimizeResult {
    response: OptimizeResponse;
    /** Verbatim body text, used for history digests. */
    raw: string;
}

async function errorMessage(resp: Response): Promise<string> {
    try {
        const doc = (await resp.json()) as ErrorResponse;
        if (doc && typeof doc.error === 'string') return doc.error;
    } catch {
        // non-JSON error body; fall through to the status line
    }
    return `request failed: ${resp.status}`;
}

export class AdvisorClient {
    private readonly baseUrl: string;
    private readonly fetchImpl: FetchLike;

    constructor(baseUrl: string, fetchImpl?: FetchLike) {
        this.baseUrl = baseUrl.replace(/\/+$/, '');
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }

    private async get<T>(path: string): Promise<T> {
        const resp = await this.fetchImpl(this.baseUrl + path);
        if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
        return (await resp.json()) as T;
    }

    healthz(): Promise<HealthzResponse> {
        return this.get<HealthzResponse>('/healthz');
    }

    modelInfo(): Promise<ModelInfoResponse> {
        return this.get<ModelInfoResponse>('/model');
    }

    async optimizeRaw(request: OptimizeRequest): Promise<OptimizeResult> {
        const resp = await this.fetchImpl(this.baseUrl + '/optimize', {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(request),
        });
        if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
        const raw = await resp.text();
        return { response: JSON.parse(raw) as OptimizeResponse, raw };
    }

    async optimize(request: OptimizeRequest): Promise<OptimizeResponse> {
        return (await this.optimizeRaw(request)).response;
    }
}

/**
 * Serializes calls so at most one request is in flight; while one is
 * running the newest waiting argument wins and anything between is
 * rejected with SupersededError. Keeps a burst of slider edits from
 * queueing a backlog of stale /optimize calls.
 */
export class LatestWins<A, R> {
    private running = false;
    private queued: {
        arg: A;
        resolve: (value: R) => void;
        reject: (reason: unknown) => void;
    } | null = null;

    constructor(private readonly send: (arg: A) => Promise<R>) {}

    schedule(arg: A): Promise<R> {
        return new Promise<R>((resolve, reject) => {
            if (this.queued) this.queued.reject(new SupersededError());
            this.queued = { arg, resolve, reject };
            void this.pump();
        });
    }

    private async pump(): Promise<void> {
        if (this.running) return;
        this.running = true;
        try {
            while (this.queued) {
                const job = this.queued;
                this.queued = null;
                try {
                    job.resolve(await this.send(job.arg));
                } catch (err) {
                    job.reject(err);
                }
            }
        } finally {
            this.running = false;
        }
    }
}
