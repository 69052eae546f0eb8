/** Shared fixtures and fetch stubs for the console tests. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchLike } from '../src/client.js';
import type { OptimizeRequest, OptimizeResponse } from '../src/types.js';

export const FIXTURES_DIR = join(
    dirname(fileURLToPath(import.meta.url)),
    'fixtures',
);

export interface Scenario {
    name: string;
    role: 'scenario' | 'whatif';
    pairs_with: string | null;
    title: string;
    request: OptimizeRequest;
    response_file: string;
    status: 'optimal' | 'infeasible';
    feasible_count: number;
}

export function loadManifest(): Scenario[] {
    const text = readFileSync(join(FIXTURES_DIR, 'scenarios.json'), 'utf8');
    return JSON.parse(text) as Scenario[];
}

export function loadRaw(scenario: Scenario): string {
    return readFileSync(join(FIXTURES_DIR, scenario.response_file), 'utf8');
}

export function parseResponse(scenario: Scenario): OptimizeResponse {
    return JSON.parse(loadRaw(scenario)) as OptimizeResponse;
}

/** Key-order-independent canonical form, for matching request bodies. */
export function canonical(value: unknown): string {
    if (Array.isArray(value)) {
        return '[' + value.map(canonical).join(',') + ']';
    }
    if (value !== null && typeof value === 'object') {
        const entries = Object.entries(value as Record<string, unknown>)
            .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
            .map(([k, v]) => JSON.stringify(k) + ':' + canonical(v));
        return '{' + entries.join(',') + '}';
    }
    return JSON.stringify(value);
}

export interface StubCounts {
    optimize: number;
    healthz: number;
    other: number;
}

export interface ScenarioStub {
    fetch: FetchLike;
    counts: StubCounts;
}

function jsonResponse(raw: string, status = 200): Response {
    return new Response(raw, {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

/**
 * Replays recorded responses: a POST /optimize whose body matches a
 * scenario request (structurally, key order ignored) gets that
 * scenario's recorded bytes back. Anything unrecorded is a loud 400 so
 * a test can't silently query something it has no fixture for.
 */
export function scenarioFetch(scenarios?: Scenario[]): ScenarioStub {
    const all = scenarios ?? loadManifest();
    const routes = new Map<string, string>();
    let digest = '';
    for (const scenario of all) {
        const raw = loadRaw(scenario);
        routes.set(canonical(scenario.request), raw);
        if (!digest) {
            digest = (JSON.parse(raw) as OptimizeResponse).model_digest;
        }
    }
    const counts: StubCounts = { optimize: 0, healthz: 0, other: 0 };
    const fetchImpl: FetchLike = async (url, init) => {
        if (url.endsWith('/optimize') && init?.method === 'POST') {
            counts.optimize++;
            const raw = routes.get(canonical(JSON.parse(String(init.body))));
            if (raw === undefined) {
                return jsonResponse(
                    JSON.stringify({ error: 'no recorded response for this request' }),
                    400,
                );
            }
            return jsonResponse(raw);
        }
        if (url.endsWith('/healthz')) {
            counts.healthz++;
            return jsonResponse(
                JSON.stringify({ status: 'ok', model_digest: digest }),
            );
        }
        counts.other++;
        return jsonResponse(JSON.stringify({ error: 'not stubbed' }), 404);
    };
    return { fetch: fetchImpl, counts };
}

export interface DeferredJob {
    body: string;
    respond: (raw: string) => void;
    fail: (err: Error) => void;
}

/** Fetch stub whose responses are released manually by the test. */
export function deferredFetch(): { fetch: FetchLike; jobs: DeferredJob[] } {
    const jobs: DeferredJob[] = [];
    const fetchImpl: FetchLike = (_url, init) =>
        new Promise<Response>((resolve, reject) => {
            jobs.push({
                body: String(init?.body ?? ''),
                respond: (raw) => resolve(jsonResponse(raw)),
                fail: (err) => reject(err),
            });
        });
    return { fetch: fetchImpl, jobs };
}

export function failingFetch(message = 'connection refused'): FetchLike {
    return () => Promise.reject(new TypeError(message));
}

/** Smallest thing the console can eat: context taken from a scenario. */
export function contextOf(scenario: Scenario) {
    return { ...scenario.request.context };
}
