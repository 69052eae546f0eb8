/**
 * Wire types for the advisor service (HTTP + JSON).
 *
 * These mirror the server documents field for field. The console never
 * invents numbers of its own: everything displayed comes verbatim out of
 * one of these documents.
 */

/** Ground conditions for one advisory query. */
export interface ContextInput {
    ucs: number;
    rqd: number;
    cai: number;
    d_avg: number;
    ci: number;
    peak_acc: number;
    main_freq: number;
}

/** Machine ratings and safety factors; all optional, server defaults apply. */
export interface LimitsInput {
    thrust_rated?: number;
    torque_rated?: number;
    belt_rated?: number;
    safety_factor_thrust?: number;
    safety_factor_torque?: number;
}

export interface CostInput {
    c1?: number;
    c2?: number;
    L?: number;
    A?: number;
    utilization?: number;
    hours_per_day?: number;
}

export interface GridInput {
    rpm_min?: number;
    rpm_max?: number;
    rpm_step?: number;
    p_min?: number;
    p_max?: number;
    p_step?: number;
}

export interface OptimizeRequest {
    context: ContextInput;
    limits?: LimitsInput;
    cost?: CostInput;
    grid?: GridInput;
    include_grid?: boolean;
}

export const CONSTRAINTS = ['thrust', 'torque', 'belt', 'cp'] as const;
export type ConstraintName = (typeof CONSTRAINTS)[number];

/** Per-constraint pass flags; true means the cell satisfies that limit. */
export type ConstraintMask = Record<ConstraintName, boolean>;

export interface GridCell {
    rpm: number;
    p: number;
    th: number;
    tor: number;
    hf: number;
    pb: number;
    feasible: boolean;
    mask: ConstraintMask;
    /** Cost per metre; null where the cost is undefined (zero advance). */
    cost: number | null;
}

export interface GridDocument {
    rpm: number[];
    p: number[];
    /** Row-major over rpm: index = rpmIndex * p.length + pIndex. */
    cells: GridCell[];
}

export interface CostBreakdown {
    c_s: number;
    c_c: number;
    c_t: number;
}

export interface OptimizeResponse {
    status: 'optimal' | 'infeasible';
    optimum: { p: number; rpm: number } | null;
    predicted: { th: number; tor: number; hf: number; pb: number } | null;
    pr: number | null;
    cost: CostBreakdown | null;
    feasible_count: number;
    eliminated: Record<ConstraintName, number>;
    p_min_mm: number;
    grid?: GridDocument;
    model_digest: string;
}

export interface HealthzResponse {
    status: string;
    model_digest: string;
}

export interface ModelInfoResponse {
    dims: { in: number; h1: number; h2: number; out: number };
    activation: string;
    hyperparams: Record<string, number>;
    physics_digest: string;
    metrics: Record<string, unknown> | null;
    model_digest: string;
}

export interface ErrorResponse {
    error: string;
}
