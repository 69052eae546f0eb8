/**
 * Feasible-region heatmap view model.
 *
 * Pure data transform from one /optimize response to displayable cells.
 * Constraint toggles are visualization filters over the masks the server
 * already returned; nothing here recomputes physics or cost, so toggling
 * layers never needs another query.
 */

import type {
    ConstraintName,
    GridCell,
    OptimizeResponse,
} from './types.js';
import { CONSTRAINTS } from './types.js';

export type ConstraintToggles = Record<ConstraintName, boolean>;

export const ALL_ON: ConstraintToggles = {
    thrust: true,
    torque: true,
    belt: true,
    cp: true,
};

export interface HeatmapCell {
    /** rpm index (row) and p index (column) in the grid. */
    row: number;
    col: number;
    rpm: number;
    p: number;
    /** Server verdict over all four constraints. */
    feasible: boolean;
    /** Passes every currently enabled constraint layer. */
    candidate: boolean;
    /** Enabled layers this cell violates; one hatch class per entry. */
    hatches: ConstraintName[];
    cost: number | null;
    /** Fill color for candidates with a defined cost, else null. */
    color: string | null;
    optimum: boolean;
}

export interface HeatmapModel {
    rpmValues: number[];
    pValues: number[];
    /** cells[row][col], row = rpm index. */
    cells: HeatmapCell[][];
    candidateCount: number;
    costRange: { min: number; max: number } | null;
}

// low cost green, high cost red; mid stop keeps the ramp readable
const RAMP = ['#1a9850', '#fee08b', '#d73027'];

function hexToRgb(hex: string): [number, number, number] {
    return [
        parseInt(hex.slice(1, 3), 16),
        parseInt(hex.slice(3, 5), 16),
        parseInt(hex.slice(5, 7), 16),
    ];
}

function mix(a: [number, number, number], b: [number, number, number], t: number): string {
    const ch = (i: number) => Math.round(a[i]! + (b[i]! - a[i]!) * t);
    return `rgb(${ch(0)}, ${ch(1)}, ${ch(2)})`;
}

/** Piecewise-linear color for t in [0, 1] along the cost ramp. */
export function costColor(t: number): string {
    const clamped = Math.min(1, Math.max(0, t));
    const stops = RAMP.map(hexToRgb);
    if (clamped <= 0.5) return mix(stops[0]!, stops[1]!, clamped * 2);
    return mix(stops[1]!, stops[2]!, (clamped - 0.5) * 2);
}

function passesEnabled(cell: GridCell, toggles: ConstraintToggles): boolean {
    return CONSTRAINTS.every((name) => !toggles[name] || cell.mask[name]);
}

export function buildHeatmap(
    response: OptimizeResponse,
    toggles: ConstraintToggles = ALL_ON,
): HeatmapModel {
    const grid = response.grid;
    if (!grid) throw new Error('response has no grid; request include_grid');
    const nRpm = grid.rpm.length;
    const nP = grid.p.length;
    if (grid.cells.length !== nRpm * nP) {
        throw new Error(
            `grid is ${grid.cells.length} cells, expected ${nRpm}x${nP}`,
        );
    }

    const candidateCosts: number[] = [];
    for (const cell of grid.cells) {
        if (passesEnabled(cell, toggles) && cell.cost !== null) {
            candidateCosts.push(cell.cost);
        }
    }
    const costRange =
        candidateCosts.length > 0
            ? {
                  min: Math.min(...candidateCosts),
                  max: Math.max(...candidateCosts),
              }
            : null;
    const span = costRange ? costRange.max - costRange.min : 0;

    const optimum = response.status === 'optimal' ? response.optimum : null;
    let candidateCount = 0;
    const rows: HeatmapCell[][] = [];
    for (let row = 0; row < nRpm; row++) {
        const outRow: HeatmapCell[] = [];
        for (let col = 0; col < nP; col++) {
            const cell = grid.cells[row * nP + col]!;
            const candidate = passesEnabled(cell, toggles);
            if (candidate) candidateCount++;
            let color: string | null = null;
            if (candidate && cell.cost !== null && costRange) {
                const t = span > 0 ? (cell.cost - costRange.min) / span : 0;
                color = costColor(t);
            }
            outRow.push({
                row,
                col,
                rpm: cell.rpm,
                p: cell.p,
                feasible: cell.feasible,
                candidate,
                hatches: candidate
                    ? []
                    : CONSTRAINTS.filter(
                          (name) => toggles[name] && !cell.mask[name],
                      ),
                cost: cell.cost,
                color,
                optimum:
                    optimum !== null &&
                    cell.rpm === optimum.rpm &&
                    cell.p === optimum.p,
            });
        }
        rows.push(outRow);
    }
    return {
        rpmValues: grid.rpm,
        pValues: grid.p,
        cells: rows,
        candidateCount,
        costRange,
    };
}
