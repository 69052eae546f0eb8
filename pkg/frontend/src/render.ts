/**
 * HTML rendering for the console view. String templates only, so the
 * view model stays testable without a DOM.
 */

import type { ConsoleView } from './console.js';
import { fmt } from './console.js';
import type { HeatmapCell } from './heatmap.js';

function esc(text: string): string {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}

function cellTd(cell: HeatmapCell): string {
    const classes = ['cell'];
    if (cell.optimum) classes.push('optimum');
    if (cell.candidate) classes.push('candidate');
    for (const name of cell.hatches) classes.push(`hatch-${name}`);
    const style = cell.color ? ` style="background-color: ${cell.color}"` : '';
    const cost = cell.cost === null ? 'n/a' : fmt(cell.cost);
    const title = `rpm ${fmt(cell.rpm, 1)}, p ${fmt(cell.p, 1)} mm/r, cost ${cost}`;
    return `<td class="${classes.join(' ')}"${style} title="${esc(title)}"></td>`;
}

export function renderHeatmapTable(view: ConsoleView): string {
    const hm = view.heatmap;
    if (!hm) return '<p class="empty">no region loaded</p>';
    const header =
        '<tr><th></th>' +
        hm.pValues.map((p) => `<th>${fmt(p, 1)}</th>`).join('') +
        '</tr>';
    // highest rpm at the top reads like the usual axis orientation
    const rows = hm.cells
        .map(
            (row, i) =>
                `<tr><th>${fmt(hm.rpmValues[i]!, 1)}</th>` +
                row.map(cellTd).join('') +
                '</tr>',
        )
        .reverse()
        .join('\n');
    return `<table class="heatmap"><thead>${header}</thead><tbody>\n${rows}\n</tbody></table>`;
}

export function renderStatus(view: ConsoleView): string {
    const parts = [`<p class="status-line">${esc(view.statusLine)}</p>`];
    if (view.banner) {
        parts.unshift(`<div class="banner">${esc(view.banner)}</div>`);
    }
    if (view.modelDigest) {
        parts.push(
            `<p class="digests">model ${esc(view.modelDigest.slice(0, 12))}` +
                ` | response ${esc(view.responseDigest ?? '')}</p>`,
        );
    }
    if (view.candidateCount !== null) {
        parts.push(
            `<p class="layers">${view.candidateCount} cells pass the enabled layers</p>`,
        );
    }
    return parts.join('\n');
}

export function renderConsole(view: ConsoleView): string {
    return `${renderStatus(view)}\n${renderHeatmapTable(view)}`;
}
