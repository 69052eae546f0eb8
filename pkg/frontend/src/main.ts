/** Browser entry point: wires the form controls to the console. */

import { AdvisorClient } from './client.js';
import { OperatorConsole } from './console.js';
import { renderConsole } from './render.js';
import { CONSTRAINTS } from './types.js';
import type { ConstraintName, ContextInput } from './types.js';

function num(id: string): number {
    const el = document.getElementById(id) as HTMLInputElement;
    return Number(el.value);
}

function readContext(): ContextInput {
    return {
        ucs: num('ucs'),
        rqd: num('rqd'),
        cai: num('cai'),
        d_avg: num('d_avg'),
        ci: num('ci'),
        peak_acc: num('peak_acc'),
        main_freq: num('main_freq'),
    };
}

function main(): void {
    const baseInput = document.getElementById('base-url') as HTMLInputElement;
    const output = document.getElementById('output') as HTMLDivElement;

    let console_ = new OperatorConsole(
        new AdvisorClient(baseInput.value),
        readContext(),
    );

    const paint = () => {
        output.innerHTML = renderConsole(console_.view());
    };

    document.getElementById('apply')!.addEventListener('click', () => {
        // new base URL means a fresh client; history stays with the session
        console_ = new OperatorConsole(
            new AdvisorClient(baseInput.value),
            readContext(),
        );
        void console_.submit().then(paint);
    });

    document.getElementById('requery')!.addEventListener('click', () => {
        void console_
            .whatIf({
                context: readContext(),
                limits: {
                    safety_factor_thrust: num('sf_thrust'),
                    safety_factor_torque: num('sf_torque'),
                },
                cost: { c1: num('c1'), c2: num('c2') },
            })
            .then(paint);
    });

    for (const name of CONSTRAINTS) {
        const box = document.getElementById(`toggle-${name}`) as HTMLInputElement;
        box.addEventListener('change', () => {
            console_.setToggle(name as ConstraintName, box.checked);
            paint();
        });
    }

    document.getElementById('check-model')!.addEventListener('click', () => {
        void console_.checkModel().then(paint);
    });

    document.getElementById('export')!.addEventListener('click', () => {
        const blob = new Blob([console_.exportHistory()], {
            type: 'application/json',
        });
        const a = document.createElement('a');
        a.href = URL.createObjectURL(blob);
        a.download = 'advisor-session.json';
        a.click();
        URL.revokeObjectURL(a.href);
    });

    paint();
}

main();
