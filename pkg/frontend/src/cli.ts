#!/usr/bin/env node
/**
 * quicfec-figs --spec figures.yaml
 *
 * Renders every figure in the spec to SVG plus a JSON sidecar holding the
 * exact plotted values, so plots can be regression-tested numerically.
 */

import { renderSpecFile } from "./figures.js";

function main(argv: string[]): number {
    const idx = argv.indexOf("--spec");
    if (idx < 0 || idx + 1 >= argv.length) {
        process.stderr.write("usage: quicfec-figs --spec figures.yaml\n");
        return 2;
    }
    try {
        const count = renderSpecFile(argv[idx + 1]);
        process.stdout.write(`rendered ${count} figure(s)\n`);
        return 0;
    } catch (err) {
        process.stderr.write(`quicfec-figs: ${(err as Error).message}\n`);
        return 1;
    }
}

process.exit(main(process.argv.slice(2)));
