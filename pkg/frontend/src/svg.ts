/** Minimal hand-rolled SVG plotting: step curves and scatter points. */

export interface Series {
    label: string;
    points: { x: number; y: number }[];
    stepped: boolean;
}

export interface Plot {
    title: string;
    xLabel: string;
    yLabel: string;
    series: Series[];
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 36, right: 20, bottom: 46, left: 62 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Scale {
    (v: number): number;
    ticks: number[];
}

function linearScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
    if (!(hi > lo)) {
        hi = lo + 1; // degenerate domain: still render something sane
    }
    const span = hi - lo;
    const step = niceStep(span / 5);
    const ticks: number[] = [];
    for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
        ticks.push(Number(t.toPrecision(12)));
    }
    const fn = ((v: number) => rLo + ((v - lo) / span) * (rHi - rLo)) as Scale;
    fn.ticks = ticks;
    return fn;
}

function niceStep(raw: number): number {
    const mag = Math.pow(10, Math.floor(Math.log10(raw)));
    const norm = raw / mag;
    const nice = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
    return nice * mag;
}

function fmt(v: number): string {
    return Number(v.toPrecision(6)).toString();
}

function escapeXml(s: string): string {
    return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function finite(values: number[]): number[] {
    return values.filter(v => Number.isFinite(v));
}

export function renderSvg(plot: Plot): string {
    const xs = finite(plot.series.flatMap(s => s.points.map(p => p.x)));
    const ys = finite(plot.series.flatMap(s => s.points.map(p => p.y)));
    const xLo = Math.min(0, ...xs);
    const xHi = Math.max(...xs);
    const yLo = Math.min(0, ...ys);
    const yHi = Math.max(...ys);
    const sx = linearScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
    const sy = linearScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);
    const clipHi = xHi + (xHi - xLo) * 0.05;

    const parts: string[] = [];
    parts.push(
        `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
        `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
    );
    parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
    parts.push(
        `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="14">${escapeXml(plot.title)}</text>`,
    );

    // axes and grid
    const x0 = MARGIN.left, x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom, y1 = MARGIN.top;
    for (const t of sx.ticks) {
        const px = sx(t);
        parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y1}" stroke="#eee"/>`);
        parts.push(`<text x="${fmt(px)}" y="${y0 + 16}" text-anchor="middle">${fmt(t)}</text>`);
    }
    for (const t of sy.ticks) {
        const py = sy(t);
        parts.push(`<line x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="#eee"/>`);
        parts.push(`<text x="${x0 - 6}" y="${fmt(py + 4)}" text-anchor="end">${fmt(t)}</text>`);
    }
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
    parts.push(
        `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 8}" text-anchor="middle">${escapeXml(plot.xLabel)}</text>`,
    );
    parts.push(
        `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${(y0 + y1) / 2})">${escapeXml(plot.yLabel)}</text>`,
    );

    plot.series.forEach((series, idx) => {
        const colour = PALETTE[idx % PALETTE.length];
        const pts = series.points.map(p => ({
            x: Number.isFinite(p.x) ? p.x : clipHi,
            y: p.y,
        }));
        if (series.stepped && pts.length > 0) {
            const d: string[] = [];
            pts.forEach((p, i) => {
                const px = fmt(sx(p.x)), py = fmt(sy(p.y));
                if (i === 0) {
                    d.push(`M ${px} ${py}`);
                } else {
                    d.push(`H ${px}`, `V ${py}`);
                }
            });
            parts.push(`<path d="${d.join(" ")}" fill="none" stroke="${colour}" stroke-width="1.6"/>`);
        }
        for (const p of pts) {
            parts.push(
                `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="2.4" fill="${colour}"/>`,
            );
        }
        // legend row
        const ly = MARGIN.top + 14 * idx;
        parts.push(`<line x1="${x1 - 130}" y1="${ly}" x2="${x1 - 108}" y2="${ly}" stroke="${colour}" stroke-width="2"/>`);
        parts.push(`<text x="${x1 - 102}" y="${ly + 4}">${escapeXml(series.label)}</text>`);
    });

    parts.push("</svg>");
    return parts.join("\n") + "\n";
}
