import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import yaml from "js-yaml";

import { loadCsv, requireColumns } from "./csv.js";
import { Plot, Series, renderSvg } from "./svg.js";

export type FigureKind = "ecdf_overlay" | "scatter_vs_param" | "ratio_ecdf";

export interface FigureSpec {
    kind: FigureKind;
    input: string;
    out: string;
    title?: string;
    series?: string[];
    x?: string;
    y?: string;
}

/** Sidecar values stay the raw CSV strings, so exactness is auditable. */
export interface SidecarSeries {
    label: string;
    points: { x: string; y: string }[];
}

export interface Sidecar {
    kind: FigureKind;
    input: string;
    series: SidecarSeries[];
}

export function parseSpecFile(text: string, baseDir: string): FigureSpec[] {
    const raw = yaml.load(text);
    if (typeof raw !== "object" || raw === null || !Array.isArray((raw as any).figures)) {
        throw new Error("figure spec must contain a 'figures' list");
    }
    return (raw as any).figures.map((f: any, i: number) => {
        for (const key of ["kind", "input", "out"]) {
            if (typeof f[key] !== "string") {
                throw new Error(`figure ${i}: missing '${key}'`);
            }
        }
        if (!["ecdf_overlay", "scatter_vs_param", "ratio_ecdf"].includes(f.kind)) {
            throw new Error(`figure ${i}: unknown kind '${f.kind}'`);
        }
        return {
            ...f,
            input: resolve(baseDir, f.input),
            out: resolve(baseDir, f.out),
        } as FigureSpec;
    });
}

function seriesLabels(spec: FigureSpec, available: string[]): string[] {
    if (!spec.series || spec.series.length === 0) {
        return available;
    }
    const missing = spec.series.filter(s => !available.includes(s));
    if (missing.length > 0) {
        throw new Error(`${spec.input}: series not in data: [${missing.join(", ")}]`);
    }
    return spec.series;
}

function buildEcdfOverlay(spec: FigureSpec): { sidecar: Sidecar; plot: Plot } {
    const table = loadCsv(spec.input);
    requireColumns(spec.input, table, ["contender", "value", "cum_frac"]);
    const order: string[] = [];
    for (const row of table.rows) {
        if (!order.includes(row.contender)) order.push(row.contender);
    }
    const labels = seriesLabels(spec, order);
    const sidecar: Sidecar = { kind: spec.kind, input: spec.input, series: [] };
    const series: Series[] = [];
    for (const label of labels) {
        const rows = table.rows.filter(r => r.contender === label);
        sidecar.series.push({
            label,
            points: rows.map(r => ({ x: r.value, y: r.cum_frac })),
        });
        series.push({
            label,
            stepped: true,
            points: rows.map(r => ({ x: Number(r.value), y: Number(r.cum_frac) })),
        });
    }
    if (series.every(s => s.points.length === 0)) {
        throw new Error(`${spec.input}: no data rows to plot`);
    }
    return {
        sidecar,
        plot: {
            title: spec.title ?? "ECDF",
            xLabel: spec.x ?? "value",
            yLabel: "cumulative fraction",
            series,
        },
    };
}

function buildScatter(spec: FigureSpec): { sidecar: Sidecar; plot: Plot } {
    if (!spec.x || !spec.y) {
        throw new Error(`${spec.out}: scatter_vs_param needs 'x' and 'y' column names`);
    }
    const table = loadCsv(spec.input);
    requireColumns(spec.input, table, ["contender", "status", spec.x, spec.y]);
    const ok = table.rows.filter(r => r.status === "ok");
    const order: string[] = [];
    for (const row of ok) {
        if (!order.includes(row.contender)) order.push(row.contender);
    }
    const labels = seriesLabels(spec, order);
    const sidecar: Sidecar = { kind: spec.kind, input: spec.input, series: [] };
    const series: Series[] = [];
    for (const label of labels) {
        const rows = ok.filter(r => r.contender === label);
        sidecar.series.push({
            label,
            points: rows.map(r => ({ x: r[spec.x!], y: r[spec.y!] })),
        });
        series.push({
            label,
            stepped: false,
            points: rows.map(r => ({ x: Number(r[spec.x!]), y: Number(r[spec.y!]) })),
        });
    }
    if (series.every(s => s.points.length === 0)) {
        throw new Error(`${spec.input}: no data rows to plot`);
    }
    return {
        sidecar,
        plot: {
            title: spec.title ?? `${spec.y} vs ${spec.x}`,
            xLabel: spec.x,
            yLabel: spec.y,
            series,
        },
    };
}

function buildRatioEcdf(spec: FigureSpec): { sidecar: Sidecar; plot: Plot } {
    const table = loadCsv(spec.input);
    requireColumns(spec.input, table, ["point_id", "ratio"]);
    if (table.rows.length === 0) {
        throw new Error(`${spec.input}: no data rows to plot`);
    }
    // ascending by numeric ratio; "inf" sorts last
    const rows = [...table.rows].sort((a, b) => toNumber(a.ratio) - toNumber(b.ratio));
    const n = rows.length;
    const sidecar: Sidecar = {
        kind: spec.kind,
        input: spec.input,
        series: [
            {
                label: "ratio",
                points: rows.map((r, i) => ({ x: r.ratio, y: cumFrac(i + 1, n) })),
            },
        ],
    };
    const plot: Plot = {
        title: spec.title ?? "ratio ECDF",
        xLabel: "ratio",
        yLabel: "cumulative fraction",
        series: [
            {
                label: "ratio",
                stepped: true,
                points: rows.map((r, i) => ({ x: toNumber(r.ratio), y: (i + 1) / n })),
            },
        ],
    };
    return { sidecar, plot };
}

function toNumber(raw: string): number {
    return raw === "inf" ? Infinity : Number(raw);
}

function cumFrac(i: number, n: number): string {
    return ((i / n).toFixed(6));
}

export function renderFigure(spec: FigureSpec): void {
    let built;
    if (spec.kind === "ecdf_overlay") {
        built = buildEcdfOverlay(spec);
    } else if (spec.kind === "scatter_vs_param") {
        built = buildScatter(spec);
    } else {
        built = buildRatioEcdf(spec);
    }
    writeFileSync(spec.out, renderSvg(built.plot));
    writeFileSync(spec.out + ".json", JSON.stringify(built.sidecar, null, 1) + "\n");
}

export function renderSpecFile(specPath: string): number {
    const figures = parseSpecFile(readFileSync(specPath, "utf8"), dirname(specPath));
    for (const figure of figures) {
        renderFigure(figure);
    }
    return figures.length;
}
