import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseSpecFile, renderFigure, renderSpecFile, Sidecar } from "../src/figures.js";

// fixture campaign outputs in the shapes the python CLI writes
const RESULTS_CSV = [
    "point_id,contender,p1,r1,k1,h1,owd_ms,buffer_ms,fraction_received,rebuffer_ms,status",
    "pt000,reliable,0.005000,0.250000,0.980000,0.050000,20.000000,100.000000,1.000000,66.666000,ok",
    "pt000,rs-30-20,0.005000,0.250000,0.980000,0.050000,20.000000,100.000000,0.997167,166.665000,ok",
    "pt001,reliable,0.005000,0.250000,0.980000,0.050000,80.000000,100.000000,1.000000,12299.877000,ok",
    "pt001,rs-30-20,0.005000,0.250000,0.980000,0.050000,80.000000,100.000000,0.997167,166.665000,ok",
    "pt002,reliable,0.005000,0.250000,0.980000,0.050000,60.000000,100.000000,1.000000,9333.240000,failed:x",
    "",
].join("\n");

const ECDF_CSV = [
    "contender,value,cum_frac",
    "plain,0.954583,0.250000",
    "plain,0.989583,0.750000",
    "plain,0.995833,1.000000",
    "rs-30-20,0.991667,0.500000",
    "rs-30-20,1.000000,1.000000",
    "",
].join("\n");

const RATIO_CSV = [
    "point_id,ratio",
    "pt000,1.002106",
    "pt001,0.998750",
    "pt002,1.000000",
    "pt003,inf",
    "",
].join("\n");

function setup() {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    writeFileSync(join(dir, "results.csv"), RESULTS_CSV);
    writeFileSync(join(dir, "ecdf.csv"), ECDF_CSV);
    writeFileSync(join(dir, "ratio.csv"), RATIO_CSV);
    return dir;
}

const SPEC_YAML = `
figures:
  - kind: ecdf_overlay
    input: ecdf.csv
    out: ecdf.svg
    series: [plain, rs-30-20]
  - kind: scatter_vs_param
    input: results.csv
    x: owd_ms
    y: rebuffer_ms
    out: scatter.svg
  - kind: ratio_ecdf
    input: ratio.csv
    out: ratio.svg
`;

function sidecar(dir: string, name: string): Sidecar {
    return JSON.parse(readFileSync(join(dir, name), "utf8"));
}

describe("figure rendering", () => {
    it("renders all three kinds with sidecars equal to the input values", () => {
        const dir = setup();
        writeFileSync(join(dir, "figures.yaml"), SPEC_YAML);
        expect(renderSpecFile(join(dir, "figures.yaml"))).toBe(3);

        // S1: every plotted value is byte-identical to the CSV cell
        const ecdf = sidecar(dir, "ecdf.svg.json");
        expect(ecdf.series.map(s => s.label)).toEqual(["plain", "rs-30-20"]);
        const plainPoints = ecdf.series[0].points;
        expect(plainPoints).toEqual([
            { x: "0.954583", y: "0.250000" },
            { x: "0.989583", y: "0.750000" },
            { x: "0.995833", y: "1.000000" },
        ]);

        const scatter = sidecar(dir, "scatter.svg.json");
        const reliable = scatter.series.find(s => s.label === "reliable")!;
        // failed rows are excluded; values match the csv exactly
        expect(reliable.points).toEqual([
            { x: "20.000000", y: "66.666000" },
            { x: "80.000000", y: "12299.877000" },
        ]);

        const ratio = sidecar(dir, "ratio.svg.json");
        expect(ratio.series[0].points.map(p => p.x)).toEqual([
            "0.998750", "1.000000", "1.002106", "inf",
        ]);
        expect(ratio.series[0].points.at(-1)!.y).toBe("1.000000");

        // the svg exists, is deterministic and mentions every series label
        const svg = readFileSync(join(dir, "ecdf.svg"), "utf8");
        expect(svg).toContain("<svg");
        expect(svg).toContain("plain");
        expect(svg).toContain("rs-30-20");
        renderSpecFile(join(dir, "figures.yaml"));
        expect(readFileSync(join(dir, "ecdf.svg"), "utf8")).toBe(svg);
    });

    it("legend order follows the spec series order", () => {
        const dir = setup();
        const spec = {
            kind: "ecdf_overlay" as const,
            input: join(dir, "ecdf.csv"),
            out: join(dir, "custom.svg"),
            series: ["rs-30-20", "plain"],
        };
        renderFigure(spec);
        const side = sidecar(dir, "custom.svg.json");
        expect(side.series.map(s => s.label)).toEqual(["rs-30-20", "plain"]);
    });

    it("reports a schema mismatch with expected and found columns", () => {
        const dir = setup();
        writeFileSync(join(dir, "bad.csv"), "a,b\n1,2\n");
        const spec = {
            kind: "ecdf_overlay" as const,
            input: join(dir, "bad.csv"),
            out: join(dir, "bad.svg"),
        };
        expect(() => renderFigure(spec)).toThrowError(/expected columns.*contender.*found.*a, b/);
    });

    it("rejects empty inputs and unknown kinds", () => {
        const dir = setup();
        writeFileSync(join(dir, "empty.csv"), "");
        expect(() =>
            renderFigure({
                kind: "ratio_ecdf",
                input: join(dir, "empty.csv"),
                out: join(dir, "x.svg"),
            }),
        ).toThrowError(/empty file/);
        writeFileSync(join(dir, "headeronly.csv"), "point_id,ratio\n");
        expect(() =>
            renderFigure({
                kind: "ratio_ecdf",
                input: join(dir, "headeronly.csv"),
                out: join(dir, "y.svg"),
            }),
        ).toThrowError(/no data rows/);
        expect(() => parseSpecFile("figures:\n  - kind: pie\n    input: a\n    out: b\n", dir))
            .toThrowError(/unknown kind/);
    });

    it("rejects unknown series names", () => {
        const dir = setup();
        expect(() =>
            renderFigure({
                kind: "ecdf_overlay",
                input: join(dir, "ecdf.csv"),
                out: join(dir, "z.svg"),
                series: ["nope"],
            }),
        ).toThrowError(/series not in data/);
    });
});
