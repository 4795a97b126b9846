import { readFileSync } from "node:fs";

export interface CsvTable {
    columns: string[];
    rows: Record<string, string>[];
}

/** Strict reader for the simple comma-separated files the CLI emits. */
export function loadCsv(path: string): CsvTable {
    const text = readFileSync(path, "utf8");
    const lines = text.split(/\r?\n/).filter(l => l.length > 0);
    if (lines.length === 0) {
        throw new Error(`${path}: empty file`);
    }
    const columns = lines[0].split(",");
    const rows = lines.slice(1).map((line, i) => {
        const cells = line.split(",");
        if (cells.length !== columns.length) {
            throw new Error(`${path}: row ${i + 2} has ${cells.length} cells, header has ${columns.length}`);
        }
        const row: Record<string, string> = {};
        columns.forEach((c, j) => (row[c] = cells[j]));
        return row;
    });
    return { columns, rows };
}

export function requireColumns(path: string, table: CsvTable, needed: string[]): void {
    const missing = needed.filter(c => !table.columns.includes(c));
    if (missing.length > 0) {
        throw new Error(
            `${path}: schema mismatch: expected columns [${needed.join(", ")}], ` +
            `found [${table.columns.join(", ")}]`,
        );
    }
}
