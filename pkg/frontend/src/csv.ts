/** Minimal CSV reading for the simulator's output files (no quoting used). */

export class NamedColumnError extends Error {
  constructor(column: string, path: string, available: string[]) {
    super(`column '${column}' missing in ${path} (has: ${available.join(", ")})`);
    this.name = "NamedColumnError";
  }
}

export class EmptyInputError extends Error {
  constructor(path: string) {
    super(`empty input: ${path} has no data rows`);
    this.name = "EmptyInputError";
  }
}

export interface Table {
  path: string;
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string, path: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length < 2) {
    throw new EmptyInputError(path);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    columns.forEach((col, i) => {
      row[col] = (cells[i] ?? "").trim();
    });
    return row;
  });
  return { path, columns, rows };
}

export function numericColumn(table: Table, column: string): number[] {
  if (!table.columns.includes(column)) {
    throw new NamedColumnError(column, table.path, table.columns);
  }
  return table.rows.map((row) => Number(row[column]));
}

export function stringColumn(table: Table, column: string): string[] {
  if (!table.columns.includes(column)) {
    throw new NamedColumnError(column, table.path, table.columns);
  }
  return table.rows.map((row) => row[column]);
}
