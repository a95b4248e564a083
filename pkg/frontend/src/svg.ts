/** Deterministic SVG chart primitives: same data in, same bytes out. */

export type Scale = (value: number) => number;

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+($|e)/, "$1")
    : s;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale requires positive bounds, got [${d0}, ${d1}]`);
  }
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

export function extent(values: number[]): [number, number] {
  const finite = values.filter(Number.isFinite);
  if (finite.length === 0) return [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

export function positiveExtent(values: number[]): [number, number] {
  const pos = values.filter((v) => Number.isFinite(v) && v > 0);
  if (pos.length === 0) return [1e-3, 1];
  const lo = Math.min(...pos);
  const hi = Math.max(...pos);
  return lo === hi ? [lo / 2, hi * 2] : [lo, hi];
}

export function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); e <= Math.floor(Math.log10(hi) + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

export function linearTicks(lo: number, hi: number, n = 5): number[] {
  const step = (hi - lo) / (n - 1);
  return Array.from({ length: n }, (_, i) => lo + i * step);
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}

/** Blue-to-red ramp used for heatmap cells; input in [0, 1]. */
export function heatColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const r = Math.round(40 + 215 * clamped);
  const g = Math.round(60 + 40 * (1 - Math.abs(2 * clamped - 1)));
  const b = Math.round(255 - 215 * clamped);
  return `rgb(${r},${g},${b})`;
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 420,
  left: 70,
  right: 25,
  top: 30,
  bottom: 55,
};

export class SvgChart {
  private parts: string[] = [];
  constructor(readonly frame: Frame = DEFAULT_FRAME) {}

  raw(element: string): void {
    this.parts.push(element);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.raw(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.raw(`<polyline fill="none" stroke="${stroke}" stroke-width="${width}" points="${path}"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.raw(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, dataValue?: number): void {
    const data = dataValue === undefined ? "" : ` data-v="${fmt(dataValue)}"`;
    this.raw(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${data}/>`,
    );
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 12): void {
    this.raw(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
        `font-family="sans-serif" font-size="${size}">${escapeXml(content)}</text>`,
    );
  }

  xAxis(scale: Scale, ticks: number[], label: string, log: boolean): void {
    const { left, right, top, bottom, width, height } = this.frame;
    const y = height - bottom;
    this.line(left, y, width - right, y, "#000");
    for (const t of ticks) {
      const x = scale(t);
      this.line(x, y, x, y + 5, "#000");
      this.text(x, y + 18, log ? expLabel(t) : fmt(t));
    }
    this.text((left + width - right) / 2, height - 12, label);
  }

  yAxis(scale: Scale, ticks: number[], label: string, log: boolean, side: "left" | "right" = "left"): void {
    const { left, right, top, bottom, width, height } = this.frame;
    const x = side === "left" ? left : width - right;
    this.line(x, top, x, height - bottom, "#000");
    for (const t of ticks) {
      const y = scale(t);
      this.line(x, y, x + (side === "left" ? -5 : 5), y, "#000");
      this.text(x + (side === "left" ? -8 : 8), y + 4, log ? expLabel(t) : fmt(t),
        side === "left" ? "end" : "start", 11);
    }
    const lx = side === "left" ? 16 : width - 8;
    this.text(lx, top - 10, label, side === "left" ? "start" : "end");
  }

  legend(entries: Array<[string, string]>): void {
    const { width, right, top } = this.frame;
    entries.forEach(([name, stroke], i) => {
      const y = top + 14 + 16 * i;
      this.line(width - right - 120, y - 4, width - right - 100, y - 4, stroke, 2);
      this.text(width - right - 94, y, name, "start", 11);
    });
  }

  render(title: string): string {
    const { width, height } = this.frame;
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">\n` +
      `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>\n` +
      `<text x="${width / 2}" y="18" text-anchor="middle" font-family="sans-serif" ` +
      `font-size="14" font-weight="bold">${escapeXml(title)}</text>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export function expLabel(v: number): string {
  const e = Math.log10(v);
  if (Number.isInteger(e) && Math.abs(e) > 2) return `1e${e}`;
  return fmt(v);
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Least-squares slope and intercept of y against x. */
export function fitLine(x: number[], y: number[]): { slope: number; intercept: number } {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) ** 2;
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const slope = sxx === 0 ? 0 : sxy / sxx;
  return { slope, intercept: my - slope * mx };
}
