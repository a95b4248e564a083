/** One renderer per figure id, all reading the simulator's documented CSVs. */

import { readFileSync } from "node:fs";
import { Table, parseCsv, numericColumn, stringColumn } from "./csv.js";
import {
  DEFAULT_FRAME,
  SvgChart,
  color,
  extent,
  fitLine,
  fmt,
  heatColor,
  linearScale,
  linearTicks,
  logScale,
  logTicks,
  positiveExtent,
} from "./svg.js";

export interface AxisFlags {
  logx?: boolean;
  logy?: boolean;
}

export type Renderer = (tables: Table[], flags: AxisFlags) => string;

export function loadTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"), path);
}

function frameScales(flags: AxisFlags, xs: number[], ys: number[]) {
  const f = DEFAULT_FRAME;
  const [x0, x1] = flags.logx ? positiveExtent(xs) : extent(xs);
  const [y0, y1] = flags.logy ? positiveExtent(ys) : extent(ys);
  const sx = flags.logx
    ? logScale(x0, x1, f.left, f.width - f.right)
    : linearScale(x0, x1, f.left, f.width - f.right);
  const sy = flags.logy
    ? logScale(y0, y1, f.height - f.bottom, f.top)
    : linearScale(y0, y1, f.height - f.bottom, f.top);
  const tx = flags.logx ? logTicks(x0, x1) : linearTicks(x0, x1);
  const ty = flags.logy ? logTicks(y0, y1) : linearTicks(y0, y1);
  return { sx, sy, tx, ty };
}

/** Training-loss comparison: one curve per report (lattice, MLP, MLPf). */
export function renderFig2(tables: Table[], flags: AxisFlags): string {
  const logy = flags.logy ?? true;
  const chart = new SvgChart();
  const series = tables.map((t) => ({
    name: seriesName(t.path),
    epochs: numericColumn(t, "epoch"),
    loss: numericColumn(t, "loss"),
  }));
  const allEpochs = series.flatMap((s) => s.epochs);
  const allLoss = series.flatMap((s) => s.loss);
  const { sx, sy, tx, ty } = frameScales({ logx: false, logy }, allEpochs, allLoss);
  series.forEach((s, i) => {
    const pts = s.epochs
      .map((e, j) => [sx(e), sy(s.loss[j])] as [number, number])
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y));
    chart.polyline(pts, color(i));
  });
  chart.xAxis(sx, tx, "epoch", false);
  chart.yAxis(sy, ty, "full-data loss", logy);
  chart.legend(series.map((s, i) => [s.name, color(i)]));
  return chart.render("Training loss: lattice vs MLP baselines");
}

/** Scale sweep: steady-state loss and free-energy change against stiffness. */
export function renderFig3(tables: Table[], flags: AxisFlags): string {
  const t = tables[0];
  const k = numericColumn(t, "k");
  const loss = numericColumn(t, "loss_mean");
  const df = numericColumn(t, "deltaF");
  const chart = new SvgChart();
  const { sx, sy, tx, ty } = frameScales({ logx: true, logy: true }, k, loss);
  const pts = k.map((v, i) => [sx(v), sy(loss[i])] as [number, number]);
  chart.polyline(pts, color(0));
  pts.forEach(([x, y]) => chart.circle(x, y, 3, color(0)));
  // second axis: free-energy change
  const [d0, d1] = extent(df);
  const f = DEFAULT_FRAME;
  const sd = linearScale(d0, d1, f.height - f.bottom, f.top);
  const dPts = k.map((v, i) => [sx(v), sd(df[i])] as [number, number]);
  chart.polyline(dPts, color(1));
  dPts.forEach(([x, y]) => chart.circle(x, y, 3, color(1)));
  chart.xAxis(sx, tx, "spring constant k (M = k)", true);
  chart.yAxis(sy, ty, "steady-state loss", true, "left");
  chart.yAxis(sd, linearTicks(d0, d1), "deltaF", false, "right");
  chart.legend([["loss", color(0)], ["deltaF", color(1)]]);
  return chart.render("Steady-state loss and free energy vs scale");
}

/** Plateau free energy vs stick count on log-log axes with a fitted line. */
export function renderFig4a(tables: Table[], flags: AxisFlags): string {
  const t = tables[0];
  const n = numericColumn(t, "N_s");
  const df = numericColumn(t, "deltaF_min");
  const chart = new SvgChart();
  const { sx, sy, tx, ty } = frameScales({ logx: true, logy: true }, n, df);
  n.forEach((v, i) => chart.circle(sx(v), sy(df[i]), 4, color(0)));
  const { slope, intercept } = fitLine(n.map(Math.log10), df.map(Math.log10));
  const [lo, hi] = positiveExtent(n);
  const fitPts: Array<[number, number]> = [lo, hi].map((v) => [
    sx(v),
    sy(10 ** (intercept + slope * Math.log10(v))),
  ]);
  chart.polyline(fitPts, color(1), 1);
  chart.text(DEFAULT_FRAME.width - 160, DEFAULT_FRAME.top + 16,
    `fit slope ${slope.toFixed(2)}`, "start");
  chart.xAxis(sx, tx, "stick count N_s", true);
  chart.yAxis(sy, ty, "deltaF_min", true);
  return chart.render("Learning barrier vs expressivity");
}

/** Friction-temperature grid of the plateau free energy as colored cells. */
export function renderFig4b(tables: Table[], flags: AxisFlags): string {
  const t = tables[0];
  const gamma = numericColumn(t, "gamma");
  const temp = numericColumn(t, "T");
  const df = numericColumn(t, "deltaF_min");
  const gs = uniqueSorted(gamma);
  const ts = uniqueSorted(temp);
  const f = DEFAULT_FRAME;
  const chart = new SvgChart();
  const sx = logScale(gs[0], gs[gs.length - 1], f.left, f.width - f.right);
  const sy = logScale(ts[0], ts[ts.length - 1], f.height - f.bottom, f.top);
  const [dLo, dHi] = positiveExtent(df);
  const tone = (v: number) =>
    (Math.log10(v) - Math.log10(dLo)) / (Math.log10(dHi) - Math.log10(dLo) || 1);
  const cellW = (f.width - f.right - f.left) / gs.length;
  const cellH = (f.height - f.bottom - f.top) / ts.length;
  for (let i = 0; i < gamma.length; i++) {
    const gi = gs.indexOf(gamma[i]);
    const ti = ts.indexOf(temp[i]);
    const x = f.left + gi * cellW;
    const y = f.height - f.bottom - (ti + 1) * cellH;
    chart.rect(x, y, cellW, cellH, heatColor(tone(df[i])), df[i]);
  }
  chart.xAxis(sx, gs, "friction gamma", true);
  chart.yAxis(sy, ts, "temperature T", true);
  chart.text(f.width / 2, f.height - 36,
    `deltaF_min from ${fmt(dLo)} (blue) to ${fmt(dHi)} (red)`);
  return chart.render("Learning barrier over friction and temperature");
}

/** Approximation error vs stick count per function, log-log, slope annotated. */
export function renderFig5(tables: Table[], flags: AxisFlags): string {
  const t = tables[0];
  const fn = stringColumn(t, "f");
  const n = numericColumn(t, "N_s");
  const err = numericColumn(t, "E_oracle");
  const names = uniqueStable(fn);
  const chart = new SvgChart();
  const { sx, sy, tx, ty } = frameScales({ logx: true, logy: true }, n, err);
  const slopes: number[] = [];
  names.forEach((name, i) => {
    const idx = fn.map((v, j) => (v === name ? j : -1)).filter((j) => j >= 0);
    const pts = idx.map((j) => [sx(n[j]), sy(err[j])] as [number, number]);
    chart.polyline(pts, color(i));
    pts.forEach(([x, y]) => chart.circle(x, y, 3, color(i)));
    slopes.push(fitLine(idx.map((j) => Math.log10(n[j])),
      idx.map((j) => Math.log10(err[j]))).slope);
  });
  const mean = slopes.reduce((a, b) => a + b, 0) / slopes.length;
  const { slope, intercept } = pooledFit(fn, n, err, names);
  const [lo, hi] = positiveExtent(n);
  chart.polyline(
    [lo, hi].map((v) => [sx(v), sy(10 ** (intercept + slope * Math.log10(v)))] as [number, number]),
    "#666", 1);
  chart.text(DEFAULT_FRAME.width - 170, DEFAULT_FRAME.top + 16,
    `fit slope ${mean.toFixed(2)}`, "start");
  chart.xAxis(sx, tx, "stick count N_s", true);
  chart.yAxis(sy, ty, "approximation error", true);
  chart.legend(names.map((name, i) => [name, color(i)]));
  return chart.render("Approximation error scaling");
}

/** Entropy production and mean potential energy over time, dual axis. */
export function renderFig6(tables: Table[], flags: AxisFlags): string {
  const chart = new SvgChart();
  const f = DEFAULT_FRAME;
  const allT = tables.flatMap((t) => numericColumn(t, "t"));
  const allPi = tables.flatMap((t) => numericColumn(t, "Pi"));
  const allU = tables.flatMap((t) => numericColumn(t, "U_mean"));
  const sx = linearScale(...extent(allT), f.left, f.width - f.right);
  const [p0, p1] = positiveExtent(allPi);
  const sPi = logScale(p0, p1, f.height - f.bottom, f.top);
  const [u0, u1] = positiveExtent(allU);
  const sU = logScale(u0, u1, f.height - f.bottom, f.top);
  const legend: Array<[string, string]> = [];
  tables.forEach((t, i) => {
    const time = numericColumn(t, "t");
    const pi = numericColumn(t, "Pi");
    const u = numericColumn(t, "U_mean");
    const piPts = time
      .map((v, j) => [sx(v), pi[j] > 0 ? sPi(pi[j]) : NaN] as [number, number])
      .filter(([, y]) => Number.isFinite(y));
    const uPts = time
      .map((v, j) => [sx(v), u[j] > 0 ? sU(u[j]) : NaN] as [number, number])
      .filter(([, y]) => Number.isFinite(y));
    chart.polyline(piPts, color(2 * i));
    chart.polyline(uPts, color(2 * i + 1));
    legend.push([`Pi ${seriesName(t.path)}`, color(2 * i)]);
    legend.push([`U ${seriesName(t.path)}`, color(2 * i + 1)]);
  });
  chart.xAxis(sx, linearTicks(...extent(allT)), "time", false);
  chart.yAxis(sPi, logTicks(p0, p1), "entropy production rate", true, "left");
  chart.yAxis(sU, logTicks(u0, u1), "mean potential energy", true, "right");
  chart.legend(legend);
  return chart.render("Entropy production and potential energy");
}

function seriesName(path: string): string {
  const base = path.split("/").pop() ?? path;
  return base.replace(/\.csv$/, "").replace(/_report$/, "");
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

function uniqueStable(values: string[]): string[] {
  return [...new Set(values)];
}

function pooledFit(fn: string[], n: number[], err: number[], names: string[]) {
  // common slope with per-function intercepts; report the mean intercept
  let slopeNum = 0;
  let slopeDen = 0;
  let interceptSum = 0;
  for (const name of names) {
    const idx = fn.map((v, j) => (v === name ? j : -1)).filter((j) => j >= 0);
    const xs = idx.map((j) => Math.log10(n[j]));
    const ys = idx.map((j) => Math.log10(err[j]));
    const mx = xs.reduce((a, b) => a + b, 0) / xs.length;
    const my = ys.reduce((a, b) => a + b, 0) / ys.length;
    for (let i = 0; i < xs.length; i++) {
      slopeNum += (xs[i] - mx) * (ys[i] - my);
      slopeDen += (xs[i] - mx) ** 2;
    }
    interceptSum += my - mx * (slopeDen === 0 ? 0 : slopeNum / slopeDen);
  }
  const slope = slopeDen === 0 ? 0 : slopeNum / slopeDen;
  return { slope, intercept: interceptSum / names.length };
}

export const RENDERERS: Record<string, Renderer> = {
  fig2: renderFig2,
  fig3: renderFig3,
  fig4a: renderFig4a,
  fig4b: renderFig4b,
  fig5: renderFig5,
  fig6: renderFig6,
};
