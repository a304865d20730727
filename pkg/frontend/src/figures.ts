import { SchemaError, TraceRecord, TrialRow, methodsInOrder } from "./data.js";
import { PALETTE, Svg, linearScale, quantile } from "./svg.js";

const W = 640;
const H = 420;
const MARGIN = { left: 60, right: 20, top: 30, bottom: 70 };

/** Post-attack utility quartiles per method (whiskers at min/max). */
export function boxPlot(rows: TrialRow[]): string {
  const methods = methodsInOrder(rows);
  const values = new Map(methods.map((m) => [m, rows.filter((r) => r.method === m).map((r) => r.post_value).sort((a, b) => a - b)]));
  const all = rows.map((r) => r.post_value);
  const yMax = Math.max(...all) || 1;
  const y = linearScale(0, yMax, H - MARGIN.bottom, MARGIN.top);

  const svg = new Svg();
  svg.frame(MARGIN.left, MARGIN.top, W - MARGIN.right, H - MARGIN.bottom, y, 0, yMax);
  svg.text(W / 2, 16, "Post-attack utility by method");
  const slot = (W - MARGIN.left - MARGIN.right) / methods.length;
  methods.forEach((method, i) => {
    const vs = values.get(method)!;
    const cx = MARGIN.left + slot * (i + 0.5);
    const half = Math.min(28, slot * 0.3);
    const [lo, q1, med, q3, hi] = [vs[0], quantile(vs, 0.25), quantile(vs, 0.5), quantile(vs, 0.75), vs[vs.length - 1]];
    svg.line(cx, y(lo), cx, y(q1));
    svg.line(cx, y(q3), cx, y(hi));
    svg.line(cx - half / 2, y(lo), cx + half / 2, y(lo));
    svg.line(cx - half / 2, y(hi), cx + half / 2, y(hi));
    svg.rect(cx - half, y(q3), 2 * half, y(q1) - y(q3), PALETTE[i % PALETTE.length], "#333");
    svg.line(cx - half, y(med), cx + half, y(med), "#000", 2);
    svg.text(cx, H - MARGIN.bottom + 14, method, { size: 10, rotate: 18 });
  });
  return svg.render(W, H);
}

/** Optimality-ratio histograms in [0, 1], 20 bins, one panel per method. */
export function ratioHistogram(rows: TrialRow[]): string {
  const methods = methodsInOrder(rows).filter((m) => rows.some((r) => r.method === m && r.ratio !== null));
  if (methods.length === 0) {
    throw new SchemaError('no rows with a "ratio" value; histograms need worst-case-attack trials');
  }
  const bins = 20;
  const panelH = 110;
  const height = MARGIN.top + methods.length * panelH + 30;
  const svg = new Svg();
  svg.text(W / 2, 16, "Optimality ratios (20 bins over [0, 1])");
  methods.forEach((method, mi) => {
    const ratios = rows.filter((r) => r.method === method && r.ratio !== null).map((r) => r.ratio!);
    const counts = new Array<number>(bins).fill(0);
    for (const r of ratios) {
      const b = Math.min(bins - 1, Math.max(0, Math.floor(r * bins)));
      counts[b] += 1;
    }
    const top = MARGIN.top + mi * panelH;
    const bottom = top + panelH - 26;
    const maxCount = Math.max(...counts) || 1;
    const x = linearScale(0, 1, MARGIN.left, W - MARGIN.right);
    const y = linearScale(0, maxCount, bottom, top + 8);
    svg.line(MARGIN.left, bottom, W - MARGIN.right, bottom);
    for (let b = 0; b < bins; b++) {
      const x0 = x(b / bins);
      const x1 = x((b + 1) / bins);
      svg.rect(x0 + 0.5, y(counts[b]), x1 - x0 - 1, bottom - y(counts[b]), PALETTE[mi % PALETTE.length]);
    }
    for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
      svg.text(x(tick), bottom + 12, tick.toString(), { size: 9 });
    }
    svg.text(MARGIN.left, top + 4, `${method} (${ratios.length} trials)`, { anchor: "start", size: 10 });
  });
  return svg.render(W, height);
}

/** Mean post-attack utility per method, grouped by robot count. */
export function meanUtilityBars(rows: TrialRow[]): string {
  const methods = methodsInOrder(rows);
  const ns = [...new Set(rows.map((r) => r.n))].sort((a, b) => a - b);
  const means = new Map<string, number>();
  for (const n of ns) {
    for (const m of methods) {
      const vs = rows.filter((r) => r.n === n && r.method === m).map((r) => r.post_value);
      if (vs.length > 0) {
        means.set(`${n}|${m}`, vs.reduce((a, b) => a + b, 0) / vs.length);
      }
    }
  }
  const yMax = Math.max(...means.values()) || 1;
  const y = linearScale(0, yMax, H - MARGIN.bottom, MARGIN.top);
  const svg = new Svg();
  svg.frame(MARGIN.left, MARGIN.top, W - MARGIN.right, H - MARGIN.bottom, y, 0, yMax);
  svg.text(W / 2, 16, "Mean post-attack utility by robot count");
  const groupW = (W - MARGIN.left - MARGIN.right) / ns.length;
  const barW = Math.min(26, (groupW * 0.8) / methods.length);
  ns.forEach((n, gi) => {
    const gx = MARGIN.left + groupW * gi + (groupW - barW * methods.length) / 2;
    methods.forEach((m, mi) => {
      const mean = means.get(`${n}|${m}`);
      if (mean === undefined) return;
      svg.rect(gx + mi * barW, y(mean), barW - 2, H - MARGIN.bottom - y(mean), PALETTE[mi % PALETTE.length]);
    });
    svg.text(MARGIN.left + groupW * (gi + 0.5), H - MARGIN.bottom + 16, `N=${n}`, { size: 11 });
  });
  methods.forEach((m, mi) => {
    const lx = MARGIN.left + 10 + Math.floor(mi / 3) * 210;
    const ly = H - 28 + (mi % 3) * 12;
    svg.rect(lx, ly - 8, 10, 10, PALETTE[mi % PALETTE.length]);
    svg.text(lx + 14, ly, m, { anchor: "start", size: 10 });
  });
  return svg.render(W, H);
}

/** Per-round utility of the surviving (selector) robots during phase 2. */
export function utilityTrace(records: TraceRecord[]): string {
  const phase2 = records.filter((r) => r.phase === 2 && r.role === "selector");
  if (phase2.length === 0) {
    throw new SchemaError("trace has no phase-2 selector records");
  }
  const robots = [...new Set(phase2.map((r) => r.robot))].sort((a, b) => a - b);
  const rounds = phase2.map((r) => r.round);
  const utils = phase2.map((r) => r.utility);
  const x = linearScale(Math.min(...rounds), Math.max(...rounds), MARGIN.left, W - MARGIN.right);
  const yMax = Math.max(...utils) || 1;
  const y = linearScale(0, yMax, H - MARGIN.bottom, MARGIN.top);
  const svg = new Svg();
  svg.frame(MARGIN.left, MARGIN.top, W - MARGIN.right, H - MARGIN.bottom, y, 0, yMax);
  svg.text(W / 2, 16, `Utility per round, ${robots.length} surviving robots`);
  svg.text(W / 2, H - MARGIN.bottom + 28, "communication round", { size: 10 });
  robots.forEach((robot, i) => {
    const pts = phase2
      .filter((r) => r.robot === robot)
      .sort((a, b) => a.round - b.round)
      .map((r) => [x(r.round), y(r.utility)] as [number, number]);
    svg.polyline(pts, PALETTE[i % PALETTE.length]);
    svg.text(pts[pts.length - 1][0] - 4, pts[pts.length - 1][1] - 5, `r${robot}`, { size: 9, anchor: "end" });
  });
  return svg.render(W, H);
}
