export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  return Math.abs(v) >= 1000 ? v.toFixed(0) : v.toPrecision(4);
}

export const PALETTE = ["#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7", "#a463f2"];

export class Svg {
  private parts: string[] = [];

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", width = 1): void {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${Math.max(0, w).toFixed(2)}" height="${Math.max(0, h).toFixed(2)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; rotate?: number } = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "middle";
    const transform = opts.rotate ? ` transform="rotate(${opts.rotate} ${x.toFixed(2)} ${y.toFixed(2)})"` : "";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}"${transform}>${esc(content)}</text>`,
    );
  }

  polyline(points: [number, number][], stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  /** Left and bottom axes with tick labels on the y axis. */
  frame(x0: number, y0: number, x1: number, y1: number, yScale: Scale, yMin: number, yMax: number): void {
    this.line(x0, y0, x0, y1);
    this.line(x0, y1, x1, y1);
    const ticks = 5;
    for (let t = 0; t <= ticks; t++) {
      const v = yMin + ((yMax - yMin) * t) / ticks;
      const y = yScale(v);
      this.line(x0 - 3, y, x0, y);
      this.text(x0 - 6, y + 3, fmt(v), { anchor: "end", size: 9 });
    }
  }

  render(width: number, height: number): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n` +
      `<rect width="${width}" height="${height}" fill="white"/>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}

export function quantile(sorted: number[], q: number): number {
  if (sorted.length === 0) return 0;
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}
