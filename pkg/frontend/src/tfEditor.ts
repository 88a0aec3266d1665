// Transfer-function editor model: an ordered list of control points drawn
// over the volume's intensity histogram. Drags are clamped locally so the
// points always form a schema-valid transfer function.

import type { TfPoint } from "./protocol";
import { DEFAULT_TF } from "./protocol";

/** Minimum intensity gap kept between neighboring control points. */
export const MIN_GAP = 1e-3;

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

export class TfEditorModel {
  points: TfPoint[];
  selected: number | null = null;
  histogram: number[] = [];

  constructor(points: TfPoint[] = DEFAULT_TF) {
    this.points = points.map((p) => ({ ...p }));
    if (this.points.length === 0) {
      this.points = DEFAULT_TF.map((p) => ({ ...p }));
    }
    // schema requires fixed boundary points at intensities 0 and 1
    if (this.points[0].intensity !== 0) {
      this.points.unshift({ ...this.points[0], intensity: 0 });
    }
    if (this.points[this.points.length - 1].intensity !== 1) {
      this.points.push({
        ...this.points[this.points.length - 1],
        intensity: 1,
      });
    }
  }

  setHistogram(bins: number[]): void {
    this.histogram = bins.slice();
  }

  /**
   * Move a control point. Boundary points keep their intensity; interior
   * points clamp against their neighbors so ordering is preserved. Alpha is
   * clamped to [0, 1]. Returns the values actually applied.
   */
  dragPoint(
    index: number,
    intensity: number,
    alpha: number,
  ): { intensity: number; alpha: number } {
    const p = this.point(index);
    let applied = p.intensity;
    if (index > 0 && index < this.points.length - 1) {
      const lo = this.points[index - 1].intensity + MIN_GAP;
      const hi = this.points[index + 1].intensity - MIN_GAP;
      applied = Math.min(hi, Math.max(lo, intensity));
    }
    p.intensity = applied;
    p.a = clamp01(alpha);
    this.selected = index;
    return { intensity: p.intensity, alpha: p.a };
  }

  setColor(index: number, r: number, g: number, b: number): void {
    const p = this.point(index);
    p.r = clamp01(r);
    p.g = clamp01(g);
    p.b = clamp01(b);
  }

  /**
   * Insert a point at the given intensity with the curve's interpolated
   * color and alpha. Returns its index, or null when the neighborhood is
   * too crowded to keep the minimum gap.
   */
  addPoint(intensity: number): number | null {
    const x = clamp01(intensity);
    let index = this.points.findIndex((p) => p.intensity > x);
    if (index <= 0) {
      return null; // outside the editable interior
    }
    const prev = this.points[index - 1];
    const next = this.points[index];
    if (x - prev.intensity < MIN_GAP || next.intensity - x < MIN_GAP) {
      return null;
    }
    const t = (x - prev.intensity) / (next.intensity - prev.intensity);
    const lerp = (a: number, b: number) => a + t * (b - a);
    this.points.splice(index, 0, {
      intensity: x,
      r: lerp(prev.r, next.r),
      g: lerp(prev.g, next.g),
      b: lerp(prev.b, next.b),
      a: lerp(prev.a, next.a),
    });
    this.selected = index;
    return index;
  }

  /** Remove an interior point; boundary points are fixed by the schema. */
  removePoint(index: number): boolean {
    if (index <= 0 || index >= this.points.length - 1) {
      return false;
    }
    this.points.splice(index, 1);
    if (this.selected === index) {
      this.selected = null;
    }
    return true;
  }

  toPayload(): TfPoint[] {
    return this.points.map((p) => ({ ...p }));
  }

  private point(index: number): TfPoint {
    if (index < 0 || index >= this.points.length) {
      throw new RangeError(`no control point at index ${index}`);
    }
    return this.points[index];
  }
}
