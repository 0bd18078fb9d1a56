// Min/max decimation for plotting.  Long traces are reduced by bucketing the
// index range and keeping each bucket's extremes, so spikes survive no matter
// how narrow they are.  Plain subsampling would erase exactly the points a
// triage user is looking for.

export interface Point {
  i: number;
  v: number;
}

export const MAX_PLOT_POINTS = 2000;

export function minMaxDownsample(values: number[], maxPoints: number = MAX_PLOT_POINTS): Point[] {
  const n = values.length;
  if (maxPoints < 2) throw new RangeError(`maxPoints must be >= 2, got ${maxPoints}`);
  if (n <= maxPoints) {
    return values.map((v, i) => ({ i, v }));
  }
  const nBins = Math.floor(maxPoints / 2);
  const out: Point[] = [];
  for (let b = 0; b < nBins; b++) {
    const lo = Math.floor((b * n) / nBins);
    const hi = Math.floor(((b + 1) * n) / nBins);
    let iMin = lo;
    let iMax = lo;
    for (let i = lo + 1; i < hi; i++) {
      const v = values[i] as number;
      if (v < (values[iMin] as number)) iMin = i;
      if (v > (values[iMax] as number)) iMax = i;
    }
    if (iMin === iMax) {
      out.push({ i: iMin, v: values[iMin] as number });
    } else if (iMin < iMax) {
      out.push({ i: iMin, v: values[iMin] as number });
      out.push({ i: iMax, v: values[iMax] as number });
    } else {
      out.push({ i: iMax, v: values[iMax] as number });
      out.push({ i: iMin, v: values[iMin] as number });
    }
  }
  return out;
}
