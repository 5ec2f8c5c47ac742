/** Pure geometry for the stacked yearly share chart. */

export interface Band {
  topic: number;
  /** top edge, SVG coordinates (y grows downward) */
  y0: number;
  /** bottom edge */
  y1: number;
}

/**
 * Stack one column per year. Topic 0 sits at the bottom; each band's height is
 * share * height, so a column whose shares sum to 1 fills the chart exactly.
 */
export function stackColumns(shares: number[][], height: number): Band[][] {
  return shares.map((row) => {
    const bands: Band[] = [];
    let bottom = height;
    for (let topic = 0; topic < row.length; topic++) {
      const extent = (row[topic] ?? 0) * height;
      bands.push({ topic, y0: bottom - extent, y1: bottom });
      bottom -= extent;
    }
    return bands;
  });
}

export function bandHeight(band: Band): number {
  return band.y1 - band.y0;
}
