/** Seeded force-directed layout; same seed, same positions, every run. */

export interface Point {
  x: number;
  y: number;
}

export interface LayoutEdge {
  source: string;
  target: string;
  weight: number;
}

/** splitmix32: tiny deterministic PRNG, uniform in [0, 1). */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 4294967296;
  };
}

export function forceLayout(
  ids: string[],
  edges: LayoutEdge[],
  width: number,
  height: number,
  seed: number,
  iterations = 200,
): Map<string, Point> {
  const n = ids.length;
  const positions = new Map<string, Point>();
  if (n === 0) return positions;

  const rand = seededRandom(seed);
  const cx = width / 2;
  const cy = height / 2;
  const ring = Math.min(width, height) * 0.35;
  const xs = new Float64Array(n);
  const ys = new Float64Array(n);
  const index = new Map<string, number>();
  ids.forEach((id, i) => {
    index.set(id, i);
    const angle = (2 * Math.PI * i) / n + rand() * 0.3;
    xs[i] = cx + ring * Math.cos(angle) + (rand() - 0.5) * 10;
    ys[i] = cy + ring * Math.sin(angle) + (rand() - 0.5) * 10;
  });

  const maxWeight = edges.reduce((top, e) => Math.max(top, e.weight), 0) || 1;
  const links = edges
    .filter((e) => index.has(e.source) && index.has(e.target))
    .map((e) => ({
      a: index.get(e.source) as number,
      b: index.get(e.target) as number,
      strength: e.weight / maxWeight,
    }));

  const repulsion = (width * height) / Math.max(n, 1) / 12;
  const ideal = ring / 1.5;
  for (let step = 0; step < iterations; step++) {
    const cooling = 1 - step / iterations;
    const fx = new Float64Array(n);
    const fy = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = xs[i]! - xs[j]!;
        let dy = ys[i]! - ys[j]!;
        let dist2 = dx * dx + dy * dy;
        if (dist2 < 1e-6) {
          dx = 0.01 * (i - j);
          dy = 0.01;
          dist2 = dx * dx + dy * dy;
        }
        const push = repulsion / dist2;
        fx[i] = fx[i]! + dx * push;
        fy[i] = fy[i]! + dy * push;
        fx[j] = fx[j]! - dx * push;
        fy[j] = fy[j]! - dy * push;
      }
      fx[i] = fx[i]! + (cx - xs[i]!) * 0.02;
      fy[i] = fy[i]! + (cy - ys[i]!) * 0.02;
    }
    for (const { a, b, strength } of links) {
      const dx = xs[b]! - xs[a]!;
      const dy = ys[b]! - ys[a]!;
      const dist = Math.sqrt(dx * dx + dy * dy) || 1;
      const pull = ((dist - ideal) / dist) * 0.05 * (0.5 + strength);
      fx[a] = fx[a]! + dx * pull;
      fy[a] = fy[a]! + dy * pull;
      fx[b] = fx[b]! - dx * pull;
      fy[b] = fy[b]! - dy * pull;
    }
    const margin = 20;
    for (let i = 0; i < n; i++) {
      xs[i] = Math.min(width - margin, Math.max(margin, xs[i]! + fx[i]! * cooling));
      ys[i] = Math.min(height - margin, Math.max(margin, ys[i]! + fy[i]! * cooling));
    }
  }

  ids.forEach((id, i) => positions.set(id, { x: xs[i]!, y: ys[i]! }));
  return positions;
}
