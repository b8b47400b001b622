// Force-directed layout: linked stickers attract, everything drifts gently
// toward the canvas center, and a hard collision pass keeps stickers apart.

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
}

export interface LayoutLink {
  source: number; // node index
  target: number;
}

export interface LayoutParams {
  width: number;
  height: number;
  collisionRadius: number;
  linkStrength: number;
  centerStrength: number;
  damping: number;
  alphaDecay: number;
}

// Stickers render at 64x64; the collision radius exceeds the rendered
// radius so converged layouts keep a visible gap between stickers.
export const RENDERED_RADIUS = 32;

export const DEFAULT_PARAMS: LayoutParams = {
  width: 800,
  height: 600,
  collisionRadius: 36,
  linkStrength: 0.04,
  centerStrength: 0.015,
  damping: 0.6,
  alphaDecay: 0.98,
};

export class ForceLayout {
  readonly nodes: LayoutNode[];
  readonly params: LayoutParams;
  private readonly links: LayoutLink[];
  private readonly restLength: number;
  // cooling factor: forces fade out so the simulation settles, while the
  // collision pass stays full-strength so overlaps never survive
  private alpha = 1;

  constructor(ids: string[], links: LayoutLink[], params: Partial<LayoutParams> = {}) {
    this.params = { ...DEFAULT_PARAMS, ...params };
    this.links = links;
    // stickers never rest closer than their collision diameter
    this.restLength = this.params.collisionRadius * 2.5;
    const cx = this.params.width / 2;
    const cy = this.params.height / 2;
    const ring = Math.max(this.params.collisionRadius * 2, Math.min(cx, cy) / 2);
    this.nodes = ids.map((id, i) => {
      // deterministic initial placement on a circle
      const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
      const offset = ids.length === 1 ? 0 : ring;
      return {
        id,
        x: cx + offset * Math.cos(angle),
        y: cy + offset * Math.sin(angle),
        vx: 0,
        vy: 0,
      };
    });
  }

  /** One simulation step; returns the largest node displacement in px. */
  tick(): number {
    const { collisionRadius, linkStrength, centerStrength, damping, width, height } = this.params;
    const cx = width / 2;
    const cy = height / 2;

    for (const node of this.nodes) {
      node.vx += (cx - node.x) * centerStrength * this.alpha;
      node.vy += (cy - node.y) * centerStrength * this.alpha;
    }

    for (const link of this.links) {
      const a = this.nodes[link.source];
      const b = this.nodes[link.target];
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.hypot(dx, dy) || 1e-6;
      const force = (dist - this.restLength) * linkStrength * this.alpha;
      const fx = (dx / dist) * force;
      const fy = (dy / dist) * force;
      a.vx += fx;
      a.vy += fy;
      b.vx -= fx;
      b.vy -= fy;
    }

    let maxDisplacement = 0;
    for (const node of this.nodes) {
      node.vx *= damping;
      node.vy *= damping;
      node.x += node.vx;
      node.y += node.vy;
      maxDisplacement = Math.max(maxDisplacement, Math.hypot(node.vx, node.vy));
    }

    // hard collision resolution so no two stickers overlap at equilibrium;
    // iterated because separating one pair can nudge a node into another
    const minDist = collisionRadius * 2;
    for (let pass = 0; pass < 4; pass++) {
      for (let i = 0; i < this.nodes.length; i++) {
        for (let j = i + 1; j < this.nodes.length; j++) {
          const a = this.nodes[i];
          const b = this.nodes[j];
          let dx = b.x - a.x;
          let dy = b.y - a.y;
          let dist = Math.hypot(dx, dy);
          if (dist === 0) {
            // coincident nodes: separate deterministically by index
            dx = 0.01 * (j - i);
            dy = 0.01;
            dist = Math.hypot(dx, dy);
          }
          if (dist < minDist) {
            const push = (minDist - dist) / 2;
            const ux = dx / dist;
            const uy = dy / dist;
            a.x -= ux * push;
            a.y -= uy * push;
            b.x += ux * push;
            b.y += uy * push;
            maxDisplacement = Math.max(maxDisplacement, push);
          }
        }
      }
    }
    this.alpha *= this.params.alphaDecay;
    return maxDisplacement;
  }

  /** Run the simulation; returns the final per-tick displacement. */
  run(ticks = 300): number {
    let displacement = 0;
    for (let i = 0; i < ticks; i++) displacement = this.tick();
    return displacement;
  }

  positions(): Map<string, { x: number; y: number }> {
    return new Map(this.nodes.map((n) => [n.id, { x: n.x, y: n.y }]));
  }
}

/** Links between consecutive script-order stickers. */
export function scriptAdjacencyLinks(count: number): LayoutLink[] {
  const links: LayoutLink[] = [];
  for (let i = 0; i + 1 < count; i++) links.push({ source: i, target: i + 1 });
  return links;
}
