/** Image-space geometry helpers: lengths and hit-testing. */

import type { GraphDoc, GraphEdgeDoc, GraphNodeDoc } from './types.js'

export function polylineLength (points: Array<[number, number]>): number {
  let total = 0
  for (let i = 1; i < points.length; i++) {
    total += Math.hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1])
  }
  return total
}

export function nearestNode (graph: GraphDoc, x: number, y: number, maxDist: number): GraphNodeDoc | null {
  let best: GraphNodeDoc | null = null
  let bestDist = maxDist
  for (const n of graph.nodes) {
    const d = Math.hypot(n.x - x, n.y - y)
    if (d <= bestDist) {
      best = n
      bestDist = d
    }
  }
  return best
}

function segmentDistance (px: number, py: number, a: [number, number], b: [number, number]): number {
  const dx = b[0] - a[0]
  const dy = b[1] - a[1]
  const len2 = dx * dx + dy * dy
  if (len2 === 0) return Math.hypot(px - a[0], py - a[1])
  let t = ((px - a[0]) * dx + (py - a[1]) * dy) / len2
  t = Math.max(0, Math.min(1, t))
  return Math.hypot(px - (a[0] + t * dx), py - (a[1] + t * dy))
}

/** Distance from a point to an edge: its traced path, or the straight chord. */
export function edgeDistance (graph: GraphDoc, e: GraphEdgeDoc, x: number, y: number): number {
  const pts = e.path && e.path.length >= 2 ? e.path : chord(graph, e)
  if (pts.length === 0) return Infinity
  if (pts.length === 1) return Math.hypot(x - pts[0][0], y - pts[0][1])
  let best = Infinity
  for (let i = 1; i < pts.length; i++) {
    best = Math.min(best, segmentDistance(x, y, pts[i - 1], pts[i]))
  }
  return best
}

function chord (graph: GraphDoc, e: GraphEdgeDoc): Array<[number, number]> {
  const u = graph.nodes.find(n => n.id === e.u)
  const v = graph.nodes.find(n => n.id === e.v)
  if (!u || !v) return []
  return [[u.x, u.y], [v.x, v.y]]
}

export function nearestEdge (graph: GraphDoc, x: number, y: number, maxDist: number): GraphEdgeDoc | null {
  let best: GraphEdgeDoc | null = null
  let bestDist = maxDist
  for (const e of graph.edges) {
    const d = edgeDistance(graph, e, x, y)
    if (d <= bestDist) {
      best = e
      bestDist = d
    }
  }
  return best
}
