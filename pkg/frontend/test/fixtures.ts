import type { GraphDoc } from '../src/types.js'

/** A cross: junction 1 at (50,50), tips 2..5 forty pixels out, four edges. */
export function crossGraph (): GraphDoc {
  return {
    meta: { source: 'fixture', version: '0', created: '' },
    nodes: [
      { id: 1, x: 50, y: 50, kind: 'junction', class: 'unclassified', attrs: {} },
      { id: 2, x: 50, y: 10, kind: 'endpoint', class: 'unclassified', attrs: {} },
      { id: 3, x: 50, y: 90, kind: 'endpoint', class: 'unclassified', attrs: {} },
      { id: 4, x: 10, y: 50, kind: 'endpoint', class: 'unclassified', attrs: {} },
      { id: 5, x: 90, y: 50, kind: 'endpoint', class: 'unclassified', attrs: {} }
    ],
    edges: [
      { id: 1, u: 1, v: 2, length: 40, path: [[50, 49], [50, 11]], attrs: {} },
      { id: 2, u: 1, v: 3, length: 40, path: [[50, 51], [50, 89]], attrs: {} },
      { id: 3, u: 1, v: 4, length: 40, path: [[49, 50], [11, 50]], attrs: {} },
      { id: 4, u: 1, v: 5, length: 40, path: [[51, 50], [89, 50]], attrs: {} }
    ]
  }
}
