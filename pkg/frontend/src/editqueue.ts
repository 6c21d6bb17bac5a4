/** Pending edits, queued locally and posted as one atomic batch.
 *
 * The server is the single source of truth: the queue never mutates the
 * fetched graph, it only previews. A rejected batch keeps the queue (with
 * the offending index surfaced); a lost connection keeps it too. */

import type { EditOp, GraphDoc, GraphEdgeDoc, GraphNodeDoc } from './types.js'
import { validateEdit } from './types.js'
import { polylineLength } from './geometry.js'

export class EditQueue {
  private edits: EditOp[] = []

  get length (): number {
    return this.edits.length
  }

  list (): readonly EditOp[] {
    return this.edits
  }

  push (edit: EditOp): void {
    const problem = validateEdit(edit)
    if (problem) throw new Error(problem)
    this.edits.push(edit)
  }

  /** Drop the most recent pending edit (local, not the server undo). */
  pop (): EditOp | undefined {
    return this.edits.pop()
  }

  clear (): void {
    this.edits = []
  }

  toPayload (): { edits: EditOp[] } {
    return { edits: [...this.edits] }
  }
}

let previewId = -1

function nextPreviewId (): number {
  return previewId--
}

/** Apply pending edits to a fetched graph for display only. Preview ids are
 * negative so they can never collide with (or be mistaken for) server ids. */
export function applyPending (graph: GraphDoc, edits: readonly EditOp[]): GraphDoc {
  const nodes = new Map<number, GraphNodeDoc>(graph.nodes.map(n => [n.id, { ...n }]))
  let edges: GraphEdgeDoc[] = graph.edges.map(e => ({ ...e }))
  for (const edit of edits) {
    switch (edit.op) {
      case 'add_node':
        {
          const id = nextPreviewId()
          nodes.set(id, {
            id,
            x: edit.x,
            y: edit.y,
            kind: edit.kind ?? 'isolated',
            class: edit.class ?? 'unclassified',
            attrs: { manual: 'true' }
          })
        }
        break
      case 'remove_node':
        nodes.delete(edit.id)
        edges = edges.filter(e => e.u !== edit.id && e.v !== edit.id)
        break
      case 'remove_edge':
        edges = edges.filter(e => e.id !== edit.id)
        break
      case 'add_edge':
        {
          const u = nodes.get(edit.u)
          const v = nodes.get(edit.v)
          if (u && v) {
            edges.push({
              id: nextPreviewId(),
              u: edit.u,
              v: edit.v,
              length: Math.hypot(u.x - v.x, u.y - v.y),
              attrs: { manual: 'true' }
            })
          }
        }
        break
      case 'trace_edge':
        edges.push({
          id: nextPreviewId(),
          u: edit.u,
          v: edit.v,
          length: polylineLength(edit.path),
          path: edit.path,
          attrs: { manual: 'true' }
        })
        break
      case 'set_node_class':
        {
          const n = nodes.get(edit.id)
          if (n) n.class = edit.class
        }
        break
      case 'set_attr':
        if (edit.target === 'node') {
          const n = nodes.get(edit.id)
          if (n) n.attrs = { ...n.attrs, [edit.key]: edit.value }
        } else {
          edges = edges.map(e => (e.id === edit.id ? { ...e, attrs: { ...e.attrs, [edit.key]: edit.value } } : e))
        }
        break
    }
  }
  return { meta: graph.meta, nodes: [...nodes.values()], edges }
}
