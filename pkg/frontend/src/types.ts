/** Graph documents and edit payloads, matching the service's JSON contract. */

export type NodeKind = 'endpoint' | 'junction' | 'isolated'
export type NodeClass = 'unclassified' | 'neuron' | 'cluster'

export interface GraphNodeDoc {
  id: number
  x: number
  y: number
  kind: NodeKind
  class: NodeClass
  attrs: Record<string, string>
}

export interface GraphEdgeDoc {
  id: number
  u: number
  v: number
  length: number
  weight?: number
  path?: Array<[number, number]>
  attrs: Record<string, string>
}

export interface GraphDoc {
  meta: Record<string, string>
  nodes: GraphNodeDoc[]
  edges: GraphEdgeDoc[]
}

export interface RunStatus {
  run_id: string
  status: 'pending' | 'running' | 'done' | 'failed'
  diagnostics: string
  error: string
}

export type EditOp =
  | { op: 'add_node'; x: number; y: number; kind?: NodeKind; class?: NodeClass }
  | { op: 'remove_node'; id: number }
  | { op: 'add_edge'; u: number; v: number }
  | { op: 'remove_edge'; id: number }
  | { op: 'set_node_class'; id: number; class: NodeClass }
  | { op: 'set_attr'; target: 'node' | 'edge'; id: number; key: string; value: string }
  | { op: 'trace_edge'; u: number; v: number; path: Array<[number, number]> }

export type ToolName = 'select' | 'add-node' | 'remove' | 'connect' | 'trace' | 'classify'

export interface LayerToggles {
  image: boolean
  skeleton: boolean
  edges: boolean
  nodes: boolean
}

/** Checks an edit payload is complete for its op; mirrors server validation. */
export function validateEdit (edit: EditOp): string | null {
  switch (edit.op) {
    case 'add_node':
      return Number.isFinite(edit.x) && Number.isFinite(edit.y) ? null : 'add_node needs finite x, y'
    case 'remove_node':
    case 'remove_edge':
      return Number.isInteger(edit.id) ? null : `${edit.op} needs an integer id`
    case 'add_edge':
      if (!Number.isInteger(edit.u) || !Number.isInteger(edit.v)) return 'add_edge needs node ids'
      return edit.u === edit.v ? 'add_edge cannot form a self-loop without a traced path' : null
    case 'set_node_class':
      return Number.isInteger(edit.id) ? null : 'set_node_class needs an integer id'
    case 'set_attr':
      return edit.key.length > 0 ? null : 'set_attr needs a key'
    case 'trace_edge':
      if (!Number.isInteger(edit.u) || !Number.isInteger(edit.v)) return 'trace_edge needs node ids'
      return edit.path.length >= 2 ? null : 'trace_edge needs at least two path points'
  }
}
