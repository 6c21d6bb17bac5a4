/** Tool behaviors, DOM-free: clicks and drags in image coordinates come in,
 * selection changes and queued edits come out. */

import { EditQueue } from './editqueue.js'
import { nearestEdge, nearestNode } from './geometry.js'
import type { Selection } from './render.js'
import type { GraphDoc, NodeClass, ToolName } from './types.js'

// hit radii in screen pixels; dividing by the zoom keeps clicks feeling
// the same at any magnification
const NODE_HIT = 8
const EDGE_HIT = 5

export class ToolController {
  tool: ToolName = 'select'
  classToApply: NodeClass = 'neuron'
  selection: Selection | null = null
  connectFrom: number | null = null
  tracePoints: Array<[number, number]> = []
  private traceFrom: number | null = null

  constructor (readonly queue: EditQueue) {}

  setTool (tool: ToolName): void {
    this.tool = tool
    this.connectFrom = null
    this.traceFrom = null
    this.tracePoints = []
  }

  /** A click in image coordinates; hit radii scale with zoom. */
  click (graph: GraphDoc, x: number, y: number, scale = 1): void {
    const nodeHit = nearestNode(graph, x, y, NODE_HIT / scale)
    const edgeHit = nearestEdge(graph, x, y, EDGE_HIT / scale)
    switch (this.tool) {
      case 'select':
        this.selection = nodeHit
          ? { kind: 'node', id: nodeHit.id }
          : edgeHit
            ? { kind: 'edge', id: edgeHit.id }
            : null
        break
      case 'add-node':
        this.queue.push({ op: 'add_node', x, y })
        break
      case 'remove':
        if (nodeHit) this.queue.push({ op: 'remove_node', id: nodeHit.id })
        else if (edgeHit) this.queue.push({ op: 'remove_edge', id: edgeHit.id })
        break
      case 'connect':
        if (!nodeHit) {
          this.connectFrom = null
        } else if (this.connectFrom === null) {
          this.connectFrom = nodeHit.id
        } else if (this.connectFrom !== nodeHit.id) {
          this.queue.push({ op: 'add_edge', u: this.connectFrom, v: nodeHit.id })
          this.connectFrom = null
        }
        break
      case 'classify':
        if (nodeHit) this.queue.push({ op: 'set_node_class', id: nodeHit.id, class: this.classToApply })
        break
      case 'trace':
        break // trace works through drag events
    }
  }

  /** Freehand tracing: must start on a node. */
  traceStart (graph: GraphDoc, x: number, y: number, scale = 1): boolean {
    if (this.tool !== 'trace') return false
    const start = nearestNode(graph, x, y, NODE_HIT / scale)
    if (!start) return false
    this.traceFrom = start.id
    this.tracePoints = [[start.x, start.y]]
    return true
  }

  traceMove (x: number, y: number): void {
    if (this.traceFrom === null) return
    const last = this.tracePoints[this.tracePoints.length - 1]
    if (Math.hypot(x - last[0], y - last[1]) >= 1) {
      this.tracePoints.push([x, y])
    }
  }

  /** Finish on a node to queue the traced edge; anywhere else cancels. */
  traceEnd (graph: GraphDoc, x: number, y: number, scale = 1): void {
    const from = this.traceFrom
    const points = this.tracePoints
    this.traceFrom = null
    this.tracePoints = []
    if (from === null) return
    const target = nearestNode(graph, x, y, NODE_HIT / scale)
    if (!target) return
    const path: Array<[number, number]> = [...points, [target.x, target.y]]
    this.queue.push({ op: 'trace_edge', u: from, v: target.id, path })
  }
}
