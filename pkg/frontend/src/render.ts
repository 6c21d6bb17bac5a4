/** Canvas rendering. Pure: the same scene always paints the same pixels.
 *
 * Color semantics match the pipeline overlay: skeleton yellow, edges blue,
 * nodes red, painted in that order so nodes stay on top. Layers toggle
 * independently. */

import type { GraphDoc, GraphEdgeDoc, GraphNodeDoc, LayerToggles } from './types.js'
import type { ViewTransform } from './view.js'

export const SKELETON_COLOR = '#ffff00'
export const EDGE_COLOR = '#0000ff'
export const MANUAL_EDGE_COLOR = '#4f8fff'
export const NODE_COLOR = '#ff0000'
export const SELECT_COLOR = '#ffffff'

export const CLASS_RING: Record<string, string | null> = {
  unclassified: null,
  neuron: '#00e050',
  cluster: '#00d8ff'
}

export interface Selection {
  kind: 'node' | 'edge'
  id: number
}

export interface Scene {
  graph: GraphDoc
  view: ViewTransform
  layers: LayerToggles
  selection: Selection | null
  image: CanvasImageSource | null
  skeleton: CanvasImageSource | null
  tracePoints: Array<[number, number]>
}

export function edgeColor (e: GraphEdgeDoc): string {
  return e.attrs.manual === 'true' ? MANUAL_EDGE_COLOR : EDGE_COLOR
}

function edgePolyline (graph: GraphDoc, e: GraphEdgeDoc): Array<[number, number]> {
  if (e.path && e.path.length >= 2) return e.path
  const u = graph.nodes.find(n => n.id === e.u)
  const v = graph.nodes.find(n => n.id === e.v)
  return u && v ? [[u.x, u.y], [v.x, v.y]] : []
}

/** Recolor a white-on-black skeleton bitmap to yellow-on-transparent. */
export function tintSkeleton (bitmap: ImageBitmap): HTMLCanvasElement {
  const canvas = document.createElement('canvas')
  canvas.width = bitmap.width
  canvas.height = bitmap.height
  const ctx = canvas.getContext('2d')!
  ctx.drawImage(bitmap, 0, 0)
  const data = ctx.getImageData(0, 0, canvas.width, canvas.height)
  const px = data.data
  for (let i = 0; i < px.length; i += 4) {
    const on = px[i] >= 128
    px[i] = 255
    px[i + 1] = 255
    px[i + 2] = 0
    px[i + 3] = on ? 255 : 0
  }
  ctx.putImageData(data, 0, 0)
  return canvas
}

export function renderScene (ctx: CanvasRenderingContext2D, scene: Scene, width: number, height: number): void {
  const { view, graph, layers } = scene
  ctx.setTransform(1, 0, 0, 1, 0, 0)
  ctx.fillStyle = '#181818'
  ctx.fillRect(0, 0, width, height)
  ctx.imageSmoothingEnabled = false
  ctx.setTransform(view.scale, 0, 0, view.scale, view.offsetX, view.offsetY)

  if (layers.image && scene.image) ctx.drawImage(scene.image, 0, 0)
  if (layers.skeleton && scene.skeleton) ctx.drawImage(scene.skeleton, 0, 0)

  if (layers.edges) {
    for (const e of graph.edges) {
      const pts = edgePolyline(graph, e)
      if (pts.length < 2) continue
      const selected = scene.selection?.kind === 'edge' && scene.selection.id === e.id
      ctx.strokeStyle = selected ? SELECT_COLOR : edgeColor(e)
      ctx.lineWidth = (selected ? 2.5 : 1.5) / view.scale
      ctx.beginPath()
      ctx.moveTo(pts[0][0], pts[0][1])
      for (let i = 1; i < pts.length; i++) ctx.lineTo(pts[i][0], pts[i][1])
      ctx.stroke()
    }
  }

  if (layers.nodes) {
    const half = 1.5
    for (const n of graph.nodes) {
      const selected = scene.selection?.kind === 'node' && scene.selection.id === n.id
      ctx.fillStyle = NODE_COLOR
      ctx.fillRect(n.x - half, n.y - half, 2 * half, 2 * half)
      const ring = selected ? SELECT_COLOR : CLASS_RING[n.class]
      if (ring) {
        ctx.strokeStyle = ring
        ctx.lineWidth = 1.5 / view.scale
        ctx.beginPath()
        ctx.arc(n.x, n.y, half + 2 / view.scale, 0, Math.PI * 2)
        ctx.stroke()
      }
    }
  }

  if (scene.tracePoints.length >= 2) {
    ctx.strokeStyle = '#ff00ff'
    ctx.lineWidth = 1.5 / view.scale
    ctx.setLineDash([4 / view.scale, 3 / view.scale])
    ctx.beginPath()
    ctx.moveTo(scene.tracePoints[0][0], scene.tracePoints[0][1])
    for (const [x, y] of scene.tracePoints.slice(1)) ctx.lineTo(x, y)
    ctx.stroke()
    ctx.setLineDash([])
  }
}
