/** Application bootstrap: wires the toolbar, canvas, and service client.
 *
 * State flow is one-directional: the server graph plus the local pending
 * queue produce a preview document; every interaction re-renders from that.
 * The only write channel to the server is the edits endpoint. */

import { RejectedBatchError, ServiceClient } from './api.js'
import { EditQueue, applyPending } from './editqueue.js'
import { renderScene, tintSkeleton, type Scene } from './render.js'
import { ToolController } from './tools.js'
import type { GraphDoc, LayerToggles, NodeClass, ToolName } from './types.js'
import { ViewTransform } from './view.js'

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T

const client = new ServiceClient('')
const queue = new EditQueue()
const tools = new ToolController(queue)
const view = new ViewTransform()

let runId = ''
let serverGraph: GraphDoc | null = null
let baseImage: ImageBitmap | null = null
let skeletonTinted: HTMLCanvasElement | null = null

const layers: LayerToggles = { image: true, skeleton: true, edges: true, nodes: true }

const canvas = $<HTMLCanvasElement>('canvas')
const ctx = canvas.getContext('2d')!

function banner (text: string, kind: 'error' | 'info' = 'error'): void {
  const el = $('banner')
  el.textContent = text
  el.className = text ? `banner ${kind}` : 'banner hidden'
}

function redraw (): void {
  if (!serverGraph) return
  const preview = applyPending(serverGraph, queue.list())
  const scene: Scene = {
    graph: preview,
    view,
    layers,
    selection: tools.selection,
    image: layers.image ? baseImage : null,
    skeleton: layers.skeleton ? skeletonTinted : null,
    tracePoints: tools.tracePoints
  }
  renderScene(ctx, scene, canvas.width, canvas.height)
  $('pending').textContent = queue.length ? `${queue.length} pending edit(s)` : 'no pending edits'
  const sel = tools.selection
  if (sel && serverGraph) {
    if (sel.kind === 'node') {
      const n = preview.nodes.find(n2 => n2.id === sel.id)
      $('detail').textContent = n ? `node ${n.id}: ${n.kind}, ${n.class} at (${n.x.toFixed(1)}, ${n.y.toFixed(1)})` : ''
    } else {
      const e = preview.edges.find(e2 => e2.id === sel.id)
      $('detail').textContent = e ? `edge ${e.id}: ${e.u}-${e.v}, length ${e.length.toFixed(1)} px` : ''
    }
  } else {
    $('detail').textContent = ''
  }
}

async function loadImages (): Promise<void> {
  const fetchBitmap = async (layer: 'image' | 'skeleton') => {
    const resp = await fetch(client.imageUrl(runId, layer))
    if (!resp.ok) throw new Error(`${layer} not available`)
    return createImageBitmap(await resp.blob())
  }
  baseImage = await fetchBitmap('image')
  skeletonTinted = tintSkeleton(await fetchBitmap('skeleton'))
  view.fit(baseImage.width, baseImage.height, canvas.width, canvas.height)
}

async function loadRun (id: string): Promise<void> {
  runId = id
  banner('')
  queue.clear()
  tools.selection = null
  try {
    const status = await client.status(runId)
    $('status').textContent = `run ${runId}: ${status.status}`
    if (status.status === 'pending' || status.status === 'running') {
      setTimeout(() => { void loadRun(id) }, 400)
      return
    }
    if (status.status === 'failed') {
      banner(`run failed: ${status.error}`)
      return
    }
    serverGraph = await client.graph(runId)
    await loadImages()
    const exp = $('exports')
    exp.innerHTML = ''
    for (const fmt of ['json', 'graphml'] as const) {
      const a = document.createElement('a')
      a.href = client.exportUrl(runId, fmt)
      a.textContent = `export ${fmt}`
      a.download = `graph.${fmt}`
      exp.appendChild(a)
    }
    redraw()
  } catch (err) {
    banner(`service unreachable or run unknown: ${(err as Error).message}`)
  }
}

async function save (): Promise<void> {
  if (!runId || queue.length === 0) return
  try {
    serverGraph = await client.saveEdits(runId, [...queue.list()])
    queue.clear()
    banner('')
    redraw()
  } catch (err) {
    if (err instanceof RejectedBatchError) {
      banner(`batch rejected at edit #${err.index}: ${err.message}; queue kept`)
    } else {
      banner(`service unreachable; ${queue.length} edit(s) kept locally`)
    }
  }
}

async function undo (): Promise<void> {
  if (!runId) return
  try {
    serverGraph = await client.undo(runId)
    banner('')
    redraw()
  } catch (err) {
    banner(`undo failed: ${(err as Error).message}`)
  }
}

function wireToolbar (): void {
  for (const tool of ['select', 'add-node', 'remove', 'connect', 'trace', 'classify'] as ToolName[]) {
    $(`tool-${tool}`).addEventListener('click', () => {
      tools.setTool(tool)
      document.querySelectorAll('.tool').forEach(b => b.classList.remove('active'))
      $(`tool-${tool}`).classList.add('active')
      redraw()
    })
  }
  $<HTMLSelectElement>('class-palette').addEventListener('change', ev => {
    tools.classToApply = (ev.target as HTMLSelectElement).value as NodeClass
  })
  for (const layer of Object.keys(layers) as Array<keyof LayerToggles>) {
    $<HTMLInputElement>(`layer-${layer}`).addEventListener('change', ev => {
      layers[layer] = (ev.target as HTMLInputElement).checked
      redraw()
    })
  }
  $('save').addEventListener('click', () => { void save() })
  $('undo').addEventListener('click', () => { void undo() })
  $('discard').addEventListener('click', () => {
    queue.clear()
    redraw()
  })
  $('load-run').addEventListener('click', () => {
    void loadRun($<HTMLInputElement>('run-id').value.trim())
  })
  $('start-run').addEventListener('click', () => {
    void (async () => {
      try {
        const image = $<HTMLInputElement>('new-image').value.trim()
        const threshold = Number($<HTMLInputElement>('new-threshold').value)
        const id = await client.submitRun({
          input: { image },
          artifact: { dark_threshold: threshold },
          segmentation: { min_area: 20 }
        })
        $<HTMLInputElement>('run-id').value = id
        await loadRun(id)
      } catch (err) {
        banner(`could not start run: ${(err as Error).message}`)
      }
    })()
  })
}

function wireCanvas (): void {
  let panning = false
  let tracing = false
  let lastX = 0
  let lastY = 0

  const toImage = (ev: MouseEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect()
    return view.toImage(ev.clientX - rect.left, ev.clientY - rect.top)
  }

  canvas.addEventListener('wheel', ev => {
    ev.preventDefault()
    const rect = canvas.getBoundingClientRect()
    view.zoomAt(ev.clientX - rect.left, ev.clientY - rect.top, ev.deltaY < 0 ? 1.2 : 1 / 1.2)
    redraw()
  })

  canvas.addEventListener('mousedown', ev => {
    if (ev.button === 1 || ev.button === 2 || ev.shiftKey) {
      panning = true
      lastX = ev.clientX
      lastY = ev.clientY
      return
    }
    if (ev.button === 0 && serverGraph) {
      const [x, y] = toImage(ev)
      const preview = applyPending(serverGraph, queue.list())
      if (tools.traceStart(preview, x, y, view.scale)) {
        tracing = true
        redraw()
      }
    }
  })

  canvas.addEventListener('mousemove', ev => {
    if (panning) {
      view.panBy(ev.clientX - lastX, ev.clientY - lastY)
      lastX = ev.clientX
      lastY = ev.clientY
      redraw()
    } else if (tracing) {
      const [x, y] = toImage(ev)
      tools.traceMove(x, y)
      redraw()
    }
  })

  window.addEventListener('mouseup', ev => {
    if (panning) {
      panning = false
      return
    }
    if (!serverGraph) return
    const [x, y] = toImage(ev)
    const preview = applyPending(serverGraph, queue.list())
    if (tracing) {
      tracing = false
      try {
        tools.traceEnd(preview, x, y, view.scale)
      } catch (err) {
        banner((err as Error).message)
      }
      redraw()
      return
    }
    if (ev.target !== canvas || ev.button !== 0) return
    try {
      tools.click(preview, x, y, view.scale)
    } catch (err) {
      banner((err as Error).message)
    }
    redraw()
  })

  canvas.addEventListener('contextmenu', ev => ev.preventDefault())
}

function resize (): void {
  canvas.width = canvas.clientWidth
  canvas.height = canvas.clientHeight
  redraw()
}

window.addEventListener('resize', resize)
wireToolbar()
wireCanvas()
resize()

const params = new URLSearchParams(window.location.search)
const initial = params.get('run')
if (initial) {
  $<HTMLInputElement>('run-id').value = initial
  void loadRun(initial)
}
