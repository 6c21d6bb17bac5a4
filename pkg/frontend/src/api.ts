/** Thin client for the curation service; the UI's only channel for state. */

import type { EditOp, GraphDoc, RunStatus } from './types.js'

export class RejectedBatchError extends Error {
  readonly index: number

  constructor (detail: string, index: number) {
    super(detail)
    this.index = index
  }
}

export class ServiceClient {
  private readonly base: string
  private readonly fetchFn: typeof fetch

  constructor (base = '', fetchFn: typeof fetch = fetch) {
    this.base = base.replace(/\/$/, '')
    this.fetchFn = fetchFn
  }

  private async json<T> (path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, init)
    const body = await resp.json()
    if (resp.status === 422 && typeof body.index === 'number') {
      throw new RejectedBatchError(body.detail ?? 'batch rejected', body.index)
    }
    if (!resp.ok) {
      throw new Error(body.detail ?? `${resp.status} on ${path}`)
    }
    return body as T
  }

  async submitRun (config: Record<string, unknown>): Promise<string> {
    const body = await this.json<{ run_id: string }>('/runs', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ config })
    })
    return body.run_id
  }

  status (runId: string): Promise<RunStatus> {
    return this.json<RunStatus>(`/runs/${runId}`)
  }

  graph (runId: string): Promise<GraphDoc> {
    return this.json<GraphDoc>(`/runs/${runId}/graph`)
  }

  /** Posts the batch atomically; a 422 surfaces as RejectedBatchError. */
  saveEdits (runId: string, edits: readonly EditOp[]): Promise<GraphDoc> {
    return this.json<GraphDoc>(`/runs/${runId}/edits`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ edits })
    })
  }

  undo (runId: string): Promise<GraphDoc> {
    return this.json<GraphDoc>(`/runs/${runId}/undo`, { method: 'POST' })
  }

  imageUrl (runId: string, layer: 'image' | 'skeleton' | 'overlay'): string {
    return `${this.base}/runs/${runId}/${layer}`
  }

  exportUrl (runId: string, format: 'json' | 'graphml'): string {
    return `${this.base}/runs/${runId}/export?format=${format}`
  }
}
