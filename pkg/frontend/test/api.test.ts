import { describe, expect, it } from 'vitest'

import { RejectedBatchError, ServiceClient } from '../src/api.js'
import { crossGraph } from './fixtures.js'

interface Call {
  url: string
  method: string
  body: unknown
}

function mockFetch (responses: Array<{ status: number, body: unknown }>) {
  const calls: Call[] = []
  const fn = (async (url: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      url: String(url),
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(String(init.body)) : undefined
    })
    const next = responses.shift() ?? { status: 200, body: {} }
    return {
      ok: next.status >= 200 && next.status < 300,
      status: next.status,
      json: async () => next.body
    } as Response
  }) as typeof fetch
  return { fn, calls }
}

describe('ServiceClient', () => {
  it('submits runs and polls status', async () => {
    const { fn, calls } = mockFetch([
      { status: 202, body: { run_id: 'abc123' } },
      { status: 200, body: { run_id: 'abc123', status: 'done', diagnostics: '', error: '' } }
    ])
    const client = new ServiceClient('', fn)
    const id = await client.submitRun({ input: { image: 'x.png' } })
    expect(id).toBe('abc123')
    const status = await client.status(id)
    expect(status.status).toBe('done')
    expect(calls[0]).toMatchObject({
      url: '/runs',
      method: 'POST',
      body: { config: { input: { image: 'x.png' } } }
    })
    expect(calls[1]).toMatchObject({ url: '/runs/abc123', method: 'GET' })
  })

  it('posts edit batches to the edits endpoint only', async () => {
    const { fn, calls } = mockFetch([{ status: 200, body: crossGraph() }])
    const client = new ServiceClient('', fn)
    const graph = await client.saveEdits('r1', [{ op: 'remove_node', id: 3 }])
    expect(graph.nodes.length).toBe(5)
    expect(calls).toHaveLength(1)
    expect(calls[0]).toMatchObject({
      url: '/runs/r1/edits',
      method: 'POST',
      body: { edits: [{ op: 'remove_node', id: 3 }] }
    })
  })

  it('surfaces a rejected batch with its offending index', async () => {
    const { fn } = mockFetch([{ status: 422, body: { detail: 'edit 1 rejected: unknown node', index: 1 } }])
    const client = new ServiceClient('', fn)
    const err = await client.saveEdits('r1', [{ op: 'remove_node', id: 1 }]).catch(e => e)
    expect(err).toBeInstanceOf(RejectedBatchError)
    expect((err as RejectedBatchError).index).toBe(1)
    expect((err as RejectedBatchError).message).toMatch(/unknown node/)
  })

  it('raises plain errors for other failures', async () => {
    const { fn } = mockFetch([{ status: 404, body: { detail: 'unknown run' } }])
    const client = new ServiceClient('', fn)
    await expect(client.graph('nope')).rejects.toThrow(/unknown run/)
  })

  it('undo posts to the undo endpoint and returns the graph', async () => {
    const { fn, calls } = mockFetch([{ status: 200, body: crossGraph() }])
    const client = new ServiceClient('', fn)
    await client.undo('r1')
    expect(calls[0]).toMatchObject({ url: '/runs/r1/undo', method: 'POST' })
  })

  it('builds image and export urls', () => {
    const client = new ServiceClient('http://host:1234/')
    expect(client.imageUrl('r1', 'skeleton')).toBe('http://host:1234/runs/r1/skeleton')
    expect(client.exportUrl('r1', 'graphml')).toBe('http://host:1234/runs/r1/export?format=graphml')
  })
})
