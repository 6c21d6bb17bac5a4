import { describe, expect, it } from 'vitest'

import { edgeDistance, nearestEdge, nearestNode, polylineLength } from '../src/geometry.js'
import { crossGraph } from './fixtures.js'

describe('polylineLength', () => {
  it('measures the 3-4-5 triangle path as 5', () => {
    expect(polylineLength([[0, 0], [3, 4]])).toBeCloseTo(5, 10)
  })

  it('sums multi-segment paths', () => {
    expect(polylineLength([[0, 0], [3, 4], [3, 10]])).toBeCloseTo(11, 10)
  })

  it('is zero for degenerate paths', () => {
    expect(polylineLength([[2, 2]])).toBe(0)
    expect(polylineLength([])).toBe(0)
  })
})

describe('hit testing', () => {
  const g = crossGraph()

  it('finds the nearest node within the radius', () => {
    expect(nearestNode(g, 50.4, 49.8, 8)?.id).toBe(1)
    expect(nearestNode(g, 89, 50, 8)?.id).toBe(5)
    expect(nearestNode(g, 200, 200, 8)).toBeNull()
  })

  it('prefers the closer of two candidates', () => {
    expect(nearestNode(g, 50, 69.9, 25)?.id).toBe(1)
    expect(nearestNode(g, 50, 70.1, 25)?.id).toBe(3)
  })

  it('measures distance to the traced path, not the chord', () => {
    const e = g.edges[0] // vertical path x=50, y 49..11
    expect(edgeDistance(g, e, 52, 30)).toBeCloseTo(2, 10)
  })

  it('falls back to the chord when no path exists', () => {
    const g2 = crossGraph()
    g2.edges[0].path = undefined
    expect(edgeDistance(g2, g2.edges[0], 52, 30)).toBeCloseTo(2, 10)
  })

  it('finds the nearest edge within the radius', () => {
    expect(nearestEdge(g, 70, 52.5, 5)?.id).toBe(4)
    expect(nearestEdge(g, 150, 150, 5)).toBeNull()
  })
})
