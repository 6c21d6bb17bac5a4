import { describe, expect, it } from 'vitest'

import { ViewTransform } from '../src/view.js'

describe('ViewTransform', () => {
  it('round-trips image and screen coordinates', () => {
    const v = new ViewTransform()
    v.scale = 2.5
    v.offsetX = 40
    v.offsetY = -12
    const [sx, sy] = v.toScreen(13.5, 7.25)
    const [ix, iy] = v.toImage(sx, sy)
    expect(ix).toBeCloseTo(13.5, 10)
    expect(iy).toBeCloseTo(7.25, 10)
  })

  it('zoomAt keeps the anchor point fixed', () => {
    const v = new ViewTransform()
    v.scale = 1
    const anchorImage = v.toImage(120, 80)
    v.zoomAt(120, 80, 2)
    const after = v.toImage(120, 80)
    expect(after[0]).toBeCloseTo(anchorImage[0], 10)
    expect(after[1]).toBeCloseTo(anchorImage[1], 10)
    expect(v.scale).toBe(2)
  })

  it('zoomAt clamps the scale range', () => {
    const v = new ViewTransform()
    v.zoomAt(0, 0, 1e9)
    expect(v.scale).toBe(64)
    v.zoomAt(0, 0, 1e-12)
    expect(v.scale).toBe(0.1)
  })

  it('fit centers the image in the viewport', () => {
    const v = new ViewTransform()
    v.fit(100, 50, 200, 200)
    expect(v.scale).toBe(2)
    expect(v.offsetX).toBe(0)
    expect(v.offsetY).toBe(50)
    const [cx, cy] = v.toScreen(50, 25)
    expect(cx).toBe(100)
    expect(cy).toBe(100)
  })

  it('panBy shifts the offset', () => {
    const v = new ViewTransform()
    v.panBy(5, -3)
    expect(v.toScreen(0, 0)).toEqual([5, -3])
  })

  it('rendering transform is pure: same state, same mapping', () => {
    const a = new ViewTransform()
    const b = new ViewTransform()
    for (const v of [a, b]) {
      v.scale = 3
      v.offsetX = 7
      v.offsetY = 9
    }
    expect(a.toScreen(4, 4)).toEqual(b.toScreen(4, 4))
  })
})
