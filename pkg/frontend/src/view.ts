/** A single zoom/pan transform between image space and screen space.
 * Node placement must be pixel-accurate, so everything renders through
 * this one mapping: screen = image * scale + offset. */

export class ViewTransform {
  scale = 1
  offsetX = 0
  offsetY = 0

  toScreen (x: number, y: number): [number, number] {
    return [x * this.scale + this.offsetX, y * this.scale + this.offsetY]
  }

  toImage (sx: number, sy: number): [number, number] {
    return [(sx - this.offsetX) / this.scale, (sy - this.offsetY) / this.scale]
  }

  /** Zoom by a factor keeping the given screen point fixed. */
  zoomAt (sx: number, sy: number, factor: number, min = 0.1, max = 64): void {
    const next = Math.min(max, Math.max(min, this.scale * factor))
    const applied = next / this.scale
    this.offsetX = sx - (sx - this.offsetX) * applied
    this.offsetY = sy - (sy - this.offsetY) * applied
    this.scale = next
  }

  panBy (dx: number, dy: number): void {
    this.offsetX += dx
    this.offsetY += dy
  }

  /** Fit an image of the given size into a viewport, centered. */
  fit (imageW: number, imageH: number, viewW: number, viewH: number): void {
    const s = Math.min(viewW / imageW, viewH / imageH)
    this.scale = s
    this.offsetX = (viewW - imageW * s) / 2
    this.offsetY = (viewH - imageH * s) / 2
  }
}
