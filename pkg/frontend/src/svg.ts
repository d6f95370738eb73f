/**
 * Minimal deterministic SVG writer for log-log decay curves: decade grid
 * lines, one polyline per curve, legend swatches. No plotting library, so
 * identical inputs always produce identical bytes.
 */

import { Curve } from './csv'

const WIDTH = 860
const HEIGHT = 560
const MARGIN = { left: 70, right: 230, top: 48, bottom: 52 }

const PALETTE = [
    '#1f77b4', '#d62728', '#2ca02c', '#9467bd',
    '#ff7f0e', '#8c564b', '#17becf', '#7f7f7f',
]

function log10(x: number): number {
    return Math.log(x) / Math.LN10
}

function fmtTick(exponent: number): string {
    if (exponent >= -3 && exponent <= 3) {
        return Number(Math.pow(10, exponent).toPrecision(6)).toString()
    }
    return `1e${exponent}`
}

function decadeRange(lo: number, hi: number): number[] {
    const first = Math.floor(log10(lo))
    const last = Math.ceil(log10(hi))
    const ticks: number[] = []
    for (let e = first; e <= last; e++) ticks.push(e)
    return ticks
}

export function renderLogLog(curves: Curve[], title: string): string {
    const points = curves.flatMap(c => c.points).filter(p => p.t > 0 && p.value > 0)
    if (points.length === 0) {
        throw new Error('no positive points to draw on log-log axes')
    }
    const tLo = Math.min(...points.map(p => p.t))
    const tHi = Math.max(...points.map(p => p.t))
    const vLo = Math.min(...points.map(p => p.value))
    const vHi = Math.max(...points.map(p => p.value))

    const x0 = MARGIN.left
    const x1 = WIDTH - MARGIN.right
    const y0 = HEIGHT - MARGIN.bottom
    const y1 = MARGIN.top
    const xTicks = decadeRange(tLo, tHi)
    const yTicks = decadeRange(vLo, vHi)
    const xMin = xTicks[0]
    const xMax = xTicks[xTicks.length - 1]
    const yMin = yTicks[0]
    const yMax = yTicks[yTicks.length - 1]

    const sx = (t: number) =>
        x0 + (log10(t) - xMin) / Math.max(xMax - xMin, 1e-12) * (x1 - x0)
    const sy = (v: number) =>
        y0 - (log10(v) - yMin) / Math.max(yMax - yMin, 1e-12) * (y0 - y1)

    const parts: string[] = []
    parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`)
    parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`)
    parts.push(`<text x="${(x0 + x1) / 2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">${escapeXml(title)}</text>`)

    for (const e of xTicks) {
        const x = sx(Math.pow(10, e))
        parts.push(`<line x1="${x.toFixed(2)}" y1="${y0}" x2="${x.toFixed(2)}" y2="${y1}" stroke="#dddddd"/>`)
        parts.push(`<text x="${x.toFixed(2)}" y="${y0 + 20}" font-family="sans-serif" font-size="12" text-anchor="middle">${fmtTick(e)}</text>`)
    }
    for (const e of yTicks) {
        const y = sy(Math.pow(10, e))
        parts.push(`<line x1="${x0}" y1="${y.toFixed(2)}" x2="${x1}" y2="${y.toFixed(2)}" stroke="#dddddd"/>`)
        parts.push(`<text x="${x0 - 8}" y="${(y + 4).toFixed(2)}" font-family="sans-serif" font-size="12" text-anchor="end">${fmtTick(e)}</text>`)
    }
    parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333333"/>`)
    parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" font-family="sans-serif" font-size="13" text-anchor="middle">t</text>`)
    parts.push(`<text x="20" y="${(y0 + y1) / 2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 ${(y0 + y1) / 2})">weighted value</text>`)

    curves.forEach((curve, index) => {
        const color = PALETTE[index % PALETTE.length]
        const drawable = curve.points.filter(p => p.t > 0 && p.value > 0)
        if (drawable.length === 0) return
        const path = drawable
            .map(p => `${sx(p.t).toFixed(2)},${sy(p.value).toFixed(2)}`)
            .join(' ')
        parts.push(`<polyline fill="none" stroke="${color}" stroke-width="1.8" points="${path}"/>`)
        for (const p of drawable) {
            parts.push(`<circle cx="${sx(p.t).toFixed(2)}" cy="${sy(p.value).toFixed(2)}" r="3" fill="${color}"/>`)
        }
        const ly = y1 + 16 + index * 20
        parts.push(`<rect x="${x1 + 14}" y="${ly - 9}" width="14" height="4" fill="${color}"/>`)
        parts.push(`<text class="legend" x="${x1 + 34}" y="${ly}" font-family="sans-serif" font-size="12">${escapeXml(curve.key)}</text>`)
    })

    parts.push('</svg>')
    return parts.join('\n') + '\n'
}

function escapeXml(text: string): string {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;')
}
