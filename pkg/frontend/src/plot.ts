/**
 * plotDecay: read one or more decay CSV files and write a single log-log
 * SVG figure, one curve per (label, exponent). Inputs are never modified;
 * nothing is written when validation fails.
 */

import { readFileSync, writeFileSync } from 'fs'

import { Curve, DecayRow, groupCurves, parseDecayCsv } from './csv'
import { renderLogLog } from './svg'

export interface PlotSpec {
    inputs: string[]
    output: string
    title?: string
}

export function plotDecay(spec: PlotSpec): { curves: Curve[], output: string } {
    if (spec.inputs.length === 0) {
        throw new Error('no input CSV files given')
    }
    const rows: DecayRow[] = []
    for (const input of spec.inputs) {
        const text = readFileSync(input, 'utf8')
        rows.push(...parseDecayCsv(text, input))
    }
    const curves = groupCurves(rows)
    const svg = renderLogLog(curves, spec.title ?? 'decay curves')
    writeFileSync(spec.output, svg)
    return { curves, output: spec.output }
}
