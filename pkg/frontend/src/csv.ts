/**
 * Reader for the decay-measurement CSV contract:
 *
 *   label,t,p,raw_norm,weighted_value,truncation_bound
 *
 * one row per (probe time, exponent), decimal floating point, LF endings.
 * This module never recomputes anything; it only validates and groups.
 */

export interface DecayRow {
    label: string
    t: number
    p: number
    rawNorm: number
    weightedValue: number
    truncationBound: number
}

export const CSV_HEADER = 'label,t,p,raw_norm,weighted_value,truncation_bound'

export class CsvSchemaError extends Error {
    constructor(public file: string, public line: number, message: string) {
        super(`${file}:${line}: ${message}`)
        this.name = 'CsvSchemaError'
    }
}

function parseNumber(file: string, line: number, field: string, text: string): number {
    const value = Number(text)
    if (text.trim() === '' || !Number.isFinite(value)) {
        throw new CsvSchemaError(file, line, `field ${field} is not a finite number: ${JSON.stringify(text)}`)
    }
    return value
}

export function parseDecayCsv(text: string, file = '<csv>'): DecayRow[] {
    const lines = text.split('\n')
    if (lines.length === 0 || lines[0].trim() !== CSV_HEADER) {
        throw new CsvSchemaError(file, 1, `expected header ${JSON.stringify(CSV_HEADER)}`)
    }
    const rows: DecayRow[] = []
    for (let i = 1; i < lines.length; i++) {
        const line = lines[i]
        if (line.trim() === '') continue
        const parts = line.split(',')
        if (parts.length !== 6) {
            throw new CsvSchemaError(file, i + 1, `expected 6 fields, got ${parts.length}`)
        }
        rows.push({
            label: parts[0],
            t: parseNumber(file, i + 1, 't', parts[1]),
            p: parseNumber(file, i + 1, 'p', parts[2]),
            rawNorm: parseNumber(file, i + 1, 'raw_norm', parts[3]),
            weightedValue: parseNumber(file, i + 1, 'weighted_value', parts[4]),
            truncationBound: parseNumber(file, i + 1, 'truncation_bound', parts[5]),
        })
    }
    if (rows.length === 0) {
        throw new CsvSchemaError(file, lines.length, 'CSV body is empty')
    }
    return rows
}

export interface Curve {
    key: string
    label: string
    p: number
    points: { t: number, value: number }[]
}

/** Group rows into one curve per (label, p), sorted by time. */
export function groupCurves(rows: DecayRow[]): Curve[] {
    const byKey = new Map<string, Curve>()
    for (const row of rows) {
        const key = `${row.label} p=${row.p}`
        let curve = byKey.get(key)
        if (!curve) {
            curve = { key, label: row.label, p: row.p, points: [] }
            byKey.set(key, curve)
        }
        curve.points.push({ t: row.t, value: row.weightedValue })
    }
    const curves = [...byKey.values()]
    for (const curve of curves) curve.points.sort((a, b) => a.t - b.t)
    curves.sort((a, b) => a.key.localeCompare(b.key))
    return curves
}
