import assert from 'node:assert/strict'
import { test } from 'node:test'

import { CSV_HEADER, CsvSchemaError, groupCurves, parseDecayCsv } from '../src/csv'

const SAMPLE = [
    CSV_HEADER,
    'u_minus_oseen,1,4,0.25,0.25,0.001',
    'u_minus_oseen,2,4,0.2,0.23784142300054421,0.001',
    'u_total,1,4,0.26,0.26,0.001',
    '',
].join('\n')

test('parses a conforming file', () => {
    const rows = parseDecayCsv(SAMPLE, 'sample.csv')
    assert.equal(rows.length, 3)
    assert.equal(rows[0].label, 'u_minus_oseen')
    assert.equal(rows[1].weightedValue, 0.23784142300054421)
})

test('rejects a malformed header with its line number', () => {
    assert.throws(
        () => parseDecayCsv('label,t,p,raw\n1,2,3,4\n', 'bad.csv'),
        (err: unknown) => err instanceof CsvSchemaError && err.line === 1,
    )
})

test('rejects short rows and non-numeric fields with line numbers', () => {
    assert.throws(
        () => parseDecayCsv(CSV_HEADER + '\na,1,4,0.1\n', 'short.csv'),
        (err: unknown) => err instanceof CsvSchemaError && err.line === 2,
    )
    assert.throws(
        () => parseDecayCsv(CSV_HEADER + '\na,1,4,0.1,0.1,0\nb,zzz,4,0.1,0.1,0\n', 'nan.csv'),
        (err: unknown) => err instanceof CsvSchemaError && err.line === 3,
    )
})

test('rejects an empty body', () => {
    assert.throws(
        () => parseDecayCsv(CSV_HEADER + '\n', 'empty.csv'),
        (err: unknown) => err instanceof CsvSchemaError && /empty/.test(String(err)),
    )
})

test('groups rows into sorted curves per label and exponent', () => {
    const rows = parseDecayCsv(SAMPLE)
    const curves = groupCurves(rows)
    assert.equal(curves.length, 2)
    assert.deepEqual(curves.map(c => c.key), ['u_minus_oseen p=4', 'u_total p=4'])
    assert.deepEqual(curves[0].points.map(pt => pt.t), [1, 2])
})
