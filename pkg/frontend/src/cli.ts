#!/usr/bin/env node
/**
 * Usage: oseenlab-plot <input.csv> [more.csv ...] --out figure.svg [--title text]
 * Exits nonzero on schema errors; never writes a file on failure.
 */

import { CsvSchemaError } from './csv'
import { plotDecay } from './plot'

function parseArgs(argv: string[]) {
    const inputs: string[] = []
    let output: string | undefined
    let title: string | undefined
    for (let i = 0; i < argv.length; i++) {
        const arg = argv[i]
        if (arg === '--out') {
            output = argv[++i]
        } else if (arg === '--title') {
            title = argv[++i]
        } else if (arg.startsWith('--')) {
            throw new Error(`unknown option ${arg}`)
        } else {
            inputs.push(arg)
        }
    }
    if (!output) throw new Error('missing required --out <file.svg>')
    return { inputs, output, title }
}

function main(): number {
    try {
        const spec = parseArgs(process.argv.slice(2))
        const result = plotDecay(spec)
        console.log(`wrote ${result.output} (${result.curves.length} curves)`)
        return 0
    } catch (err) {
        if (err instanceof CsvSchemaError) {
            console.error(`schema error: ${err.message}`)
        } else {
            console.error(`error: ${err instanceof Error ? err.message : err}`)
        }
        return 1
    }
}

process.exitCode = main()
