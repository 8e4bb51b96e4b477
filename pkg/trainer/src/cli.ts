/**
 * CLI entry points: `train` fine-tunes on a SQuAD v2 file, `serve` exposes a
 * trained artifact over the JSON-lines reader protocol.
 */

import { fineTune } from './train.js';
import { Reader, DEFAULT_MAX_ANSWER_LEN } from './infer.js';
import { serveSocket, serveStdio } from './server.js';
import { TrainerConfig } from './config.js';

const USAGE = `usage:
  cli.js train --data FILE --out DIR [--checkpoint ID] [--lr X] [--batch-size N]
               [--epochs N] [--max-seq-len N] [--seed N] [--doc-stride N]
  cli.js serve --artifact DIR [--transport stdio|socket] [--port N] [--max-answer-len N]`;

function parseFlags(argv: string[]): Map<string, string> {
    const flags = new Map<string, string>();
    for (let i = 0; i < argv.length; i += 2) {
        const key = argv[i];
        const value = argv[i + 1];
        if (!key.startsWith('--') || value === undefined) {
            throw new Error(`bad arguments near ${key}`);
        }
        flags.set(key.slice(2), value);
    }
    return flags;
}

function numberFlag(flags: Map<string, string>, name: string): number | undefined {
    const raw = flags.get(name);
    if (raw === undefined) return undefined;
    const value = Number(raw);
    if (!Number.isFinite(value)) throw new Error(`--${name} must be a number, got ${raw}`);
    return value;
}

async function runTrain(flags: Map<string, string>): Promise<number> {
    const data = flags.get('data');
    const out = flags.get('out');
    if (!data || !out) throw new Error('train requires --data and --out');
    const overrides: Partial<TrainerConfig> = {};
    if (flags.has('checkpoint')) overrides.checkpoint = flags.get('checkpoint');
    const numeric: Array<[string, keyof TrainerConfig]> = [
        ['lr', 'learningRate'],
        ['batch-size', 'batchSize'],
        ['epochs', 'epochs'],
        ['max-seq-len', 'maxSeqLen'],
        ['seed', 'seed'],
        ['doc-stride', 'docStride'],
    ];
    for (const [flag, key] of numeric) {
        const value = numberFlag(flags, flag);
        if (value !== undefined) (overrides as Record<string, unknown>)[key] = value;
    }
    const result = await fineTune(data, out, overrides);
    console.error(
        `trained on ${result.nExamples} examples (${result.nSkipped} skipped): ` +
        `loss ${result.initialLoss.toFixed(4)} -> ${result.finalLoss.toFixed(4)}; ` +
        `artifact at ${result.artifactDir}`,
    );
    return 0;
}

async function runServe(flags: Map<string, string>): Promise<number> {
    const artifact = flags.get('artifact');
    if (!artifact) throw new Error('serve requires --artifact');
    const maxAnswerLen = numberFlag(flags, 'max-answer-len') ?? DEFAULT_MAX_ANSWER_LEN;
    const reader = await Reader.load(artifact, maxAnswerLen);
    const transport = flags.get('transport') ?? 'stdio';
    if (transport === 'stdio') {
        serveStdio(reader);
    } else if (transport === 'socket') {
        serveSocket(reader, numberFlag(flags, 'port') ?? 8098);
    } else {
        throw new Error(`unknown transport ${transport}`);
    }
    return 0;
}

export async function main(argv: string[]): Promise<number> {
    const [command, ...rest] = argv;
    try {
        if (command === 'train') return await runTrain(parseFlags(rest));
        if (command === 'serve') return await runServe(parseFlags(rest));
        console.error(USAGE);
        return 2;
    } catch (err) {
        console.error(String(err instanceof Error ? err.message : err));
        return 1;
    }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
    main(process.argv.slice(2)).then((code) => {
        if (code !== 0) process.exit(code);
    });
}
