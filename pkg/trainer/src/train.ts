/**
 * Fine-tuning loop: SQuAD v2 file in, model artifact directory out.
 *
 * The artifact directory holds weights.json, vocab.json, config.json (the
 * full hyperparameter echo) and training_log.json (per-step losses). Runs
 * are deterministic for a fixed seed: variable init, batch shuffling and the
 * optimizer all derive from it.
 */

import * as tf from '@tensorflow/tfjs';
import { mkdirSync, writeFileSync } from 'fs';
import { join } from 'path';
import { initBackend } from './backend.js';
import { resolveConfig, parseCheckpoint, TrainerConfig } from './config.js';
import { loadSquad, TrainingExample } from './data.js';
import { SpanReaderModel } from './model.js';
import { CharTokenizer, EncodedTarget, encodeTraining } from './tokenizer.js';

export interface TrainLogEntry {
    epoch: number;
    step: number;
    loss: number;
}

export interface TrainResult {
    artifactDir: string;
    log: TrainLogEntry[];
    initialLoss: number;
    finalLoss: number;
    nExamples: number;
    nSkipped: number;
}

/** Deterministic PRNG (mulberry32) for shuffling. */
export function seededRandom(seed: number): () => number {
    let state = seed >>> 0;
    return () => {
        state = (state + 0x6d2b79f5) >>> 0;
        let t = state;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

function shuffled<T>(items: T[], rand: () => number): T[] {
    const out = items.slice();
    for (let i = out.length - 1; i > 0; i--) {
        const j = Math.floor(rand() * (i + 1));
        [out[i], out[j]] = [out[j], out[i]];
    }
    return out;
}

export function encodeDataset(
    examples: TrainingExample[],
    tokenizer: CharTokenizer,
    config: TrainerConfig,
): { targets: EncodedTarget[]; nSkipped: number } {
    const targets: EncodedTarget[] = [];
    let nSkipped = 0;
    for (const example of examples) {
        const answerLength = [...example.answerText].length;
        const target = encodeTraining(
            tokenizer,
            example.question,
            example.context,
            example.isImpossible ? null : example.answerStart,
            answerLength,
            config.maxSeqLen,
            config.docStride,
        );
        if (target === null) {
            nSkipped += 1;
            console.error(`skipping ${example.id}: answer does not fit one window`);
            continue;
        }
        targets.push(target);
    }
    return { targets, nSkipped };
}

export async function fineTune(
    datasetPath: string,
    outDir: string,
    overrides: Partial<TrainerConfig> = {},
): Promise<TrainResult> {
    await initBackend();
    const config = resolveConfig(overrides);
    const dims = parseCheckpoint(config.checkpoint);
    const examples = loadSquad(datasetPath);
    if (examples.length === 0) throw new Error(`${datasetPath}: dataset is empty`);

    const tokenizer = CharTokenizer.fromTexts(
        examples.flatMap((e) => [e.question, e.context]),
    );
    const { targets, nSkipped } = encodeDataset(examples, tokenizer, config);
    if (targets.length === 0) throw new Error('no trainable examples after encoding');

    const model = new SpanReaderModel(tokenizer.vocabSize, config.maxSeqLen, dims, config.seed);
    const optimizer = tf.train.adam(config.learningRate);
    const rand = seededRandom(config.seed + 1);
    const log: TrainLogEntry[] = [];

    let step = 0;
    for (let epoch = 0; epoch < config.epochs; epoch++) {
        const order = shuffled(targets, rand);
        for (let i = 0; i < order.length; i += config.batchSize) {
            const batch = order.slice(i, i + config.batchSize);
            const inputIds = batch.map((t) => t.window.inputIds);
            const contextStarts = batch.map((t) => t.window.contextStart);
            const matchFlags = batch.map((t) => t.window.matchFlags);
            const startPositions = batch.map((t) => t.startPos);
            const endPositions = batch.map((t) => t.endPos);
            const cost = optimizer.minimize(
                () => model.loss(inputIds, contextStarts, matchFlags, startPositions, endPositions),
                true,
                model.trainableVariables,
            ) as tf.Scalar;
            log.push({ epoch, step, loss: (await cost.data())[0] });
            cost.dispose();
            step += 1;
        }
    }
    optimizer.dispose();

    mkdirSync(outDir, { recursive: true });
    await model.save(outDir);
    writeFileSync(join(outDir, 'vocab.json'), JSON.stringify(tokenizer.toJSON()));
    writeFileSync(join(outDir, 'config.json'), JSON.stringify(config, null, 1));
    const result: TrainResult = {
        artifactDir: outDir,
        log,
        initialLoss: log[0].loss,
        finalLoss: log[log.length - 1].loss,
        nExamples: targets.length,
        nSkipped,
    };
    writeFileSync(
        join(outDir, 'training_log.json'),
        JSON.stringify(
            {
                config,
                nExamples: result.nExamples,
                nSkipped,
                initialLoss: result.initialLoss,
                finalLoss: result.finalLoss,
                entries: log,
            },
            null,
            1,
        ),
    );
    model.dispose();
    return result;
}
