/**
 * A small transformer encoder with span-prediction heads.
 *
 * Token embeddings plus learned positional embeddings feed N pre-norm-free
 * encoder blocks (multi-head self-attention and a feed-forward layer, each
 * with residual + layer norm), followed by two linear heads that score every
 * token as the span start / span end. Position 0 ([CLS]) doubles as the
 * no-answer target, so the null score of a window is
 * startLogits[0] + endLogits[0].
 */

import * as tf from '@tensorflow/tfjs';
import { mkdirSync, readFileSync, writeFileSync } from 'fs';
import { join } from 'path';
import { ModelDims } from './config.js';
import { PAD } from './tokenizer.js';

// attention sees token offsets j - i clipped to this radius; lets "look k
// positions over" patterns generalize across absolute positions
export const REL_BIAS_RADIUS = 16;

function fnv1a(text: string): number {
    let hash = 0x811c9dc5;
    for (let i = 0; i < text.length; i++) {
        hash ^= text.charCodeAt(i);
        hash = Math.imul(hash, 0x01000193);
    }
    return hash >>> 0;
}

export interface SpanLogits {
    startLogits: tf.Tensor2D;
    endLogits: tf.Tensor2D;
}

interface VarSpec {
    name: string;
    shape: number[];
    init: 'normal' | 'zeros' | 'ones';
    /** Variables sharing a seedKey get identical initial values. */
    seedKey?: string;
}

// Xavier scaling; the fixed 0.02 BERT convention assumes hidden sizes in the
// hundreds and starves the attention-score gradients at tiny widths
function initStd(shape: number[]): number {
    if (shape.length === 1) return Math.sqrt(1 / shape[0]);
    const fanIn = shape[0];
    const fanOut = shape[shape.length - 1];
    return Math.sqrt(2 / (fanIn + fanOut));
}

function varSpecs(vocabSize: number, maxSeqLen: number, dims: ModelDims): VarSpec[] {
    const h = dims.hidden;
    const specs: VarSpec[] = [
        { name: 'embed/tokens', shape: [vocabSize, h], init: 'normal' },
        { name: 'embed/positions', shape: [maxSeqLen, h], init: 'normal' },
        // question-vs-context segment embedding: a context character that
        // attends to its twin in the question receives the question-segment
        // component, which is what makes "this char occurs in the question"
        // a clean, position-independent feature
        { name: 'embed/segments', shape: [2, h], init: 'normal' },
        // exact-match flag embedding (lexical-overlap input feature)
        { name: 'embed/match', shape: [2, h], init: 'normal' },
    ];
    for (let l = 0; l < dims.layers; l++) {
        for (const proj of ['q', 'k', 'v', 'o']) {
            // wq and wk start out identical so q.k is biased toward positions
            // holding the same character: attention leans toward exact-match
            // detection (what span selection needs) from the first step
            const isMatch = proj === 'q' || proj === 'k';
            specs.push({
                name: `layer${l}/attn/w${proj}`,
                shape: [h, h],
                init: 'normal',
                seedKey: isMatch ? `layer${l}/attn/wqk` : undefined,
            });
            specs.push({ name: `layer${l}/attn/b${proj}`, shape: [h], init: 'zeros' });
        }
        specs.push({
            name: `layer${l}/attn/relbias`,
            shape: [2 * REL_BIAS_RADIUS + 1, dims.heads],
            init: 'zeros',
        });
        specs.push({ name: `layer${l}/ln1/gamma`, shape: [h], init: 'ones' });
        specs.push({ name: `layer${l}/ln1/beta`, shape: [h], init: 'zeros' });
        specs.push({ name: `layer${l}/ffn/w1`, shape: [h, 4 * h], init: 'normal' });
        specs.push({ name: `layer${l}/ffn/b1`, shape: [4 * h], init: 'zeros' });
        specs.push({ name: `layer${l}/ffn/w2`, shape: [4 * h, h], init: 'normal' });
        specs.push({ name: `layer${l}/ffn/b2`, shape: [h], init: 'zeros' });
        specs.push({ name: `layer${l}/ln2/gamma`, shape: [h], init: 'ones' });
        specs.push({ name: `layer${l}/ln2/beta`, shape: [h], init: 'zeros' });
    }
    specs.push({ name: 'final_ln/gamma', shape: [h], init: 'ones' });
    specs.push({ name: 'final_ln/beta', shape: [h], init: 'zeros' });
    specs.push({ name: 'head/start/w', shape: [h, 1], init: 'normal' });
    specs.push({ name: 'head/start/b', shape: [1], init: 'zeros' });
    specs.push({ name: 'head/end/w', shape: [h, 1], init: 'normal' });
    specs.push({ name: 'head/end/b', shape: [1], init: 'zeros' });
    return specs;
}

export class SpanReaderModel {
    private static instanceCounter = 0;

    readonly vars = new Map<string, tf.Variable>();

    constructor(
        readonly vocabSize: number,
        readonly maxSeqLen: number,
        readonly dims: ModelDims,
        seed = 0,
    ) {
        // tf registers variables by name engine-wide; scope per instance so
        // several models can coexist in one process
        const scope = `spanreader${SpanReaderModel.instanceCounter++}`;
        for (const spec of varSpecs(vocabSize, maxSeqLen, dims)) {
            const varSeed = fnv1a(`${spec.seedKey ?? spec.name}:${seed}`);
            let initial: tf.Tensor;
            if (spec.init === 'normal') {
                initial = tf.randomNormal(spec.shape, 0, initStd(spec.shape), 'float32', varSeed);
            } else if (spec.init === 'ones') {
                initial = tf.ones(spec.shape);
            } else {
                initial = tf.zeros(spec.shape);
            }
            this.vars.set(spec.name, tf.variable(initial, true, `${scope}/${spec.name}`));
        }
    }

    get trainableVariables(): tf.Variable[] {
        return [...this.vars.values()];
    }

    private v(name: string): tf.Variable {
        const variable = this.vars.get(name);
        if (!variable) throw new Error(`unknown variable ${name}`);
        return variable;
    }

    private layerNorm(x: tf.Tensor3D, gamma: tf.Variable, beta: tf.Variable): tf.Tensor3D {
        const { mean, variance } = tf.moments(x, -1, true);
        const normed = tf.div(tf.sub(x, mean), tf.sqrt(tf.add(variance, 1e-6)));
        return tf.add(tf.mul(normed, gamma), beta) as tf.Tensor3D;
    }

    /**
     * Logits for a batch of windows. Pad positions are pushed to -1e9.
     * `contextStarts[b]` is the token index where window b's context begins;
     * earlier positions ([CLS] + question + [SEP]) form segment 0.
     * `matchFlags` marks tokens whose character occurs on the other side.
     */
    forward(inputIds: number[][], contextStarts: number[], matchFlags: number[][]): SpanLogits {
        return tf.tidy(() => {
            const batch = inputIds.length;
            const seqLen = inputIds[0].length;
            const ids = tf.tensor2d(inputIds, [batch, seqLen], 'int32');
            const padMask = tf.cast(tf.notEqual(ids, PAD), 'float32'); // [B, L]
            const attnBias = tf.mul(tf.sub(1, padMask), -1e9).reshape([batch, 1, 1, seqLen]);

            const positions = this.v('embed/positions').slice([0, 0], [seqLen, -1]);
            // one-hot matmul instead of gather: gather's gradient kernel is
            // missing on the wasm backend, a plain matmul works everywhere
            const oneHotIds = tf.oneHot(ids.reshape([batch * seqLen]), this.vocabSize);
            const segmentIds = inputIds.map((row, b) =>
                row.map((_, pos) => (pos >= contextStarts[b] ? 1 : 0)),
            );
            const oneHotSegments = tf.oneHot(tf.tensor1d(segmentIds.flat(), 'int32'), 2);
            const oneHotMatch = tf.oneHot(tf.tensor1d(matchFlags.flat(), 'int32'), 2);
            let x = tf.add(
                tf.add(
                    tf.add(
                        tf.matMul(oneHotIds, this.v('embed/tokens')),
                        tf.matMul(oneHotSegments, this.v('embed/segments')),
                    ),
                    tf.matMul(oneHotMatch, this.v('embed/match')),
                ).reshape([batch, seqLen, this.dims.hidden]),
                positions.expandDims(0),
            ) as tf.Tensor3D;

            const heads = this.dims.heads;
            const headDim = this.dims.hidden / heads;
            const split = (t: tf.Tensor3D) =>
                t.reshape([batch, seqLen, heads, headDim]).transpose([0, 2, 1, 3]);

            // one-hot of clip(j - i) for the relative bias lookup (matmul
            // instead of gather, same wasm-gradient reason as above)
            const offsets: number[] = [];
            for (let i = 0; i < seqLen; i++) {
                for (let j = 0; j < seqLen; j++) {
                    offsets.push(
                        Math.max(-REL_BIAS_RADIUS, Math.min(REL_BIAS_RADIUS, j - i)) + REL_BIAS_RADIUS,
                    );
                }
            }
            const offsetOneHot = tf.oneHot(
                tf.tensor1d(offsets, 'int32'), 2 * REL_BIAS_RADIUS + 1,
            );

            // pre-norm blocks: attention and ffn read a normalized copy and
            // add back onto the residual stream; trains stably without warmup
            for (let l = 0; l < this.dims.layers; l++) {
                const normedAttn = this.layerNorm(
                    x, this.v(`layer${l}/ln1/gamma`), this.v(`layer${l}/ln1/beta`),
                );
                const q = split(this.dense(normedAttn, `layer${l}/attn/wq`, `layer${l}/attn/bq`));
                const k = split(this.dense(normedAttn, `layer${l}/attn/wk`, `layer${l}/attn/bk`));
                const vv = split(this.dense(normedAttn, `layer${l}/attn/wv`, `layer${l}/attn/bv`));
                const relBias = tf.matMul(offsetOneHot, this.v(`layer${l}/attn/relbias`))
                    .reshape([seqLen, seqLen, heads])
                    .transpose([2, 0, 1])
                    .expandDims(0); // [1, heads, L, L]
                const scores = tf.add(
                    tf.add(tf.div(tf.matMul(q, k, false, true), Math.sqrt(headDim)), relBias),
                    attnBias,
                );
                const context = tf.matMul(tf.softmax(scores), vv) // [B, h, L, dk]
                    .transpose([0, 2, 1, 3])
                    .reshape([batch, seqLen, this.dims.hidden]) as tf.Tensor3D;
                x = tf.add(x, this.dense(context, `layer${l}/attn/wo`, `layer${l}/attn/bo`)) as tf.Tensor3D;
                const normedFfn = this.layerNorm(
                    x, this.v(`layer${l}/ln2/gamma`), this.v(`layer${l}/ln2/beta`),
                );
                const hiddenFfn = tf.relu(this.dense(normedFfn, `layer${l}/ffn/w1`, `layer${l}/ffn/b1`));
                const ffnOut = this.dense(hiddenFfn as tf.Tensor3D, `layer${l}/ffn/w2`, `layer${l}/ffn/b2`);
                x = tf.add(x, ffnOut) as tf.Tensor3D;
            }
            x = this.layerNorm(x, this.v('final_ln/gamma'), this.v('final_ln/beta'));

            const maskBias = tf.mul(tf.sub(1, padMask), -1e9);
            const project = (w: string, b: string) =>
                tf.add(
                    tf.add(tf.matMul(x.reshape([batch * seqLen, this.dims.hidden]), this.v(w)), this.v(b))
                        .reshape([batch, seqLen]),
                    maskBias,
                ) as tf.Tensor2D;
            return {
                startLogits: tf.keep(project('head/start/w', 'head/start/b')),
                endLogits: tf.keep(project('head/end/w', 'head/end/b')),
            };
        });
    }

    private dense(x: tf.Tensor3D, wName: string, bName: string): tf.Tensor3D {
        const [batch, seqLen] = x.shape;
        const w = this.v(wName);
        const out = tf.add(tf.matMul(x.reshape([batch * seqLen, x.shape[2]]), w), this.v(bName));
        return out.reshape([batch, seqLen, w.shape[1] as number]) as tf.Tensor3D;
    }

    /** Mean start+end cross-entropy over one batch. */
    loss(
        inputIds: number[][],
        contextStarts: number[],
        matchFlags: number[][],
        startPositions: number[],
        endPositions: number[],
    ): tf.Scalar {
        return tf.tidy(() => {
            const { startLogits, endLogits } = this.forward(inputIds, contextStarts, matchFlags);
            const seqLen = inputIds[0].length;
            const startLabels = tf.oneHot(tf.tensor1d(startPositions, 'int32'), seqLen);
            const endLabels = tf.oneHot(tf.tensor1d(endPositions, 'int32'), seqLen);
            const startLoss = tf.losses.softmaxCrossEntropy(startLabels, startLogits);
            const endLoss = tf.losses.softmaxCrossEntropy(endLabels, endLogits);
            const out = tf.div(tf.add(startLoss, endLoss), 2) as tf.Scalar;
            startLogits.dispose();
            endLogits.dispose();
            return out;
        });
    }

    async save(dir: string): Promise<void> {
        mkdirSync(dir, { recursive: true });
        const weights: Record<string, { shape: number[]; values: number[] }> = {};
        for (const [name, variable] of this.vars) {
            weights[name] = {
                shape: variable.shape.slice(),
                values: Array.from(await variable.data()),
            };
        }
        writeFileSync(
            join(dir, 'weights.json'),
            JSON.stringify({
                vocabSize: this.vocabSize,
                maxSeqLen: this.maxSeqLen,
                dims: this.dims,
                weights,
            }),
        );
    }

    static load(dir: string): SpanReaderModel {
        const raw = JSON.parse(readFileSync(join(dir, 'weights.json'), 'utf-8'));
        const model = new SpanReaderModel(raw.vocabSize, raw.maxSeqLen, raw.dims, 0);
        const weights = raw.weights as Record<string, { shape: number[]; values: number[] }>;
        for (const [name, entry] of Object.entries(weights)) {
            const variable = model.vars.get(name);
            if (!variable) throw new Error(`artifact has unknown variable ${name}`);
            variable.assign(tf.tensor(entry.values, entry.shape, 'float32'));
        }
        return model;
    }

    dispose(): void {
        for (const variable of this.vars.values()) variable.dispose();
        this.vars.clear();
    }
}
