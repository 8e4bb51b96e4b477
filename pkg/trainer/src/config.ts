/**
 * Trainer configuration. Hyperparameter defaults follow the reference setup
 * (initial learning rate 3e-5, batch size 4, 4 epochs, 12-layer Chinese
 * checkpoint); CI uses a tiny 2-layer stand-in via the checkpoint id.
 */

export interface TrainerConfig {
    /** Checkpoint id; architecture dims are parsed from the L-/H-/A- parts. */
    checkpoint: string;
    learningRate: number;
    batchSize: number;
    epochs: number;
    maxSeqLen: number;
    seed: number;
    /** Serve-time sliding-window stride for contexts longer than maxSeqLen. */
    docStride: number;
}

export const DEFAULT_CONFIG: TrainerConfig = {
    checkpoint: 'BERT_chinese_L-12_H-768_A-12',
    learningRate: 3e-5,
    batchSize: 4,
    epochs: 4,
    maxSeqLen: 384,
    seed: 0,
    docStride: 128,
};

/** Small architecture used by the test suite. */
export const TINY_CHECKPOINT = 'tiny_L-2_H-64_A-2';

export interface ModelDims {
    layers: number;
    hidden: number;
    heads: number;
}

const CHECKPOINT_PATTERN = /L-(\d+)_H-(\d+)_A-(\d+)/;

export function parseCheckpoint(checkpoint: string): ModelDims {
    const match = CHECKPOINT_PATTERN.exec(checkpoint);
    if (!match) {
        throw new Error(
            `checkpoint id ${JSON.stringify(checkpoint)} must contain L-<layers>_H-<hidden>_A-<heads>`,
        );
    }
    const dims = {
        layers: Number(match[1]),
        hidden: Number(match[2]),
        heads: Number(match[3]),
    };
    if (dims.hidden % dims.heads !== 0) {
        throw new Error(`hidden size ${dims.hidden} not divisible by ${dims.heads} heads`);
    }
    return dims;
}

export function resolveConfig(overrides: Partial<TrainerConfig>): TrainerConfig {
    const config = { ...DEFAULT_CONFIG, ...overrides };
    for (const key of ['learningRate', 'batchSize', 'epochs', 'maxSeqLen', 'docStride'] as const) {
        if (!(config[key] > 0)) {
            throw new Error(`${key} must be positive, got ${config[key]}`);
        }
    }
    parseCheckpoint(config.checkpoint);
    return config;
}
