import { mkdtempSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { fineTune, TrainResult } from '../dist/train.js';

export const TOPICS = ['甲乙丙丁', '戊己庚辛', '壬癸子丑', '寅卯辰巳', '午未申酉', '戌亥金木'];

function rngFactory(seed: number): () => number {
    let s = seed >>> 0;
    return () => {
        s = (s * 1664525 + 1013904223) >>> 0;
        return s / 4294967296;
    };
}

/**
 * Synthetic two-sentence discrimination dataset in SQuAD v2 shape: each
 * context holds two value sentences, the question names the one to pick,
 * and a third of the examples are unanswerable.
 */
export function makeToySquad(n: number, seed = 3): unknown {
    const rng = rngFactory(seed);
    const paragraphs = [];
    for (let i = 0; i < n; i++) {
        const a = Math.floor(rng() * TOPICS.length);
        let b = Math.floor(rng() * TOPICS.length);
        if (b === a) b = (a + 1) % TOPICS.length;
        const sentA = `本合同${TOPICS[a]}为${100 + Math.floor(rng() * 900)}。`;
        const sentB = `本合同${TOPICS[b]}为${100 + Math.floor(rng() * 900)}。`;
        const flip = rng() < 0.5;
        const context = flip ? sentB + sentA : sentA + sentB;
        const negative = i % 3 === 0;
        let question: string;
        let qas;
        if (negative) {
            let c = Math.floor(rng() * TOPICS.length);
            while (c === a || c === b) c = (c + 1) % TOPICS.length;
            question = `${TOPICS[c]}是多少`;
            qas = [{ id: `toy-${i}`, question, is_impossible: true, answers: [] }];
        } else {
            question = `${TOPICS[a]}是多少`;
            const start = flip ? [...sentB].length : 0;
            qas = [
                {
                    id: `toy-${i}`,
                    question,
                    is_impossible: false,
                    answers: [{ text: sentA, answer_start: start }],
                },
            ];
        }
        paragraphs.push({ context, qas });
    }
    return { version: 'v2.0', data: [{ title: 'toy', paragraphs }] };
}

export function writeToySquad(n: number, seed = 3): string {
    const dir = mkdtempSync(join(tmpdir(), 'toy-squad-'));
    const path = join(dir, 'toy.json');
    writeFileSync(path, JSON.stringify(makeToySquad(n, seed)));
    return path;
}

export interface MicroArtifact {
    artifactDir: string;
    result: TrainResult;
}

/** Small but non-trivial artifact used by inference/server/protocol tests. */
export async function trainMicroArtifact(
    epochs = 2,
    nExamples = 24,
    seed = 1,
): Promise<MicroArtifact> {
    const dataPath = writeToySquad(nExamples);
    const artifactDir = mkdtempSync(join(tmpdir(), 'micro-artifact-'));
    const result = await fineTune(dataPath, artifactDir, {
        checkpoint: 'tiny_L-2_H-32_A-2',
        learningRate: 1e-3,
        batchSize: 8,
        epochs,
        maxSeqLen: 48,
        seed,
    });
    return { artifactDir, result };
}
