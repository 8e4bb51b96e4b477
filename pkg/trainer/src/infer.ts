/**
 * Span inference with sliding windows.
 *
 * Contexts longer than one window are cut with the configured stride; the
 * answer is the best-scoring span over all windows (span score =
 * startLogit + endLogit, the usual convention) and the served null score is
 * the minimum over windows of startLogit[0] + endLogit[0]. Offsets are code
 * point offsets into the original context and always re-slice exactly.
 */

import { readFileSync } from 'fs';
import { initBackend } from './backend.js';
import { join } from 'path';
import { SpanReaderModel } from './model.js';
import { CharTokenizer, EncodedWindow, encodeWindows } from './tokenizer.js';

export const DEFAULT_MAX_ANSWER_LEN = 64;

export interface SpanResult {
    answerText: string;
    start: number | null;
    end: number | null;
    score: number;
    nullScore: number;
}

export interface WindowScores {
    window: EncodedWindow;
    start: number[];
    end: number[];
}

export class Reader {
    constructor(
        readonly model: SpanReaderModel,
        readonly tokenizer: CharTokenizer,
        readonly docStride: number,
        readonly maxAnswerLen: number = DEFAULT_MAX_ANSWER_LEN,
    ) {}

    static async load(artifactDir: string, maxAnswerLen = DEFAULT_MAX_ANSWER_LEN): Promise<Reader> {
        await initBackend();
        const model = SpanReaderModel.load(artifactDir);
        const tokenizer = CharTokenizer.fromJSON(
            JSON.parse(readFileSync(join(artifactDir, 'vocab.json'), 'utf-8')),
        );
        const config = JSON.parse(readFileSync(join(artifactDir, 'config.json'), 'utf-8'));
        return new Reader(model, tokenizer, config.docStride ?? 128, maxAnswerLen);
    }

    /** Raw per-window logits; exposed so tests can enumerate exhaustively. */
    scoreWindows(question: string, context: string): WindowScores[] {
        const windows = encodeWindows(
            this.tokenizer, question, context, this.model.maxSeqLen, this.docStride,
        );
        const { startLogits, endLogits } = this.model.forward(
            windows.map((w) => w.inputIds),
            windows.map((w) => w.contextStart),
            windows.map((w) => w.matchFlags),
        );
        const start = startLogits.arraySync();
        const end = endLogits.arraySync();
        startLogits.dispose();
        endLogits.dispose();
        return windows.map((window, i) => ({ window, start: start[i], end: end[i] }));
    }

    /** Best span within one window; null when the window has no context. */
    bestWindowSpan(scores: WindowScores): { start: number; end: number; score: number } | null {
        const { window, start, end } = scores;
        const lo = window.contextStart;
        const hi = window.contextStart + window.contextLength; // exclusive
        let best: { start: number; end: number; score: number } | null = null;
        for (let i = lo; i < hi; i++) {
            const jMax = Math.min(hi, i + this.maxAnswerLen);
            for (let j = i; j < jMax; j++) {
                const score = start[i] + end[j];
                if (best === null || score > best.score) {
                    best = { start: i, end: j, score };
                }
            }
        }
        return best;
    }

    predict(question: string, context: string): SpanResult {
        const contextChars = [...context];
        const scored = this.scoreWindows(question, context);
        let nullScore = Infinity;
        let best: { charStart: number; charEnd: number; score: number } | null = null;
        for (const scores of scored) {
            nullScore = Math.min(nullScore, scores.start[0] + scores.end[0]);
            const span = this.bestWindowSpan(scores);
            if (span === null) continue;
            const charStart = scores.window.windowOffset + (span.start - scores.window.contextStart);
            const charEnd = scores.window.windowOffset + (span.end - scores.window.contextStart) + 1;
            if (best === null || span.score > best.score) {
                best = { charStart, charEnd, score: span.score };
            }
        }
        if (best === null) {
            return { answerText: '', start: null, end: null, score: 0, nullScore: 1 };
        }
        return {
            answerText: contextChars.slice(best.charStart, best.charEnd).join(''),
            start: best.charStart,
            end: best.charEnd,
            score: best.score,
            nullScore,
        };
    }

    dispose(): void {
        this.model.dispose();
    }
}
