/**
 * Character-level tokenizer with exact offset bookkeeping.
 *
 * One token per character keeps the tokenizer-to-character mapping trivial:
 * a context token at position p inside a window maps back to source offset
 * windowOffset + (p - contextStart). Inputs are laid out as
 * [CLS] question [SEP] context-slice [SEP] padding, and long contexts are
 * cut into sliding windows with a configurable stride.
 */

export const PAD = 0;
export const UNK = 1;
export const CLS = 2;
export const SEP = 3;
export const SPECIALS = ['<pad>', '<unk>', '<cls>', '<sep>'];

export class CharTokenizer {
    private readonly index = new Map<string, number>();
    readonly chars: string[];

    constructor(chars: string[]) {
        this.chars = chars;
        chars.forEach((ch, i) => this.index.set(ch, SPECIALS.length + i));
    }

    /** Deterministic vocabulary: the sorted set of characters in `texts`. */
    static fromTexts(texts: Iterable<string>): CharTokenizer {
        const seen = new Set<string>();
        for (const text of texts) {
            for (const ch of text) seen.add(ch);
        }
        return new CharTokenizer([...seen].sort());
    }

    get vocabSize(): number {
        return SPECIALS.length + this.chars.length;
    }

    ids(text: string): number[] {
        return [...text].map((ch) => this.index.get(ch) ?? UNK);
    }

    toJSON(): { chars: string[] } {
        return { chars: this.chars };
    }

    static fromJSON(raw: { chars: string[] }): CharTokenizer {
        return new CharTokenizer(raw.chars);
    }
}

export interface EncodedWindow {
    inputIds: number[];
    /**
     * Exact-match flags, aligned with inputIds: 1 on a context token whose
     * character occurs in the question (and on a question token occurring in
     * the context slice). The classic lexical-overlap input feature; a tiny
     * from-scratch model should not have to rediscover character matching.
     */
    matchFlags: number[];
    /** Token index where the context slice starts (after [CLS] q [SEP]). */
    contextStart: number;
    /** Number of context tokens in this window. */
    contextLength: number;
    /** Character offset of the slice within the full context string. */
    windowOffset: number;
    /** Non-padding length. */
    length: number;
}

/**
 * Encode (question, context) into one or more fixed-length windows.
 *
 * NOTE: this tokenizer is code-point based; contexts containing astral
 * characters keep consistent offsets because the caller slices with the
 * same [...str] segmentation.
 */
export function encodeWindows(
    tokenizer: CharTokenizer,
    question: string,
    context: string,
    maxSeqLen: number,
    docStride: number,
): EncodedWindow[] {
    const questionChars = [...question];
    const contextChars = [...context];
    const maxQuestion = Math.max(1, Math.floor(maxSeqLen / 4));
    const questionIds = tokenizer.ids(questionChars.slice(0, maxQuestion).join(''));
    const contextCapacity = maxSeqLen - questionIds.length - 3;
    if (contextCapacity < 1) {
        throw new Error(`maxSeqLen ${maxSeqLen} too small for the question`);
    }
    const step = Math.max(1, contextCapacity - docStride);

    const questionSet = new Set(questionChars);
    const windows: EncodedWindow[] = [];
    for (let offset = 0; ; offset += step) {
        const slice = contextChars.slice(offset, offset + contextCapacity);
        const sliceIds = tokenizer.ids(slice.join(''));
        const inputIds = [CLS, ...questionIds, SEP, ...sliceIds, SEP];
        const sliceSet = new Set(slice);
        const matchFlags = [
            0,
            ...questionChars.slice(0, questionIds.length).map((ch) => (sliceSet.has(ch) ? 1 : 0)),
            0,
            ...slice.map((ch) => (questionSet.has(ch) ? 1 : 0)),
            0,
        ];
        const length = inputIds.length;
        while (inputIds.length < maxSeqLen) inputIds.push(PAD);
        while (matchFlags.length < maxSeqLen) matchFlags.push(0);
        windows.push({
            inputIds,
            matchFlags,
            contextStart: questionIds.length + 2,
            contextLength: sliceIds.length,
            windowOffset: offset,
            length,
        });
        if (offset + contextCapacity >= contextChars.length) break;
    }
    return windows;
}

/**
 * Training target for one example: the window containing the gold span and
 * the token positions of its first/last characters ([CLS] for negatives).
 */
export interface EncodedTarget {
    window: EncodedWindow;
    startPos: number;
    endPos: number;
}

export function encodeTraining(
    tokenizer: CharTokenizer,
    question: string,
    context: string,
    answerStart: number | null,
    answerLength: number,
    maxSeqLen: number,
    docStride: number,
): EncodedTarget | null {
    const windows = encodeWindows(tokenizer, question, context, maxSeqLen, docStride);
    if (answerStart === null) {
        return { window: windows[0], startPos: 0, endPos: 0 };
    }
    const answerEnd = answerStart + answerLength; // exclusive
    for (const window of windows) {
        const lo = window.windowOffset;
        const hi = window.windowOffset + window.contextLength;
        if (answerStart >= lo && answerEnd <= hi) {
            return {
                window,
                startPos: window.contextStart + (answerStart - lo),
                endPos: window.contextStart + (answerEnd - 1 - lo),
            };
        }
    }
    return null; // answer longer than a window; caller skips with a warning
}
