/**
 * SQuAD v2 JSON loading and validation.
 *
 * The trainer consumes exactly the files the dataset builder emits:
 * {"version": "v2.0", "data": [{"title", "paragraphs": [{"context",
 * "qas": [{"id", "question", "is_impossible", "answers"}]}]}]}.
 * Offsets are character offsets; every answerable qa must re-slice.
 */

import { readFileSync } from 'fs';

export class DatasetSchemaError extends Error {}

export interface TrainingExample {
    id: string;
    question: string;
    context: string;
    answerText: string;
    answerStart: number | null;
    isImpossible: boolean;
}

function fail(message: string): never {
    throw new DatasetSchemaError(message);
}

export function parseSquad(payload: unknown, source = '<memory>'): TrainingExample[] {
    if (typeof payload !== 'object' || payload === null) fail(`${source}: not a JSON object`);
    const root = payload as Record<string, unknown>;
    if (root.version !== 'v2.0') fail(`${source}: version must be "v2.0"`);
    if (!Array.isArray(root.data)) fail(`${source}: missing data array`);

    const examples: TrainingExample[] = [];
    for (const article of root.data) {
        const paragraphs = (article as Record<string, unknown>).paragraphs;
        if (!Array.isArray(paragraphs)) fail(`${source}: article without paragraphs`);
        for (const paragraph of paragraphs) {
            const context = (paragraph as Record<string, unknown>).context;
            const qas = (paragraph as Record<string, unknown>).qas;
            if (typeof context !== 'string' || !Array.isArray(qas)) {
                fail(`${source}: paragraph needs string context and qas array`);
            }
            for (const qaRaw of qas) {
                const qa = qaRaw as Record<string, unknown>;
                if (typeof qa.id !== 'string' || typeof qa.question !== 'string') {
                    fail(`${source}: qa needs string id and question`);
                }
                if (typeof qa.is_impossible !== 'boolean') {
                    fail(`${source}: qa ${qa.id} missing is_impossible`);
                }
                const answers = Array.isArray(qa.answers) ? qa.answers : fail(`${source}: qa ${qa.id} missing answers`);
                if (qa.is_impossible) {
                    if (answers.length !== 0) fail(`${source}: impossible qa ${qa.id} has answers`);
                    examples.push({
                        id: qa.id,
                        question: qa.question,
                        context,
                        answerText: '',
                        answerStart: null,
                        isImpossible: true,
                    });
                    continue;
                }
                if (answers.length !== 1) fail(`${source}: qa ${qa.id} needs exactly one answer`);
                const answer = answers[0] as Record<string, unknown>;
                if (typeof answer.text !== 'string' || typeof answer.answer_start !== 'number') {
                    fail(`${source}: qa ${qa.id} answer needs text and answer_start`);
                }
                const start = answer.answer_start;
                if (context.slice(start, start + answer.text.length) !== answer.text) {
                    fail(`${source}: qa ${qa.id} answer_start does not re-slice to text`);
                }
                examples.push({
                    id: qa.id,
                    question: qa.question,
                    context,
                    answerText: answer.text,
                    answerStart: start,
                    isImpossible: false,
                });
            }
        }
    }
    return examples;
}

export function loadSquad(path: string): TrainingExample[] {
    let raw: string;
    try {
        raw = readFileSync(path, 'utf-8');
    } catch (err) {
        fail(`cannot read ${path}: ${err}`);
    }
    let payload: unknown;
    try {
        payload = JSON.parse(raw);
    } catch (err) {
        fail(`${path}: invalid JSON: ${err}`);
    }
    return parseSquad(payload, path);
}
