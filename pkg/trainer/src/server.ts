/**
 * Serves a trained reader over the JSON-lines protocol.
 *
 * Request  {"id", "question", "context"} — one object per line, UTF-8.
 * Response {"id", "answer_text", "start", "end", "score", "null_score"}
 * with code point (character) offsets into the request's context. Requests
 * are answered in arrival order; clients match responses by id, so
 * pipelining works regardless.
 *
 * Transports: stdio (default) or a local TCP socket with the same framing.
 */

import { createInterface } from 'readline';
import { createServer, Server, Socket } from 'net';
import { Readable, Writable } from 'stream';
import { Reader } from './infer.js';

interface ReaderRequest {
    id: unknown;
    question: unknown;
    context: unknown;
}

export function handleLine(reader: Reader, line: string): string | null {
    const trimmed = line.trim();
    if (!trimmed) return null;
    let request: ReaderRequest;
    try {
        request = JSON.parse(trimmed);
    } catch {
        console.error(`ignoring non-JSON request line: ${trimmed.slice(0, 80)}`);
        return null;
    }
    const { id, question, context } = request;
    if (typeof question !== 'string' || typeof context !== 'string' || !question.trim() || !context.trim()) {
        console.error(`ignoring malformed request (id=${JSON.stringify(id)})`);
        return null;
    }
    const result = reader.predict(question, context);
    return JSON.stringify({
        id,
        answer_text: result.answerText,
        start: result.start,
        end: result.end,
        score: result.score,
        null_score: result.nullScore,
    });
}

function attach(reader: Reader, input: Readable, output: Writable, onClose?: () => void): void {
    const lines = createInterface({ input, crlfDelay: Infinity });
    lines.on('line', (line) => {
        const response = handleLine(reader, line);
        if (response !== null) output.write(response + '\n');
    });
    if (onClose) lines.on('close', onClose);
}

export function serveStdio(reader: Reader): void {
    attach(reader, process.stdin, process.stdout, () => process.exit(0));
}

export function serveSocket(reader: Reader, port: number, host = '127.0.0.1'): Server {
    const server = createServer((socket: Socket) => attach(reader, socket, socket));
    server.listen(port, host, () => {
        console.error(`reader listening on ${host}:${port}`);
    });
    return server;
}
