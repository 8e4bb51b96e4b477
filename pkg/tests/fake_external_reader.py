#!/usr/bin/env python3
"""Scriptable external reader for exercising the JSON-lines protocol.

Modes:
  lexical        serve the in-tree lexical baseline over the protocol
  shuffle        buffer --batch requests, answer them in reverse order
  first-char     answer every request with the context's first character
  bad-span       answer with offsets that do not re-slice to answer_text
  bad-json       answer with a non-JSON line
  wrong-id       answer with an id that was never requested
  exit           exit immediately without reading anything
"""

import argparse
import json
import sys


def respond(obj):
    print(json.dumps(obj, ensure_ascii=False), flush=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="lexical")
    ap.add_argument("--batch", type=int, default=1)
    args = ap.parse_args()

    if args.mode == "exit":
        return 0

    if args.mode == "lexical":
        from kpqa.readers import LexicalReader

        reader = LexicalReader()
        for line in sys.stdin:
            req = json.loads(line)
            pred = reader.read_span(req["question"], req["context"])
            respond(
                {
                    "id": req["id"],
                    "answer_text": pred.answer_text,
                    "start": pred.start,
                    "end": pred.end,
                    "score": pred.score,
                    "null_score": pred.null_score,
                }
            )
        return 0

    if args.mode == "shuffle":
        pending = []
        for line in sys.stdin:
            pending.append(json.loads(line))
            if len(pending) == args.batch:
                for req in reversed(pending):
                    respond(
                        {
                            "id": req["id"],
                            "answer_text": req["context"][0],
                            "start": 0,
                            "end": 1,
                            "score": 0.9,
                            "null_score": 0.1,
                        }
                    )
                pending = []
        return 0

    for line in sys.stdin:
        req = json.loads(line)
        if args.mode == "first-char":
            respond(
                {
                    "id": req["id"],
                    "answer_text": req["context"][0],
                    "start": 0,
                    "end": 1,
                    "score": 0.8,
                    "null_score": 0.2,
                }
            )
        elif args.mode == "bad-span":
            respond(
                {
                    "id": req["id"],
                    "answer_text": "零零零",
                    "start": 0,
                    "end": 1,
                    "score": 0.5,
                    "null_score": 0.5,
                }
            )
        elif args.mode == "bad-json":
            print("this is not json", flush=True)
        elif args.mode == "wrong-id":
            respond(
                {
                    "id": "no-such-id",
                    "answer_text": "",
                    "start": None,
                    "end": None,
                    "score": 0.0,
                    "null_score": 1.0,
                }
            )
        else:
            raise SystemExit(f"unknown mode {args.mode}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
