"""embed-export command line.

Pooling averages the second-to-last hidden layer over a record's real
tokens; the begin/end marker tokens every encoder inserts are excluded from
the average.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .exporter import DEFAULT_MODEL, ExportError, ExportJob, export


def _read_lock(path: Path) -> dict:
    try:
        lock = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ExportError(f"{path}: invalid lock file: {exc.msg}") from exc
    if not isinstance(lock, dict) or "model" not in lock:
        raise ExportError(f"{path}: lock file must hold an object with a 'model' field")
    return lock


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description=(
            "Encode texts with a pretrained transformer and write a portable "
            "embedding file (one vector per input record, mean of the "
            "second-to-last hidden layer over real tokens; begin/end marker "
            "tokens are excluded from the pooling)."
        ),
    )
    parser.add_argument("--input", required=True, help="JSONL with {'id', 'text'} records")
    parser.add_argument("--output", required=True, help="embedding file to write")
    parser.add_argument("--model", help=f"encoder identifier or path (default {DEFAULT_MODEL})")
    parser.add_argument("--revision", help="model revision (tag or commit) to pin")
    parser.add_argument(
        "--lock",
        help="model.lock JSON providing {'model', 'revision'}; flags take precedence",
    )
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu", help="device hint, e.g. cpu or cuda")
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument(
        "--jsonl", action="store_true", help="write the JSON-lines fallback format"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    model = args.model
    revision = args.revision
    try:
        if model is None and args.lock:
            lock = _read_lock(Path(args.lock))
            model = lock["model"]
            revision = revision or lock.get("revision")
        job = ExportJob(
            input_path=args.input,
            output_path=args.output,
            model=model or DEFAULT_MODEL,
            revision=revision,
            batch_size=args.batch_size,
            device=args.device,
            fmt="jsonl" if args.jsonl else "binary",
            max_length=args.max_length,
        )
        summary = export(job)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary.count} vectors (dim {summary.dim}) to {summary.output_path}",
        file=sys.stderr,
    )
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
