"""Turn raw texts into a portable embedding file with a pretrained encoder.

Each input record's vector is the mean of the encoder's second-to-last
hidden layer over the record's real tokens; the begin/end marker tokens the
tokenizer inserts are excluded from the average.  Identical texts share one
computed vector, so duplicates are always byte-identical.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "bert-base-uncased"


class ExportError(Exception):
    """Base class for exporter failures."""


class InputFormatError(ExportError):
    """The input JSONL is malformed."""


class ZeroTokenError(ExportError):
    """A record's text produced no tokens to pool over."""


class ModelLoadError(ExportError):
    """The encoder or its tokenizer could not be loaded."""


@dataclass(frozen=True)
class ExportJob:
    input_path: str
    output_path: str
    model: str = DEFAULT_MODEL
    revision: str | None = None
    batch_size: int = 32
    device: str = "cpu"
    fmt: str = "binary"  # or "jsonl"
    max_length: int = 512

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.fmt not in ("binary", "jsonl"):
            raise ValueError("format must be 'binary' or 'jsonl'")


@dataclass(frozen=True)
class ExportSummary:
    count: int
    dim: int
    output_path: str


def read_inputs(path: str | Path) -> list[tuple[str, str]]:
    """Read (id, text) records from a JSONL file; ids must be unique."""
    records: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if "id" not in rec or "text" not in rec:
                raise InputFormatError(f"{path}:{lineno}: expected fields 'id' and 'text'")
            key = rec["id"]
            if not isinstance(key, str) or not key:
                raise InputFormatError(f"{path}:{lineno}: 'id' must be a non-empty string")
            if key in seen:
                raise InputFormatError(f"{path}:{lineno}: duplicate id '{key}'")
            seen.add(key)
            records.append((key, rec["text"]))
    if not records:
        raise InputFormatError(f"{path}: no input records found")
    return records


def load_encoder(model: str, revision: str | None = None, device: str = "cpu"):
    """Load tokenizer and encoder in evaluation mode."""
    try:
        from transformers import AutoModel, AutoTokenizer
    except ImportError as exc:  # pragma: no cover
        raise ModelLoadError(f"transformers is not installed: {exc}") from exc
    kwargs = {"revision": revision} if revision else {}
    try:
        tokenizer = AutoTokenizer.from_pretrained(model, **kwargs)
        encoder = AutoModel.from_pretrained(model, output_hidden_states=True, **kwargs)
    except Exception as exc:
        raise ModelLoadError(f"could not load model '{model}': {exc}") from exc
    encoder.eval()
    encoder.to(device)
    return tokenizer, encoder


def _embed_batch(texts, tokenizer, encoder, device, max_length) -> np.ndarray:
    import torch

    encoded = tokenizer(
        list(texts),
        padding=True,
        truncation=True,
        max_length=max_length,
        return_special_tokens_mask=True,
        return_tensors="pt",
    )
    special = encoded.pop("special_tokens_mask")
    encoded = {k: v.to(device) for k, v in encoded.items()}
    with torch.inference_mode():
        output = encoder(**encoded)
    hidden = output.hidden_states[-2]  # (batch, tokens, dim)
    mask = (encoded["attention_mask"].cpu() * (1 - special)).unsqueeze(-1).to(hidden.dtype)
    counts = mask.sum(dim=1)
    pooled = (hidden.cpu() * mask).sum(dim=1) / counts.clamp(min=1.0)
    return pooled.numpy().astype(np.float32), counts.squeeze(-1).numpy()


def export(job: ExportJob) -> ExportSummary:
    """Run one export job; returns a summary of what was written.

    Raises :class:`ZeroTokenError` when a record's text yields no tokens to
    pool over (e.g. it is empty), naming the offending record id.
    """
    from . import writer

    records = read_inputs(job.input_path)
    tokenizer, encoder = load_encoder(job.model, job.revision, job.device)

    # embed each distinct text once; duplicates then share the exact vector
    unique_texts: list[str] = []
    for _, text in records:
        if text not in unique_texts:
            unique_texts.append(text)
    first_record_with = {}
    for key, text in records:
        first_record_with.setdefault(text, key)

    by_text: dict[str, np.ndarray] = {}
    for start in range(0, len(unique_texts), job.batch_size):
        batch = unique_texts[start : start + job.batch_size]
        vectors, token_counts = _embed_batch(
            batch, tokenizer, encoder, job.device, job.max_length
        )
        for text, vec, count in zip(batch, vectors, token_counts):
            if count == 0:
                raise ZeroTokenError(
                    f"record '{first_record_with[text]}' has no tokens to pool over"
                )
            by_text[text] = vec

    dim = next(iter(by_text.values())).shape[0]
    out_records = [(key, by_text[text]) for key, text in records]
    for key, vec in out_records:
        if not np.all(np.isfinite(vec)):
            raise ExportError(f"non-finite embedding produced for record '{key}'")
        if vec.shape != (dim,):
            raise ExportError(f"inconsistent embedding dimension for record '{key}'")

    if job.fmt == "binary":
        writer.write_binary(out_records, dim, job.output_path)
    else:
        writer.write_jsonl(out_records, job.output_path)
    logger.info("wrote %d vectors of dim %d to %s", len(out_records), dim, job.output_path)
    return ExportSummary(count=len(out_records), dim=dim, output_path=job.output_path)
