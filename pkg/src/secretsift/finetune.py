"""QLoRA fine-tuning recipe, emitted as a flat key/value manifest.

Only the configuration is produced; no training happens here.

File format: one ``key = value`` per line, UTF-8.  Strings are double-quoted
JSON strings, booleans are ``true``/``false``, numbers are bare.  The format
is also valid TOML.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from secretsift.errors import EmptyModelId


@dataclass(frozen=True)
class FinetuneManifest:
    model_id: str
    quantization: str = "nf4-4bit"
    double_quantization: bool = False
    compute_precision: str = "fp16"
    lora_rank: int = 64
    lora_alpha: int = 16
    lora_dropout: float = 0
    bias: str = "none"
    optimizer: str = "paged-adamw"
    learning_rate: float = 2e-4
    epochs: int = 7
    batch_size: int = 1
    gradient_accumulation: int = 8
    scheduler: str = "cosine"
    warmup_ratio: float = 0.03


_KEY_ORDER = [
    "quantization",
    "double_quantization",
    "compute_precision",
    "lora_rank",
    "lora_alpha",
    "lora_dropout",
    "bias",
    "optimizer",
    "learning_rate",
    "epochs",
    "batch_size",
    "gradient_accumulation",
    "scheduler",
    "warmup_ratio",
    "model_id",
]


def emit_finetune_manifest(model_id: str) -> FinetuneManifest:
    if not model_id or not model_id.strip():
        raise EmptyModelId("model id must be non-empty")
    return FinetuneManifest(model_id=model_id)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, float) and value != 0 and abs(value) < 1e-3:
        mantissa, exp = f"{value:.15e}".split("e")
        mantissa = mantissa.rstrip("0").rstrip(".")
        return f"{mantissa}e{int(exp)}"
    return repr(value)


def manifest_to_text(manifest: FinetuneManifest) -> str:
    return "".join(f"{k} = {_format_value(getattr(manifest, k))}\n" for k in _KEY_ORDER)


def _parse_value(raw: str) -> Any:
    if raw == "true":
        return True
    if raw == "false":
        return False
    if raw.startswith('"'):
        return json.loads(raw)
    try:
        return int(raw)
    except ValueError:
        return float(raw)


def parse_manifest_text(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value")
        out[key.strip()] = _parse_value(value.strip())
    return out


def manifest_from_text(text: str) -> FinetuneManifest:
    values = parse_manifest_text(text)
    known = {f.name for f in fields(FinetuneManifest)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
    return FinetuneManifest(**values)


def write_manifest(manifest: FinetuneManifest, path: str | Path) -> None:
    Path(path).write_text(manifest_to_text(manifest), encoding="utf-8")
