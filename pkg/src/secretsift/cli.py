"""Command-line interface.

Subcommands: ``scan``, ``evaluate``, ``split``, ``emit-finetune-config``.

Exit codes for ``scan``: 0 when nothing was flagged, 1 when secrets were
found (classified secrets with ``--classify``, any candidate without it),
2 on fatal errors.  Other subcommands return 0 on success and 2 on fatal
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from secretsift import __version__
from secretsift.catalog import Catalog, TaxonomyClass, builtin_catalog, load_catalog
from secretsift.classifier import (
    BackendKind,
    ClassificationFailure,
    ClassifierConfig,
    Verdict,
    baseline_regex_only,
    batch_classify,
    make_backend,
)
from secretsift.context import DEFAULT_WINDOW_CHARS, extract_window
from secretsift.datasets import LabeledExample, Strategy, load_dataset, make_split, summarize, write_dataset
from secretsift.errors import MissingTypeLabel, SecretSiftError
from secretsift.finetune import emit_finetune_manifest, manifest_to_text
from secretsift.metrics import class_report, confusion_matrix, render_table
from secretsift.prompting import DEFAULT_SHOTS, MAX_SHOTS, Label, Mode, make_request
from secretsift.report import ScanReport, dedupe_candidates, finding_from_candidate
from secretsift.scanner import DEFAULT_EXCLUDES, DEFAULT_MAX_FILE_BYTES, ScanOptions, normalize_content, scan_tree

logger = logging.getLogger("secretsift")

EXIT_OK = 0
EXIT_FOUND = 1
EXIT_FATAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 already; keep the message short
        self.print_usage(sys.stderr)
        self.exit(EXIT_FATAL, f"{self.prog}: error: {message}\n")


def _u64(value: str) -> int:
    n = int(value, 0)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _non_negative_int(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _shots(value: str) -> int:
    n = int(value)
    if not 0 <= n <= MAX_SHOTS:
        raise argparse.ArgumentTypeError(f"must be between 0 and {MAX_SHOTS}")
    return n


def _add_classifier_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.BINARY.value)
    p.add_argument("--shots", type=_shots, default=DEFAULT_SHOTS, help="exemplars per prompt (0-8)")
    p.add_argument("--model", default=None, help="model id sent to the remote endpoint")
    p.add_argument("--concurrency", type=_positive_int, default=4, help="requests in flight")
    p.add_argument("--max-retries", type=_non_negative_int, default=3)
    p.add_argument("--timeout-ms", type=_positive_int, default=30_000)
    p.add_argument(
        "--context-chars", type=_non_negative_int, default=DEFAULT_WINDOW_CHARS, help="window budget (200, 300, ...)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secretsift", description="Regex + language-model secret detection.")
    parser.add_argument("--version", action="version", version=f"secretsift {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scan = sub.add_parser("scan", help="scan a source tree for secrets")
    scan.add_argument("path")
    scan.add_argument("--catalog", help="pattern catalog JSON (default: builtin)")
    scan.add_argument("--classify", choices=[k.value for k in BackendKind], default=None)
    scan.add_argument("--format", choices=["json", "table"], default="json")
    scan.add_argument("--redact", action=argparse.BooleanOptionalAction, default=True)
    scan.add_argument("--out", help="write the report here instead of stdout")
    scan.add_argument("--include", action="append", default=None, metavar="GLOB")
    scan.add_argument("--exclude", action="append", default=None, metavar="GLOB")
    scan.add_argument("--max-file-bytes", type=_positive_int, default=DEFAULT_MAX_FILE_BYTES)
    _add_classifier_flags(scan)

    ev = sub.add_parser("evaluate", help="score a classifier on a labeled dataset")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--backend", choices=[k.value for k in BackendKind] + ["regex-only"], default="mock")
    ev.add_argument("--on-unparseable", choices=["error", "non-sensitive", "secret"], default="error")
    ev.add_argument("--root", help="base directory for file_path when context must be re-cut")
    ev.add_argument("--format", choices=["json", "table"], default="json")
    ev.add_argument("--out")
    _add_classifier_flags(ev)

    sp = sub.add_parser("split", help="write train/validation/test CSVs")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    sp.add_argument("--seed", type=_u64, required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--stratify", action="store_true", help="per-category proportional holdouts (multiclass)")

    ft = sub.add_parser("emit-finetune-config", help="write the QLoRA fine-tuning manifest")
    ft.add_argument("--model", required=True)
    ft.add_argument("--out")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _classifier_config(args: argparse.Namespace, backend: BackendKind) -> ClassifierConfig:
    model = args.model or ("rule-mock" if backend is BackendKind.MOCK else "gpt-4o")
    return ClassifierConfig(
        backend=backend,
        model_id=model,
        concurrency_limit=args.concurrency,
        max_retries=args.max_retries,
        request_timeout_ms=args.timeout_ms,
    )


# -- scan


def cmd_scan(args: argparse.Namespace) -> int:
    catalog: Catalog = load_catalog(args.catalog) if args.catalog else builtin_catalog()
    options = ScanOptions(
        max_file_bytes=args.max_file_bytes,
        include_globs=tuple(args.include or ("*",)),
        exclude_globs=tuple(DEFAULT_EXCLUDES) + tuple(args.exclude or ()),
        workers=args.concurrency,
    )
    root = Path(args.path)
    result = scan_tree(root, catalog, options)
    candidates = dedupe_candidates(result.candidates, [p.id for p in catalog])
    types = {p.id: p.secret_type.slug for p in catalog}
    findings = [finding_from_candidate(c, args.redact, types.get(c.pattern_id)) for c in candidates]

    errors = len(result.errors)
    if args.classify:
        errors += _classify_findings(findings, root, args)

    classified_secret = sum(1 for f in findings if f.verdict == Label.SECRET.value)
    report = ScanReport(
        tool_version=__version__,
        catalog_source=result.catalog_source,
        window_chars=args.context_chars,
        findings=findings,
        summary={
            "files_scanned": result.files_scanned,
            "files_skipped": result.files_skipped,
            "candidates": len(findings),
            "classified_secret": classified_secret,
            "errors": errors,
        },
    )
    _emit(report.to_json() if args.format == "json" else report.to_table(), args.out)
    flagged = classified_secret if args.classify else len(findings)
    return EXIT_FOUND if flagged else EXIT_OK


def _classify_findings(findings: list, root: Path, args: argparse.Namespace) -> int:
    """Attach verdicts in place; returns the number of per-item failures.

    Multiclass mode runs the binary stage first and types only the secrets.
    """
    backend_kind = BackendKind(args.classify)
    cfg = _classifier_config(args, backend_kind)
    backend = make_backend(cfg)
    base = root if root.is_dir() else root.parent
    texts: dict[str, str] = {}

    def window_for(f) -> str:
        c = f.source
        if c.file_path not in texts:
            texts[c.file_path] = normalize_content((base / c.file_path).read_bytes())
        return extract_window(texts[c.file_path], (c.start_offset, c.end_offset), args.context_chars).text

    windows = [window_for(f) for f in findings]
    reqs = [
        make_request(Mode.BINARY, args.shots, f.source.matched_text, w, f.source.candidate_id)
        for f, w in zip(findings, windows)
    ]
    failures = 0
    outcomes = batch_classify(reqs, cfg, backend)
    for f, o in zip(findings, outcomes):
        if isinstance(o, ClassificationFailure):
            logger.warning("classification failed for %s:%d (%s)", f.file_path, f.line, o.error)
            f.error = o.error
            failures += 1
        else:
            f.verdict = o.binary_label.value

    if Mode(args.mode) is Mode.MULTICLASS:
        idx = [i for i, f in enumerate(findings) if f.verdict == Label.SECRET.value]
        type_reqs = [
            make_request(Mode.MULTICLASS, args.shots, findings[i].source.matched_text, windows[i], findings[i].source.candidate_id)
            for i in idx
        ]
        for i, o in zip(idx, batch_classify(type_reqs, cfg, backend)):
            if isinstance(o, ClassificationFailure):
                logger.warning("type classification failed for %s:%d (%s)", findings[i].file_path, findings[i].line, o.error)
                findings[i].error = o.error
                failures += 1
            else:
                findings[i].secret_type = o.type_label.slug
    return failures


# -- evaluate


def _eval_context(ex: LabeledExample, base: Path, window: int) -> str:
    if ex.context:
        return ex.context
    if ex.file_path and ex.span:
        text = normalize_content((base / ex.file_path).read_bytes())
        if text[ex.span[0] : ex.span[1]] != ex.candidate:
            logger.warning("row %s: span does not reproduce the candidate", ex.id)
        return extract_window(text, ex.span, window).text
    return ex.candidate


def cmd_evaluate(args: argparse.Namespace) -> int:
    examples = load_dataset(args.dataset)
    mode = Mode(args.mode)
    if mode is Mode.MULTICLASS:
        examples = [e for e in examples if e.label is Label.SECRET]
        untyped = [e.id for e in examples if e.secret_type is None]
        if untyped or not examples:
            raise MissingTypeLabel(
                f"multiclass evaluation needs secret_type on every secret row; {len(untyped)} missing"
                if untyped
                else "dataset has no secret rows"
            )
        golds: list = [e.secret_type for e in examples]
        labels: list = list(TaxonomyClass)
    else:
        golds = [e.label for e in examples]
        labels = list(Label)

    coerced = 0
    if args.backend == "regex-only":
        if mode is Mode.MULTICLASS:
            raise SecretSiftError("the regex-only baseline supports binary mode only")
        preds: list = [v.binary_label for v in baseline_regex_only(examples)]
        model_id = "regex-only"
    else:
        cfg = _classifier_config(args, BackendKind(args.backend))
        model_id = cfg.model_id
        base = Path(args.root) if args.root else Path(args.dataset).resolve().parent
        reqs = [
            make_request(mode, args.shots, e.candidate, _eval_context(e, base, args.context_chars), e.id)
            for e in examples
        ]
        preds = []
        for e, o in zip(examples, batch_classify(reqs, cfg)):
            if isinstance(o, Verdict):
                preds.append(o.binary_label if mode is Mode.BINARY else o.type_label)
                continue
            if o.error != "UnparseableAnswer" or args.on_unparseable == "error":
                raise SecretSiftError(f"example {e.id}: {o.error}")
            coerced += 1
            if mode is Mode.MULTICLASS:
                preds.append(TaxonomyClass.OTHER)
            else:
                preds.append(Label.SECRET if args.on_unparseable == "secret" else Label.NON_SENSITIVE)

    report = class_report(confusion_matrix(golds, preds, labels))
    if args.format == "table":
        text = render_table(report)
    else:
        doc = {
            "tool_version": __version__,
            "dataset": str(args.dataset),
            "mode": mode.value,
            "backend": args.backend,
            "model_id": model_id,
            "shots": args.shots,
            "context_chars": args.context_chars,
            "examples": len(examples),
            "coerced_unparseable": coerced,
            "metrics": report.to_dict(),
        }
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# -- split / manifest


def cmd_split(args: argparse.Namespace) -> int:
    pool = load_dataset(args.dataset)
    split = make_split(pool, Strategy(args.strategy), args.seed, stratify=args.stratify)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in split.parts().items():
        write_dataset(part, out / f"{name}.csv")
        s = summarize(part)
        print(f"{name}: {s['total']} rows ({s['secret']} secret, {s['non_sensitive']} non_sensitive)")
    return EXIT_OK


def cmd_emit_finetune_config(args: argparse.Namespace) -> int:
    _emit(manifest_to_text(emit_finetune_manifest(args.model)), args.out)
    return EXIT_OK


_COMMANDS = {
    "scan": cmd_scan,
    "evaluate": cmd_evaluate,
    "split": cmd_split,
    "emit-finetune-config": cmd_emit_finetune_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_FATAL
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except (SecretSiftError, OSError, ValueError) as exc:
        print(f"secretsift: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
