"""Command-line surface: fetch -> tokenize -> dataset -> pack -> eval.

Exit codes: 0 success, 1 data/validation failure, 2 partial fetch failure,
64 usage error. Logs go to stderr; data goes to files or stdout, with
``--json`` emitting machine-readable summaries for pipeline composition.

Option values resolve as: command-line flag > PROTFORGE_* environment
variable > --config JSON file > built-in default. Endpoint base URLs are
taken from the VF_*_BASE environment variables (see protforge.fetch).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import batchpack, dataset as ds, metrics as mx
from .core import (
    BenchmarkExample,
    Databank,
    DatabankId,
    read_jsonl,
    validate_example,
    write_jsonl,
)
from .fetch import Endpoints, FetchError, FetchJob, RequestsTransport, RetryPolicy, run_batch
from .serialize import (
    Codebook,
    assign_dssp8,
    collapse_to_3,
    compute_descriptors,
    train_codebook,
)
from .structparse import StructParseError, extract_chain, parse_fasta, parse_mmcif, parse_pdb

EXIT_OK = 0
EXIT_DATA = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _resolve(flag_value, env_key: str, config: dict, config_key: str,
             default, cast=None):
    """flags > env > config file > default."""
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(env_key)
    if env_value is not None:
        return cast(env_value) if cast else env_value
    if config_key in config:
        return config[config_key]
    return default


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise UsageError("config file must hold a JSON object")
    return payload


def _emit(summary: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(summary, indent=2))
    else:
        for key, value in summary.items():
            _log(f"{key}: {value}")


# ---------------------------------------------------------------- fetch


def _read_ids(spec: str) -> list[str]:
    path = Path(spec)
    if path.exists():
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            payload = json.loads(text)
            if not isinstance(payload, list):
                raise UsageError("JSON id files must hold a list of accessions")
            return [str(v) for v in payload]
        return [line.strip() for line in text.splitlines() if line.strip()]
    return [token.strip() for token in spec.split(",") if token.strip()]


def cmd_fetch(args, config: dict) -> int:
    try:
        kind = Databank(args.db)
    except ValueError:
        raise UsageError(f"unknown databank {args.db!r}") from None

    ids = _read_ids(args.ids)
    if not ids:
        raise UsageError("no accessions given")
    seen = set()
    targets = []
    for acc in ids:
        if acc in seen:
            continue
        seen.add(acc)
        try:
            targets.append(DatabankId(kind, acc))
        except ValueError as exc:
            _log(f"error: {exc}")
            return EXIT_DATA

    concurrency = _resolve(args.concurrency, "PROTFORGE_CONCURRENCY",
                           config, "concurrency", 4, int)
    rate = _resolve(args.rate, "PROTFORGE_RATE", config, "rate", 10.0, float)
    job = FetchJob(
        targets=targets,
        output_root=Path(args.out),
        formats={Databank.RCSB_PDB: args.format} if args.format else {},
        concurrency=concurrency,
        retry_policy=RetryPolicy(max_attempts=args.max_attempts,
                                 base_backoff=args.base_backoff),
        merge_fasta=args.merge_fasta,
        requests_per_second=rate,
    )
    try:
        outcome = run_batch(job, RequestsTransport(), Endpoints.from_env())
    except FetchError as exc:
        _log(f"fatal: {exc}")
        return EXIT_DATA

    _emit(
        {
            "targets": len(targets),
            "succeeded": len(outcome.succeeded),
            "failed": len(outcome.failed),
            "failed_ledger": str(job.output_root / "failed.txt"),
        },
        args.json,
    )
    return EXIT_OK if not outcome.failed else EXIT_PARTIAL


# ------------------------------------------------------------- tokenize


def _load_structure(path: Path):
    text = path.read_text(encoding="utf-8", errors="replace")
    if path.suffix.lower() in (".cif", ".mmcif"):
        return parse_mmcif(text)
    return parse_pdb(text)


def cmd_tokenize(args, config: dict) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise UsageError(f"--in must be a directory: {in_dir}")
    paths = sorted(p for p in in_dir.iterdir()
                   if p.suffix.lower() in (".pdb", ".ent", ".cif", ".mmcif"))
    if not paths:
        _log(f"error: no structure files in {in_dir}")
        return EXIT_DATA

    seed = _resolve(args.seed, "PROTFORGE_SEED", config, "seed", 0, int)

    prepared = []  # (name, chain, descriptor matrix)
    failures = []
    for path in paths:
        try:
            model = _load_structure(path)
            chain = extract_chain(model, args.chain)
            prepared.append((path.stem, chain, compute_descriptors(chain.residues)))
        except (StructParseError, KeyError, ValueError) as exc:
            failures.append((path.name, str(exc)))
            _log(f"skipping {path.name}: {exc}")

    if not prepared:
        _log("error: every structure file failed to parse")
        return EXIT_DATA

    if args.codebook == "train":
        codebook = train_codebook([d for _, _, d in prepared], k=args.k, seed=seed)
        codebook_path = Path(args.codebook_out)
        codebook.save(codebook_path)
        _log(f"trained codebook -> {codebook_path}")
    else:
        codebook = Codebook.load(args.codebook)

    rows = []
    for name, chain, descriptors in prepared:
        ss8 = assign_dssp8(chain.residues)
        rows.append(
            {
                "name": name,
                "ss8_seq": ss8,
                "ss3_seq": collapse_to_3(ss8),
                "foldseek_seq": "".join(
                    codebook.symbols[m] for m in codebook.assign(descriptors)),
            }
        )

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")

    if failures:
        ledger = out_path.with_suffix(out_path.suffix + ".failed.txt")
        ledger.write_text(
            "".join(f"{name}\t{err}\n" for name, err in failures), encoding="utf-8")

    _emit({"structures": len(rows), "failed": len(failures),
           "tokens": str(out_path)}, args.json)
    return EXIT_OK


# -------------------------------------------------------------- dataset


def _load_labels(path: str, names: list[str]):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(payload, list):
        if len(payload) != len(names):
            raise UsageError(
                f"label list length {len(payload)} != sequence count {len(names)}")
        return dict(zip(names, payload))
    if isinstance(payload, dict):
        return payload
    raise UsageError("labels file must hold a JSON list or object")


def _name_from_header(header: str) -> str:
    token = header.split()[0]
    parts = token.split("|")
    # UniProt convention: sp|ACCESSION|ENTRY_NAME
    return parts[1] if len(parts) >= 3 and parts[1] else token


def cmd_dataset_build(args, config: dict) -> int:
    fasta = parse_fasta(Path(args.fasta).read_text(encoding="utf-8"))
    names = [_name_from_header(header) for header, _ in fasta]
    labels = _load_labels(args.labels, names)

    token_rows = {}
    if args.tokens:
        for line in Path(args.tokens).read_text(encoding="utf-8").splitlines():
            if line.strip():
                row = json.loads(line)
                token_rows[row["name"]] = row

    examples = []
    problems = []
    for name, (_, seq) in zip(names, fasta):
        if name not in labels:
            problems.append(f"{name}: no label")
            continue
        ex = BenchmarkExample(aa_seq=seq.upper(), label=labels[name], name=name)
        tok = token_rows.get(name)
        if tok:
            ex.ss8_seq = tok.get("ss8_seq")
            ex.ss3_seq = tok.get("ss3_seq") or (
                collapse_to_3(ex.ss8_seq) if ex.ss8_seq else None)
            ex.foldseek_seq = tok.get("foldseek_seq")
            if tok.get("esm3_structure_seq") is not None:
                ex.esm3_structure_seq = tok["esm3_structure_seq"]
        for violation in validate_example(ex):
            problems.append(f"{name}: {violation}")
        examples.append(ex)

    if problems:
        for p in problems:
            _log(f"violation: {p}")
        return EXIT_DATA

    write_jsonl(args.out, examples)
    _emit({"examples": len(examples), "out": args.out}, args.json)
    return EXIT_OK


def cmd_dataset_split(args, config: dict) -> int:
    examples = read_jsonl(args.in_path)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    if len(ratios) != 3:
        raise UsageError("--ratios needs three comma-separated numbers")
    seed = _resolve(args.seed, "PROTFORGE_SEED", config, "seed", 0, int)
    try:
        split = ds.split_dataset(examples, ratios, seed=seed)
    except (ValueError, ds.DatasetBuildError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA
    ds.save_split(split, args.out_dir)
    _emit(
        {
            "train": len(split.train), "valid": len(split.valid),
            "test": len(split.test), "out_dir": args.out_dir,
        },
        args.json,
    )
    return EXIT_OK


def cmd_dataset_normalize(args, config: dict) -> int:
    train = read_jsonl(args.train)
    try:
        train_labels = [float(ex.label) for ex in train]
    except (TypeError, ValueError):
        _log("error: normalization requires numeric labels")
        return EXIT_DATA
    try:
        spec = ds.fit_normalizer(train_labels, args.method)
    except (ValueError, ds.DegenerateLabelsError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def transform(examples, out_name):
        values = ds.apply_normalizer(spec, [float(ex.label) for ex in examples])
        for ex, v in zip(examples, values):
            ex.label = v
        write_jsonl(out_dir / out_name, examples)

    transform(train, Path(args.train).name)
    for path in args.apply or []:
        transform(read_jsonl(path), Path(path).name)

    (out_dir / "provenance.json").write_text(
        json.dumps({"normalization": spec.to_dict()}, indent=2), encoding="utf-8")
    _emit({"method": args.method, "out_dir": str(out_dir),
           "params": spec.params}, args.json)
    return EXIT_OK


def cmd_dataset_validate(args, config: dict) -> int:
    split = ds.load_split(args.train, args.valid, args.test)
    violations, warnings = ds.validate_dataset(split)
    for w in warnings:
        _log(f"warning: {w}")
    for v in violations:
        _log(f"violation: {v}")
    _emit(
        {
            "train": len(split.train), "valid": len(split.valid),
            "test": len(split.test), "violations": len(violations),
            "warnings": len(warnings),
        },
        args.json,
    )
    return EXIT_OK if not violations else EXIT_DATA


# ----------------------------------------------------------------- pack


def cmd_pack(args, config: dict) -> int:
    if bool(args.lengths) == bool(args.data):
        raise UsageError("pass exactly one of --lengths / --data")
    if args.lengths:
        lengths = json.loads(Path(args.lengths).read_text(encoding="utf-8"))
        if not isinstance(lengths, list):
            raise UsageError("--lengths file must hold a JSON list")
    else:
        lengths = [len(ex.aa_seq) for ex in read_jsonl(args.data)]

    budget = _resolve(args.budget, "PROTFORGE_BUDGET", config, "budget",
                      batchpack.DEFAULT_BUDGET, int)
    try:
        plan = batchpack.pack_batches(lengths, budget=budget, mode=args.mode,
                                      max_len=args.max_len)
    except ValueError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA

    Path(args.out).write_text(plan.to_json(), encoding="utf-8")
    stats = batchpack.effective_batch_stats(plan, lengths)
    stats.update({"oversized": len(plan.oversized), "out": args.out})
    _emit(stats, args.json)
    return EXIT_OK


# ----------------------------------------------------------------- eval


def _pairs_by_name(gold_rows, pred_rows, field):
    pred_by_name = {}
    for row in pred_rows:
        if "name" not in row:
            return None
        pred_by_name[row["name"]] = row
    gold, pred = [], []
    for ex in gold_rows:
        if ex.name is None or ex.name not in pred_by_name:
            raise UsageError(
                f"prediction missing for {ex.name!r} (match is by name)")
        gold.append(ex.label)
        pred.append(pred_by_name[ex.name].get(field))
    return gold, pred


def _aligned(gold_rows, pred_rows, field):
    by_name = _pairs_by_name(gold_rows, pred_rows, field)
    if by_name is not None:
        return by_name
    if len(gold_rows) != len(pred_rows):
        raise UsageError("gold and prediction counts differ (order-based match)")
    return ([ex.label for ex in gold_rows],
            [row.get(field) for row in pred_rows])


def cmd_eval(args, config: dict) -> int:
    gold_rows = read_jsonl(args.gold)
    pred_rows = [json.loads(line) for line
                 in Path(args.pred).read_text(encoding="utf-8").splitlines()
                 if line.strip()]

    try:
        if args.task == "regression":
            gold, pred = _aligned(gold_rows, pred_rows, "pred")
            report = mx.regression_metrics([float(g) for g in gold],
                                           [float(p) for p in pred])
        elif args.task == "cls":
            gold, pred = _aligned(gold_rows, pred_rows, "pred")
            scores = None
            score_rows = _aligned(gold_rows, pred_rows, "scores")[1]
            if all(s is not None for s in score_rows):
                scores = np.asarray(score_rows, dtype=np.float64)
            report = mx.classification_metrics(
                [int(g) for g in gold], [int(p) for p in pred], scores)
        else:  # multilabel
            gold, scores = _aligned(gold_rows, pred_rows, "scores")
            if any(s is None for s in scores):
                raise UsageError("multilabel eval needs per-label scores")
            score_mat = np.asarray(scores, dtype=np.float64)
            gold_mat = _gold_matrix(gold, score_mat.shape[1])
            report = mx.multilabel_metrics(gold_mat, score_mat)
    except (ValueError, TypeError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA

    payload = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    print(payload)
    return EXIT_OK


def _gold_matrix(labels, width: int) -> np.ndarray:
    """Multi-label gold: same-width 0/1 lists are taken as multi-hot rows,
    anything else as sets of positive label indices."""
    rows = np.zeros((len(labels), width), dtype=np.float64)
    multihot = all(
        isinstance(lab, list) and len(lab) == width
        and all(v in (0, 1) for v in lab)
        for lab in labels
    )
    for r, lab in enumerate(labels):
        if not isinstance(lab, list):
            raise ValueError("multilabel gold labels must be lists")
        if multihot:
            rows[r] = lab
        else:
            for idx in lab:
                if not 0 <= int(idx) < width:
                    raise ValueError(f"label index {idx} outside scores width {width}")
                rows[r, int(idx)] = 1.0
    return rows


# ----------------------------------------------------------------- main


def _add_common(parser) -> None:
    # SUPPRESS keeps a subcommand-level absence from clobbering a value
    # given before the subcommand
    parser.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON config file (lowest precedence)")
    parser.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print a JSON summary to stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="protforge", description=__doc__)
    parser.add_argument("--config", help="JSON config file (lowest precedence)")
    parser.add_argument("--json", action="store_true",
                        help="print a JSON summary to stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download from a databank")
    p.add_argument("--db", required=True,
                   choices=[d.value for d in Databank])
    p.add_argument("--ids", required=True,
                   help="comma-separated accessions, or a text/JSON file")
    p.add_argument("--out", required=True, help="output root directory")
    p.add_argument("--format", choices=["cif", "pdb", "xml"],
                   help="RCSB file format (default cif)")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--rate", type=float, help="requests per second per host")
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--base-backoff", type=float, default=0.5)
    p.add_argument("--merge-fasta", action="store_true",
                   help="concatenate UniProt FASTA outputs into merged.fasta")
    _add_common(p)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("tokenize", help="serialize structures to token rows")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--codebook", required=True,
                   help="codebook JSON path, or 'train'")
    p.add_argument("--codebook-out", default="codebook.json")
    p.add_argument("--out", required=True)
    p.add_argument("--chain", help="chain id (default: first chain)")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("dataset", help="build/split/normalize/validate datasets")
    dsub = p.add_subparsers(dest="dataset_command", required=True)

    b = dsub.add_parser("build")
    b.add_argument("--fasta", required=True)
    b.add_argument("--labels", required=True,
                   help="JSON object name->label, or list in FASTA order")
    b.add_argument("--tokens", help="tokens JSONL keyed by name")
    b.add_argument("--out", required=True)
    _add_common(b)
    b.set_defaults(func=cmd_dataset_build)

    s = dsub.add_parser("split")
    s.add_argument("--in", dest="in_path", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--ratios", default="0.8,0.1,0.1")
    s.add_argument("--seed", type=int)
    _add_common(s)
    s.set_defaults(func=cmd_dataset_split)

    n = dsub.add_parser("normalize")
    n.add_argument("--train", required=True)
    n.add_argument("--method", required=True, choices=ds.NORMALIZATION_METHODS)
    n.add_argument("--apply", nargs="*", help="additional JSONL files")
    n.add_argument("--out-dir", required=True)
    _add_common(n)
    n.set_defaults(func=cmd_dataset_normalize)

    v = dsub.add_parser("validate")
    v.add_argument("--train", required=True)
    v.add_argument("--valid", required=True)
    v.add_argument("--test", required=True)
    _add_common(v)
    v.set_defaults(func=cmd_dataset_validate)

    p = sub.add_parser("pack", help="token-budget batch packing")
    p.add_argument("--lengths", help="JSON list of sequence lengths")
    p.add_argument("--data", help="dataset JSONL (lengths from aa_seq)")
    p.add_argument("--budget", type=int)
    p.add_argument("--mode", choices=["preserve", "truncate"], default="preserve")
    p.add_argument("--max-len", type=int)
    p.add_argument("--out", required=True, help="plan JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--task", required=True,
                   choices=["cls", "multilabel", "regression"])
    p.add_argument("--gold", required=True, help="gold JSONL (dataset schema)")
    p.add_argument("--pred", required=True,
                   help="predictions JSONL: {name, pred | scores}")
    p.add_argument("--out", help="write the metric report JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, StructParseError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
