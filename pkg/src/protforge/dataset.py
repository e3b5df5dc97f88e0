"""Benchmark dataset construction, splitting, normalization, validation.

Datasets are lists of :class:`~protforge.core.BenchmarkExample` stored as
JSON-lines. ``provenance.json`` written next to a split records counts,
the shuffle seed and any fitted normalization parameters.

Label normalization supports minmax, zscore, robust, log and quantile.
All five transforms are strictly monotone on their fitted domain, so the
Spearman correlation between raw and transformed train labels is exactly 1.
Parameters are fitted on train labels only; out-of-range values at apply
time extrapolate (minmax and quantile clamp to [0, 1]).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    BenchmarkExample,
    ProteinRecord,
    TokenizedStructure,
    read_jsonl,
    validate_example,
    write_jsonl,
)

__all__ = [
    "DatasetBuildError",
    "MixedLabelTypesError",
    "DegenerateLabelsError",
    "LogDomainError",
    "DatasetSplit",
    "NormalizationSpec",
    "NORMALIZATION_METHODS",
    "build_dataset",
    "split_dataset",
    "fit_normalizer",
    "apply_normalizer",
    "load_split",
    "save_split",
    "validate_dataset",
]

NORMALIZATION_METHODS = ("minmax", "zscore", "robust", "log", "quantile")


class DatasetBuildError(ValueError):
    pass


class MixedLabelTypesError(DatasetBuildError):
    pass


class DegenerateLabelsError(ValueError):
    def __init__(self, method, reason):
        self.method = method
        super().__init__(f"{method}: {reason}")


class LogDomainError(DegenerateLabelsError):
    def __init__(self, reason):
        super().__init__("log", reason)


def _label_kind(label) -> str:
    if isinstance(label, bool):
        raise MixedLabelTypesError("boolean labels are not supported")
    if isinstance(label, int):
        return "int"
    if isinstance(label, float):
        return "float"
    if isinstance(label, list):
        return "list"
    raise MixedLabelTypesError(f"unsupported label type {type(label).__name__}")


def build_dataset(
    records: Sequence[tuple[ProteinRecord, object]],
    tokens: Optional[Sequence[Optional[TokenizedStructure]]] = None,
) -> list[BenchmarkExample]:
    """Assemble one example per (record, label) pair.

    Token fields are attached when provided (ss3 derived from ss8 when only
    the latter is present). Raises MixedLabelTypesError on heterogeneous
    labels and DatasetBuildError naming the record on any schema violation.
    """
    if tokens is not None and len(tokens) != len(records):
        raise DatasetBuildError("tokens must align one-to-one with records")

    kinds = {_label_kind(label) for _, label in records}
    if len(kinds) > 1:
        raise MixedLabelTypesError(f"mixed label types in dataset: {sorted(kinds)}")

    examples = []
    for pos, (record, label) in enumerate(records):
        tok = tokens[pos] if tokens is not None else None
        ex = BenchmarkExample(
            aa_seq=record.aa_seq,
            label=label,
            name=record.id.accession,
        )
        if tok is not None:
            ex.ss8_seq = tok.ss8_seq
            ex.ss3_seq = tok.ss3_seq  # the derived class collapse
            ex.foldseek_seq = tok.alphabet_seq
            if tok.imported_int_seq is not None:
                ex.esm3_structure_seq = list(tok.imported_int_seq)
        violations = validate_example(ex)
        if violations:
            raise DatasetBuildError(
                f"record {record.id.accession!r}: " + "; ".join(violations))
        examples.append(ex)
    return examples


@dataclass
class DatasetSplit:
    """Train/valid/test partitions plus provenance (counts, seed, source)."""

    train: list[BenchmarkExample]
    valid: list[BenchmarkExample]
    test: list[BenchmarkExample]
    provenance: dict = field(default_factory=dict)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.valid), len(self.test))


def split_dataset(examples: Sequence[BenchmarkExample],
                  ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
                  seed: int = 0) -> DatasetSplit:
    """Deterministic seeded shuffle into train/valid/test.

    Ratios must be positive and sum to 1 (within 1e-9). Valid and test get
    floor(n * ratio) examples each; the remainder goes to train.
    """
    if not examples:
        raise DatasetBuildError("cannot split an empty dataset")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")

    order = list(range(len(examples)))
    random.Random(seed).shuffle(order)
    n = len(examples)
    n_valid = math.floor(n * ratios[1])
    n_test = math.floor(n * ratios[2])
    n_train = n - n_valid - n_test

    shuffled = [examples[i] for i in order]
    return DatasetSplit(
        train=shuffled[:n_train],
        valid=shuffled[n_train:n_train + n_valid],
        test=shuffled[n_train + n_valid:],
        provenance={
            "counts": {"train": n_train, "valid": n_valid, "test": n_test},
            "seed": seed,
            "ratios": list(ratios),
        },
    )


def validate_dataset(split: DatasetSplit) -> tuple[list[str], list[str]]:
    """Validate every example and cross-split name disjointness.

    Returns (violations, warnings); duplicate names inside one partition are
    warnings, duplicates across partitions are violations.
    """
    violations: list[str] = []
    warnings: list[str] = []
    names: dict[str, str] = {}
    label_kinds = set()

    for part in ("train", "valid", "test"):
        seen_here = set()
        for pos, ex in enumerate(getattr(split, part)):
            for v in validate_example(ex):
                violations.append(f"{part}[{pos}]: {v}")
            if ex.label is not None:
                try:
                    label_kinds.add(_label_kind(ex.label))
                except MixedLabelTypesError as exc:
                    violations.append(f"{part}[{pos}]: {exc}")
            if ex.name is None:
                continue
            if ex.name in seen_here:
                warnings.append(f"{part}: duplicate name {ex.name!r}")
            elif ex.name in names and names[ex.name] != part:
                violations.append(
                    f"name {ex.name!r} appears in both {names[ex.name]} and {part}")
            seen_here.add(ex.name)
            names.setdefault(ex.name, part)

    if len(label_kinds) > 1:
        violations.append(f"label types differ across examples: {sorted(label_kinds)}")
    return violations, warnings


def load_split(train_path, valid_path, test_path) -> DatasetSplit:
    split = DatasetSplit(
        train=read_jsonl(train_path),
        valid=read_jsonl(valid_path),
        test=read_jsonl(test_path),
    )
    split.provenance = {
        "counts": {
            "train": len(split.train),
            "valid": len(split.valid),
            "test": len(split.test),
        },
        "source": {
            "train": str(train_path),
            "valid": str(valid_path),
            "test": str(test_path),
        },
    }
    return split


def save_split(split: DatasetSplit, out_dir: Union[str, Path]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "train.jsonl", split.train)
    write_jsonl(out / "valid.jsonl", split.valid)
    write_jsonl(out / "test.jsonl", split.test)
    (out / "provenance.json").write_text(
        json.dumps(split.provenance, indent=2), encoding="utf-8")


@dataclass(frozen=True)
class NormalizationSpec:
    """A fitted label transform: method name plus its train-set parameters."""

    method: str
    params: dict

    def to_dict(self) -> dict:
        return {"method": self.method, "params": self.params}

    @classmethod
    def from_dict(cls, payload) -> "NormalizationSpec":
        return cls(method=payload["method"], params=dict(payload["params"]))


def fit_normalizer(train_labels: Sequence[float], method: str) -> NormalizationSpec:
    """Fit transform parameters on train labels only.

    Degenerate inputs (max == min, std == 0, IQR == 0, fewer than two
    distinct quantiles) raise DegenerateLabelsError naming the method.
    """
    if method not in NORMALIZATION_METHODS:
        raise ValueError(f"unknown normalization method {method!r}")
    values = np.asarray(train_labels, dtype=np.float64)
    if values.ndim != 1 or len(values) < 2:
        raise ValueError("need at least 2 train labels to fit")
    if not np.isfinite(values).all():
        raise ValueError("train labels must be finite")

    if method == "minmax":
        lo, hi = float(values.min()), float(values.max())
        if hi == lo:
            raise DegenerateLabelsError("minmax", "max equals min")
        return NormalizationSpec("minmax", {"min": lo, "max": hi})

    if method == "zscore":
        mean, std = float(values.mean()), float(values.std())
        if std == 0.0:
            raise DegenerateLabelsError("zscore", "standard deviation is zero")
        return NormalizationSpec("zscore", {"mean": mean, "std": std})

    if method == "robust":
        median = float(np.median(values))
        q25, q75 = np.percentile(values, [25.0, 75.0])
        iqr = float(q75 - q25)
        if iqr == 0.0:
            raise DegenerateLabelsError("robust", "interquartile range is zero")
        return NormalizationSpec("robust", {"median": median, "iqr": iqr})

    if method == "log":
        lo = float(values.min())
        shift = 0.0 if lo > 0 else 1.0 - lo
        if lo + shift <= 0:
            raise LogDomainError(f"min label {lo} not positive even after shift")
        return NormalizationSpec("log", {"shift": shift})

    # quantile: unique train values with their mean normalized ranks
    order = np.sort(values)
    uniq, start = np.unique(order, return_index=True)
    if len(uniq) < 2:
        raise DegenerateLabelsError("quantile", "fewer than two distinct values")
    end = np.append(start[1:], len(order)) - 1
    positions = ((start + end) / 2.0) / (len(order) - 1)
    return NormalizationSpec(
        "quantile", {"values": uniq.tolist(), "positions": positions.tolist()})


def apply_normalizer(spec: NormalizationSpec,
                     labels: Sequence[float]) -> list[float]:
    """Transform labels with fitted parameters; never raises on unseen values.

    minmax and quantile clamp outputs to [0, 1]; zscore, robust and log
    extrapolate beyond the fitted range.
    """
    values = np.asarray(labels, dtype=np.float64)
    p = spec.params
    if spec.method == "minmax":
        out = (values - p["min"]) / (p["max"] - p["min"])
        out = np.clip(out, 0.0, 1.0)
    elif spec.method == "zscore":
        out = (values - p["mean"]) / p["std"]
    elif spec.method == "robust":
        out = (values - p["median"]) / p["iqr"]
    elif spec.method == "log":
        # unseen values at/below the domain edge saturate instead of aborting
        out = np.log(np.maximum(values + p["shift"], 1e-12))
    elif spec.method == "quantile":
        out = np.interp(values, p["values"], p["positions"])
        out = np.clip(out, 0.0, 1.0)
    else:
        raise ValueError(f"unknown normalization method {spec.method!r}")
    return [float(v) for v in out]
