"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report. Tolerances are pinned here, not configurable.

The secondary-structure reference set consists of the five committed
geometry-built fixtures (ideal helix included). A real experimental
structure can be added by dropping ``1crn.pdb`` into tests/data/external/;
it then joins the scored set automatically.
"""

import json
import shutil
import time
from collections import Counter
from pathlib import Path

import numpy as np

import oracle_metrics as om
from geometry import core_residues, random_rotation, transform_residues
from mockserver import MockDatabankServer, uniprot_fasta
from oracle_dssp import reference_collapse, reference_dssp
from protforge.batchpack import effective_batch_stats, pack_batches
from protforge.core import (
    BenchmarkExample,
    Databank,
    DatabankId,
    examples_from_jsonl,
    examples_to_jsonl,
    validate_example,
    write_jsonl,
)
from protforge.dataset import (
    DegenerateLabelsError,
    NORMALIZATION_METHODS,
    apply_normalizer,
    fit_normalizer,
    load_split,
    validate_dataset,
)
from protforge.fetch import Endpoints, FetchJob, RequestsTransport, RetryPolicy, run_batch
from protforge.metrics import classification_metrics, f1_max, regression_metrics, spearman
from protforge.serialize import (
    assign_dssp8,
    collapse_to_3,
    compute_descriptors,
    tokenize_structure,
    train_codebook,
)
from protforge.structparse import extract_chain, parse_pdb

DATA = Path(__file__).parent / "data"
REFERENCE_SET = ["helix18.pdb", "hairpin.pdb", "meander.pdb", "mixed.pdb", "coil.pdb"]
EXTERNAL = DATA / "external"


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"{status}  criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"


def reference_chains():
    names = list(REFERENCE_SET)
    if (EXTERNAL / "1crn.pdb").exists():
        names.append("external/1crn.pdb")
    return {n: extract_chain(parse_pdb((DATA / n).read_text())) for n in names}


class TestCriterion1SchemaFidelity:
    def test_schema_round_trip(self):
        start = time.perf_counter()
        examples = [
            BenchmarkExample(aa_seq="MASG", label=0),
            BenchmarkExample(aa_seq="MASG", label=0, name="P05798",
                             ss3_seq="CHHH", ss8_seq="CHHH",
                             foldseek_seq="CVFL", detail="auxiliary"),
            BenchmarkExample(aa_seq="MASG", label=[0, 1],
                             esm3_structure_seq=[85, 3876, 1, 2]),
            BenchmarkExample(aa_seq="KLAW", label=0.25,
                             extra={"custom": {"nested": [1, 2]}}),
        ]
        text = examples_to_jsonl(examples)
        field_names = set()
        for line in text.splitlines():
            field_names |= set(json.loads(line))
        assert field_names <= {
            "aa_seq", "label", "name", "ss3_seq", "ss8_seq",
            "foldseek_seq", "esm3_structure_seq", "detail", "custom"}

        back = examples_from_jsonl(text)
        lossless = back == examples
        fragments_valid = all(validate_example(ex) == [] for ex in examples)
        again = examples_to_jsonl(back) == text
        elapsed = time.perf_counter() - start
        report(1, lossless and fragments_valid and again and elapsed < 1.0,
               f"lossless round-trip, fragments validate, {elapsed * 1000:.0f} ms")


class TestCriterion2FetchSemantics:
    def test_fifty_targets_five_failures(self, tmp_path):
        start = time.perf_counter()
        server = MockDatabankServer()
        try:
            mini_pdb = (DATA / "mini_helix.pdb").read_bytes()
            targets = []
            # 20 uniprot (2 scripted failures), 15 alphafold (2 failures),
            # 10 rcsb (1 failure), 5 interpro: 50 targets, 5 permanent 404s
            for i in range(20):
                acc = f"P2{i:04d}"
                targets.append(DatabankId(Databank.UNIPROT, acc))
                if i >= 2:
                    server.add_uniprot(acc)
            for i in range(15):
                acc = f"Q2{i:04d}"
                targets.append(DatabankId(Databank.ALPHAFOLD_DB, acc))
                if i >= 2:
                    server.add_alphafold(acc, mini_pdb)
            for i in range(10):
                acc = f"2A{i:02d}"
                targets.append(DatabankId(Databank.RCSB_PDB, acc))
                if i >= 1:
                    server.add_rcsb(acc, "pdb", mini_pdb)
            for i in range(5):
                acc = f"IPR1{i:05d}"
                targets.append(DatabankId(Databank.INTERPRO, acc))
                server.add_interpro(acc, ["P00001", "P00002"])

            endpoints = Endpoints(**{
                "uniprot": server.base_url, "rcsb_files": server.base_url,
                "rcsb_meta": server.base_url, "alphafold": server.base_url,
                "interpro": server.base_url})
            job = FetchJob(
                targets=targets, output_root=tmp_path,
                formats={Databank.RCSB_PDB: "pdb"}, concurrency=8,
                retry_policy=RetryPolicy(max_attempts=3, base_backoff=0.02),
                requests_per_second=10_000.0)
            outcome = run_batch(job, RequestsTransport(), endpoints)

            n_ok, n_bad = len(outcome.succeeded), len(outcome.failed)
            ledger = (tmp_path / "failed.txt").read_text().splitlines()
            peak = server.high_water

            def snapshot():
                # artifact files only; failed.txt is the append-mode ledger
                return sorted(
                    (str(p.relative_to(tmp_path)), p.stat().st_size)
                    for p in tmp_path.rglob("*")
                    if p.is_file() and p.name != "failed.txt")

            files_before = snapshot()
            count_before = server.request_count()
            outcome2 = run_batch(job, RequestsTransport(), endpoints)
            rerun_requests = server.request_count() - count_before
            files_after = snapshot()
            ledger_after = (tmp_path / "failed.txt").read_text().splitlines()

            elapsed = time.perf_counter() - start
            ok = (
                n_ok == 45 and n_bad == 5 and len(ledger) == 5
                and all(line.endswith("\tnot_found") for line in ledger)
                and peak <= 8
                and len(outcome2.succeeded) == 45
                # zero files downloaded on rerun: only the 5 permanent 404s
                # are re-attempted, and each appends one more ledger line
                and files_before == files_after
                and rerun_requests == 5
                and len(ledger_after) == 10
                and elapsed < 30.0
            )
            report(2, ok,
                   f"45 succeeded + 5 ledger lines, peak in-flight {peak} <= 8, "
                   f"rerun made {rerun_requests} requests (failures only), "
                   f"{elapsed:.1f} s")
        finally:
            server.close()


class TestCriterion3DsspOracle:
    def test_reference_agreement(self, corpus_chains):
        chains = reference_chains()
        total = agree8 = agree3 = 0
        for name, chain in chains.items():
            prod = assign_dssp8(chain.residues)
            ref = reference_dssp(chain.residues)
            assert len(prod) == len(ref) == len(chain.residues)
            total += len(prod)
            agree8 += sum(a == b for a, b in zip(prod, ref))
            agree3 += sum(a == b for a, b in
                          zip(collapse_to_3(prod), reference_collapse(ref)))
        pct8 = agree8 / total
        pct3 = agree3 / total

        lengths_ok = all(
            len(assign_dssp8(c.residues)) == len(c.residues)
            for c in corpus_chains.values())

        report(3, pct8 >= 0.95 and pct3 >= 0.97 and lengths_ok,
               f"{len(chains)}-structure set: 8-class {pct8:.1%}, "
               f"3-class {pct3:.1%}, lengths exact on all corpus files")


class TestCriterion4RigidMotionInvariance:
    def test_twenty_perturbations_per_fixture(self):
        chains = {n: extract_chain(parse_pdb((DATA / n).read_text()))
                  for n in REFERENCE_SET}
        codebook = train_codebook(
            [compute_descriptors(c.residues) for c in chains.values()],
            k=20, seed=0)
        rng = np.random.default_rng(2024)
        checked = 0
        for name, chain in chains.items():
            atoms = [dict(r.atoms) for r in chain.residues]
            base = (assign_dssp8(chain.residues),
                    collapse_to_3(assign_dssp8(chain.residues)),
                    tokenize_structure(chain.residues, codebook))
            for _ in range(20):
                moved = core_residues(transform_residues(
                    atoms, random_rotation(rng), rng.normal(scale=50.0, size=3)))
                ss8 = assign_dssp8(moved)
                got = (ss8, collapse_to_3(ss8), tokenize_structure(moved, codebook))
                assert got == base, f"{name}: tokens changed under rigid motion"
                checked += 1
        report(4, checked == 20 * len(REFERENCE_SET),
               f"{checked} perturbations, byte-identical ss8/ss3/alphabet")


class TestCriterion5Quantization:
    def test_exhaustive_scan_and_determinism(self):
        rng = np.random.default_rng(99)
        train = rng.normal(size=(500, 10))
        cb1 = train_codebook([train], k=20, seed=7)
        cb2 = train_codebook([train], k=20, seed=7)
        bit_deterministic = (
            np.array_equal(cb1.centroids, cb2.centroids)
            and cb1.centroids.tobytes() == cb2.centroids.tobytes()
            and cb1.symbols == cb2.symbols)

        probes = rng.normal(size=(1000, 10))
        assigned = cb1.assign(probes)
        exact = 0
        for row, got in zip(probes, assigned):
            dists = [float(((row - c) ** 2).sum()) for c in cb1.centroids]
            best = min(range(len(dists)), key=lambda m: (dists[m], m))
            exact += best == got
        report(5, exact == 1000 and bit_deterministic,
               f"exhaustive-scan match {exact}/1000, "
               f"k-means bit-deterministic across two runs")


class TestCriterion6Packing:
    def test_ten_thousand_instances(self):
        import random

        start = time.perf_counter()
        rng = random.Random(1234)
        for _ in range(10_000):
            n = rng.randint(0, 30)
            lengths = [rng.randint(1, 3000) for _ in range(n)]
            plan = pack_batches(lengths, budget=12_000)
            flat = [i for batch in plan.batches for i in batch]
            assert Counter(flat) == Counter(range(n))
            for b, batch in enumerate(plan.batches):
                total = sum(lengths[i] for i in batch)
                if total > 12_000:
                    assert len(batch) == 1 and b in plan.oversized
        # the stated 12,000-token contract on a realistic instance
        lengths = [rng.randint(50, 2000) for _ in range(1000)]
        plan = pack_batches(lengths, budget=12_000)
        stats = effective_batch_stats(plan, lengths)
        elapsed = time.perf_counter() - start
        report(6, elapsed < 10.0,
               f"10,000 instances, coverage exact, budget respected, "
               f"{elapsed:.1f} s (mean {stats['mean_tokens_per_batch']:.0f} "
               f"tokens/batch)")


class TestCriterion7MetricsOracle:
    def test_five_hundred_instances(self):
        rng = np.random.default_rng(31415)
        tol = 1e-12
        checked = 0
        for _ in range(500):
            n = int(rng.integers(2, 201))
            n_classes = int(rng.integers(2, 5))
            gold = rng.integers(0, n_classes, size=n).tolist()
            pred = rng.integers(0, n_classes, size=n).tolist()
            scores = rng.random((n, n_classes))
            rep = classification_metrics(gold, pred, scores)
            assert abs(rep.values["accuracy"] - om.naive_accuracy(gold, pred)) < tol
            p, r, f = om.naive_macro_prf(gold, pred, n_classes)
            assert abs(rep.values["precision"] - p) < tol
            assert abs(rep.values["recall"] - r) < tol
            assert abs(rep.values["f1"] - f) < tol
            assert abs(rep.values["mcc"] - om.naive_mcc(gold, pred, n_classes)) < tol
            auc = om.naive_macro_auroc(gold, scores.tolist())
            if auc is None:
                assert "auc" not in rep.values
            else:
                assert abs(rep.values["auc"] - auc) < tol

            g = np.round(rng.normal(size=n), 1).tolist()
            q = np.round(rng.normal(size=n), 1).tolist()
            rep = regression_metrics(g, q)
            assert abs(rep.values["mse"] - om.naive_mse(g, q)) < tol
            rho = om.naive_spearman(g, q)
            if rho is None:
                assert "spearman_corr" not in rep.values
            else:
                assert abs(rep.values["spearman_corr"] - rho) < tol

            gold_mat = (rng.random((12, 4)) < 0.35).astype(float)
            score_mat = np.round(rng.random((12, 4)), 2)
            best = f1_max(gold_mat, score_mat)
            assert abs(best - om.naive_f1_max(
                gold_mat.tolist(), score_mat.tolist())) < tol
            for t in rng.random(5):
                assert best >= om.naive_micro_f1_at(
                    gold_mat.tolist(), score_mat.tolist(), float(t)) - tol
            checked += 1
        report(7, checked == 500,
               "500 instances: all nine metrics within 1e-12 of brute force, "
               "f1_max dominates sampled fixed thresholds")


class TestCriterion8Normalization:
    def test_monotone_exact_and_degenerate_errors(self):
        rng = np.random.default_rng(8)
        monotone_ok = True
        for trial in range(20):
            train = rng.normal(loc=rng.uniform(-5, 5),
                               scale=rng.uniform(0.5, 4.0),
                               size=int(rng.integers(5, 120))).tolist()
            for method in NORMALIZATION_METHODS:
                spec = fit_normalizer(train, method)
                out = apply_normalizer(spec, train)
                if any(np.isnan(v) for v in out) or spearman(train, out) != 1.0:
                    monotone_ok = False

        train = rng.normal(size=300).tolist()
        z = apply_normalizer(fit_normalizer(train, "zscore"), train)
        z = np.asarray(z)
        zscore_ok = abs(z.mean()) <= 1e-9 and abs(z.std() - 1.0) <= 1e-9

        degenerate_ok = True
        for method in ("minmax", "zscore", "robust", "quantile"):
            try:
                fit_normalizer([4.0, 4.0, 4.0, 4.0], method)
                degenerate_ok = False
            except DegenerateLabelsError as exc:
                degenerate_ok &= method in str(exc)

        report(8, monotone_ok and zscore_ok and degenerate_ok,
               "all five methods Spearman(raw, transformed) == 1.0 exactly, "
               "zscore mean/std within 1e-9, degenerate inputs raise named "
               "errors (no NaN)")


class TestCriterion9DatasetCounts:
    def test_esol_shaped_presplit(self, tmp_path):
        rng = np.random.default_rng(70)

        def rows(count, offset):
            return [BenchmarkExample(
                aa_seq="MASGKLWQ", label=float(rng.normal()),
                name=f"N{offset + i:06d}") for i in range(count)]

        write_jsonl(tmp_path / "train.jsonl", rows(2481, 0))
        write_jsonl(tmp_path / "valid.jsonl", rows(310, 10_000))
        write_jsonl(tmp_path / "test.jsonl", rows(310, 20_000))

        split = load_split(tmp_path / "train.jsonl", tmp_path / "valid.jsonl",
                           tmp_path / "test.jsonl")
        violations, _ = validate_dataset(split)
        report(9, split.counts == (2481, 310, 310) and violations == [],
               f"counts {split.counts}, {len(violations)} violations")


class TestCriterion10EndToEnd:
    def test_pipeline_on_ten_proteins(self, tmp_path):
        from protforge.cli import main

        start = time.perf_counter()
        server = MockDatabankServer()
        try:
            base_fixtures = ["helix18.pdb", "hairpin.pdb", "meander.pdb",
                             "mixed.pdb", "coil.pdb"]
            rng = np.random.default_rng(5150)
            accs = []
            labels = {}
            for i in range(10):
                acc = f"P6{i:04d}"
                accs.append(acc)
                fixture = base_fixtures[i % len(base_fixtures)]
                chain = extract_chain(parse_pdb((DATA / fixture).read_text()))
                # serve a rotated copy so every entry is distinct geometry
                from geometry import to_pdb

                atoms = [dict(r.atoms) for r in chain.residues]
                moved = transform_residues(
                    atoms, random_rotation(rng), rng.normal(scale=30, size=3))
                server.add_alphafold(acc, to_pdb(moved).encode())
                server.routes[f"/{acc}.fasta"] = (
                    200, uniprot_fasta(acc, seq=chain.aa_seq))
                labels[acc] = float(rng.normal())

            import os

            for key, value in {**server.env()}.items():
                os.environ[key] = value
            try:
                root = tmp_path / "fetched"
                codes = []
                codes.append(main(["fetch", "--db", "uniprot", "--ids",
                                   ",".join(accs), "--out", str(root),
                                   "--merge-fasta"]))
                codes.append(main(["fetch", "--db", "alphafold", "--ids",
                                   ",".join(accs), "--out", str(root)]))

                flat = tmp_path / "structs"
                flat.mkdir()
                for pdb in (root / "alphafold").rglob("*.pdb"):
                    shutil.copy(pdb, flat / pdb.name)

                tokens = tmp_path / "tokens.jsonl"
                codes.append(main(["tokenize", "--in", str(flat),
                                   "--codebook", "train",
                                   "--codebook-out", str(tmp_path / "cb.json"),
                                   "--out", str(tokens), "--seed", "0"]))

                labels_path = tmp_path / "labels.json"
                labels_path.write_text(json.dumps(labels))
                data = tmp_path / "data.jsonl"
                codes.append(main(["dataset", "build",
                                   "--fasta", str(root / "merged.fasta"),
                                   "--labels", str(labels_path),
                                   "--tokens", str(tokens),
                                   "--out", str(data)]))

                split_dir = tmp_path / "split"
                codes.append(main(["dataset", "split", "--in", str(data),
                                   "--out-dir", str(split_dir), "--seed", "1"]))

                plan = tmp_path / "plan.json"
                codes.append(main(["pack", "--data", str(data),
                                   "--budget", "12000", "--out", str(plan)]))

                pred = tmp_path / "pred.jsonl"
                pred.write_text("\n".join(
                    json.dumps({"name": acc, "pred": labels[acc]})
                    for acc in accs) + "\n")
                report_path = tmp_path / "report.json"
                codes.append(main(["eval", "--task", "regression",
                                   "--gold", str(data), "--pred", str(pred),
                                   "--out", str(report_path)]))
            finally:
                for key in server.env():
                    os.environ.pop(key, None)

            elapsed = time.perf_counter() - start
            metrics_out = json.loads(report_path.read_text())
            rows = [json.loads(l) for l in data.read_text().splitlines()]
            tokens_attached = all(
                len(r["ss8_seq"]) == len(r["aa_seq"])
                and len(r["foldseek_seq"]) == len(r["aa_seq"]) for r in rows)
            ok = (
                codes == [0] * 7
                and len(rows) == 10
                and tokens_attached
                and metrics_out["spearman_corr"] == 1.0
                and metrics_out["mse"] == 0.0
                and elapsed < 60.0
            )
            report(10, ok,
                   f"fetch -> parse -> tokenize -> build -> pack -> eval, "
                   f"exit codes {codes}, {elapsed:.1f} s")
        finally:
            server.close()
