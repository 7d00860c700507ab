"""Acceptance suite: one test per release criterion, each at its pinned tolerance.

Run with `pytest tests/test_acceptance.py -s` to see one PASS/FAIL line per
criterion.
"""
from __future__ import annotations

import difflib
import itertools
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from vlscore import (
    EmbeddingStore,
    PerturbationKind,
    PlantedTriplet,
    StudyRecord,
    SynthSpec,
    TriangleScoreConfig,
    calibrate_constant,
    default_lexicon,
    generate_suite,
    load_manifest,
    min_enclosing_sphere,
    min_enclosing_sphere_radius,
    split_sentences,
    synth_embeddings,
    tau_b_from_values,
    triangle_area,
    vlscore,
    vlscore_from_area,
    write_embeddings,
    write_manifest,
)
from vlscore.cli import main
from vlscore.pipeline import RunConfig, cmd_ablate, cmd_score

from oracles import heron_area, naive_min_circle, tau_b_enumeration


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


# ---------------------------------------------------------------------------


def test_triangle_area_heron_oracle_and_permutations():
    with criterion("triangle area vs Heron oracle, permutation invariant, < 5 s"):
        started = time.perf_counter()
        rng = np.random.default_rng(1234)
        for dim in (2, 8, 512):
            triplets = rng.standard_normal((400, 3, dim)) * 4.0
            for i, g, r in triplets:
                sides = (
                    float(np.linalg.norm(i - g)),
                    float(np.linalg.norm(i - r)),
                    float(np.linalg.norm(g - r)),
                )
                expected = heron_area(*sides)
                base = triangle_area(i, g, r)
                assert base == pytest.approx(expected, rel=1e-9)
                for perm in itertools.permutations((i, g, r)):
                    assert triangle_area(*perm) == pytest.approx(base, rel=1e-9)
        elapsed = time.perf_counter() - started
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_score_identities():
    with criterion("score identities: v(i,i,i)=1, planted (3,4,5) = 0.9932584, clamp at 0"):
        cfg = TriangleScoreConfig(constant_c=890.0)

        point = np.full(512, 3.25)
        assert vlscore(point, point, point, cfg) == 1.0

        store = synth_embeddings(
            SynthSpec(dim=512, triplets=(PlantedTriplet("s", sides=(3.0, 4.0, 5.0)),)), seed=8
        )
        i, g, r = (store.vector(k) for k in ("s-img", "s#cand", "s#ref"))
        assert vlscore(i, g, r, cfg) == pytest.approx(0.9932584, abs=1e-7)

        # area exactly C (legs 20 x 89) and beyond: the floor is an exact zero
        assert vlscore([0.0, 0.0], [20.0, 0.0], [0.0, 89.0], cfg) == 0.0
        for area in (890.0, 890.0 + 1e-9, 1000.0, 1e9):
            assert vlscore_from_area(area, cfg) == 0.0


def test_enclosing_sphere_oracle():
    with criterion("smallest enclosing sphere vs planar oracle, 10k lifted triangles"):
        rng = np.random.default_rng(77)
        basis, _ = np.linalg.qr(rng.standard_normal((512, 2)))
        offset = rng.standard_normal(512) * 3.0
        planar = rng.standard_normal((10_000, 3, 2)) * 5.0
        for flat in planar:
            _, expected = naive_min_circle(flat)
            lifted = offset + flat @ basis.T
            center, radius = min_enclosing_sphere(*lifted)
            assert radius == pytest.approx(expected, rel=1e-9)
            for vertex in lifted:
                assert float(np.linalg.norm(vertex - center)) <= radius + 1e-9

        assert min_enclosing_sphere_radius([0.0, 0.0], [4.0, 0.0], [0.0, 3.0]) == 2.5


def test_kendall_tau_oracle():
    with criterion("tau-b == quadratic enumeration on 200 tied datasets, < 10 s"):
        started = time.perf_counter()
        rng = np.random.default_rng(2718)
        checked = 0
        while checked < 200:
            n = int(rng.integers(2, 501))
            xs = rng.integers(0, max(2, n // 6), size=n).astype(float)
            ys = rng.integers(0, max(2, n // 4), size=n).astype(float)
            if np.all(xs == xs[0]) or np.all(ys == ys[0]):
                continue
            assert tau_b_from_values(list(xs), list(ys)) == tau_b_enumeration(xs, ys)
            checked += 1

        ranks = [float(v) for v in range(1, 21)]
        assert tau_b_from_values(ranks, ranks) == 1.0
        assert tau_b_from_values(ranks, ranks[::-1]) == -1.0
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_nlg_fixtures():
    with criterion("NLG fixtures: BLEU 0.60653, ROUGE-L 0.85714, METEOR 0.85185, identical = 1"):
        from vlscore import bleu, meteor_lite, rouge_l

        assert bleu(["no", "pleural", "effusion"], ["no", "effusion"], 1) == pytest.approx(
            0.60653, abs=1e-5
        )
        assert rouge_l(["a", "b", "c", "d"], ["a", "c", "d"]) == pytest.approx(0.85714, abs=1e-5)
        assert meteor_lite(["the", "cat", "sat"], ["cat", "sat", "the"]) == pytest.approx(
            0.85185, abs=1e-5
        )
        same = ["heart", "size", "is", "normal", "."]
        assert bleu(same, same, 4) == 1.0
        assert rouge_l(same, same) == 1.0
        assert meteor_lite(same, same) == 1.0


# ---------------------------------------------------------------------------
# perturbation corpus


def _fixture_corpus() -> list[str]:
    pathologies = [
        "a small left pleural effusion",
        "mild edema",
        "right basal consolidation",
        "a moderate pneumothorax",
        "upper lobe atelectasis",
    ]
    fillers = [
        "A chest radiograph was obtained at 3.5 cm spacing.",
        "The nurse was called about the result.",
        "Comparison is made to the prior study from yesterday.",
        "Findings were discussed with Dr. Jones at 9 a.m. today.",
    ]
    tails = [
        "Heart size is normal.",
        "The bones are intact!",
        "Any interval change? None seen.",
        "Lines and tubes are unchanged",
    ]
    reports = []
    for k in range(50):
        if k % 5 == 4:
            reports.append(
                f"The lungs are well expanded. {fillers[k % len(fillers)]} {tails[k % len(tails)]}"
            )
        else:
            reports.append(
                f"There is {pathologies[k % len(pathologies)]}. "
                f"{fillers[k % len(fillers)]} {tails[k % len(tails)]}"
            )
    return reports


def _token_diff(a: str, b: str) -> tuple[list[str], list[str]]:
    removed: list[str] = []
    added: list[str] = []
    matcher = difflib.SequenceMatcher(a=a.split(), b=b.split(), autojunk=False)
    for op, i1, i2, j1, j2 in matcher.get_opcodes():
        if op in ("delete", "replace"):
            removed.extend(a.split()[i1:i2])
        if op in ("insert", "replace"):
            added.extend(b.split()[j1:j2])
    return removed, added


def test_perturbation_determinism_and_edit_discipline(tmp_path):
    with criterion("suite determinism, one-edit discipline, lossless splitting (50 reports)"):
        lexicon = default_lexicon()
        corpus = _fixture_corpus()
        assert len(corpus) == 50
        for report in corpus:
            assert "".join(split_sentences(report)) == report

        records = [StudyRecord(f"s{k:02d}", f"img{k:02d}", text) for k, text in enumerate(corpus)]
        for run in ("a", "b"):
            suite = generate_suite(records, lexicon, seed=2024)
            write_manifest(suite.records, tmp_path / f"suite-{run}.jsonl")
        assert (tmp_path / "suite-a.jsonl").read_bytes() == (tmp_path / "suite-b.jsonl").read_bytes()

        sentence_kinds = {
            PerturbationKind.REMOVE_PATHOLOGY_SENTENCE,
            PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE,
        }
        word_kinds = {
            PerturbationKind.SWAP_LOCATION,
            PerturbationKind.SWAP_SEVERITY,
            PerturbationKind.MASK_NONINFORMATIVE,
        }
        suite = generate_suite(records, lexicon, seed=2024)
        assert suite.records
        for record in suite.records:
            if record.perturbation in sentence_kinds:
                sentences = split_sentences(record.reference_text)
                one_removed = {
                    "".join(sentences[:k] + sentences[k + 1 :]) for k in range(len(sentences))
                }
                assert record.candidate_text in one_removed, record.study_id
            elif record.perturbation in word_kinds:
                removed, added = _token_diff(record.reference_text, record.candidate_text)
                assert len(removed) == 1 and len(added) == 1, record.study_id
            else:
                assert not default_lexicon().contains_pathology(record.candidate_text)


# ---------------------------------------------------------------------------
# end-to-end pipelines


MINOR_KINDS = {
    PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE,
    PerturbationKind.MASK_NONINFORMATIVE,
    PerturbationKind.NORMAL_REPORT_SUBSTITUTION,
}


def test_end_to_end_directional_deltas_and_ablation(tmp_path):
    with criterion("pipeline: suite deltas positive for vlscore, ablation taus all 1, < 30 s"):
        started = time.perf_counter()
        lexicon = default_lexicon()
        corpus = _fixture_corpus()
        base = [StudyRecord(f"s{k:02d}", f"img{k:02d}", text) for k, text in enumerate(corpus)]
        write_manifest(base, tmp_path / "base.jsonl")

        # 1) build the suite through the CLI
        code = main(
            [
                "perturb",
                "--manifest", str(tmp_path / "base.jsonl"),
                "--output", str(tmp_path / "perturb-out"),
                "--seed", "11",
                "--no-figures",
            ]
        )
        assert code == 0
        suite = load_manifest(tmp_path / "perturb-out" / "suite.jsonl")
        kinds_present = {r.perturbation for r in suite}
        assert kinds_present >= {
            PerturbationKind.REMOVE_PATHOLOGY_SENTENCE,
            PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE,
            PerturbationKind.SWAP_LOCATION,
            PerturbationKind.SWAP_SEVERITY,
            PerturbationKind.MASK_NONINFORMATIVE,
        }

        # 2) plant geometry: minor edits stay near the image/reference,
        #    major edits push the candidate far away
        rng = np.random.default_rng(5)
        scored_records = []
        triplets = []
        for record in suite:
            own_image = f"{record.study_id}-img"
            scored_records.append(
                StudyRecord(
                    record.study_id,
                    own_image,
                    record.reference_text,
                    candidate_text=record.candidate_text,
                    perturbation=record.perturbation,
                )
            )
            if record.perturbation in MINOR_KINDS:
                area = float(rng.uniform(1.0, 3.0))
            else:
                area = float(rng.uniform(30.0, 50.0))
            triplets.append(PlantedTriplet(record.study_id, area=area, image_id=own_image))
        write_manifest(scored_records, tmp_path / "scored.jsonl")
        store = synth_embeddings(SynthSpec(dim=64, triplets=tuple(triplets)), seed=21)
        write_embeddings(store, tmp_path / "emb.vlse")

        run = cmd_score(
            RunConfig(
                tmp_path / "scored.jsonl",
                tmp_path / "emb.vlse",
                output_dir=tmp_path / "score-out",
                metrics=["vlscore"],
            )
        )
        deltas = run.summary["deltas"]
        assert set(deltas) == {"sentence_removal", "location", "severity"}
        for name, per_metric in deltas.items():
            assert per_metric["vlscore"] > 0.0, name
        on_disk = json.loads((tmp_path / "score-out" / "summary.json").read_text())
        assert on_disk["deltas"] == deltas

        # 3) fully concordant planted data: all four ablation measures at tau 1
        entries = {}
        ratings_lines = ["study_id,rating"]
        ablate_records = []
        for k in range(12):
            theta = math.radians(5.0 + 35.0 * k / 11.0)
            sid = f"c{k:02d}"
            entries[f"{sid}-img"] = np.zeros(2)
            entries[f"{sid}#cand"] = 2.0 * np.array([math.cos(theta), math.sin(theta)])
            entries[f"{sid}#ref"] = 2.0 * np.array([math.cos(theta), -math.sin(theta)])
            ablate_records.append(
                StudyRecord(sid, f"{sid}-img", "Reference text.", candidate_text="Candidate text.")
            )
            ratings_lines.append(f"{sid},{-float(k)}")
        write_embeddings(
            EmbeddingStore(dim=2, entries=entries, model_tag="concordant"),
            tmp_path / "ablate.vlse",
        )
        write_manifest(ablate_records, tmp_path / "ablate.jsonl")
        (tmp_path / "ratings.csv").write_text("\n".join(ratings_lines) + "\n")

        taus = cmd_ablate(
            RunConfig(
                tmp_path / "ablate.jsonl",
                tmp_path / "ablate.vlse",
                output_dir=tmp_path / "ablate-out",
            ),
            tmp_path / "ratings.csv",
        )
        assert {entry.metric for entry in taus} == {
            "cosine",
            "image_centered_cosine",
            "min_sphere_radius",
            "vlscore",
        }
        for entry in taus:
            assert entry.tau == 1.0, entry

        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.2f}s"


def test_calibration_on_planted_areas():
    with criterion("calibration returns the exact max of planted areas {1, 6, 2.5}"):
        legs = {"a": (2.0, 1.0), "b": (3.0, 4.0), "c": (1.0, 5.0)}
        entries = {}
        for sid, (x, y) in legs.items():
            entries[f"{sid}-img"] = np.zeros(2)
            entries[f"{sid}#cand"] = np.array([x, 0.0])
            entries[f"{sid}#ref"] = np.array([0.0, y])
        store = EmbeddingStore(dim=2, entries=entries, model_tag="exact")
        triplets = [(f"{s}-img", f"{s}#cand", f"{s}#ref") for s in ("a", "b", "c")]
        assert calibrate_constant(store, triplets) == 6.0
