from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlscore import (
    DEFAULT_CONTRASTS,
    Contrast,
    InputError,
    PerturbationKind,
    RatingPair,
    ScoreRow,
    delta_table,
    import_external_scores,
    kendall_tau_b,
    load_ratings,
    scatter_export,
    tau_b_from_values,
)
from vlscore.stats import to_rating_pairs

from oracles import tau_b_enumeration


def _pairs(xs, ys):
    return [RatingPair(f"s{k}", float(x), float(y)) for k, (x, y) in enumerate(zip(xs, ys))]


# ---------------------------------------------------------------------------
# Kendall tau-b


def test_concordant_is_one():
    assert kendall_tau_b(_pairs([1, 2, 3, 4], [10, 20, 30, 40])) == 1.0


def test_reversed_is_minus_one():
    assert kendall_tau_b(_pairs([1, 2, 3, 4], [4, 3, 2, 1])) == -1.0


def test_single_swap_hand_case():
    # 6 pairs: 5 concordant, 1 discordant -> 4/6
    assert kendall_tau_b(_pairs([1, 2, 3, 4], [1, 3, 2, 4])) == pytest.approx(2.0 / 3.0)


def test_exact_match_with_enumeration_oracle_on_tied_data():
    rng = np.random.default_rng(20240501)
    for trial in range(200):
        n = int(rng.integers(2, 501))
        # integer grids force heavy ties
        xs = rng.integers(0, max(2, n // 7), size=n).astype(float)
        ys = (rng.integers(0, max(2, n // 5), size=n) + rng.integers(0, 2, size=n) * 0.5).astype(float)
        if np.all(xs == xs[0]) or np.all(ys == ys[0]):
            continue
        got = tau_b_from_values(list(xs), list(ys))
        want = tau_b_enumeration(xs, ys)
        assert got == want, f"trial {trial}: {got!r} != {want!r}"


def test_antisymmetric_under_negation():
    rng = np.random.default_rng(5)
    xs = list(rng.integers(0, 10, size=40).astype(float))
    ys = list(rng.integers(0, 10, size=40).astype(float))
    base = tau_b_from_values(xs, ys)
    assert tau_b_from_values(xs, [-y for y in ys]) == -base


@given(
    st.lists(
        st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=60
    ).filter(
        lambda pts: len({x for x, _ in pts}) > 1 and len({y for _, y in pts}) > 1
    ),
    st.integers(1, 9),
    st.integers(-20, 20),
)
@settings(max_examples=150)
def test_invariant_under_strictly_increasing_affine_transform(points, scale, shift):
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    base = tau_b_from_values(xs, ys)
    assert tau_b_from_values([scale * x + shift for x in xs], ys) == base
    assert tau_b_from_values(xs, [scale * y + shift for y in ys]) == base


def test_degenerate_inputs_rejected():
    with pytest.raises(InputError, match="at least 2"):
        kendall_tau_b(_pairs([1], [1]))
    with pytest.raises(InputError, match="metric values are tied"):
        kendall_tau_b(_pairs([3, 3, 3], [1, 2, 3]))
    with pytest.raises(InputError, match="ratings are tied"):
        kendall_tau_b(_pairs([1, 2, 3], [7, 7, 7]))


def test_duplicate_study_ids_rejected():
    pairs = [RatingPair("s", 1.0, 1.0), RatingPair("s", 2.0, 2.0)]
    with pytest.raises(InputError, match="duplicate study_id"):
        kendall_tau_b(pairs)


def test_nonfinite_rating_rejected():
    with pytest.raises(InputError, match="non-finite"):
        RatingPair("s", float("nan"), 1.0)


# ---------------------------------------------------------------------------
# delta tables


def _rows(metric, kind, values):
    return [
        (ScoreRow(f"{kind.value}-{k}", metric, float(v)), kind) for k, v in enumerate(values)
    ]


def test_delta_simple_means():
    rows = _rows("vlscore", PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE, [0.9, 0.9]) + _rows(
        "vlscore", PerturbationKind.REMOVE_PATHOLOGY_SENTENCE, [0.7, 0.7]
    )
    table = delta_table(rows, [DEFAULT_CONTRASTS[0]])
    assert table.deltas[("vlscore", "sentence_removal")] == pytest.approx(0.2, abs=1e-12)


def test_delta_identical_groups_zero():
    rows = _rows("bleu1", PerturbationKind.MASK_NONINFORMATIVE, [0.5, 0.6]) + _rows(
        "bleu1", PerturbationKind.SWAP_LOCATION, [0.6, 0.5]
    )
    table = delta_table(rows, [Contrast("location", PerturbationKind.MASK_NONINFORMATIVE, PerturbationKind.SWAP_LOCATION)])
    assert table.deltas[("bleu1", "location")] == 0.0


def test_delta_missing_kind_rejected():
    rows = _rows("vlscore", PerturbationKind.MASK_NONINFORMATIVE, [0.9])
    with pytest.raises(InputError, match="absent"):
        delta_table(rows, [DEFAULT_CONTRASTS[1]])


def test_delta_means_permutation_invariant():
    rows = _rows("m", PerturbationKind.SWAP_SEVERITY, [0.1, 0.3, 0.7, 0.9, 1e-3, 0.2])
    forward = delta_table(rows, [])
    backward = delta_table(list(reversed(rows)), [])
    assert forward.means == backward.means


# ---------------------------------------------------------------------------
# scatter export


def _score_rows(metric, values):
    return [ScoreRow(sid, metric, v) for sid, v in values.items()]


def test_scatter_identity_diagonal():
    values = {"a": 0.1, "b": 0.5, "c": 0.9}
    data = scatter_export(_score_rows("x", values), _score_rows("y", values))
    assert all(x == y for _, x, y in data.points)
    assert data.mean_a == data.mean_b == pytest.approx(0.5)


def test_scatter_disjoint_ids_error_lists_both_sides():
    with pytest.raises(InputError) as exc:
        scatter_export(_score_rows("x", {"a": 0.1}), _score_rows("y", {"b": 0.2}))
    assert "'a'" in str(exc.value) and "'b'" in str(exc.value)


def test_scatter_three_points_means():
    a = {"a": 0.0, "b": 0.3, "c": 0.6}
    b = {"a": 1.0, "b": 0.8, "c": 0.0}
    data = scatter_export(_score_rows("x", a), _score_rows("y", b))
    assert len(data.points) == 3
    assert data.mean_a == pytest.approx(0.3)
    assert data.mean_b == pytest.approx(0.6)


# ---------------------------------------------------------------------------
# CSV ingestion


def test_import_external_scores_roundtrip(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("study_id,metric,value\ns1,bertscore,0.51\ns2,bertscore,0.61\n")
    rows = import_external_scores(path)
    assert rows == [ScoreRow("s1", "bertscore", 0.51), ScoreRow("s2", "bertscore", 0.61)]


def test_import_external_scores_nan_rejected(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("study_id,metric,value\ns1,bs,NaN\n")
    with pytest.raises(InputError, match="line 2.*not finite"):
        import_external_scores(path)


def test_import_external_scores_duplicate_rejected(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("study_id,metric,value\ns1,bs,0.5\ns1,bs,0.6\n")
    with pytest.raises(InputError, match="duplicate"):
        import_external_scores(path)


def test_import_external_scores_bad_header(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("id,metric,value\ns1,bs,0.5\n")
    with pytest.raises(InputError, match="header"):
        import_external_scores(path)


def test_load_ratings_mean_and_sum(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("study_id,rating\ns1,-2\ns1,-4\ns2,-1\n")
    assert load_ratings(path, "mean") == {"s1": -3.0, "s2": -1.0}
    assert load_ratings(path, "sum") == {"s1": -6.0, "s2": -1.0}
    with pytest.raises(InputError, match="aggregation"):
        load_ratings(path, "median")


def test_to_rating_pairs_reports_orphans():
    rows = [ScoreRow("a", "m", 0.5), ScoreRow("b", "m", 0.6)]
    with pytest.raises(InputError) as exc:
        to_rating_pairs(rows, {"b": 1.0, "c": 2.0})
    message = str(exc.value)
    assert "'a'" in message and "'c'" in message
