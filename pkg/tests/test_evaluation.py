import json
import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reps.dataset import LabeledDataset, kfold_split
from reps.errors import DatasetMismatch, DataError, InvalidK, IoError, UndefinedLOR
from reps.evaluation import (
    REPORT_FIELDS,
    EvalRecord,
    beta_sweep,
    dominates,
    emit_report,
    export_nn_graph,
    fsr_error,
    holdout_errors,
    log_odds_ratio,
    nops_error,
    pareto_rank,
    read_report_csv,
    selection_rate,
)
from reps.knn import evaluate_error
from reps.selection import size_for_fraction

from conftest import WORKED_D, WORKED_LABELS, distances, random_points


def rec(err, slr, dataset="d", method="m"):
    return EvalRecord(method, dataset, err, slr)


def peel_oracle(points):
    """Scan for records no remaining record beats, remove them, repeat."""
    remaining = list(range(len(points)))
    ranks = [0] * len(points)
    level = 0
    while remaining:
        level += 1
        front = []
        for i in remaining:
            ei, si = points[i]
            beaten = False
            for j in remaining:
                ej, sj = points[j]
                if ej <= ei and sj <= si and (ej < ei or sj < si):
                    beaten = True
            if not beaten:
                front.append(i)
        for i in front:
            ranks[i] = level
        remaining = [i for i in remaining if i not in front]
    return ranks


class TestSelectionRate:
    def test_values(self):
        assert selection_rate(10, 10) == 1.0
        assert selection_rate(15, 100) == 0.15
        assert selection_rate(18, 120) == 0.15

    def test_invalid(self):
        with pytest.raises(InvalidK):
            selection_rate(0, 10)
        with pytest.raises(InvalidK):
            selection_rate(11, 10)


class TestLor:
    def test_hand_value(self):
        assert log_odds_ratio(0.2, 0.1, 0.1) == pytest.approx(math.log(0.25), abs=1e-12)
        assert log_odds_ratio(0.2, 0.1, 0.1) == pytest.approx(-1.3863, abs=1e-4)

    def test_odds_of_half(self):
        # O(0.5) = 1 leaves only the error odds ratio
        v = log_odds_ratio(0.3, 0.5, 0.1)
        assert v == pytest.approx(math.log((0.3 / 0.7) / (0.2 / 0.8)), rel=1e-12)

    def test_no_difference(self):
        with pytest.raises(UndefinedLOR):
            log_odds_ratio(0.1, 0.5, 0.1)

    def test_improvement(self):
        with pytest.raises(UndefinedLOR):
            log_odds_ratio(0.05, 0.5, 0.1)

    def test_full_selection(self):
        with pytest.raises(UndefinedLOR):
            log_odds_ratio(0.2, 1.0, 0.1)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_finite_or_undefined(self, err, slr, err_nops):
        try:
            v = log_odds_ratio(err, slr, err_nops)
        except UndefinedLOR:
            return
        assert math.isfinite(v)


class TestDominance:
    def test_strict(self):
        assert dominates(rec(0.1, 0.1), rec(0.2, 0.2))

    def test_incomparable(self):
        a, b = rec(0.1, 0.3), rec(0.2, 0.2)
        assert not dominates(a, b) and not dominates(b, a)

    def test_equal(self):
        assert not dominates(rec(0.1, 0.2), rec(0.1, 0.2))

    def test_one_axis(self):
        assert dominates(rec(0.1, 0.2), rec(0.1, 0.3))

    def test_dataset_mismatch(self):
        with pytest.raises(DatasetMismatch):
            dominates(rec(0.1, 0.1, "a"), rec(0.2, 0.2, "b"))

    pt = st.tuples(st.sampled_from([0.0, 0.1, 0.2, 0.3]), st.sampled_from([0.1, 0.2, 0.5, 1.0]))

    @settings(max_examples=300, deadline=None)
    @given(pt, pt, pt)
    def test_order_properties(self, a, b, c):
        a, b, c = rec(*a), rec(*b), rec(*c)
        assert not dominates(a, a)
        assert not (dominates(a, b) and dominates(b, a))
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)


class TestPareto:
    def test_hand_case(self):
        records = [rec(0.1, 0.5), rec(0.2, 0.2), rec(0.3, 0.1), rec(0.25, 0.25)]
        assert pareto_rank(records).ranks == (1, 1, 1, 2)

    def test_single(self):
        assert pareto_rank([rec(0.5, 0.5)]).ranks == (1,)

    def test_chain(self):
        assert pareto_rank([rec(0.1, 0.1), rec(0.2, 0.2), rec(0.3, 0.3)]).ranks == (1, 2, 3)

    def test_rank_of_and_fronts(self):
        records = [rec(0.2, 0.2, method="x"), rec(0.1, 0.1, method="y")]
        r = pareto_rank(records)
        assert r.rank_of(records[0]) == 2
        assert r.fronts() == [[records[1]], [records[0]]]

    def test_mixed_datasets(self):
        with pytest.raises(DatasetMismatch):
            pareto_rank([rec(0.1, 0.1, "a"), rec(0.1, 0.1, "b")])

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from([0.0, 0.05, 0.1, 0.2, 0.5]),
                st.sampled_from([0.1, 0.2, 0.5, 1.0]),
            ),
            min_size=1,
            max_size=10,
        )
    )
    def test_oracle_and_invariants(self, points):
        records = [rec(e, s) for e, s in points]
        ranking = pareto_rank(records)
        assert list(ranking.ranks) == peel_oracle(points)
        ranks = ranking.ranks
        assert sorted(set(ranks)) == list(range(1, max(ranks) + 1))
        for i, ri in enumerate(ranks):
            for j, rj in enumerate(ranks):
                if dominates(records[j], records[i]):
                    assert rj < ri
            if ri > 1:
                assert any(ranks[j] == ri - 1 and dominates(records[j], records[i]) for j in range(len(records)))


class TestRecord:
    def test_ranges(self):
        with pytest.raises(DataError):
            EvalRecord("m", "d", 1.5, 0.5)
        with pytest.raises(DataError):
            EvalRecord("m", "d", 0.1, 0.0)
        with pytest.raises(DataError):
            EvalRecord("m", "d", float("nan"), 0.5)


class TestReports:
    def records(self):
        return [
            EvalRecord("REPS", "iris", 0.053, 0.15, beta=2.0, C=0.001, solver="projected_gradient", seed=0, k=18, n_train=120),
            EvalRecord("NoPS", "iris", 0.04, 1.0, beta=2.0, C=0.001, solver="projected_gradient", seed=0, k=120, n_train=120),
            EvalRecord("REPS", "wine", 1 / 3, 0.5),
        ]

    def test_json_keys(self, tmp_path):
        emit_report(self.records()[:1], json_path=tmp_path / "r.json")
        data = json.loads((tmp_path / "r.json").read_text())
        assert len(data) == 1
        assert set(data[0]) == set(REPORT_FIELDS)
        assert data[0]["pareto_rank"] == 1

    def test_csv_round_trip(self, tmp_path):
        records = self.records()
        emit_report(records, csv_path=tmp_path / "r.csv")
        back, header, _ = read_report_csv(tmp_path / "r.csv")
        assert back == records
        assert tuple(header) == REPORT_FIELDS

    def test_seventeen_digits(self, tmp_path):
        emit_report(self.records(), csv_path=tmp_path / "r.csv")
        text = (tmp_path / "r.csv").read_text()
        assert "0.33333333333333331" in text

    def test_ranks_are_per_dataset(self, tmp_path):
        rows = emit_report(self.records())
        assert [r["pareto_rank"] for r in rows] == [1, 1, 1]

    def test_rank_column_matches_pareto_rank(self, tmp_path):
        records = [rec(0.1, 0.5), rec(0.2, 0.2), rec(0.3, 0.1), rec(0.25, 0.25)]
        rows = emit_report(records)
        assert tuple(r["pareto_rank"] for r in rows) == pareto_rank(records).ranks

    def test_unwritable(self, tmp_path):
        with pytest.raises(IoError):
            emit_report(self.records(), json_path=tmp_path / "missing" / "r.json")


class TestGraph:
    def parse(self, text):
        nodes = re.findall(r"^\s+(\d+) \[(.*)\];$", text, re.M)
        edges = re.findall(r"^\s+(\d+) -> (\d+);$", text, re.M)
        return nodes, [(int(a), int(b)) for a, b in edges]

    def test_worked_example(self, tmp_path):
        path = tmp_path / "g.dot"
        export_nn_graph(WORKED_D, WORKED_LABELS, [0, 2], path)
        text = path.read_text()
        assert text.startswith("digraph")
        nodes, edges = self.parse(text)
        assert len(nodes) == 4
        assert sorted(edges) == [(0, 1), (1, 0), (2, 3), (3, 2)]
        styles = {int(i): attrs for i, attrs in nodes}
        assert "style=dashed" in styles[1] and "style=dashed" in styles[3]
        assert "style=dashed" not in styles[0]

    def test_two_nodes(self, tmp_path):
        path = tmp_path / "g.dot"
        export_nn_graph(np.array([[0.0, 1.0], [1.0, 0.0]]), [0, 1], [0, 1], path)
        _, edges = self.parse(path.read_text())
        assert sorted(edges) == [(0, 1), (1, 0)]

    def test_unwritable(self, tmp_path):
        with pytest.raises(IoError):
            export_nn_graph(WORKED_D, WORKED_LABELS, [0], tmp_path / "no" / "g.dot")


class TestProtocol:
    def dataset(self, seed=0, n=60):
        rng = np.random.default_rng(seed)
        X, y = random_points(rng, n, classes=3)
        return LabeledDataset("blobs", "vectors", X, y), distances(X)

    def test_fsr_full_rate_is_nops(self):
        ds, D = self.dataset()
        assert fsr_error(ds, D, target_slr=1.0, seed=3) == nops_error(ds, D, seed=3)

    def test_fsr_matches_manual_loop(self):
        from reps.selection import fit_reps

        ds, D = self.dataset(1)
        errs = []
        for train, test in kfold_split(ds, 5, 4).folds():
            fit = fit_reps(D[np.ix_(train, train)], ds.labels[train])
            chosen = train[fit.select(size_for_fraction(0.3, train.size)).selected]
            errs.append(evaluate_error(D, chosen, ds.labels, test))
        assert fsr_error(ds, D, target_slr=0.3, seed=4) == float(np.mean(errs))

    def test_fsr_invalid_rate(self):
        ds, D = self.dataset()
        with pytest.raises(InvalidK):
            fsr_error(ds, D, target_slr=0.0)

    def test_holdout(self):
        ds, D = self.dataset(2)
        train, test = np.arange(40), np.arange(40, 60)
        err, err_nops, k, _ = holdout_errors(D, ds.labels, train, test, target_slr=1.0)
        assert k == 40
        assert err == err_nops == evaluate_error(D, train, ds.labels, test)

    def test_sweep_rows(self):
        ds, D = self.dataset(3)
        rows = beta_sweep(ds, D, betas=(1.5, 2.0, 4.0), target_slr=0.5)
        assert [r["beta"] for r in rows] == [1.5, 2.0, 4.0]
        for r in rows:
            if r["err"] > r["err_nops"]:
                assert r["lor_defined"] and math.isfinite(r["lor"])
            else:
                assert not r["lor_defined"] and r["lor"] is None
