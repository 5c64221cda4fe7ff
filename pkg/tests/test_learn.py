import logging
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepnets.errors import MissingEfEntry
from sepnets.learn import (
    LearnConfig,
    cell_sample,
    cp_table_estimate,
    estimate_ef,
    infer_structure,
    order_effect_screen,
    plant_order_effect,
    run_tests,
    structured_survey,
    survey_sample,
)
from sepnets.learn.pipeline import DEFAULT_NH3_REASONS
from sepnets.learn.survey import LOCATIONS, OrderCondition, reasons_at
from sepnets.learn.synthetic import _record
from sepnets.prefmodel import validate
from sepnets.sepnet import sep_optimal

NON_CUTTER = ("GlobalWelfare", "FirstPerson", "MiddlePerson", "LastPerson", "Universalization", "Likelihood")
EXPECTED_GRAPH = (
    {("Reason", e) for e in NON_CUTTER}
    | {("Location", e) for e in ("LastPerson", "Cutter", "Likelihood", "Judgment")}
    | {(e, "Judgment") for e in NON_CUTTER}
)


def rec(i, judgment=True, reason="Spoon", order="JudgeFirst", **evals):
    return _record(f"s{i:03d}", OrderCondition(order), reason, evals, judgment)


@pytest.fixture(scope="module")
def structured():
    return structured_survey()


@pytest.fixture(scope="module")
def sample():
    return survey_sample(60, seed=1)


class TestOrderScreen:
    def test_balanced_design_pools(self, structured):
        screen = order_effect_screen(structured)
        assert screen.pooled and len(screen.rows) == 25 and not screen.skipped
        assert all(r.result.p_value == 1.0 for r in screen.rows)

    def test_planted_effect_blocks_pooling(self, structured):
        screen = order_effect_screen(plant_order_effect(structured, "Soda"))
        assert not screen.pooled
        assert [r.code for r in screen.rows if r.result.reject] == ["DFO_SO"]

    def test_single_order_skipped(self, caplog):
        records = [rec(i, i % 2 == 0) for i in range(6)] + [
            rec(10 + i, i % 3 == 0, reason="Water", order=("JudgeFirst", "EvalFirst")[i % 2]) for i in range(8)
        ]
        with caplog.at_level(logging.WARNING):
            screen = order_effect_screen(records)
        assert screen.skipped == ("Spoon",)
        assert [r.reason for r in screen.rows] == ["Water"]
        assert "Spoon" in caplog.text

    def test_summaries(self):
        records = [rec(i, i < 3, reason="Water", order="JudgeFirst") for i in range(4)]
        records += [rec(10 + i, i < 1, reason="Water", order="EvalFirst") for i in range(4)]
        (row,) = order_effect_screen(records).rows
        assert row.judge_first == (4, 0.75, pytest.approx(0.4330127, abs=1e-7))
        assert row.eval_first[:2] == (4, 0.25)


class TestEstimateEf:
    RECORDS = [rec(i, likelihood=v) for i, v in enumerate([40, 55, 62, 70, 90])] + [
        rec(9, reason="Wash Hands", likelihood=10)
    ]

    def test_median_by_location(self):
        assert estimate_ef(self.RECORDS, "Likelihood", {"Location": "Deli"}) == 62

    def test_mean(self):
        assert estimate_ef(self.RECORDS, "Likelihood", {"Reason": "Spoon"}, "mean") == pytest.approx(63.4)

    def test_unconditioned(self):
        assert estimate_ef(self.RECORDS, "Likelihood") == 58.5

    def test_missing(self):
        with pytest.raises(MissingEfEntry):
            estimate_ef(self.RECORDS, "Likelihood", {"Location": "Airport"})

    def test_bad_estimator(self):
        with pytest.raises(ValueError):
            estimate_ef(self.RECORDS, "Likelihood", estimator="mode")


class TestCpTableEstimate:
    @staticmethod
    def group(yes, n=10):
        return [rec(i, i < yes) for i in range(n)]

    def test_clear_yes(self):
        st_ = cp_table_estimate(self.group(9), {"Location": "Deli"})
        assert st_.strata == (("yes",), ("no",)) and st_.annotation == 0.9
        assert st_.context == (("Location", "Deli"),)

    def test_even_split_is_indifferent(self):
        assert cp_table_estimate(self.group(5), {}).strata == (("yes", "no"),)

    @pytest.mark.parametrize("yes,strata", [(4, (("yes", "no"),)), (3, (("no",), ("yes",))), (6, (("yes", "no"),)), (7, (("yes",), ("no",)))])
    def test_band(self, yes, strata):
        assert cp_table_estimate(self.group(yes), {}).strata == strata

    def test_too_few(self):
        assert cp_table_estimate(self.group(2, n=2), {}) is None

    def test_bucket_context(self):
        records = [rec(i, i < 5, likelihood=10 * i) for i in range(10)]
        q = {"Likelihood": (25.0, 50.0, 75.0)}
        low = cp_table_estimate(records, {"Likelihood": "Q1"}, q, min_n=3)
        assert low.strata == (("yes",), ("no",)) and low.annotation == 1.0
        assert cp_table_estimate(records, {"Likelihood": "Q4"}, q, min_n=2).strata == (("no",), ("yes",))
        assert cp_table_estimate(records, {"Likelihood": "Q4"}, q, min_n=3) is None


class TestStructure:
    def test_structured_graph(self, structured):
        result = infer_structure(structured)
        assert result.edge_set() == EXPECTED_GRAPH
        assert result.parents("Cutter") == ("Location",)

    def test_structured_net(self, structured):
        net = infer_structure(structured).net
        assert validate(net).ok
        assert net.var("Judgment").parents == ("Location", *NON_CUTTER)
        assert net.var("Cutter").parents == ("Location",)
        assert dict(net.eval_functions["Cutter"].table) == {
            (("Location", "Deli"),): 20, (("Location", "Bathroom"),): 0, (("Location", "Airport"),): 0,
        }

    def test_all_reason_pairs_pick_up_location_shift(self, structured):
        config = LearnConfig(nh2_pairs="all", hypotheses=("NH2",))
        edges = {(e.source, e.target) for e in run_tests(structured, config=config) if e.edge_present}
        assert ("Reason", "Cutter") in edges

    def test_deterministic(self, sample):
        a, b = infer_structure(sample), infer_structure(sample)
        assert a.edges == b.edges and a.net == b.net

    def test_jobs_invariant(self, sample):
        a = infer_structure(sample)
        b = infer_structure(sample, config=LearnConfig(jobs=4))
        assert a.edges == b.edges and a.net == b.net

    # the median profile can land on a bucket combination nobody answered
    @pytest.mark.filterwarnings("ignore::sepnets.sepnet.MissingStatementWarning")
    def test_learned_net_is_usable(self, sample):
        result = infer_structure(sample)
        assert validate(result.net).ok
        best = sep_optimal(result.net, {"Reason": "Spoon", "Location": "Deli"}, tie_break=True)
        assert dict(best.preferences)["Judgment"] in ("yes", "no")

    def test_small_cells_skipped(self, caplog):
        records = cell_sample(n_per_cell=3, seed=2)
        with caplog.at_level(logging.INFO):
            edges = run_tests(records, config=LearnConfig(hypotheses=("NH1",)))
        assert len(edges) == 7
        assert all(not e.edge_present and not e.tests and len(e.skipped) == 3 for e in edges)
        assert "fewer than 5" in caplog.text

    def test_majority_needs_more(self, sample):
        anyr = infer_structure(sample).edge_set()
        maj = infer_structure(sample, config=LearnConfig(rule="majority")).edge_set()
        assert maj <= anyr

    def test_bonferroni_needs_more(self, sample):
        plain = infer_structure(sample).edge_set()
        corrected = infer_structure(sample, config=LearnConfig(bonferroni=True)).edge_set()
        assert corrected <= plain

    def test_nh3_subsets(self):
        assert LearnConfig().nh3_subset() == DEFAULT_NH3_REASONS
        drawn = LearnConfig(nh3_seed=7).nh3_subset()
        assert drawn == LearnConfig(nh3_seed=7).nh3_subset()
        for loc in LOCATIONS:
            assert len(drawn[loc]) == 4 and set(drawn[loc]) <= set(reasons_at(loc))

    def test_empty(self):
        with pytest.raises(ValueError):
            infer_structure([])

    def test_extra_scenario_variables(self, structured):
        result = infer_structure(structured, config=LearnConfig(include_extra_scenario=True, hypotheses=("NH1",)))
        assert {"MainService", "AlreadyWaited"} <= set(result.net.names)
        assert any(e.family == "SV" for e in result.edges)


@given(st.floats(0.001, 0.2), st.floats(0.001, 0.2))
@settings(max_examples=8, deadline=None)
def test_edges_monotone_in_alpha(a1, a2):
    lo, hi = sorted((a1, a2))
    records = survey_sample(30, seed=3)
    config = LearnConfig(hypotheses=("NH1", "NH3", "NH4"))
    small = {(e.source, e.target) for e in run_tests(records, lo, config) if e.edge_present}
    large = {(e.source, e.target) for e in run_tests(records, hi, config) if e.edge_present}
    assert small <= large


@given(st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_reports_sorted_and_unique(seed):
    edges = run_tests(cell_sample(20, seed=seed), config=LearnConfig(hypotheses=("NH1", "NH3", "NH4")))
    keys = [(e.family, e.source, e.target) for e in edges]
    assert len(set(keys)) == len(keys)
    assert list(edges) == sorted(edges, key=lambda e: keys.index((e.family, e.source, e.target)))
    for e in edges:
        assert e.edge_present == any(r.reject for _, r in e.tests)
