import pytest

from sepnets.learn.pipeline import OrderEffectRow, _summary, decide
from sepnets.learn.reports import (
    ORDER_EFFECTS_HEADER,
    read_location_ev,
    read_location_judgment,
    read_order_effects,
    replay_edges,
    location_ev_csv,
    location_judgment_csv,
    order_effects_csv,
)
from sepnets.learn.survey import REASON_BY_CODE
from sepnets.stats import TestResult

from conftest import fixture_text

# yes-counts per order condition that reproduce each mean (sd) cell of the fixture;
# group sizes are (66, 65) at the Deli, (69, 69) at the bathroom, (67, 64) at the airport
YES_COUNTS = {
    "DFO_SP": (8, 11), "DFO_WA": (31, 27), "DFO_SO": (46, 45), "DFO_CA": (50, 40),
    "DFO_CO": (49, 41), "DFO_SU": (6, 9), "DFO_BR": (5, 11), "DFO_HS": (7, 9),
    "DFO_TP": (14, 11), "DFO_MA": (19, 21), "DFO_FA": (16, 21), "DFO_SW": (54, 49),
    "BFO_HA": (38, 36), "BFO_CL": (11, 20), "BFO_TU": (7, 13), "BFO_JA": (11, 16),
    "BFO_FR": (49, 52), "BFO_EL": (7, 14), "BFO_BR": (51, 53),
    "AFO_MN": (27, 27), "AFO_BA": (29, 29), "AFO_JA": (30, 36), "AFO_CA": (35, 37),
    "AFO_BR": (30, 26), "AFO_HR": (55, 51),
}
GROUP_SIZES = {"D": (66, 65), "B": (69, 69), "A": (67, 64)}


def _answers(yes, n):
    return [1] * yes + [0] * (n - yes)


def order_rows(text):
    rows = []
    for code, result in read_order_effects(text):
        n1, n2 = GROUP_SIZES[code[0]]
        k1, k2 = YES_COUNTS[code]
        rows.append(OrderEffectRow(
            REASON_BY_CODE[code].label, code,
            _summary(_answers(k1, n1)), _summary(_answers(k2, n2)), result,
        ))
    return rows


class TestByteExact:
    def test_location_ev_layout(self):
        text = fixture_text("location_ev.csv")
        assert location_ev_csv(read_location_ev(text)) == text

    def test_location_judgment_layout(self):
        text = fixture_text("location_judgment.csv")
        assert location_judgment_csv(read_location_judgment(text)) == text

    def test_order_effect_layout(self):
        text = fixture_text("order_effects.csv")
        assert order_effects_csv(order_rows(text)) == text

    def test_order_header_names_both_orders(self):
        assert ORDER_EFFECTS_HEADER[1:3] == ("PREFthenEVAL", "EVALthenPREF")

    def test_missing_cell_prints_na(self):
        text = location_ev_csv({"Cutter": {"Deli-Bath": TestResult.reported(0.0069)}})
        assert "Line Cutter Welfare,0.0069,NA,NA\n" in text
        assert "Global Welfare,NA,NA,NA\n" in text


class TestDecisionLogic:
    def test_location_edges(self):
        edges = replay_edges(read_location_ev(fixture_text("location_ev.csv")), read_location_judgment(fixture_text("location_judgment.csv")))
        assert edges == {
            ("Location", "LastPerson"),
            ("Location", "Cutter"),
            ("Location", "Likelihood"),
            ("Location", "Judgment"),
        }

    def test_rejections_per_cell(self):
        cells = read_location_ev(fixture_text("location_ev.csv"))
        rejected = {(v, lab) for v, row in cells.items() for lab, r in row.items() if r.reject}
        assert rejected == {
            ("LastPerson", "Deli-Bath"),
            ("Cutter", "Deli-Bath"),
            ("Cutter", "Deli-Airpt"),
            ("Likelihood", "Deli-Bath"),
            ("Likelihood", "Deli-Airpt"),
        }

    def test_judgment_flags_match_column(self):
        text = fixture_text("location_judgment.csv")
        flags = [line.rsplit(",", 1)[1] for line in text.splitlines()[1:]]
        assert [str(r.reject) for _, r in read_location_judgment(text)] == flags

    def test_no_order_effect(self):
        results = read_order_effects(fixture_text("order_effects.csv"))
        assert len(results) == 25
        assert not decide(results)

    def test_majority_rule_is_stricter(self):
        edges = replay_edges(read_location_ev(fixture_text("location_ev.csv")), read_location_judgment(fixture_text("location_judgment.csv")), rule="majority")
        # only Cutter and Likelihood are rejected in two of three pairs, and the judgment in two of three
        assert edges == {("Location", "Cutter"), ("Location", "Likelihood"), ("Location", "Judgment")}

    def test_alpha_moves_the_boundary(self):
        cells = read_location_ev(fixture_text("location_ev.csv"), alpha=0.001)
        assert [v for v, row in cells.items() if decide(list(row.items()))] == ["Likelihood"]

    def test_bad_header(self):
        with pytest.raises(ValueError):
            read_location_judgment("Scenario,p,Rejected\n")
