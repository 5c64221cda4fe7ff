import json
import subprocess
import sys

import pytest

from sepnets import bundled_path
from sepnets.cli import RunManifest, main, parse_outcome, resolve_label
from sepnets.learn import plant_order_effect, structured_survey, write_survey

from conftest import FIXTURES

AIRPORT = str(bundled_path("airport"))
AIRPORT_SEP = str(bundled_path("airport_sep"))
ASCII = str(bundled_path("airport_ascii"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def survey_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("survey") / "survey.csv"
    path.write_text(write_survey(structured_survey()), encoding="utf-8")
    return path


class TestNetCommands:
    def test_validate(self, capsys):
        code, out, _ = run(capsys, "validate", AIRPORT)
        assert code == 0 and out.splitlines()[-1] == "ok"

    def test_validate_invalid(self, capsys, tmp_path):
        bad = tmp_path / "bad.sepnet"
        bad.write_text("[variables]\nX: preference {x, y} <- Y\nY: preference {u, v} <- X\n", encoding="utf-8")
        code, out, _ = run(capsys, "validate", str(bad))
        assert code == 1 and out.splitlines()[-1] == "invalid"
        assert out.startswith("violation\t")

    @pytest.mark.parametrize("scenario,expected", [("S=a,T=o", "a,o,c̄"), ("S=ā,T=o", "ā,o,c")])
    def test_optimal_sep(self, capsys, scenario, expected):
        code, out, _ = run(capsys, "optimal", AIRPORT_SEP, "--scenario", scenario)
        assert (code, out) == (0, expected + "\n")

    def test_optimal_ascii_labels(self, capsys):
        code, out, _ = run(capsys, "optimal", ASCII, "--scenario", "S=a_bar")
        assert code == 0 and out == "a_bar,o,c\n"

    def test_missing_scenario_variable(self, capsys):
        code, _, err = run(capsys, "optimal", AIRPORT_SEP, "--scenario", "S=a")
        assert code == 2 and "T" in err

    def test_dominance(self, capsys):
        code, out, _ = run(capsys, "dominance", AIRPORT, "a,o,c_bar", "a,o_bar,c")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "DOMINATES"
        assert len(lines) == 3 and all(len(line.split("\t")) == 4 for line in lines[1:])

    def test_dominance_across_scenarios(self, capsys):
        code, out, _ = run(capsys, "dominance", AIRPORT, "a,o,c", "ā,o,c")
        assert code == 0 and out == "INCOMPARABLE\n"

    def test_dominance_cap(self, capsys):
        code, _, err = run(capsys, "dominance", AIRPORT, "a,o,c_bar", "a,o_bar,c", "--cap", "1")
        assert code == 3 and "cap" in err

    def test_order_dot(self, capsys, tmp_path):
        out_path = tmp_path / "g.dot"
        code, _, _ = run(capsys, "order", AIRPORT, "--dot", str(out_path))
        text = out_path.read_text(encoding="utf-8")
        assert code == 0 and text.count("digraph") == 2

    def test_order_csv(self, capsys):
        code, out, _ = run(capsys, "order", AIRPORT_SEP, "--format", "csv")
        assert code == 0 and len(out.splitlines()) == 1 + 4

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "validate", str(tmp_path / "nope.sepnet"))
        assert code == 2 and "i/o error" in err

    def test_syntax_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.sepnet"
        bad.write_text("[variables]\nX preference {x, y}\n", encoding="utf-8")
        code, _, err = run(capsys, "validate", str(bad))
        assert code == 2 and "line 2, column 3" in err


class TestLabels:
    def test_aliases(self):
        from sepnets import load_bundled

        net = load_bundled("airport")
        assert resolve_label(net, "T", "o_bar") == "ō"
        assert resolve_label(net, "T", "ō") == "ō"
        assert parse_outcome(net, "S=a,T=o,P=c_bar").label() == "a,o,c̄"

    def test_unknown_label(self):
        from sepnets import load_bundled
        from sepnets.cli import UsageError

        with pytest.raises(UsageError):
            resolve_label(load_bundled("airport"), "T", "late")


class TestLearn:
    def test_outputs(self, capsys, tmp_path, survey_csv):
        net = tmp_path / "learned.sepnet"
        code, out, _ = run(capsys, "learn", str(survey_csv), "--out", str(net), "--reports", str(tmp_path / "r"))
        assert code == 0
        names = sorted(p.name for p in (tmp_path / "r").iterdir())
        assert names == ["edges.csv", "location_ev.csv", "location_judgment.csv", "manifest.json",
                         "order_effects.csv", "tests.csv"]
        assert out == (tmp_path / "r" / "edges.csv").read_text(encoding="utf-8")
        assert run(capsys, "validate", str(net))[0] == 0

    def test_order_effect_stops(self, capsys, tmp_path):
        csv_path = tmp_path / "s.csv"
        csv_path.write_text(write_survey(plant_order_effect(structured_survey(), "Soda")), encoding="utf-8")
        args = ["learn", str(csv_path), "--out", str(tmp_path / "n.sepnet")]
        code, _, err = run(capsys, *args)
        assert code == 1 and "Soda" in err
        assert (tmp_path / "order_effects.csv").exists() and not (tmp_path / "n.sepnet").exists()
        assert run(capsys, *args, "--force-pool")[0] == 0

    def test_malformed_csv(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
        code, _, err = run(capsys, "learn", str(bad), "--out", str(tmp_path / "n.sepnet"))
        assert code == 2 and "header" in err

    def test_manifest_round_trip_and_rerun(self, capsys, tmp_path, survey_csv):
        net = tmp_path / "a.sepnet"
        man = tmp_path / "run.json"
        argv = ["--manifest", str(man), "learn", str(survey_csv), "--out", str(net), "--alpha", "0.01", "--jobs", "2"]
        assert run(capsys, *argv)[0] == 0
        m = RunManifest.from_json(man.read_text(encoding="utf-8"))
        assert RunManifest.from_json(m.to_json()) == m
        assert m.command == "learn" and m.flags["alpha"] == 0.01 and m.seed == 0
        assert list(m.inputs) == [str(survey_csv)]
        first = net.read_bytes()
        net.unlink()
        assert run(capsys, *m.argv)[0] == 0
        assert net.read_bytes() == first
        again = RunManifest.from_json(man.read_text(encoding="utf-8"))
        assert again.reproducible() == m.reproducible()

    def test_manifest_on_stderr(self, capsys):
        _, _, err = run(capsys, "validate", AIRPORT)
        line = next(l for l in err.splitlines() if l.startswith("manifest: "))
        assert json.loads(line[len("manifest: "):])["command"] == "validate"


class TestReport:
    def test_fixture_replay(self, capsys):
        code, out, _ = run(
            capsys, "report",
            "--location-ev", f"{FIXTURES}/location_ev.csv",
            "--location-judgment", f"{FIXTURES}/location_judgment.csv",
            "--order-effects", f"{FIXTURES}/order_effects.csv",
        )
        assert code == 0
        assert out.splitlines() == [
            "edge\tLocation\tCutter",
            "edge\tLocation\tJudgment",
            "edge\tLocation\tLastPerson",
            "edge\tLocation\tLikelihood",
            "pooled\tTrue",
        ]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sepnets", "optimal", AIRPORT_SEP, "--scenario", "S=a", "--scenario", "T=ō"],
        capture_output=True, text=True, encoding="utf-8",
    )
    assert proc.returncode == 0 and proc.stdout == "a,ō,c̄\n"
