import json
import math
import subprocess
import sys

import pytest

from ncmax import cli
from ncmax.rearrange import StepFunction, cesaro, dump_profile, load_profile, mu_of_profile, profile
from ncmax.suites import SUITES, Trial, emit_curve, run_example, run_suite
from ncmax.spaces import LogGrid


@pytest.fixture
def profile_file(tmp_path, two_atoms):
    path = tmp_path / "p.json"
    path.write_text(dump_profile(two_atoms))
    return str(path)


def _stable(report_json: str) -> dict:
    d = json.loads(report_json)
    d.pop("runtimeMillis")
    return d


class TestSuites:
    @pytest.mark.parametrize("name", sorted(SUITES))
    def test_small_runs_pass(self, name):
        report = run_suite(name, 25, 42)
        assert report.passed and report.violations == []
        assert report.trials == 25 and report.extremal_witness is not None

    def test_zero_trials(self):
        report = run_suite("theorem-16", 0, 7)
        assert report.passed and report.trials == 0 and report.extremal_ratio == 0

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            run_suite("nope", 1, 0)

    def test_deterministic_and_job_independent(self):
        a = run_suite("decomposition", 40, 3).to_json()
        b = run_suite("decomposition", 40, 3).to_json()
        c = run_suite("decomposition", 40, 3, jobs=2).to_json()
        assert _stable(a) == _stable(b) == _stable(c)
        assert _stable(a) != _stable(run_suite("decomposition", 40, 4).to_json())

    def test_report_schema(self):
        d = json.loads(run_suite("weak-type", 5, 1).to_json())
        assert set(d) == {"schema", "suite", "trials", "seed", "passed", "violations",
                          "extremalRatio", "extremalWitness", "runtimeMillis", "extras"}
        assert d["schema"] == "ncmax/1"

    def test_linf_ratio_at_most_one(self):
        assert run_suite("linf-contraction", 200, 9).extremal_ratio <= 1 + 1e-12

    def test_violation_is_reported(self, monkeypatch):
        def broken(seed, i):
            v = [{"trialIndex": i, "witness": None, "lhs": 2.0, "rhs": 1.0, "input": {}}]
            return Trial(2.0, {"i": i}, v if i == 1 else [])

        monkeypatch.setitem(SUITES, "broken", broken)
        report = run_suite("broken", 3, 0)
        assert not report.passed and len(report.violations) == 1
        assert report.violations[0]["trialIndex"] == 1


class TestExamples:
    def test_example_two_values(self):
        report = run_example(2)
        assert report.passed
        grid = LogGrid().values()
        assert report.extras["maxRelErr"]["hook"] <= 1e-8
        assert report.extras["maxRelErr"]["quadrature"] <= 1e-8
        assert report.extras["c1"] <= report.extras["c2"]
        assert grid.size == report.trials == 241

    def test_example_one_is_finite(self):
        report = run_example(1)
        assert report.passed and math.isfinite(report.extras["supRatio"])

    def test_bad_example_id(self):
        with pytest.raises(ValueError):
            run_example(3)


class TestEmit:
    def test_step_rows_mark_left_limits(self, two_atoms):
        text = emit_curve(mu_of_profile(two_atoms), 5, (0.5, 4))
        rows = text.splitlines()
        assert rows[0] == "t,value"
        assert "1-,3" in rows and "1,1" in rows
        assert "2-,1" in rows and "2,0" in rows

    def test_zero_function(self):
        rows = emit_curve(StepFunction.zero(), 7, (0.1, 10)).splitlines()[1:]
        assert len(rows) == 7 and all(float(r.split(",")[1]) == 0 for r in rows)

    def test_cesaro_continuous_at_support_end(self, two_atoms):
        c = cesaro(mu_of_profile(two_atoms))
        rows = dict(r.split(",") for r in emit_curve(c, 9, (0.5, 8)).splitlines()[1:])
        assert "2-" not in rows
        assert float(rows["2"]) == pytest.approx(2.0, rel=1e-12)
        assert float(rows["2"]) == pytest.approx(float(c(2 - 1e-13)), rel=1e-12)

    def test_profile_input(self, two_atoms):
        assert emit_curve(two_atoms, 3, (0.5, 4)) == emit_curve(mu_of_profile(two_atoms), 3, (0.5, 4))

    @pytest.mark.parametrize("rng", [(0.0, 1.0), (-1.0, 2.0), (2.0, 1.0)])
    def test_bad_range(self, two_atoms, rng):
        with pytest.raises(ValueError):
            emit_curve(two_atoms, 5, rng)


class TestCommandLine:
    def test_mu(self, profile_file, capsys):
        assert cli.main(["mu", "--in", profile_file]) == 0
        assert capsys.readouterr().out == "t,v\n1,3\n2,1\n"

    def test_maximal_point(self, profile_file, capsys):
        assert cli.main(["maximal", "--in", profile_file, "--point", "1"]) == 0
        assert json.loads(capsys.readouterr().out) == {"value": 2.0, "witnessRadius": 2.0}

    def test_maximal_operator(self, profile_file, capsys):
        assert cli.main(["maximal", "--in", profile_file, "--operator"]) == 0
        assert load_profile(capsys.readouterr().out) == profile([(3, 1), (2, 1)])

    def test_maximal_needs_mode(self, profile_file, capsys):
        assert cli.main(["maximal", "--in", profile_file]) == 2
        assert "error" in capsys.readouterr().err

    def test_cesaro(self, profile_file, capsys):
        assert cli.main(["cesaro", "--in", profile_file, "--points", "1.5,4"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "t,value"
        assert float(out[1].split(",")[1]) == pytest.approx(7 / 3, rel=1e-15)
        assert float(out[2].split(",")[1]) == 1.0

    @pytest.mark.parametrize("space, expected", [
        ("lp:p=2", math.sqrt(10)), ("lpq:p=2,q=2", math.sqrt(10)), ("l1plusinf", 3.0),
        ("l1capinf", 4.0), ("weakl1", 3.0), ("lorentz:phi=power:1", 4.0),
        ("marcinkiewicz:psi=minone", 3.0), ("lpq:p=1,q=inf", 3.0),
    ])
    def test_norm(self, profile_file, capsys, space, expected):
        assert cli.main(["norm", "--in", profile_file, "--space", space]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("space", ["lp", "banach", "lorentz:power:1", "lorentz:phi=sqrt"])
    def test_norm_bad_space(self, profile_file, space):
        assert cli.main(["norm", "--in", profile_file, "--space", space]) == 2

    def test_missing_input(self, tmp_path):
        assert cli.main(["mu", "--in", str(tmp_path / "absent.json")]) == 2

    def test_malformed_input(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"atoms":[{"value":-1,"weight":1}]}')
        assert cli.main(["mu", "--in", str(bad)]) == 2

    def test_check_writes_report(self, tmp_path):
        out = tmp_path / "r.json"
        assert cli.main(["check", "oracle-mu", "--trials", "20", "--seed", "5", "--out", str(out)]) == 0
        d = json.loads(out.read_text())
        assert d["passed"] and d["suite"] == "oracle-mu" and d["seed"] == 5

    def test_check_violation_exit_code(self, monkeypatch, tmp_path):
        monkeypatch.setitem(SUITES, "broken", lambda seed, i: Trial(
            2.0, {}, [{"trialIndex": i, "witness": None, "lhs": 2.0, "rhs": 1.0, "input": {}}]))
        # subcommand choices are read from SUITES when the parser is built
        out = tmp_path / "r.json"
        assert cli.main(["check", "broken", "--trials", "2", "--out", str(out)]) == 1
        assert json.loads(out.read_text())["passed"] is False

    def test_check_unknown_suite_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["check", "nope"])
        assert exc.value.code == 2

    def test_example(self, capsys):
        assert cli.main(["example", "2", "--points", "41"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["suite"] == "example-2" and d["extras"]["grid"]["points"] == 41

    def test_emit(self, profile_file, capsys):
        assert cli.main(["emit", "ma", "--in", profile_file, "--points", "3",
                         "--grid-min", "0.5", "--grid-max", "4"]) == 0
        assert "1-,3" in capsys.readouterr().out

    def test_emit_bad_range(self, profile_file):
        assert cli.main(["emit", "mu", "--in", profile_file, "--grid-min", "0"]) == 2

    def test_module_entry_point(self, profile_file):
        proc = subprocess.run([sys.executable, "-m", "ncmax", "maximal", "--in", profile_file,
                               "--point", "0"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout) == {"value": 2.0, "witnessRadius": 3.0}
