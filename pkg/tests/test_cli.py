"""
Unit tests for documents, run reports and the command-line front end
"""

import json

import pytest
from typer.testing import CliRunner

from novarch.cli import app, build_model, run_subcommand
from novarch.config import reset_settings
from novarch.errors import InvariantError, ParseError, SchemaError
from novarch.io.documents import document_from_complex, emit, parse_complex
from novarch.models.cp1 import cp1_model
from novarch.spectral.hausdorff import Verdict

runner = CliRunner()


def document(generators, differential, **extra):
    data = {"version": "novarch/1", "precision": "10", "hbar": "1", "generators": generators,
            "differential": differential}
    data.update(extra)
    return json.dumps(data)


@pytest.fixture
def pair_text():
    """d x = T^2 y with action 1 on y."""
    return document(
        [{"name": "x", "degree": 0}, {"name": "y", "degree": 1, "action": "1"}],
        [{"from": "x", "to": "y", "terms": [["2", "1"]]}],
    )


@pytest.fixture
def deformed_text():
    return document(
        [{"name": n, "degree": k} for n, k in (("u", 0), ("a", 0), ("v", 1), ("b", 1))],
        [
            {"from": "a", "to": "b", "terms": [["0", "1"]]},
            {"from": "u", "to": "v", "terms": [["1", "1"]]},
            {"from": "u", "to": "b", "terms": [["1", "1"]]},
        ],
    )


@pytest.fixture
def fresh_settings():
    """Settings re-read from the environment before and after the test."""
    reset_settings()
    yield
    reset_settings()


class TestDocuments:

    def test_parse(self, pair_text):
        """Test a minimal document becomes a complex."""
        c = parse_complex(pair_text).to_complex()
        assert c.basis.names == ["x", "y"]
        assert c.hbar == 1

    def test_duplicate_name(self):
        """Test a repeated generator name is located by pointer."""
        text = document([{"name": "x", "degree": 0}, {"name": "x", "degree": 1}], [])
        with pytest.raises(SchemaError) as err:
            parse_complex(text)
        assert err.value.pointer == "/generators/1/name"

    def test_float_rejected(self):
        """Test valuations must be exact."""
        text = document([{"name": "x", "degree": 0, "action": 0.5}], [])
        with pytest.raises(SchemaError) as err:
            parse_complex(text)
        assert err.value.pointer == "/generators/0/action"

    def test_unknown_field(self, pair_text):
        """Test unknown fields fail in strict mode and are dropped in lax mode."""
        data = json.loads(pair_text)
        data["comment"] = "scratch"
        text = json.dumps(data)
        with pytest.raises(SchemaError) as err:
            parse_complex(text, strict=True)
        assert err.value.pointer == "/comment"
        assert parse_complex(text, strict=False).to_complex().rank == 2

    def test_invalid_json(self):
        """Test malformed text is a parse error."""
        with pytest.raises(ParseError):
            parse_complex("{not json")
        with pytest.raises(ParseError):
            parse_complex("[]")

    def test_unknown_generator(self):
        """Test a triplet naming a missing generator is refused."""
        text = document([{"name": "x", "degree": 0}], [{"from": "x", "to": "w", "terms": [["0", "1"]]}])
        with pytest.raises(InvariantError):
            parse_complex(text)

    def test_not_floer_type(self):
        """Test a differential that lowers the degree is refused."""
        text = document(
            [{"name": "x", "degree": 1}, {"name": "y", "degree": 0}],
            [{"from": "x", "to": "y", "terms": [["0", "1"]]}],
        )
        with pytest.raises(InvariantError) as err:
            parse_complex(text)
        assert err.value.witness.startswith("degree")

    def test_emit_is_canonical(self, pair_text):
        """Test emitting a parsed document is stable."""
        once = emit(parse_complex(pair_text))
        assert emit(parse_complex(once)) == once

    def test_model_document(self):
        """Test a cp1 document keeps its metadata and generators."""
        model = cp1_model("3/5", 4)
        doc = parse_complex(emit(document_from_complex(model.complex, 10, model.metadata())))
        assert doc.model["family"] == "cp1"
        assert doc.to_complex().rank == 8
        assert doc.grading_modulus == 2


class TestRunSubcommand:

    def test_unknown_subcommand(self):
        """Test an unknown name is a usage error."""
        report = run_subcommand("bogus")
        assert report.exit_code == 2
        assert report.error["error"] == "UsageError"

    def test_missing_input(self):
        """Test a complex subcommand without input is a usage error."""
        assert run_subcommand("depth").exit_code == 2

    def test_parse_failure(self):
        """Test unreadable input exits with 3."""
        report = run_subcommand("depth", {}, "not json")
        assert report.exit_code == 3
        assert report.error["family"] == "io"

    def test_depth(self, pair_text):
        """Test the depth report in both lattices."""
        report = run_subcommand("depth", {"lattice": "norm"}, pair_text)
        assert report.exit_code == 0
        assert report.results["beta"] == "3"
        assert report.results["torsion"]["1"] == ["3"]
        assert report.checks == {"methods_agree": True}
        assert run_subcommand("depth", {"lattice": "relative"}, pair_text).results["beta"] == "2"

    def test_unknown_lattice(self, pair_text):
        """Test a bad lattice name is a usage error."""
        assert run_subcommand("depth", {"lattice": "sup"}, pair_text).exit_code == 2

    def test_report_is_deterministic(self, pair_text):
        """Test equal inputs give equal reports apart from timing."""
        a = run_subcommand("depth", {}, pair_text)
        b = run_subcommand("depth", {}, pair_text)
        assert a.deterministic_dump() == b.deterministic_dump()
        assert a.command == ["depth"]

    def test_hpt(self, deformed_text):
        """Test the transferred differential on homology."""
        report = run_subcommand("hpt", {}, deformed_text)
        assert report.exit_code == 0, report.error
        assert report.results["lattice"] == "norm"
        assert report.results["beta"] == "0"
        assert report.results["tau"] == "1"
        assert report.results["homology"] == ["u", "v"]
        assert report.results["d_def"][0]["from"] == "u"
        assert report.results["method_agreement"] is True
        assert report.results["sdr_check"] is True
        assert "truncation_edge" not in report.results

    def test_hpt_cp1_above_half(self):
        """Test the cp1 model at r = 3/5 is refused in the default lattice and accepted in the relative one."""
        doc, _ = build_model({"family": "cp1", "r": "3/5", "N": 8})
        report = run_subcommand("hpt", {}, emit(doc))
        assert report.exit_code == 1
        assert report.error["error"] == "PerturbationTooLarge"
        relative = run_subcommand("hpt", {"lattice": "relative"}, emit(doc))
        assert relative.exit_code == 0, relative.error
        assert relative.results["beta"] == "0"
        assert relative.results["truncation_edge"]["edge"] == {}

    def test_hpt_cp1_below_half(self):
        """Test r = 2/5 reports its truncation-edge classes and an invertible d_def on the rest."""
        doc, _ = build_model({"family": "cp1", "r": "2/5", "N": 8})
        report = run_subcommand("hpt", {}, emit(doc))
        assert report.exit_code == 0, report.error
        view = report.results["truncation_edge"]
        assert view["edge"] == {0: 2}
        assert view["transferred_rank"] == 0
        assert view["d_def_invertible"] is True

    def test_hpt_cli_refuses_above_half(self):
        """Test the hpt command exits with 1 on the cp1 model at r = 3/5."""
        doc, _ = build_model({"family": "cp1", "r": "3/5", "N": 8})
        result = runner.invoke(app, ["hpt", "-"], input=emit(doc))
        assert result.exit_code == 1
        assert json.loads(result.stdout)["error"]["error"] == "PerturbationTooLarge"

    def test_math_value_error(self):
        """Test a model the mathematics refuses is a math error, not a usage error."""
        text = json.dumps({"kind": "laurent", "n": 1, "r": "0", "degree": 3, "twist": {"exponent": "1"}})
        report = run_subcommand("rigidity", {}, text)
        assert report.exit_code == 1
        assert report.error["family"] == "math"
        assert "must be positive" in report.error["message"]

    def test_bad_flag_values(self, pair_text):
        """Test malformed or out-of-range flag values stay usage errors."""
        assert run_subcommand("depth", {"precision": "ten"}, pair_text).exit_code == 2
        assert run_subcommand("depth", {"precision": "-1"}, pair_text).exit_code == 2
        assert run_subcommand("hpt", {"hbar": "0"}, pair_text).exit_code == 2
        assert run_subcommand("model", {"family": "cp1", "r": "3/2"}).exit_code == 2
        assert run_subcommand("ss", {"r_max": 0}, pair_text).exit_code == 2

    def test_ss(self, deformed_text):
        """Test tau from the spectral sequence matches the transfer."""
        report = run_subcommand("ss", {}, deformed_text)
        assert report.error is None
        assert report.results["tau"] == "1"
        assert "hausdorff" not in report.results

    def test_ss_cp1_diagnostic(self):
        """Test a cp1 document triggers the Hausdorff diagnostic."""
        doc, checks = build_model({"family": "cp1", "r": "3/5", "N": 6})
        assert checks["floer_type"]
        report = run_subcommand("ss", {}, emit(doc))
        assert report.error is None
        assert report.results["hausdorff"] == Verdict.DIVERGES.value

    def test_tau(self):
        """Test tau values, concavity and the dual cone from a flux document."""
        text = json.dumps({
            "m": 2, "w0": ["1", "1"], "boundary": [[1, -1]],
            "polytope_vertices": [["-1/2"], ["1/2"]],
            "classes": [[1, 0], [0, 1]],
            "at": [["0"], ["1/2"]],
        })
        report = run_subcommand("tau", {"seed": 1, "pairs": 50}, text)
        assert report.exit_code == 0, report.error
        assert report.results["values"] == {"0": "1", "1/2": "1/2"}
        generators = report.results["dual_cone"]["generators"]
        assert sorted(generators) == [[-1, 3], [3, -1]]

    def test_rigidity(self):
        """Test the Tate isomorphism from a model document."""
        text = json.dumps({"kind": "tate", "n": 1, "degree": 3, "precision": "10", "twist": {"exponent": "1"}})
        report = run_subcommand("rigidity", {}, text)
        assert report.exit_code == 0, report.error
        assert report.results["distance_from_identity"] == "1"
        assert all(report.checks.values())

    def test_rigidity_schema(self):
        """Test an unknown model kind is a schema error."""
        text = json.dumps({"kind": "disc", "twist": {"exponent": "1"}})
        assert run_subcommand("rigidity", {}, text).exit_code == 3


class TestCommandLine:

    def test_depth_file(self, tmp_path, pair_text):
        """Test the depth command on a file."""
        path = tmp_path / "pair.json"
        path.write_text(pair_text, encoding="utf-8")
        result = runner.invoke(app, ["depth", str(path)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["results"]["beta"] == "3"

    def test_table_output(self, tmp_path, pair_text):
        """Test the table format renders."""
        path = tmp_path / "pair.json"
        path.write_text(pair_text, encoding="utf-8")
        result = runner.invoke(app, ["depth", str(path), "--format", "table"])
        assert result.exit_code == 0
        assert "beta" in result.output

    def test_stdin(self, pair_text):
        """Test '-' reads the document from stdin."""
        result = runner.invoke(app, ["depth", "-", "--lattice", "relative"], input=pair_text)
        assert result.exit_code == 0
        assert json.loads(result.stdout)["results"]["beta"] == "2"

    def test_missing_file(self, tmp_path):
        """Test an unreadable path exits with 3."""
        result = runner.invoke(app, ["depth", str(tmp_path / "absent.json")])
        assert result.exit_code == 3

    def test_model(self):
        """Test the model command prints a complex document."""
        result = runner.invoke(app, ["model", "cp1", "--r", "3/5", "--n", "4"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.stdout)
        assert doc["model"]["family"] == "cp1"
        assert len(doc["generators"]) == 8

    def test_unknown_family(self):
        """Test an unknown model family exits with 2."""
        result = runner.invoke(app, ["model", "sphere"])
        assert result.exit_code == 2

    def test_schema_setting(self, monkeypatch, fresh_settings, pair_text):
        """Test NOVARCH_STRICT_SCHEMA=false lets the commands drop unknown fields."""
        data = json.loads(pair_text)
        data["comment"] = "scratch"
        text = json.dumps(data)
        assert runner.invoke(app, ["depth", "-"], input=text).exit_code == 3
        monkeypatch.setenv("NOVARCH_STRICT_SCHEMA", "false")
        reset_settings()
        result = runner.invoke(app, ["depth", "-"], input=text)
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["results"]["beta"] == "3"

    def test_precision_flag(self, pair_text):
        """Test a bad --precision is refused before the document is read."""
        result = runner.invoke(app, ["depth", "-", "--precision", "0"], input=pair_text)
        assert result.exit_code == 2
