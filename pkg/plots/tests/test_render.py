from pathlib import Path

import pytest

from seqstop_plots import FigureSpec, SchemaError, render
from seqstop_plots.cli import main as render_cli


class TestKinds:
    @pytest.mark.parametrize("kind,source,extra", [
        ("stage-metric", "summary.csv", {"metric": "auc"}),
        ("total-cost", "stopping.csv", {}),
        ("drift-deciles", "drift.csv", {}),
        ("projection", "projection.csv", {}),
    ])
    @pytest.mark.parametrize("study", ["bcw", "cleveland", "pima", "eicu"])
    def test_renders_every_kind_for_every_study(self, results_dir, tmp_path,
                                                kind, source, extra, study):
        out = tmp_path / f"{study}_{kind}.png"
        result = render(FigureSpec(kind=kind, source=results_dir / source,
                                   out=out, study=study, **extra))
        assert result.path == out
        assert out.stat().st_size > 0

    def test_total_cost_marks_expected_minima(self, results_dir, tmp_path):
        expected = {"bcw": "F3", "cleveland": "F2", "pima": "F1", "eicu": "F3"}
        for study, stage in expected.items():
            result = render(FigureSpec(kind="total-cost",
                                       source=results_dir / "stopping.csv",
                                       out=tmp_path / f"{study}.png",
                                       study=study))
            assert result.annotations["marked_stage"] == stage, study

    def test_bar_heights_equal_csv_values(self, results_dir, tmp_path):
        result = render(FigureSpec(kind="total-cost",
                                   source=results_dir / "stopping.csv",
                                   out=tmp_path / "c.png", study="cleveland"))
        assert result.annotations["totals"] == [0.486, 0.444, 0.476]


class TestDeterminism:
    def test_same_inputs_identical_bytes(self, results_dir, tmp_path):
        spec_a = FigureSpec(kind="total-cost",
                            source=results_dir / "stopping.csv",
                            out=tmp_path / "a.png", study="bcw")
        spec_b = FigureSpec(kind="total-cost",
                            source=results_dir / "stopping.csv",
                            out=tmp_path / "b.png", study="bcw")
        a = render(spec_a).path.read_bytes()
        b = render(spec_b).path.read_bytes()
        assert a == b


class TestErrors:
    def test_missing_column_named(self, results_dir, tmp_path):
        broken = tmp_path / "broken.csv"
        text = (results_dir / "stopping.csv").read_text()
        broken.write_text(text.replace("total_cost", "grand_total"))
        with pytest.raises(SchemaError, match="total_cost"):
            render(FigureSpec(kind="total-cost", source=broken,
                              out=tmp_path / "x.png"))

    def test_empty_drift_file_no_image(self, results_dir, tmp_path):
        empty = tmp_path / "drift.csv"
        header = (results_dir / "drift.csv").read_text().splitlines()[0]
        empty.write_text(header + "\n")
        out = tmp_path / "drift.png"
        with pytest.raises(SchemaError, match="no data rows"):
            render(FigureSpec(kind="drift-deciles", source=empty, out=out))
        assert not out.exists()

    def test_unknown_study(self, results_dir, tmp_path):
        with pytest.raises(SchemaError, match="not present"):
            render(FigureSpec(kind="total-cost",
                              source=results_dir / "stopping.csv",
                              out=tmp_path / "x.png", study="framingham"))

    def test_unknown_kind(self, results_dir, tmp_path):
        with pytest.raises(ValueError, match="figure kind"):
            FigureSpec(kind="pie", source=results_dir / "stopping.csv",
                       out=tmp_path / "x.png")


class TestCli:
    def test_renders_and_reports_minimum(self, results_dir, tmp_path, capsys):
        out = tmp_path / "cost.png"
        code = render_cli(["--kind", "total-cost",
                           "--in", str(results_dir / "stopping.csv"),
                           "--out", str(out), "--study", "cleveland"])
        assert code == 0
        assert "minimum at F2" in capsys.readouterr().out
        assert out.exists()

    def test_schema_error_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        code = render_cli(["--kind", "total-cost", "--in", str(missing),
                           "--out", str(tmp_path / "x.png")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestAgainstLiveHarnessOutput:
    def test_renders_from_real_emitted_files(self, tmp_path):
        seqstop = pytest.importorskip("seqstop")
        from seqstop import harness

        repo = Path(__file__).resolve().parents[2]
        config = repo / "configs" / "studies.yaml"
        if not config.exists():
            pytest.skip("primary package configs not available")
        cfgs = harness.load_study_configs(config)
        if not Path(cfgs["bcw"].source).exists():
            pytest.skip("bcw source csv absent")
        art = harness.run_study(cfgs["bcw"], n_reps=4)
        out_dir = tmp_path / "live"
        harness.emit_reports(art, out_dir)
        for kind, source in [("stage-metric", "summary.csv"),
                             ("total-cost", "stopping.csv"),
                             ("drift-deciles", "drift.csv"),
                             ("projection", "projection.csv")]:
            result = render(FigureSpec(kind=kind, source=out_dir / source,
                                       out=tmp_path / f"{kind}.png"))
            assert result.path.exists()
