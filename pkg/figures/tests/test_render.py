import pytest

pytest.importorskip("leosim_figures")

from leosim_figures import cli
from leosim_figures.render import FigureJob, RenderError, render

FIG3 = (
    "p,n,link_class,carrier_ghz,p95_delay_ms,p95_doppler_khz,samples,low_sample_flag\n"
    "7,20,gsl,30,3.58,595.2,1000,0\n"
    "7,20,intra_isl,30,7.34,0,140,0\n"
    "12,40,gsl,30,3.58,470.4,1000,0\n"
    "12,40,intra_isl,30,3.71,0,480,0\n"
)

FIG4 = (
    "p,n,link_class,carrier_ghz,median_rate_mbps,p95_rate_mbps,samples,low_sample_flag\n"
    "7,20,gsl_downlink,20,1258,1576,1000,0\n"
    "7,20,intra_isl,30,225,227,140,0\n"
)

FIG5 = (
    "beta_deg,tx_power_dbm,t_s,elevation_deg,distance_km,se_bps_hz\n"
    + "\n".join(
        f"{beta},{ptx},{t},45,800,{se + t / 100}"
        for beta, ptx, se in ((0, 30, 6.0), (0, 50, 13.0), (4, 30, 5.5), (4, 50, 12.3))
        for t in (0, 60, 120)
    )
    + "\n"
)

FIG6 = (
    "n_s,sum_eirp_dbw,rate_bps_hz\n"
    + "\n".join(f"{n},{e},{n + e / 10}" for n in (1, 2, 6) for e in (30, 35, 40))
    + "\n"
)

FIG7 = (
    "k,scheme,p,n,mean_rate_bps,p5_rate_bps,p95_rate_bps\n"
    + "\n".join(f"{k},ofdma,7,20,{k * 1e6},{k * 5e5},{k * 2e6}" for k in range(1, 9))
    + "\n"
    + "\n".join(f"{k},cdma,7,20,{k * 1.1e6},{k * 5e5},{k * 2e6}" for k in (1, 2, 3, 4, 8))
    + "\n"
)

PAYLOADS = {"fig3": FIG3, "fig4": FIG4, "fig5": FIG5, "fig6": FIG6, "fig7": FIG7}


def write_csv(tmp_path, figure_id, text=None):
    path = tmp_path / f"{figure_id}.csv"
    path.write_text(text if text is not None else PAYLOADS[figure_id])
    return str(path)


class TestRender:
    @pytest.mark.parametrize("figure_id", sorted(PAYLOADS))
    def test_renders_nonempty_image(self, tmp_path, figure_id):
        out = tmp_path / f"{figure_id}.svg"
        render(FigureJob(write_csv(tmp_path, figure_id), figure_id, str(out)))
        assert out.exists()
        assert out.stat().st_size > 1000

    def test_axis_labels_carry_units(self, tmp_path):
        out = tmp_path / "fig5.svg"
        render(FigureJob(write_csv(tmp_path, "fig5"), "fig5", str(out)))
        svg = out.read_text()
        assert "se_bps_hz" in svg
        beta_labels = [line for line in svg.splitlines() if "beta=" in line]
        assert beta_labels  # four labelled series in the legend
        assert svg.count("beta=") >= 4

    def test_missing_column_named(self, tmp_path):
        broken = FIG5.replace("se_bps_hz", "se")
        path = write_csv(tmp_path, "fig5", broken)
        with pytest.raises(RenderError, match="se_bps_hz"):
            render(FigureJob(path, "fig5", str(tmp_path / "x.svg")))
        assert not (tmp_path / "x.svg").exists()

    def test_empty_rows_rejected(self, tmp_path):
        header_only = FIG6.splitlines()[0] + "\n"
        path = write_csv(tmp_path, "fig6", header_only)
        with pytest.raises(RenderError, match="no data rows"):
            render(FigureJob(path, "fig6", str(tmp_path / "y.svg")))
        assert not (tmp_path / "y.svg").exists()

    def test_fig7_cdma_series_power_of_two_only(self, tmp_path):
        out = tmp_path / "fig7.svg"
        render(FigureJob(write_csv(tmp_path, "fig7"), "fig7", str(out)))
        svg = out.read_text()
        assert "cdma" in svg and "ofdma" in svg
        # The K=3 CDMA row must be dropped: the dashed CDMA polyline has one
        # vertex per feasible K only.
        assert "3300000" not in svg  # 3 * 1.1e6 would only appear if plotted

    def test_rerender_byte_identical(self, tmp_path):
        path = write_csv(tmp_path, "fig3")
        out_a = tmp_path / "a.svg"
        out_b = tmp_path / "b.svg"
        render(FigureJob(path, "fig3", str(out_a)))
        render(FigureJob(path, "fig3", str(out_b)))
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_invalid_job(self, tmp_path):
        with pytest.raises(RenderError):
            FigureJob("x.csv", "fig9", "y.svg")
        with pytest.raises(RenderError):
            FigureJob("x.csv", "fig3", "y.svg", style="fancy")

    def test_paper_style(self, tmp_path):
        out = tmp_path / "paper.svg"
        render(FigureJob(write_csv(tmp_path, "fig6"), "fig6", str(out), style="paper"))
        assert out.stat().st_size > 1000


class TestCli:
    def test_happy_path(self, tmp_path, capsys):
        path = write_csv(tmp_path, "fig3")
        out = tmp_path / "fig3.svg"
        code = cli.main(["render", "--figure", "fig3", "--in", path, "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert "fig3.svg" in capsys.readouterr().out

    def test_schema_mismatch_exit_code(self, tmp_path, capsys):
        path = write_csv(tmp_path, "fig3", FIG3.replace("p95_delay_ms", "delay"))
        code = cli.main(["render", "--figure", "fig3", "--in", path, "--out", str(tmp_path / "o.svg")])
        assert code == 1
        assert "p95_delay_ms" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = cli.main(
            ["render", "--figure", "fig4", "--in", str(tmp_path / "nope.csv"), "--out", "o.svg"]
        )
        assert code == 1
        assert "nope.csv" in capsys.readouterr().err

    def test_unknown_figure_exit_code(self, tmp_path):
        assert cli.main(["render", "--figure", "fig9", "--in", "x", "--out", "y"]) == 1

    def test_version(self, capsys):
        assert cli.main(["version"]) == 0
        assert capsys.readouterr().out.strip()

    def test_end_to_end_with_simulator_output(self, tmp_path):
        leosim_cli = pytest.importorskip("leosim.cli")
        config = tmp_path / "config.json"
        config.write_text(
            '{"constellation": {"p": 3, "n": 4},'
            ' "experiment": {"name": "fig5_pass", "pass_step_s": 5.0, "users": 50}}'
        )
        out = tmp_path / "out"
        assert leosim_cli.main(["run", "fig5", "--config", str(config), "--out", str(out)]) == 0
        code = cli.main(
            ["render", "--figure", "fig5", "--in", str(out / "fig5.csv"), "--out", str(out / "fig5.svg")]
        )
        assert code == 0
        assert (out / "fig5.svg").stat().st_size > 1000
