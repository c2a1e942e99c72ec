import os
import subprocess
import sys

import numpy as np
import pytest

from multigraphon import io as mio
from multigraphon.bench import parse_table
from multigraphon.cli import main


@pytest.fixture
def simulated(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--kind", "f2", "--beta", "0.5", "--n", "20", "--m", "8",
               "--mode", "dynamic", "--seed", "3", "--out-dir", str(out)])
    assert rc == 0
    return out


def test_simulate_outputs(simulated):
    G = mio.read_network(str(simulated / "network.tsv"))
    assert G.A.shape == (20, 20, 8)
    assert np.allclose(mio.read_covariates(str(simulated / "covariates.tsv")), np.arange(1, 9) / 8)
    assert mio.read_spec(str(simulated / "spec.conf")).beta == 0.5


def test_simulate_is_deterministic(tmp_path):
    for d in ("a", "b"):
        main(["simulate", "--n", "10", "--m", "3", "--seed", "9", "--out-dir", str(tmp_path / d)])
    assert (tmp_path / "a" / "network.tsv").read_bytes() == (tmp_path / "b" / "network.tsv").read_bytes()


def test_distance_and_embed(simulated, tmp_path):
    out = str(tmp_path / "o")
    assert main(["distance", "--network", str(simulated / "network.tsv"), "--out-dir", out]) == 0
    D = mio.read_distance(os.path.join(out, "distance.txt"))
    assert D.n == 20
    assert main(["embed", "--distance", os.path.join(out, "distance.txt"), "--restarts", "2",
                 "--out-dir", out]) == 0
    pos = mio.read_positions(os.path.join(out, "embedding.tsv"))
    assert pos.min() == pytest.approx(1 / 21) and pos.max() == pytest.approx(20 / 21)


@pytest.mark.parametrize("regime", ["auto", "standard", "replicated", "per_edge", "per_network"])
def test_fit_regimes(simulated, tmp_path, regime):
    out = str(tmp_path / regime)
    rc = main(["fit", "--network", str(simulated / "network.tsv"), "--covariates",
               str(simulated / "covariates.tsv"), "--positions", str(simulated / "x.tsv"),
               "--regime", regime, "--out-dir", out])
    assert rc == 0
    P, netpos, _, _ = mio.read_fit(out)
    assert P.shape == (20, 20, 8) and np.all((P >= 0) & (P <= 1))


@pytest.mark.parametrize("method", ["usvt", "nbs", "local_linear"])
def test_fit_methods(simulated, tmp_path, method):
    out = str(tmp_path / method)
    rc = main(["fit", "--network", str(simulated / "network.tsv"), "--method", method,
               "--restarts", "2", "--out-dir", out])
    assert rc == 0
    assert mio.read_fit(out)[0].shape == (20, 20, 8)


def test_fit_with_config_file(simulated, tmp_path):
    conf = tmp_path / "fit.conf"
    conf.write_text(f"network={simulated / 'network.tsv'}\nkernel=gaussian\nbw-x=0.3\nrestarts=2\n")
    out = str(tmp_path / "o")
    assert main(["fit", "--config", str(conf), "--bw-x", "0.25", "--out-dir", out]) == 0
    settings = mio.read_fit(out)[3]
    assert settings["kernel"] == "gaussian"
    assert float(settings["bandwidth_x"]) == 0.25  # the flag wins over the file


@pytest.mark.parametrize("text", ["kernel=box\n", "colour=red\n", "bw-x=wide\n", "restarts=two\n"])
def test_bad_config_exits_2(simulated, tmp_path, text):
    conf = tmp_path / "bad.conf"
    conf.write_text(f"network={simulated / 'network.tsv'}\n" + text)
    assert main(["fit", "--config", str(conf), "--out-dir", str(tmp_path)]) == 2


def test_validation_errors_exit_2(tmp_path, capsys):
    assert main(["distance", "--network", str(tmp_path / "missing.tsv")]) == 2
    assert "error" in capsys.readouterr().err
    bad = tmp_path / "bad.tsv"
    bad.write_text("1 1 1\n")
    assert main(["distance", "--network", str(bad)]) == 2
    assert main(["simulate", "--kind", "f1", "--rho", "1.0", "--out-dir", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--kind", "f9"])
    assert exc.value.code == 2


def test_bench_report_and_context(tmp_path, capsys):
    out = str(tmp_path / "b")
    rc = main(["bench", "--kind", "f2", "--n", "150", "--m", "150", "--arms", "oracle_rep,usvt",
               "--reps", "2", "--with-paper-context", "--out-dir", out])
    assert rc == 0
    recs = parse_table(open(os.path.join(out, "report.tsv")).read())
    assert [r.arm for r in recs] == ["oracle_rep", "usvt", "SBA", "SAS"]
    assert [r.source for r in recs] == ["computed", "computed", "paper", "paper"]
    assert "paper" in capsys.readouterr().out


def test_bench_formats(tmp_path):
    out = str(tmp_path / "kv")
    assert main(["bench", "--n", "25", "--m", "6", "--arms", "nbs", "--reps", "2",
                 "--format", "key-value-records", "--out-dir", out]) == 0
    assert open(os.path.join(out, "report.kv")).read().startswith("scenario_id=")
    out = str(tmp_path / "hm")
    assert main(["bench", "--n", "25", "--m", "4", "--arms", "nbs", "--reps", "2", "--restarts", "2",
                 "--format", "heatmap-grid", "--out-dir", out]) == 0
    assert os.path.exists(os.path.join(out, "fhat_layer0004.pgm"))


def test_bench_bad_arm_exits_2(tmp_path):
    assert main(["bench", "--arms", "oracle2", "--out-dir", str(tmp_path)]) == 2


def test_resample_constant(tmp_path):
    out = str(tmp_path / "r")
    assert main(["resample", "--constant-p", "0.3", "--n", "30", "--B", "50", "--z", "0.2",
                 "--z", "0.8", "--out-dir", out]) == 0
    lines = open(os.path.join(out, "resample.tsv")).read().splitlines()
    assert lines[0] == "zvalue\tstatistic\tmean\tlo\thi\tskipped"
    assert len(lines) == 1 + 2 * 4
    assert main(["resample", "--constant-p", "0.3", "--out-dir", out]) == 2


def test_resample_from_network(simulated, tmp_path):
    out = str(tmp_path / "r")
    assert main(["resample", "--network", str(simulated / "network.tsv"), "--covariates",
                 str(simulated / "covariates.tsv"), "--positions", str(simulated / "x.tsv"),
                 "--B", "20", "--z", "0.5", "--out-dir", out]) == 0


def test_ci(simulated, tmp_path):
    out = str(tmp_path / "c")
    args = ["ci", "--network", str(simulated / "network.tsv"), "--covariates",
            str(simulated / "covariates.tsv"), "--positions", str(simulated / "x.tsv"),
            "--B", "20", "--zgrid", "0.2:0.8:4", "--out-dir", out]
    assert main(args + ["--pair", "1", "5"]) == 0
    rows = np.loadtxt(os.path.join(out, "ci.tsv"), skiprows=1)
    assert rows.shape == (4, 4)
    assert np.all(rows[:, 2] <= rows[:, 3])
    assert main(args + ["--pair", "1", "1"]) == 2
    assert main(args + ["--pair", "1", "5", "--zgrid", "nonsense"]) == 2


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "multigraphon.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("simulate", "distance", "embed", "fit", "bench", "resample", "ci"):
        assert cmd in r.stdout
