import json

import numpy as np
import pytest

from vbvarsel import config as cfg
from vbvarsel.cli import main
from vbvarsel.exceptions import ConfigError, DataError, NonNumericCell, RaggedRow, UnknownTable
from vbvarsel.harness import load_csv, run_experiment
from vbvarsel.reproduce import reproduce, table_ids

FAST = ["--model.k_max", "3", "--init.n_init", "1", "--model.max_iterations", "60"]
SIM = ["--simulate.n", "40", "--simulate.j_total", "12", "--simulate.frac_relevant", "0.25"]


def write(path, text):
    path.write_text(text)
    return path


def test_load_csv_with_header(tmp_path):
    d = load_csv(write(tmp_path / "a.csv", "x,y\n1,2\n\n3,4.5\n"))
    assert d.names() == ["x", "y"] and d.values.tolist() == [[1, 2], [3, 4.5]]


def test_load_csv_without_header(tmp_path):
    d = load_csv(write(tmp_path / "a.csv", "1,2\n3,4\n"))
    assert d.values.shape == (2, 2) and d.names() == ["0", "1"]


def test_load_csv_errors(tmp_path):
    with pytest.raises(RaggedRow) as info:
        load_csv(write(tmp_path / "r.csv", "a,b\n1,2\n3\n"))
    assert info.value.line == 3
    with pytest.raises(NonNumericCell) as info:
        load_csv(write(tmp_path / "n.csv", "1,2\n3,x\n"))
    assert (info.value.line, info.value.column) == (2, 2)
    with pytest.raises(NonNumericCell):
        load_csv(write(tmp_path / "nan.csv", "1,2\n3,nan\n"))
    with pytest.raises(DataError):
        load_csv(tmp_path / "missing.csv")
    with pytest.raises(DataError):
        load_csv(write(tmp_path / "empty.csv", "a,b\n"))


def test_config_file_and_flag_precedence(tmp_path):
    path = write(tmp_path / "run.cfg", "# comment\nmodel.k_max = 4\nmodel.alpha0=0.2  # inline\n")
    values = cfg.resolve(cfg.read_config_file(path), {"model.k_max": 6})
    assert values["model.k_max"] == 6 and values["model.alpha0"] == 0.2
    assert values["model.d0"] == 0.9
    with pytest.raises(ConfigError):
        cfg.read_config_file(write(tmp_path / "bad.cfg", "nonsense\n"))
    with pytest.raises(ConfigError):
        cfg.read_config_file(write(tmp_path / "bad2.cfg", "model.unknown = 1\n"))
    with pytest.raises(ConfigError):
        cfg.parse_value("model.k_max", "three")


def test_simulate_outputs(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", *SIM, "--output.dir", str(out)]) == 0
    data = load_csv(out / "data.csv")
    assert data.values.shape == (40, 12)
    labels = np.loadtxt(out / "truth_labels.csv", delimiter=",", skiprows=1)
    relevant = np.loadtxt(out / "truth_relevant.csv", delimiter=",", skiprows=1)
    assert labels.shape == (40, 2) and relevant[:, 1].sum() == 3


def test_fit_writes_artifacts(tmp_path):
    sim = tmp_path / "sim"
    main(["simulate", *SIM, "--output.dir", str(sim)])
    out = tmp_path / "fit"
    code = main([
        "fit", *FAST, "--input.path", str(sim / "data.csv"), "--truth.labels", str(sim / "truth_labels.csv"),
        "--truth.relevant", str(sim / "truth_relevant.csv"), "--output.dir", str(out),
    ])
    assert code == 0
    for name in ("assignments.csv", "selection.csv", "elbo_trace.csv", "summary.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert {"ari", "relevant_prop", "irrelevant_prop", "config"} <= set(summary)
    selection = (out / "selection.csv").read_text().splitlines()
    assert selection[0] == "covariate,c_value,selected" and selection[1].startswith("v0,")


def test_experiment_is_byte_reproducible(tmp_path):
    args = ["experiment", *FAST, *SIM, "--simulate.enabled", "true", "--run.repetitions", "2"]
    assert main([*args, "--output.dir", str(tmp_path / "a")]) == 0
    assert main([*args, "--output.dir", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "summary.json").read_text())
    b = json.loads((tmp_path / "b" / "summary.json").read_text())
    a["config"].pop("output.dir"), b["config"].pop("output.dir")
    assert a == b
    for name in ("assignments.csv", "selection.csv", "elbo_trace.csv"):
        assert (tmp_path / "a" / "rep_001" / name).read_bytes() == (tmp_path / "b" / "rep_001" / name).read_bytes()


def test_shuffle_is_undone(tmp_path):
    """Selection is reported in input column order whether or not columns are shuffled."""
    base = {
        "simulate.enabled": True, "simulate.n": 60, "simulate.j_total": 12, "simulate.frac_relevant": 0.25,
        "simulate.means": (0.0, 4.0, -4.0), "model.k_max": 3, "init.n_init": 1, "run.repetitions": 1,
    }
    shuffled = run_experiment(cfg.RunConfig(dict(base)), write=False)[1][0]
    plain = run_experiment(cfg.RunConfig({**base, "run.shuffle_covariates": False}), write=False)[1][0]
    assert shuffled.selected.tolist() == [True] * 3 + [False] * 9
    assert np.allclose(shuffled.c, plain.c, atol=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--model.k_max", "0", "--input.path", "x.csv"],
        ["fit", "--model.k_max", "many"],
        ["experiment", "--simulate.enabled", "true", "--input.path", "x.csv"],
        ["experiment"],
        ["fit", "--no-such-flag", "1"],
        ["fit", "--schedule.kind", "cubic", "--input.path", "x.csv"],
        ["reproduce", "nope"],
        [],
    ],
)
def test_config_errors_exit_1(argv, tmp_path):
    assert main([*argv, "--output.dir", str(tmp_path)] if argv and argv[0] != "reproduce" else argv) == 1


def test_data_errors_exit_2(tmp_path):
    bad = write(tmp_path / "bad.csv", "1,2\n3\n")
    assert main(["fit", "--input.path", str(bad), "--output.dir", str(tmp_path / "o")]) == 2
    const = write(tmp_path / "const.csv", "1,2\n1,3\n1,5\n")
    assert main(["fit", "--input.path", str(const), "--output.dir", str(tmp_path / "o")]) == 2
    assert main(["fit", "--input.path", str(tmp_path / "missing.csv"), "--output.dir", str(tmp_path / "o")]) == 2


def test_reproduce_unknown_table(tmp_path):
    with pytest.raises(UnknownTable):
        reproduce("99", tmp_path)
    assert "1" in table_ids() and "misspec2" in table_ids()


def test_reproduce_small_run(tmp_path):
    report = reproduce("s7", tmp_path, {"run.repetitions": 1, "init.n_init": 1})
    assert (tmp_path / "report.txt").exists() and (tmp_path / "report.json").exists()
    assert "ari" in report["text"]
