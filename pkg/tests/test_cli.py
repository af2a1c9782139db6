import csv
import io
import subprocess
import sys

import pytest

from pwrc.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def data_args(paths):
    s, p, pol = paths
    return ["--scores", s, "--preds", p, "--polarity", pol]


def table(text):
    return list(csv.DictReader(io.StringIO(text), delimiter="\t"))


def test_eval_porcelain(tiny_csvs, capsys):
    code, out, _ = run(["eval", *data_args(tiny_csvs), "--tmin", "0", "--tmax", "10", "--porcelain"], capsys)
    assert code == 0
    rows = table(out)
    assert [r["metric"] for r in rows] == ["psnr", "dist"]
    for r in rows:
        # both metrics order the three items perfectly
        assert float(r["SRCC"]) == pytest.approx(1.0)
        assert float(r["KRCC"]) == pytest.approx(1.0)


def test_eval_auto_bounds_from_stddevs(tiny_csvs, capsys):
    code, out, _ = run(["auc", *data_args(tiny_csvs), "--tmin", "auto", "--porcelain"], capsys)
    assert code == 0
    row = table(out)[0]
    # pool range 15, stddevs 1..3 -> normalized 20/3..20, doubled
    assert float(row["tmin"]) == pytest.approx(40 / 3)
    assert float(row["tmax"]) == pytest.approx(40.0)


def test_tau_reduction_end_to_end(bundled, capsys):
    args = ["eval", *data_args(bundled.values()), "--uniform-weights", "--constant-activation", "--porcelain"]
    code, out, _ = run(args, capsys)
    assert code == 0
    for r in table(out):
        assert float(r["PWRC"]) == pytest.approx(float(r["KRCC"]), abs=1e-12)


def test_tied_mos_rejected_under_strict(tmp_path, tiny_csvs, capsys):
    s, p, pol = tiny_csvs
    s.write_text("id,score,stddev,group,polarity\na,10,2,g,mos\nb,10,1,g,mos\nc,5,3,g,mos\n")
    code, _, err = run(["eval", *data_args((s, p, pol))], capsys)
    assert code == 2
    assert "a" in err and "b" in err
    code, _, _ = run(["eval", *data_args((s, p, pol)), "--tie-policy", "stable"], capsys)
    assert code == 0


def test_exit_codes(tmp_path, tiny_csvs, capsys):
    s, p, pol = tiny_csvs
    assert run(["eval", *data_args((tmp_path / "nope.csv", p, pol))], capsys)[0] == 3
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--scores", str(s)])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    s.write_text("id,score,stddev,group,polarity\na,1,2,g,mos\nb,2,2,g,mos\nc,3,2,g,mos\n")
    code, _, err = run(["auc", *data_args((s, p, pol))], capsys)
    assert code == 4
    assert "zero-width" in err
    p.write_text("id,psnr,dist\na,1,1\n")
    assert run(["eval", *data_args((s, p, pol))], capsys)[0] == 2


def test_curve_outputs(tiny_csvs, tmp_path, capsys):
    out_dir = tmp_path / "curves"
    code, _, _ = run(["curve", *data_args(tiny_csvs), "--out", out_dir, "--metric", "psnr"], capsys)
    assert code == 0
    assert sorted(p.name for p in out_dir.iterdir()) == ["curve_psnr.csv", "curves.svg"]
    rows = list(csv.DictReader(open(out_dir / "curve_psnr.csv")))
    assert len(rows) == 20
    assert float(rows[0]["T"]) == 0.0 and float(rows[-1]["T"]) == 100.0
    code, _, _ = run(["curve", *data_args(tiny_csvs), "--out", out_dir, "--grid", "0:50:6"], capsys)
    assert len(list(csv.DictReader(open(out_dir / "curve_dist.csv")))) == 6
    assert run(["curve", *data_args(tiny_csvs), "--out", out_dir, "--metric", "nope"], capsys)[0] == 2


def test_compare_matrix(bundled, tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    code, _, _ = run(["compare", *data_args(bundled.values()), "--out", out], capsys)
    assert code == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["indicator", "SRCC", "KRCC", "AUCca", "dMOS"]
    for k, row in enumerate(rows[1:], start=1):
        assert row[k] == "0"


def test_config_file_and_flag_precedence(tiny_csvs, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("constant_activation = true\nuniform_weights = yes\ntmin = 0\ntmax = 10\n")
    code, out, _ = run(["eval", *data_args(tiny_csvs), "--config", cfg, "--porcelain"], capsys)
    assert code == 0
    assert all(float(r["PWRC"]) == pytest.approx(1.0) for r in table(out))
    cfg.write_text("samples = lots\n")
    assert run(["eval", *data_args(tiny_csvs), "--config", cfg], capsys)[0] == 2


def test_split_run_files_and_determinism(bundled, tmp_path, capsys):
    base = ["split-run", *data_args(bundled.values()), "--trials", "8", "--seed", "5"]
    assert run([*base, "--out", tmp_path / "a"], capsys)[0] == 0
    assert run([*base, "--out", tmp_path / "b", "--jobs", "3"], capsys)[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(
        ["trials.csv", "medians.csv", "disagreements.csv", "curves.svg"]
        + [f"curve_{m}.csv" for m in ("fidelity", "coarse", "top_blind", "distortion")]
    )
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    trials = list(csv.DictReader(open(tmp_path / "a" / "trials.csv")))
    assert len(trials) == 8 * 4


def test_synth_enumeration(capsys):
    code, out, _ = run(["synth", "--scores", "5,10,20,35,55", "--enumerate-permutations", "--porcelain"], capsys)
    assert code == 0
    rows = table(out)
    assert len(rows) == 120
    first = rows[0]
    assert first["q"] == "1 2 3 4 5" and first["L"] == "0"
    assert float(first["dMOS"]) == pytest.approx(31.25)
    assert float(rows[-1]["dMOS"]) == pytest.approx(-31.25)
    assert run(["synth", "--scores", "1,1,2", "--enumerate-permutations"], capsys)[0] == 2
    assert run(["synth", "--scores", "1,2,3", "--n", "4", "--enumerate-permutations"], capsys)[0] == 2


def test_synth_panel_and_dataset(tmp_path, capsys):
    code, out, _ = run(["synth", "--scores", "20,60", "--stddevs", "5,8", "--subjects", "30", "--porcelain"], capsys)
    assert code == 0 and len(table(out)) == 2
    assert run(["synth", "--scores", "20,60", "--stddevs", "5,8"], capsys)[0] == 2
    code, _, _ = run(["synth", "--dataset", tmp_path / "d", "--groups", "3", "--per-group", "2"], capsys)
    assert code == 0
    assert len((tmp_path / "d" / "scores.csv").read_text().splitlines()) == 7


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "pwrc.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("pwrc ")
