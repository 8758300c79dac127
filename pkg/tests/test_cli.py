import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from nbarrier import barrier, model, nonexistence, tangent, waves
from nbarrier.cli import RunConfig, main, run, sweep, sweep_values
from nbarrier.errors import ValidationError

SYM_ARGS = ["--alpha", "1", "--beta", "1", "--k", "1", "--a1", "2", "--a2", "2"]


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_bounds_may_leonard(capsys):
    code, out = call(capsys, "bounds", "--system", "may_leonard", "--alpha", "1,1,1")
    assert code == 0
    data = json.loads(out)
    assert data["lambda_lower"] == pytest.approx(1 / 3)
    assert data["lambda_upper"] == pytest.approx(1.0)


def test_bounds_from_file(capsys, tmp_path, bistable_pair):
    path = tmp_path / "sys.json"
    model.save_system(bistable_pair, path)
    code, out = call(capsys, "bounds", "--system", str(path), "--e-minus", "1,0", "--e-plus", "0,1")
    assert code == 0
    assert json.loads(out) == {"lambda_lower": 0.5, "lambda_upper": 1.0, "chi": 1}


def test_missing_system_file(capsys):
    code, _ = call(capsys, "bounds", "--system", "/nonexistent/sys.json")
    assert code == 2


def test_bad_arguments_exit_2(capsys):
    assert call(capsys, "bounds")[0] == 2
    assert call(capsys, "nosuchcommand")[0] == 2
    assert call(capsys, "bounds", "--system", "may_leonard", "--alpha", "1,x")[0] == 2
    assert run(RunConfig("nosuchcommand")) == 2


def test_dimension_mismatch_exit_2(capsys):
    assert call(capsys, "bounds", "--system", "may_leonard", "--alpha", "1,1")[0] == 2


def test_equilibria_and_box(capsys):
    code, out = call(capsys, "equilibria", "--system", "may_leonard")
    assert code == 0
    assert json.loads(out) == model.enumerate_equilibria(model.load_preset("may_leonard")).to_dict()
    code, out = call(capsys, "box", "--system", "may_leonard", "--check-samples", "2000", "--seed", "1")
    data = json.loads(out)
    assert code == 0 and data["hypothesis"]["holds"]
    assert call(capsys, "box", "--system", "may_leonard", "--check-samples", "10")[0] == 2


def test_barrier_command_is_thin_wrapper(capsys):
    code, out = call(capsys, "barrier", "--system", "may_leonard", "--alpha", "1,2,3")
    sys_ = model.load_preset("may_leonard")
    box = barrier.lv_box(sys_)
    assert code == 0
    assert json.loads(out) == {
        "lower": barrier.lower_barrier(box, sys_.d, [1, 2, 3]).to_dict(),
        "upper": barrier.upper_barrier(box, sys_.d, [1, 2, 3]).to_dict(),
    }


def test_tangent_with_plot(capsys, tmp_path):
    plot = tmp_path / "fig.csv"
    code, out = call(capsys, "tangent", *SYM_ARGS, "--d", "1", "--plot", str(plot))
    assert code == 0
    data = json.loads(out)
    assert data["case_id"] == "III"
    assert data["lambda2"] == pytest.approx(2 / 3, abs=1e-12)
    assert data["bounds"]["improved"] == pytest.approx(2 / 3)
    rows = list(csv.reader(plot.open()))
    assert rows[0] == ["series", "u", "v"]
    assert {r[0] for r in rows[1:]} == {"L", "lambda2", "eta", "lambda1"}


def test_tangent_containment_check(capsys):
    code, out = call(capsys, "tangent", *SYM_ARGS, "--d", "1", "--check-samples", "2000", "--seed", "0")
    data = json.loads(out)
    assert data["containment"]["at_lambda2"]["contained"]
    assert not data["containment"]["at_1.001_lambda2"]["contained"]
    assert call(capsys, "tangent", *SYM_ARGS, "--check-samples", "10")[0] == 2


def test_tangent_rejects_monostable(capsys):
    assert call(capsys, "tangent", "--alpha", "1", "--beta", "1", "--k", "1", "--a1", "0.5", "--a2", "2",
                "--d", "1")[0] == 2


def test_nonexist_exit_codes(capsys, tmp_path):
    lv4 = model.load_preset("lv4_may_leonard")
    code, out = call(capsys, "nonexist", "--system", "lv4_may_leonard", "--threshold")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "certified-nonexistent"
    assert data["sigma4_threshold"] == pytest.approx(0.25, abs=1e-9)
    assert data == {**nonexistence.check_nonexistence(lv4).to_dict(),
                    "sigma4_threshold": nonexistence.sigma4_threshold(lv4)}
    path = tmp_path / "lv4.json"
    model.save_system(lv4.replace(sigma=[1, 1, 1, 0.3]), path)
    assert call(capsys, "nonexist", "--system", str(path))[0] == 3
    assert call(capsys, "nonexist", "--system", "may_leonard")[0] == 2


def test_solve_and_verify_round_trip(capsys, tmp_path, bistable_pair):
    sys_path = tmp_path / "pair.json"
    model.save_system(bistable_pair, sys_path)
    prof_path = tmp_path / "front.csv"
    code, out = call(capsys, "solve", "--system", str(sys_path), "--e-minus", "1,0", "--e-plus", "0,1",
                     "--L", "20", "--h", "0.1", "--out", str(prof_path))
    assert code == 0
    meta = json.loads(out)
    assert meta["residual_norm"] <= 1e-10
    assert (tmp_path / "front.json").is_file()
    direct = waves.solve_wave(bistable_pair, [1, 0], [0, 1], waves.Grid(20, 0.1))
    np.testing.assert_array_equal(waves.load_profile(prof_path).values, direct.values)

    code, out = call(capsys, "verify", "--system", str(sys_path), "--profile", str(prof_path), "--barriers")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert rep["lambda_lower"] == 0.5


def test_verify_reports_violation(capsys, tmp_path, bistable_pair):
    sys_path = tmp_path / "pair.json"
    model.save_system(bistable_pair, sys_path)
    prof = waves.initial_guess([1, 0], [0, 1], waves.Grid(5, 0.1))
    bad = waves.WaveProfile(prof.grid, 0.3 * prof.values, prof.theta,
                            prof.e_minus, prof.e_plus)
    waves.save_profile(bad, tmp_path / "bad.csv")
    code, out = call(capsys, "verify", "--system", str(sys_path), "--profile", str(tmp_path / "bad.csv"))
    assert code == 4
    assert json.loads(out)["violations"]
    assert call(capsys, "verify", "--system", str(sys_path), "--profile", str(tmp_path / "none.csv"))[0] == 2


def test_solve_nonconvergence_exit_5(capsys, tmp_path, bistable_pair):
    sys_path = tmp_path / "pair.json"
    model.save_system(bistable_pair, sys_path)
    code, _ = call(capsys, "solve", "--system", str(sys_path), "--e-minus", "1,0", "--e-plus", "0,1",
                   "--L", "20", "--h", "0.1", "--max-iters", "1", "--out", str(tmp_path / "x.csv"))
    assert code == 5
    assert (tmp_path / "x.csv").is_file()


def test_solve_rejects_non_equilibrium(capsys):
    assert call(capsys, "solve", "--system", "bistable_pair", "--e-minus", "0.5,0", "--e-plus", "0,1")[0] == 2


def test_sweep_tangent_case_transitions(capsys):
    code, out = call(capsys, "sweep", "tangent", "--param", "d", "--start", "0.1", "--stop", "5", "--step", "0.01")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["d", "case_id", "lambda2", "baseline", "improved"]
    body = rows[1:]
    assert len(body) == 491
    ds = [float(r[0]) for r in body]
    assert ds == sorted(ds)
    flips = [(ds[i], body[i][1]) for i in range(1, len(body)) if body[i][1] != body[i - 1][1]]
    # thresholds at d = 1/3 and d = 3; the grid point 3.0 itself is a corner case
    assert [c for _, c in flips] == ["III", "II"]
    assert flips[0][0] == pytest.approx(0.34)
    assert 2.99 <= flips[1][0] <= 3.01


def test_sweep_nonexist_flip(capsys):
    code, out = call(capsys, "sweep", "nonexist", "--param", "sigma4", "--system", "lv4_may_leonard",
                     "--start", "0.2", "--stop", "0.3", "--step", "0.01")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    verdicts = {float(r[0]): r[1] for r in rows}
    assert verdicts[0.25] == "certified-nonexistent"
    assert verdicts[0.26] == "inconclusive"
    assert all(v == "certified-nonexistent" for s, v in verdicts.items() if s <= 0.25)


def test_sweep_single_point_and_empty(capsys):
    code, out = call(capsys, "sweep", "tangent", "--param", "d", "--start", "1", "--stop", "1", "--step", "0.1")
    assert code == 0 and len(out.strip().splitlines()) == 2
    assert call(capsys, "sweep", "tangent", "--param", "d", "--start", "2", "--stop", "1", "--step", "0.1")[0] == 2
    assert call(capsys, "sweep", "tangent", "--param", "zz", "--start", "1", "--stop", "2", "--step", "0.1")[0] == 2
    with pytest.raises(ValidationError):
        sweep_values(0, 1, 0)


def test_sweep_matches_library():
    cfg = RunConfig("sweep", None, dict(target="tangent", param="a1", start=1.5, stop=3.0, step=0.5, alpha2=1.0,
                                        beta=1.0, d=1.0, k=1.0, a1=2.0, a2=2.0))
    header, rows = sweep(cfg)
    for v, case, lam, base, imp in rows:
        p = tangent.TwoSpeciesParams(1, 1, 1, 1, v, 2)
        assert (case, lam) == (tangent.classify_case(p), tangent.tangent_lambda2(p).lambda2)
        assert base == tangent.baseline_lower_bound(p) and imp == tangent.improved_lower_bound(p)


@pytest.mark.parametrize(
    "argv",
    [
        ["tangent", *SYM_ARGS, "--d", "0.7", "--check-samples", "500", "--seed", "3"],
        ["sweep", "tangent", "--param", "k", "--start", "0.5", "--stop", "2", "--step", "0.25"],
        ["box", "--system", "may_leonard", "--check-samples", "500", "--seed", "9"],
    ],
)
def test_outputs_are_byte_identical(capsys, argv):
    first = call(capsys, *argv)
    second = call(capsys, *argv)
    assert first == second


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nbarrier", "bounds", "--system", "may_leonard"],
                          capture_output=True, text=True, env={"NBARRIER_LOG": "quiet", "PATH": ""})
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lambda_upper"] == pytest.approx(1.0)
    assert proc.stderr == ""
