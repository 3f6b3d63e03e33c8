import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from stabpath import cli_reporting as cli, qde_solver as q
from stabpath.errors import InputError
from stabpath.mutation_lattice import p1_decomposition
from stabpath.schemas import NAMES, load_schema, validate_document


def run(tmp_path, *argv):
    return cli.main([*argv, "--output-dir", str(tmp_path)])


def load(path):
    return json.loads(path.read_text())


def assert_valid(path, schema):
    validate_document(load(path), schema)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_schemas_load():
    for name in NAMES:
        assert load_schema(name)["$schema"].endswith("2020-12/schema")


@pytest.mark.parametrize("text,value", [
    ("pi/2", math.pi / 2), ("2i", 2j), ("1+2*i", 1 + 2j), ("-e", -math.e), ("3e-2", 0.03),
    ("2**3", 8), ("(1-i)/2", 0.5 - 0.5j),
])
def test_parse_number(text, value):
    assert cli.parse_number(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["__import__('os')", "x", "1/0", "inf", "[1]", ""])
def test_parse_number_rejects(text):
    with pytest.raises(InputError):
        cli.parse_number(text)


def test_p1_path_imaginary_kappa(tmp_path):
    code = run(tmp_path, "p1-path", "--b", "0", "--a", "0", "--phase", "pi/2", "--t1", "60")
    assert code == 0
    doc = load(tmp_path / "sod.json")
    assert_valid(tmp_path / "sod.json", "sod_report")
    alphas = [complex(c["alpha"]["re"], c["alpha"]["im"]) for c in doc["clusters"]]
    assert len(alphas) == 2
    assert alphas[0] == pytest.approx(-2j, abs=1e-3) and alphas[1] == pytest.approx(2j, abs=1e-3)
    assert [c["members"][0]["label"] for c in doc["clusters"]] == ["O(0)", "O(1)"]
    assert all(s["status"] == "holds" for s in doc["spanning"])
    assert doc["phase_order_witness"] is True
    rows = read_csv(tmp_path / "p1_path.csv")
    assert len(rows) == 400 and set(rows[0]) >= {"t", "tau_re", "tau_im", "k", "phi_re", "phi_im",
                                                "in_eventual_regime"}
    assert rows[-1]["in_eventual_regime"] == "true"


def test_p1_path_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "p1-path", "--phase", "pi/2") == 0
    assert (a / "sod.json").read_bytes() == (b / "sod.json").read_bytes()
    assert (a / "p1_path.csv").read_bytes() == (b / "p1_path.csv").read_bytes()


def test_p1_path_boundary_case(tmp_path, capsys):
    assert run(tmp_path, "p1-path", "--b", "0", "--a", "0") == 2
    doc = load(tmp_path / "sod.json")
    assert_valid(tmp_path / "sod.json", "sod_report")
    assert doc["clusters"] == [] and "boundary" in doc["genericity"]
    assert (tmp_path / "p1_path.csv").exists()


def test_verify_glue(tmp_path):
    assert run(tmp_path, "p1-path", "--verify-glue") == 0
    doc = load(tmp_path / "glue.json")
    assert_valid(tmp_path / "glue.json", "glue_report")
    assert doc["points"] == 100 and doc["max_residual"] < 1e-9 and doc["ok"]
    assert len(read_csv(tmp_path / "glue.csv")) == 100


def test_phase_sweep_keeps_order(tmp_path):
    phases = ["pi/2", "0", "1.2", "pi/3"]
    argv = ["p1-path", "--workers", "2"]
    for ph in phases:
        argv += ["--phase", ph]
    code = run(tmp_path, *argv)
    assert code == 2          # phase 0 is the boundary case
    doc = load(tmp_path / "sweep.json")
    assert_valid(tmp_path / "sweep.json", "sweep_report")
    assert [r["phase"] for r in doc["runs"]] == pytest.approx([math.pi / 2, 0, 1.2, math.pi / 3])
    assert [r["exit_code"] for r in doc["runs"]] == [0, 2, 0, 0]
    for i in range(4):
        assert (tmp_path / f"phase_{i:03d}" / "sod.json").exists()


def test_json_trace_format(tmp_path):
    assert run(tmp_path, "p1-path", "--phase", "pi/2", "--format", "json") == 0
    rows = load(tmp_path / "p1_path.json")
    assert len(rows) == 400 and "phi_im" in rows[0]


def test_coarse_grid_is_a_numerical_failure(tmp_path, capsys):
    # K0(2it) turns by about 2.4 rad between neighbouring samples near t = 60
    assert run(tmp_path, "p1-path", "--phase", "pi/2", "--points", "200") == 1
    assert "too coarse" in capsys.readouterr().err


def test_curve_path_canonical(tmp_path):
    assert run(tmp_path, "curve-path", "--genus", "2", "--canonical", "--theta", "0") == 0
    doc = load(tmp_path / "curve_path.json")
    assert_valid(tmp_path / "curve_path.json", "curve_path_report")
    assert doc["lifts"] and doc["limit_is_boundary"] and doc["kind"] == "canonical"
    assert doc["filtration"]
    end = complex(doc["tau_end"]["re"], doc["tau_end"]["im"])
    assert abs(end) < 1e-5
    rows = read_csv(tmp_path / "curve_path.csv")
    assert float(rows[0]["tau_im"]) > float(rows[-1]["tau_im"]) > 0


def test_curve_path_safe_and_general(tmp_path):
    assert run(tmp_path / "s", "curve-path", "--safe", "--theta", "0.7", "--tau0", "i",
               "--tau-inf", "1+2i") == 0
    assert load(tmp_path / "s" / "curve_path.json")["lifts"]
    assert run(tmp_path / "g", "curve-path", "--a=-2.3250307746388343-0.21879166393254573i",
               "--tau0", "0.9186217857197763+0.4337456791448622i",
               "--tau-inf", "1.4527156893995463+1.1287763184732742i") == 0
    assert not load(tmp_path / "g" / "curve_path.json")["lifts"]


def test_qde(tmp_path):
    assert run(tmp_path, "qde", "--model", "curve_g2", "--t1", "10") == 0
    doc = load(tmp_path / "qde.json")
    assert_valid(tmp_path / "qde.json", "qde_report")
    assert doc["liouville_drift"] < 1e-8
    rows = read_csv(tmp_path / "qde_trace.csv")
    assert len(rows) == 64
    last = rows[-1]
    # modified form: t^mu (I + 2 ln t N) at t = 10, mu = diag(-1/2, 1/2)
    assert float(last["m10_re"]) * math.exp(float(last["log_gauge"])) == pytest.approx(
        math.sqrt(10) * 2 * math.log(10), rel=1e-8)


def test_qde_p1(tmp_path):
    assert run(tmp_path, "qde", "--model", "p1", "--b", "0.2+0.5i", "--a", "0.1",
               "--t1", "20", "--points", "200") == 0
    doc = load(tmp_path / "qde.json")
    kappa = 2 * np.exp(0.2 + 0.5j - 0.1)
    for rate in doc["column_growth_rates"]:
        assert min(abs(rate - kappa.real), abs(rate + kappa.real)) < 5e-3
    assert doc["liouville_drift"] < 1e-6


def test_contour(tmp_path):
    assert run(tmp_path, "contour", "--kind", "line", "--kappa-t", "1") == 0
    doc = load(tmp_path / "contour.json")
    assert_valid(tmp_path / "contour.json", "contour_report")
    assert doc["abs_diff"] < 1e-6
    assert run(tmp_path, "contour", "--kind", "point", "--kappa-t", "0") == 0
    doc = load(tmp_path / "contour.json")
    assert doc["value"]["im"] == pytest.approx(math.pi, abs=1e-8)


def test_contour_divergent_leg_is_bad_input(tmp_path):
    assert run(tmp_path, "contour", "--kappa-t", "2i", "--theta", "0") == 3


def test_mutate(tmp_path):
    dec = tmp_path / "dec.json"
    dec.write_text(json.dumps(p1_decomposition(0).to_dict()))
    out = tmp_path / "out"
    assert run(out, "mutate", "--file", str(dec), "--word", "L1") == 0
    doc = load(out / "mutated.json")
    assert_valid(out / "mutated.json", "decomposition")
    assert doc["summands"] == [[[-1, 1]], [[1, 0]]] and doc["history"] == ["L1"]
    assert doc["permutation"] == [2, 1]
    assert run(out, "mutate", "--p1-twist", "0", "--word", "R1 L1") == 0
    assert load(out / "mutated.json")["summands"] == [[[1, 0]], [[1, 1]]]


def test_validate_model(tmp_path):
    assert run(tmp_path, "validate-model", "--model", "p1") == 0
    doc = load(tmp_path / "validation.json")
    assert_valid(tmp_path / "validation.json", "validation_report")
    assert doc["ok"] and doc["violations"] == []
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim_x": 1, "basis": [{"label": "1", "deg": 0},
                                                     {"label": "H", "deg": 2}],
                               "pairing": [[0, 1], [1, 0]], "c1_cup": [[0, 0], [2, 0]],
                               "mu_diag": [-0.5, 0.25]}))
    assert run(tmp_path, "validate-model", "--model", str(bad)) == 3
    assert not load(tmp_path / "validation.json")["ok"]


def write_synthetic_trace(path, t, objs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        head = ["t"]
        for lab, *_ in objs:
            head += [f"{lab}_re", f"{lab}_im"]
        w.writerow(head)
        for tj in t:
            row = [repr(float(tj))]
            for _, alpha, c in objs:
                z = c * np.exp(alpha * tj)
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def test_sod_from_trace(tmp_path):
    t = q.geometric_grid(1, 100, 600)
    write_synthetic_trace(tmp_path / "trace.csv", t, [("A", 0.3 + 1j, 2.0), ("B", -0.2 - 1j, 1j)])
    (tmp_path / "classes.json").write_text(json.dumps(
        {"A": {"class": [1, 0]}, "B": {"class": [0, 1]}}))
    out = tmp_path / "out"
    assert run(out, "sod-from-trace", "--trace", str(tmp_path / "trace.csv"),
               "--classes", str(tmp_path / "classes.json")) == 0
    doc = load(out / "sod.json")
    assert_valid(out / "sod.json", "sod_report")
    assert [c["members"][0]["label"] for c in doc["clusters"]] == ["B", "A"]
    assert doc["lattice_check"]["method"] == "exact"


def test_sod_from_trace_genericity(tmp_path):
    t = q.geometric_grid(1, 100, 600)
    write_synthetic_trace(tmp_path / "trace.csv", t, [("A", 0.3 + 1j, 2.0), ("B", -0.2 + 1j, 1.0)])
    (tmp_path / "classes.json").write_text(json.dumps(
        {"A": {"class": [1, 0]}, "B": {"class": [0, 1]}}))
    out = tmp_path / "out"
    assert run(out, "sod-from-trace", "--trace", str(tmp_path / "trace.csv"),
               "--classes", str(tmp_path / "classes.json")) == 2
    assert load(out / "sod.json")["genericity"].startswith("violated")


@pytest.mark.parametrize("argv", [
    ["p1-path", "--points", "8"],
    ["p1-path", "--t0", "-1"],
    ["p1-path", "--b", "__import__('os')"],
    ["curve-path", "--genus", "0"],
    ["mutate", "--file", "/nonexistent.json", "--word", "L1"],
    ["mutate", "--p1-twist", "0", "--word", "Q1"],
    ["no-such-command"],
])
def test_bad_input_exits_3(tmp_path, argv, capsys):
    assert run(tmp_path, *argv) == 3


def test_error_messages_name_the_module(tmp_path, capsys):
    run(tmp_path, "mutate", "--p1-twist", "0", "--word", "L5")
    assert capsys.readouterr().err.startswith("mutation_lattice:")


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "stabpath", "contour", "--kappa-t", "2",
                           "--output-dir", str(tmp_path)], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert "contour" in proc.stdout
