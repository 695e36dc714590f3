"""Harness operations, CSV/SVG determinism, CLI surfaces, problem config."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from oscillode.cli import main as cli_main
from oscillode.harness import (
    check_reference_consistency,
    error_report_csv,
    fit_slopes,
    reference_values,
    run_error_study,
)
from oscillode.problems import get_problem, load_problem_config
from oscillode.svg import emit_svg

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def small_linear_report():
    return run_error_study(
        "linear_example",
        omegas=(300.0, 600.0),
        s_values=(0, 1, 2),
        grid_n=65,
        order=2,
    )


def test_error_study_reference_is_exact_for_linear(small_linear_report):
    assert small_linear_report.reference_kind == "exact"


def test_error_bands_decrease_with_s(small_linear_report):
    r = small_linear_report
    for omega in r.omegas:
        sups = [float(r.sup_norms(s, omega).max()) for s in r.s_values]
        assert sups[0] > sups[1] > sups[2]


def test_error_band_shrinks_with_omega(small_linear_report):
    r = small_linear_report
    for s in r.s_values:
        assert float(r.sup_norms(s, 600.0).max()) < float(r.sup_norms(s, 300.0).max())


def test_s_zero_error_is_base_difference(small_linear_report):
    # with s = 0 the error is reference minus the non-oscillatory trajectory
    r = small_linear_report
    err = r.errors[(0, 300.0)]
    assert float(np.max(np.abs(err))) < 0.1
    assert float(np.max(np.abs(err))) > 1e-4


def test_csv_deterministic_and_schema(small_linear_report):
    text1 = error_report_csv(small_linear_report)
    text2 = error_report_csv(small_linear_report)
    assert text1 == text2
    lines = text1.splitlines()
    assert lines[0] == "t,omega,s,component,err_re,err_im"
    assert len(lines) == 1 + 65 * 2 * 3 * 2  # grid * omegas * s * components


def test_csv_17_digit_roundtrip(small_linear_report):
    text = error_report_csv(small_linear_report)
    row = text.splitlines()[1].split(",")
    err = small_linear_report.errors[(0, 300.0)][0, 0]
    assert float(row[4]) == err.real
    assert float(row[5]) == err.imag


def test_svg_count_and_determinism(tmp_path, small_linear_report):
    paths = emit_svg(small_linear_report, tmp_path / "a")
    assert len(paths) == 6  # 3 s-values x 2 omegas
    again = emit_svg(small_linear_report, tmp_path / "b")
    for p1, p2 in zip(paths, again):
        assert p1.read_bytes() == p2.read_bytes()
    content = paths[0].read_text()
    assert "<svg" in content and "Re(error)" in content and ">t<" in content


def test_svg_empty_report_rejected(small_linear_report):
    import dataclasses

    empty = dataclasses.replace(small_linear_report, omegas=())
    with pytest.raises(ValueError):
        emit_svg(empty, "unused")


def test_reference_cache_roundtrip(tmp_path):
    reg = get_problem("worked_example")
    grid = np.linspace(0.0, 1.0, 33)
    v1, kind = reference_values(reg, 80.0, grid, 1e-8, 1e-8, cache_dir=tmp_path)
    assert kind.startswith("rk")
    files = list(tmp_path.glob("ref_*.npz"))
    assert len(files) == 1
    v2, _ = reference_values(reg, 80.0, grid, 1e-8, 1e-8, cache_dir=tmp_path)
    assert np.array_equal(v1, v2)
    # different omega gets its own cache entry
    reference_values(reg, 90.0, grid, 1e-8, 1e-8, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("ref_*.npz"))) == 2


def test_reference_hierarchy_guard():
    worst = check_reference_consistency("linear_example", omega=500.0, grid_n=65)
    assert worst < 1e-8


def test_slope_fit_on_synthetic_report():
    import dataclasses

    base = run_error_study(
        "linear_example", omegas=(300.0,), s_values=(0,), grid_n=9, order=0
    )
    errors = {}
    for s in (0, 1):
        for omega in (100.0, 200.0, 400.0):
            errors[(s, omega)] = np.full((9, 2), omega ** -(s + 1), dtype=complex)
    synthetic = dataclasses.replace(
        base, omegas=(100.0, 200.0, 400.0), s_values=(0, 1), errors=errors
    )
    slopes = fit_slopes(synthetic)
    assert slopes[0] == pytest.approx(-1.0, abs=1e-12)
    assert slopes[1] == pytest.approx(-2.0, abs=1e-12)


# -- CLI ----------------------------------------------------------------------


def test_cli_table_matches_golden(tmp_path, capsys):
    rc = cli_main(["table", "--problem", "worked_example", "-r", "4"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out == (GOLDEN / "worked_example_table_r4.txt").read_text()


def test_cli_table_memristor_r3(capsys):
    rc = cli_main(["table", "--problem", "memristor", "-r", "3"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 13
    body = "\n".join(lines)
    assert "(1, 2)" not in body
    assert "(3, 4)" not in body


def test_cli_expand_writes_dump(tmp_path):
    out = tmp_path / "dump.txt"
    rc = cli_main(
        ["expand", "--problem", "worked_example", "--order", "2", "--t-end", "1.0",
         "--out", str(out)]
    )
    assert rc == 0
    assert "kind=algebraic" in out.read_text()


def test_cli_solve_csv(tmp_path):
    out = tmp_path / "solve.csv"
    rc = cli_main(
        ["solve", "--problem", "worked_example", "--omega", "200", "--order", "1",
         "--t-end", "1.0", "--grid", "17", "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,omega,s,component,y_re,y_im"
    assert len(lines) == 1 + 17 * 2


def test_cli_reference_csv(tmp_path):
    out = tmp_path / "ref.csv"
    rc = cli_main(
        ["reference", "--problem", "worked_example", "--omega", "150",
         "--t-end", "1.0", "--grid", "9", "--tol-abs", "1e-8", "--tol-rel", "1e-8",
         "--cache-dir", str(tmp_path / "cache"), "--out", str(out)]
    )
    assert rc == 0
    assert out.read_text().startswith("t,omega,component,")


def test_cli_errors_csv_and_svg(tmp_path):
    out = tmp_path / "err.csv"
    rc = cli_main(
        ["errors", "--problem", "linear_example", "--omega", "300", "--omega", "600",
         "--order", "0", "--order", "1", "--grid", "33", "--out", str(out)]
    )
    assert rc == 0
    assert out.read_text().startswith("t,omega,s,component,err_re,err_im")

    svg_dir = tmp_path / "plots"
    rc = cli_main(
        ["errors", "--problem", "linear_example", "--omega", "300",
         "--order", "0", "--grid", "17", "--format", "svg", "--out", str(svg_dir)]
    )
    assert rc == 0
    assert len(list(svg_dir.glob("*.svg"))) == 1


def test_cli_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    rc = cli_main(
        ["bench", "--problem", "linear_example", "--omega", "300", "--omega", "600",
         "--order", "2", "--grid", "33", "--out", str(out),
         "--cache-dir", str(tmp_path / "cache")]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,omega,seconds,peak_kb,points"
    methods = [line.split(",")[0] for line in lines[1:]]
    assert methods.count("expansion_build") == 1
    assert methods.count("expansion_eval") == 2
    assert methods.count("rk_reference") == 2


def test_cli_problems_lists_builtins(capsys):
    rc = cli_main(["problems"])
    assert rc == 0
    out = capsys.readouterr().out
    for name in ("linear_example", "memristor", "worked_example"):
        assert name in out


# -- config loading --------------------------------------------------------------


def test_load_problem_config(tmp_path):
    cfg = {
        "dimension": 2,
        "basis": [1.0, math.sqrt(2.0)],
        "basis_names": ["1", "sqrt(2)"],
        "kappa": [["1", "0"], ["0", "1"], ["-1/2", "1"]],
        "y0": [0.1, [0.0, 0.2]],
        "t_end": 1.5,
        "field": "cubic_demo",
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(cfg))
    registered = load_problem_config(path, name="custom")
    assert registered.name == "custom"
    problem = registered.problem
    assert problem.dimension == 2
    assert problem.kappas[2].value == pytest.approx(-0.5 + math.sqrt(2.0))
    assert problem.y0[1] == 0.2j

    from oscillode.expansion import build_expansion, solve_nonoscillatory_chain

    ex = build_expansion(problem, order=2)
    solve_nonoscillatory_chain(ex, registered.t_end)
    y = ex.evaluate_truncated(1.0, 300.0, 2)
    assert np.all(np.isfinite(y))


def test_cli_accepts_config(tmp_path, capsys):
    cfg = {
        "dimension": 2,
        "basis": [1.0],
        "basis_names": ["1"],
        "kappa": [["1"], ["3/2"]],
        "y0": [0.05, 0.05],
        "t_end": 1.0,
        "field": "cubic_demo",
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(cfg))
    rc = cli_main(["table", "--config", str(path), "-r", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "3/2" in out


def test_expansion_dump_golden_files():
    from oscillode.expansion import build_expansion, dump_expansion, solve_nonoscillatory_chain

    for name, t_end in (("worked_example", 5.0), ("memristor", 3.0)):
        reg = get_problem(name)
        ex = build_expansion(reg.problem, order=3)
        solve_nonoscillatory_chain(ex, t_end)
        golden = (GOLDEN / f"{name}_expansion_r3.txt").read_text()
        assert dump_expansion(ex) == golden
