import json

import numpy as np
import pytest

from weakfrac.cli import EXIT_CASE_FAILED, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from weakfrac.grid import read_csv
from weakfrac.special import gamma


@pytest.fixture()
def const_csv(tmp_path):
    path = tmp_path / "const.csv"
    xs = np.linspace(0.0, 1.0, 129)
    lines = ["x,value"] + [f"{x:.17g},2" for x in xs]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_compute_rl_derivative_matches_closed_form(const_csv, tmp_path, capsys):
    out = tmp_path / "out.csv"
    code = main(["compute", "--op", "rl-deriv", "--dir", "left", "--alpha", "0.5",
                 "--input", str(const_csv), "--output", str(out)])
    assert code == EXIT_OK
    gf = read_csv(out)
    assert np.isnan(gf.values[0])
    exact = 2.0 * gf.grid.nodes[1:] ** -0.5 / gamma(0.5)
    assert np.max(np.abs(gf.values[1:] - exact) / exact) < 1e-10


def test_compute_integral_ordinary(const_csv, tmp_path):
    out = tmp_path / "out.csv"
    code = main(["compute", "--op", "integral", "--sigma", "1.0",
                 "--input", str(const_csv), "--output", str(out)])
    assert code == EXIT_OK
    gf = read_csv(out)
    assert np.max(np.abs(gf.values - 2.0 * gf.grid.nodes)) < 1e-12


def test_compute_alpha_out_of_range_is_usage_error(const_csv, capsys):
    code = main(["compute", "--op", "rl-deriv", "--alpha", "1.5",
                 "--input", str(const_csv)])
    assert code == EXIT_USAGE
    assert "decompose" in capsys.readouterr().err


def test_bad_flags_exit_2(capsys):
    assert main(["compute", "--op", "not-an-op", "--input", "x.csv"]) == EXIT_USAGE


def test_missing_input_exit_3(capsys):
    code = main(["compute", "--op", "integral", "--sigma", "0.5",
                 "--input", "/nonexistent/file.csv"])
    assert code == EXIT_INPUT


def test_malformed_input_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,value\n0,one\n0.5,1\n1,1\n")
    code = main(["compute", "--op", "integral", "--sigma", "0.5", "--input", str(bad)])
    assert code == EXIT_INPUT


def test_verify_pollution_json_deterministic(tmp_path, capsys):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert main(["verify", "--suite", "pollution", "--alpha", "0.5",
                 "--json", str(out1)]) == EXIT_OK
    assert main(["verify", "--suite", "pollution", "--alpha", "0.5",
                 "--json", str(out2)]) == EXIT_OK
    assert out1.read_text() == out2.read_text()
    report = json.loads(out1.read_text())
    assert report["suite"] == "pollution"
    assert report["alpha"] == 0.5
    for case in report["cases"]:
        assert set(case) == {"name", "residual", "tolerance", "measured_order",
                             "pass", "warnings"}
    captured = capsys.readouterr().out
    assert "[PASS]" in captured


def test_verify_tol_override_can_fail(capsys):
    # an absurdly tight tolerance forces case failures and exit code 1
    code = main(["verify", "--suite", "general-kernel", "--tol", "1e-300"])
    assert code == EXIT_CASE_FAILED
    assert "[FAIL]" in capsys.readouterr().out


def test_compute_stdout_csv(const_csv, capsys):
    code = main(["compute", "--op", "integral", "--sigma", "0.5",
                 "--input", str(const_csv), "--output", "-"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("x,value\n")
    assert len(out.strip().splitlines()) == 130


def test_dist_apply_delta_inline(capsys):
    code = main(["dist-apply", "--descriptor", '{"kind":"delta","x0":0.0}',
                 "--probe-center", "0.0", "--probe-radius", "0.5"])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["action"] == pytest.approx(np.exp(-1.0), rel=1e-12)


def test_dist_apply_derived_descriptor_file(tmp_path, capsys):
    desc = tmp_path / "d.json"
    desc.write_text('{"kind":"derived","dir":"left","alpha":0.5,"of":{"kind":"delta","x0":0.25}}')
    code = main(["dist-apply", "--descriptor", str(desc),
                 "--probe-center", "0.0", "--probe-radius", "0.5"])
    assert code == EXIT_OK
    from weakfrac.weak import TestFunction as Bump, test_deriv as one_sided

    ref = one_sided(Bump(0.0, 0.5), "right", 0.5, 0.25)
    out = json.loads(capsys.readouterr().out)
    assert out["action"] == pytest.approx(ref, abs=1e-10)


def test_dist_apply_regular_csv(tmp_path, capsys):
    xs = np.linspace(-1.0, 1.0, 201)
    csv = tmp_path / "one.csv"
    csv.write_text("x,value\n" + "\n".join(f"{x:.17g},1" for x in xs) + "\n")
    desc = tmp_path / "reg.json"
    desc.write_text('{"kind":"regular","csv":"one.csv"}')
    code = main(["dist-apply", "--descriptor", str(desc),
                 "--probe-center", "0.0", "--probe-radius", "0.4"])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    from weakfrac.weak import TestFunction as Bump

    assert out["action"] == pytest.approx(Bump(0.0, 0.4).integral(), abs=1e-8)


def test_dist_apply_bad_descriptor(capsys):
    code = main(["dist-apply", "--descriptor", '{"kind":"mystery"}',
                 "--probe-center", "0.0", "--probe-radius", "0.5"])
    assert code == EXIT_USAGE


def test_compute_window_reports_tail_bound(const_csv, tmp_path, capsys):
    out = tmp_path / "o.csv"
    code = main(["compute", "--op", "integral", "--sigma", "0.5", "--window", "3.0",
                 "--input", str(const_csv), "--output", str(out)])
    assert code == EXIT_OK
    err = capsys.readouterr().err
    assert "discarded-tail bound" in err


def test_verify_m_flag_limits_product_depth(capsys):
    code = main(["verify", "--suite", "product", "--n", "512", "--m", "1"])
    out = capsys.readouterr().out
    assert "reconstruction-m1" in out
    assert "reconstruction-m2" not in out
    assert code == EXIT_OK
