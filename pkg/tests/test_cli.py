import io
import json
import subprocess
import sys

import pytest

from qasym import __version__
from qasym.cli import build_parser, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_single_fermion_partition():
    assert call("partition", "exact", "--q", "0.5", "--N", "1", "--L", "1") == (0, "5.656854249492380e0\n", "")


def test_theta_zero_prints_zero():
    code, out, _ = call("theta", "--q", "0.5", "--z", "-0.5")
    assert (code, out) == (0, "0e0\n")


def test_theta_value():
    code, out, _ = call("--digits", "12", "theta", "--z", "1")
    assert out == "2.12893682721e0\n"


def test_laguerre_product_table():
    code, out, _ = call("poly", "zeros", "--family", "qlaguerre", "--n", "20", "--alpha", "0.4", "--q", "0.6",
                        "--paper-table")
    assert code == 0
    assert out == "0.45,0.725,0.852,0.917,0.952,0.972,0.983,0.989,0.993,0.994\n"


def test_text_format_equals_table_flag():
    base = ("poly", "zeros", "--family", "sw", "--n", "6", "--q", "0.3")
    assert call(*base, "--format", "paper-text")[1] == call(*base, "--paper-table")[1] == "1.,1.,1.\n"


def test_zero_csv():
    code, out, _ = call("poly", "zeros", "--family", "sw", "--n", "3")
    lines = out.splitlines()
    assert lines[0] == "k,x_k,x_{n+1-k},normalized_product"
    assert len(lines) == 3
    # middle zero q^{-7/2} = 8 sqrt 2 pairs with itself
    assert lines[2].startswith("2,1.13137084989847603904135097937e1,1.13137084989847603904135097937e1,")


def test_hermite_zeros():
    code, out, _ = call("poly", "zeros", "--family", "qhermite", "--n", "4")
    lines = out.splitlines()
    assert lines[0] == "k,xi_k,xi_{n+1-k},pair_sum"
    assert len(lines) == 3
    assert all(abs(float(line.split(",")[3])) < 1e-25 for line in lines[1:])


def test_poly_eval():
    assert call("poly", "eval", "--family", "sw", "--n", "2", "--x", "1")[1] == "1.602943725152286e1\n"
    # derivative of S_2 at 0 is -(1+q) q^{-7/2}
    assert call("poly", "eval", "--family", "sw", "--n", "2", "--x", "0", "--j", "1")[1] == "-1.697056274847714e1\n"
    assert call("poly", "eval", "--family", "qlaguerre", "--n", "1", "--x", "3")[1] == "-2.000000000000000e0\n"
    assert call("poly", "eval", "--family", "qhermite", "--n", "1", "--x", "0")[1] == "0e0\n"


def test_poly_eval_normalized():
    code, out, _ = call("poly", "eval", "--family", "sw", "--n", "2", "--x", "1", "--normalized")
    # f_2(k) = (q;q)_2 [2 k] gives 3/8 - 9/32 + 3/128
    assert (code, out) == (0, "1.171875000000000e-1\n")


def test_partition_predict_json():
    code, out, _ = call("--format", "json", "partition", "predict", "--N", "2", "--L", "1")
    data = json.loads(out)
    assert data["config"]["subcommand"] == "partition predict"
    assert data["result"]["value"].startswith("7.3719688014")
    assert data["result"]["closed_form"][:10] == data["result"]["value"][:10]


def test_partition_methods_via_cli():
    outs = {call("partition", "exact", "--N", "4", "--L", "1", "--method", m, "--digits", "30")[1]
            for m in ("wronskian", "detS", "sumL1")}
    assert len(outs) == 1


def test_converge_writes_csv_and_dat(tmp_path):
    target = tmp_path / "conv.csv"
    code, out, _ = call("partition", "converge", "--L", "1", "--N-from", "2", "--N-to", "8", "--output",
                        str(target))
    assert (code, out) == (0, "")
    lines = target.read_text().splitlines()
    assert lines[0].startswith("# qasym ")
    assert lines[1] == "N,parity,scaled_exact,predicted,ratio,abs_err"
    assert len(lines) == 9
    dat = (tmp_path / "conv.dat").read_text().splitlines()
    assert dat[0].startswith("# qasym ")
    assert len([ln for ln in dat if not ln.startswith("#")]) == 7


def test_converge_explicit_dat_path_and_jobs(tmp_path):
    dat = tmp_path / "plot.dat"
    code, out, _ = call("partition", "converge", "--L", "2", "--N-from", "3", "--N-to", "7", "--step", "2",
                        "--jobs", "2", "--dat", str(dat))
    assert code == 0
    assert [ln.split(",")[0] for ln in out.splitlines()[1:]] == ["3", "5", "7"]
    assert dat.exists()


def test_config_echo_line(tmp_path):
    target = tmp_path / "theta.csv"
    assert call("theta", "--z", "1", "--q", "0.3", "--precision-bits", "128", "--output", str(target))[0] == 0
    head = target.read_text().splitlines()[0]
    for token in ("q=0.3", "precision_bits=128", "tail_tol=", "subcommand=theta", __version__):
        assert token in head


def test_json_file_carries_config(tmp_path):
    target = tmp_path / "theta.json"
    call("theta", "--z", "1", "--format", "json", "--output", str(target))
    data = json.loads(target.read_text())
    assert data["config"]["q"] == "0.5"
    assert data["result"]["value"].startswith("2.1289368272118")


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["poly", "zeros", "--family", "qlaguerre", "--n", "9", "--alpha", "0.7"]
    call(*argv, "--output", str(a))
    call(*argv, "--output", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_precision_environment_variable(monkeypatch, tmp_path):
    target = tmp_path / "out.csv"
    monkeypatch.setenv("QASYM_PRECISION_BITS", "192")
    call("theta", "--z", "1", "--output", str(target))
    assert "precision_bits=192" in target.read_text()
    call("theta", "--z", "1", "--precision-bits", "320", "--output", str(target))
    assert "precision_bits=320" in target.read_text()
    monkeypatch.setenv("QASYM_PRECISION_BITS", "lots")
    assert call("theta", "--z", "1")[0] == 1


def test_asym_check_row():
    code, out, _ = call("asym", "check", "--family", "sw", "--n", "20", "--j", "1", "--regime", "osc",
                        "--y", "1.3", "--l", "0.5")
    header, row = out.splitlines()
    assert header == "regime,n,j,exact,estimate,error_bound,abs_diff,within_bound"
    assert row.startswith("oscillatory,20,1,") and row.endswith(",True")
    for regime, extra in (("right", ["--t", "0.5"]), ("left", ["--t", "-2"])):
        code, out, _ = call("asym", "check", "--family", "qlaguerre", "--alpha", "0.4", "--n", "10",
                            "--regime", regime, "--y", "0.8", *extra)
        assert code == 0 and out.strip().endswith(",True")


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["theta"],
    ["theta", "--z", "1", "--q", "1.0"],
    ["theta", "--z", "1", "--q", "abc"],
    ["partition", "exact", "--N", "0", "--L", "1"],
    ["partition", "exact", "--N", "3", "--L", "2", "--method", "sumL1"],
    ["partition", "converge", "--L", "1", "--N-from", "5", "--N-to", "2"],
    ["poly", "eval", "--family", "qhermite", "--n", "3", "--x", "1", "--j", "1"],
    ["poly", "eval", "--family", "legendre", "--n", "3", "--x", "1"],
    ["asym", "check", "--family", "sw", "--n", "10", "--regime", "osc", "--y", "1"],
    ["asym", "check", "--family", "sw", "--n", "10", "--regime", "left", "--y", "1", "--t", "-1"],
    ["--format", "xml", "theta", "--z", "1"],
])
def test_usage_errors_exit_one(argv):
    code, out, err = call(*argv)
    assert code == 1
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_numerical_failure_exits_two():
    # the theta sum at z = 10^1000000 needs far more than the allowed number of terms
    code, out, err = call("theta", "--z", "1e1000000")
    assert (code, out) == (2, "")
    assert err.startswith("qasym: numerical failure")


def test_stabilization_failure_exits_two(monkeypatch):
    from qasym import cli
    from qasym.numerics import StabilizationError

    def exhausted(*args, **kwargs):
        raise StabilizationError("no agreement after 6 doublings")

    monkeypatch.setattr(cli, "partition_exact", exhausted)
    assert call("partition", "exact", "--N", "3", "--L", "2")[0] == 2


def test_selftest_passes():
    code, out, _ = call("selftest", "--instances", "20")
    assert code == 0
    assert out.splitlines()[-1].startswith("selftest: ")
    assert "FAIL" not in out


def test_options_before_or_after_subcommand():
    assert call("--q", "0.3", "theta", "--z", "1")[1] == call("theta", "--z", "1", "--q", "0.3")[1]


def test_parser_lists_every_subcommand():
    text = build_parser().format_help()
    for name in ("theta", "poly", "partition", "asym", "selftest"):
        assert name in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qasym", "partition", "exact", "--N", "2", "--L", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == "1.600000000000000e2\n"


def test_converge_digits_flag():
    row = call("partition", "converge", "--L", "1", "--N-from", "40", "--N-to", "40", "--digits", "8")[1]
    assert row.splitlines()[1].startswith("40,even,7.3719521e0,7.3719688e0,9.9999773e-1,")
