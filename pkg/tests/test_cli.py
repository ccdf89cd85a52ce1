import json
import math

import numpy as np
import pytest

from qrngkit import (
    BitString,
    UsageError,
    read_bits,
    read_stream_ndjson,
    write_bits,
)
from qrngkit.cli import main, parse_angle, parse_count


def run_cli(*argv):
    """Invoke the entry point in-process; normalize argparse SystemExit."""
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def csv_rows(path):
    header, *rows = path.read_text().splitlines()
    return header.split(","), [r.split(",") for r in rows]


# --- argument parsing ---------------------------------------------------------------


@pytest.mark.parametrize(
    "text,value",
    [
        ("pi", math.pi),
        ("pi/5", math.pi / 5),
        ("3pi/4", 3 * math.pi / 4),
        ("0.5pi", math.pi / 2),
        (".5pi", math.pi / 2),
        ("2*pi", 2 * math.pi),
        (" pi / 4 ", math.pi / 4),
        ("PI/2", math.pi / 2),
        ("0.635", 0.635),
        ("1e-1", 0.1),
    ],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("bad", ["pi/0", "tau", "pie", "", "pi/pi"])
def test_parse_angle_rejects(bad):
    with pytest.raises(UsageError):
        parse_angle(bad)


def test_parse_count():
    assert parse_count("42") == 42
    assert parse_count("1e6") == 1_000_000
    for bad in ("0", "-3", "2.5", "many"):
        with pytest.raises(UsageError):
            parse_count(bad)


# --- exact -------------------------------------------------------------------------


def test_exact_equal_efficiencies_offset_one_is_uniform(tmp_path):
    assert run_cli(
        "exact", "--n", 4, "--j", 1, "--theta", "pi/5", "--equal-e", "--out-dir", tmp_path
    ) == 0
    header, rows = csv_rows(tmp_path / "distribution.csv")
    assert header == ["index", "bitstring", "probability"]
    assert len(rows) == 16
    assert rows[3][1] == "0011"
    assert all(abs(float(r[2]) - 1 / 16) < 1e-15 for r in rows)
    m = read_manifest(tmp_path)
    assert m["command"] == "exact"
    assert m["results"]["tv_to_uniform"] < 1e-14
    assert sorted(m["outputs"]) == ["deviation.csv", "distribution.csv", "manifest.json"]


def test_exact_skewed_ten_bit_cell(tmp_path):
    assert run_cli(
        "exact", "--n", 10, "--theta", "pi/5",
        "--e", "0.30,0.33,0.29,0.30", "--out-dir", tmp_path,
    ) == 0
    _, rows = csv_rows(tmp_path / "distribution.csv")
    index, text, prob = rows[174]
    assert (index, text) == ("174", "0010101110")
    assert float(prob) == pytest.approx(5.897648e-4, rel=1e-6)
    m = read_manifest(tmp_path)
    assert m["results"]["l1_to_uniform"] == pytest.approx(2 * m["results"]["tv_to_uniform"])


def test_exact_deviation_file_is_centered(tmp_path):
    run_cli("exact", "--n", 3, "--theta", "0.9", "--e", "0.9,0.5,0.7,0.8",
            "--out-dir", tmp_path)
    _, rows = csv_rows(tmp_path / "deviation.csv")
    devs = [float(r[2]) for r in rows]
    assert sum(devs) == pytest.approx(0.0, abs=1e-15)
    assert max(abs(d) for d in devs) > 1e-3


def test_exact_budget_exit_code(tmp_path):
    assert run_cli("exact", "--n", 12, "--j", 4, "--out-dir", tmp_path) == 3


# --- simulate ----------------------------------------------------------------------


def test_simulate_runs_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run_cli(
            "simulate", "--pairs", 500, "--seed", 7, "--theta", "pi/5",
            "--e", "0.8,0.9,0.7,0.6", "--out-dir", d,
        ) == 0
    assert (a / "stream.ndjson").read_bytes() == (b / "stream.ndjson").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    m = read_manifest(a)
    assert m["params"]["config"]["theta"] == pytest.approx(math.pi / 5)
    assert m["results"]["kept"] == len(read_stream_ndjson(a / "stream.ndjson"))


def test_simulate_demon_flag_forces_slots(tmp_path):
    assert run_cli(
        "simulate", "--pairs", 4000, "--seed", 9, "--demon", 0.5, "--out-dir", tmp_path
    ) == 0
    s = read_stream_ndjson(tmp_path / "stream.ndjson")
    z = s.a ^ s.b
    assert not z[1::2].any()
    assert z[0::2].any()
    m = read_manifest(tmp_path)
    assert m["results"]["dropped_demon"] > 0


def test_simulate_physical_mode_reports_losses(tmp_path):
    assert run_cli(
        "simulate", "--pairs", 2000, "--seed", 5, "--mode", "physical",
        "--e", "0.5,0.5,0.5,0.5", "--out-dir", tmp_path,
    ) == 0
    m = read_manifest(tmp_path)
    assert m["params"]["mode"] == "physical"
    assert m["results"]["dropped_undetected"] > 0
    assert m["results"]["kept"] + m["results"]["dropped_undetected"] == 2000


def test_manifest_replays_to_identical_output(tmp_path):
    first = tmp_path / "first"
    run_cli("simulate", "--pairs", 800, "--seed", 11, "--theta", "0.7",
            "--e", "0.9,0.8,0.85,0.95", "--dead-time", "1e-4", "--out-dir", first)
    m = read_manifest(first)
    cfg_file = tmp_path / "replay-config.json"
    cfg_file.write_text(json.dumps(m["params"]["config"]))
    second = tmp_path / "second"
    assert run_cli(
        "simulate", "--pairs", m["params"]["pairs"], "--seed", m["params"]["seed"],
        "--mode", m["params"]["mode"], "--config", cfg_file, "--out-dir", second,
    ) == 0
    assert (first / "stream.ndjson").read_bytes() == (second / "stream.ndjson").read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"theta": 0.1, "e0_plus": 0.5}))
    run_cli("simulate", "--pairs", 10, "--theta", "pi/4", "--config", cfg_file,
            "--out-dir", tmp_path)
    cfg = read_manifest(tmp_path)["params"]["config"]
    assert cfg["theta"] == pytest.approx(math.pi / 4)
    assert cfg["e0_plus"] == 0.5


# --- extract -----------------------------------------------------------------------


def test_extract_von_neumann_from_file(tmp_path):
    write_bits(tmp_path / "in.bits", BitString("00011011"))
    assert run_cli("extract", "--method", "vn", "--in", tmp_path / "in.bits",
                   "--out-dir", tmp_path) == 0
    assert read_bits(tmp_path / "extracted.bits") == BitString("01")
    r = read_manifest(tmp_path)["results"]
    assert (r["in"], r["out"], r["discarded"]) == (8, 2, 6)


def test_extract_xor_of_identical_streams_is_zero(tmp_path):
    stream = tmp_path / "s.ndjson"
    stream.write_text(
        '{"t":0.1,"a":1,"b":1}\n{"t":0.2,"a":0,"b":0}\n{"t":0.3,"a":1,"b":1}\n'
    )
    assert run_cli("extract", "--method", "xor", "--stream", stream,
                   "--out-dir", tmp_path) == 0
    assert read_bits(tmp_path / "extracted.bits") == BitString("000")


def test_extract_xor_with_offset_accounting(tmp_path):
    write_bits(tmp_path / "x.bits", BitString("1100"))
    write_bits(tmp_path / "y.bits", BitString("0010"))
    assert run_cli(
        "extract", "--method", "xor", "--j", 1, "--in-x", tmp_path / "x.bits",
        "--in-y", tmp_path / "y.bits", "--out-dir", tmp_path,
    ) == 0
    assert read_bits(tmp_path / "extracted.bits") == BitString("100")
    r = read_manifest(tmp_path)["results"]
    assert (r["in"], r["out"], r["discarded"]) == (4, 3, 1)
    assert r["params"] == {"j": 1}


def test_extract_pair_vn_from_files(tmp_path):
    write_bits(tmp_path / "x.bits", BitString("11010"))
    write_bits(tmp_path / "y.bits", BitString("00110"))
    assert run_cli(
        "extract", "--method", "pair-vn", "--in-x", tmp_path / "x.bits",
        "--in-y", tmp_path / "y.bits", "--out-dir", tmp_path,
    ) == 0
    assert read_bits(tmp_path / "extracted.bits") == BitString("0")


def test_extract_peres_packed_output(tmp_path):
    write_bits(tmp_path / "in.bits", BitString("01100011"))
    assert run_cli(
        "extract", "--method", "peres", "--depth", 2, "--in", tmp_path / "in.bits",
        "--format", "packed", "--out-dir", tmp_path,
    ) == 0
    blob = (tmp_path / "extracted.bits").read_bytes()
    assert blob.startswith(b"#bits=")
    r = read_manifest(tmp_path)["results"]
    assert r["in"] == 8 and r["params"] == {"depth": 2}


def test_extract_requires_an_input(tmp_path):
    assert run_cli("extract", "--method", "vn", "--out-dir", tmp_path) == 2
    assert run_cli("extract", "--method", "xor", "--in-x", "only-one.bits",
                   "--out-dir", tmp_path) == 2


# --- analyze -----------------------------------------------------------------------


def test_analyze_flags_a_constant_file(tmp_path):
    write_bits(tmp_path / "zeros.bits", BitString.zeros(10_000))
    assert run_cli("analyze", "--in", tmp_path / "zeros.bits", "--tests", "chi2",
                   "--k", 1, "--out-dir", tmp_path) == 0
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert len(reports) == 1
    assert reports[0]["passed"] is False
    assert reports[0]["p_value"] < 1e-10
    header, rows = csv_rows(tmp_path / "reports.csv")
    assert header == ["test", "k", "statistic", "p_value", "passed"]
    assert rows[0][4] == "0"


def test_analyze_stream_estimates_the_angle(tmp_path):
    sim = tmp_path / "sim"
    run_cli("simulate", "--pairs", 12_000, "--seed", 1, "--out-dir", sim)
    assert run_cli("analyze", "--stream", sim / "stream.ndjson", "--out-dir", tmp_path) == 0
    m = read_manifest(tmp_path)
    est = m["results"]["theta"]
    assert est["theta"] == pytest.approx(math.pi / 4, abs=3 * est["stderr"])
    assert abs(m["results"]["correlation"]) < 0.03
    # default block sizes for 12000 bits, then the normality reports
    _, rows = csv_rows(tmp_path / "reports.csv")
    chi_ks = [int(r[1]) for r in rows if r[0] == "chi2_uniformity"]
    assert chi_ks == [1, 2, 3, 4, 5]
    assert any(r[0] == "borel_normality" for r in rows)


def test_analyze_rejects_unknown_test_names(tmp_path):
    write_bits(tmp_path / "z.bits", BitString.zeros(400))
    assert run_cli("analyze", "--in", tmp_path / "z.bits", "--tests", "chi2,runs",
                   "--out-dir", tmp_path) == 2


def test_analyze_needs_some_input(tmp_path):
    assert run_cli("analyze", "--out-dir", tmp_path) == 2
    assert run_cli("analyze", "--in", tmp_path / "missing.bits", "--out-dir", tmp_path) == 2


def test_analyze_malformed_bit_file_exit_code(tmp_path):
    bad = tmp_path / "bad.bits"
    bad.write_bytes(b"no header here\n")
    assert run_cli("analyze", "--in", bad, "--out-dir", tmp_path) == 4


def test_analyze_malformed_stream_exit_code(tmp_path):
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"t":0.1,"a":1}\n')
    assert run_cli("analyze", "--stream", bad, "--out-dir", tmp_path) == 4


# --- sweep -------------------------------------------------------------------------


def test_sweep_anchor_points(tmp_path):
    assert run_cli("sweep", "--thetas", "0,pi/4,pi/2", "--out-dir", tmp_path) == 0
    _, rows = csv_rows(tmp_path / "sweep.csv")
    values = [(float(q), float(c)) for _, q, c in rows]
    # the two predictions coincide at 0, pi/4 and pi/2
    assert values[0] == (1.0, 1.0)
    assert values[1][0] == pytest.approx(0.5, abs=1e-15)
    assert values[1][1] == pytest.approx(0.5, abs=1e-15)
    assert values[2][0] == pytest.approx(0.0, abs=1e-15)
    assert values[2][1] == pytest.approx(0.0, abs=1e-15)


def test_sweep_curves_split_between_anchors(tmp_path):
    run_cli("sweep", "--thetas", "pi/4", "--out-dir", tmp_path)  # smoke for single point
    run_cli(
        "sweep", "--thetas", f"{math.pi / 4 - 0.1},{math.pi / 4 + 0.1}",
        "--out-dir", tmp_path,
    )
    _, rows = csv_rows(tmp_path / "sweep.csv")
    below_q, below_c = float(rows[0][1]), float(rows[0][2])
    above_q, above_c = float(rows[1][1]), float(rows[1][2])
    # the cosine-squared curve is steeper through the crossing point
    assert below_q > below_c
    assert above_q < above_c


def test_sweep_grid_with_empirical_column(tmp_path):
    assert run_cli(
        "sweep", "--grid", "0:pi/2:5", "--empirical", 4000, "--seed", 6,
        "--out-dir", tmp_path,
    ) == 0
    header, rows = csv_rows(tmp_path / "sweep.csv")
    assert header[-1] == "expectation_empirical"
    assert len(rows) == 5
    for theta_s, q, _, emp in rows:
        assert float(emp) == pytest.approx(float(q), abs=0.04)
    assert float(rows[2][0]) == pytest.approx(math.pi / 4)
    assert read_manifest(tmp_path)["results"]["points"] == 5


def test_sweep_needs_a_grid(tmp_path):
    assert run_cli("sweep", "--out-dir", tmp_path) == 2
    assert run_cli("sweep", "--grid", "0:pi:1", "--out-dir", tmp_path) == 2


# --- demon demo --------------------------------------------------------------------


def test_demon_demo_outputs(tmp_path):
    assert run_cli("demon-demo", "--rho", 0.5, "--n", 20_000, "--seed", 3,
                   "--out-dir", tmp_path) == 0
    r = read_manifest(tmp_path)["results"]
    assert r["k"] == 2
    assert r["in"] == 20_000
    assert r["forced_slots_all_zero"] is True
    assert r["rejected_fraction"] == pytest.approx(1 / 3, abs=0.02)
    sieved = read_bits(tmp_path / "sieved.bits")
    assert not sieved.to_array()[1::2].any()
    assert len(read_bits(tmp_path / "source.bits")) == 20_000


def test_demon_demo_tighter_budget(tmp_path):
    run_cli("demon-demo", "--rho", 0.8, "--n", 10_000, "--seed", 4, "--out-dir", tmp_path)
    r = read_manifest(tmp_path)["results"]
    assert r["k"] == 5
    forced = read_bits(tmp_path / "sieved.bits").to_array()[4::5]
    assert not forced.any()


# --- shared flag handling ------------------------------------------------------------


def test_bad_angle_and_efficiency_flags(tmp_path):
    assert run_cli("simulate", "--pairs", 10, "--theta", "bogus", "--out-dir", tmp_path) == 2
    assert run_cli("simulate", "--pairs", 10, "--e", "0.5,0.5", "--out-dir", tmp_path) == 2
    assert run_cli("simulate", "--pairs", "0", "--out-dir", tmp_path) == 2


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2, 3]")
    assert run_cli("simulate", "--pairs", 10, "--config", bad, "--out-dir", tmp_path) == 4
    bad.write_text('{"theta": 0.3, "volume": 11}')
    assert run_cli("simulate", "--pairs", 10, "--config", bad, "--out-dir", tmp_path) == 4
    assert run_cli("simulate", "--pairs", 10, "--config", tmp_path / "nope.json",
                   "--out-dir", tmp_path) == 2
