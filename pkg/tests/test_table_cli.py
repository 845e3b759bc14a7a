import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cooltrace import cli
from cooltrace.table import ResultTable

cells = st.one_of(
    st.integers(-10**12, 10**12),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1).filter(
        lambda s: _is_text(s)
    ),
)


def _is_text(s):
    # strings that parse as numbers come back as numbers by design
    for conv in (int, float):
        try:
            conv(s)
            return False
        except ValueError:
            pass
    return "\r" not in s and "\n" not in s and s == s.strip()


@st.composite
def tables(draw):
    ncols = draw(st.integers(1, 5))
    cols = [f"c{i}" for i in range(ncols)]
    rows = draw(st.lists(st.tuples(*[cells] * ncols), max_size=6))
    meta = {"seed": draw(st.integers(0, 2**64 - 1)), "config_hash": "sha256:abc"}
    return ResultTable(cols, rows, meta)


@given(tables())
def test_csv_round_trip(t):
    back = ResultTable.from_csv(t.to_csv())
    assert back.columns == t.columns and back.meta == t.meta
    assert back.rows == t.rows


@given(tables())
def test_json_round_trip(t):
    back = ResultTable.from_json(t.to_json())
    assert back.columns == t.columns and back.meta == t.meta
    assert back.rows == t.rows


def test_nonfinite_floats_round_trip():
    t = ResultTable(["a", "b"], [(math.inf, -math.inf)])
    for text, parse in ((t.to_csv(), ResultTable.from_csv), (t.to_json(), ResultTable.from_json)):
        assert parse(text).rows == [(math.inf, -math.inf)]


def test_csv_layout():
    t = ResultTable(["x", "label"], [(0.1, 'a,"b"')], {"seed": 3})
    assert t.to_csv() == '# seed=3\nx,label\r\n0.1,"a,""b"""\r\n'


def test_rectangular():
    with pytest.raises(ValueError):
        ResultTable(["a", "b"], [(1,)])
    t = ResultTable(["a"])
    with pytest.raises(ValueError):
        t.append((1, 2))


def run_cli(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def load(path):
    text = path.read_text()
    return ResultTable.from_json(text) if path.suffix == ".json" else ResultTable.from_csv(text)


def test_compare_rows(tmp_path):
    code, out = run_cli(tmp_path, "compare", "--delta", "0.1,0.45", "--k-max", "3")
    assert code == 0
    rows = {(r[0], r[1]): r for r in load(out).rows}
    assert rows[(0.1, 3)][2:] == pytest.approx((0.001 / 0.73, 0.028), abs=1e-12)
    assert rows[(0.45, 1)][2:] == pytest.approx((0.45, 0.45), abs=1e-12)
    assert rows[(0.45, 3)][2:] == pytest.approx((0.3538834951456, 0.42525), abs=1e-12)


def test_nupper_rows_and_note(tmp_path):
    code, out = run_cli(
        tmp_path, "nupper", "--r", "1000", "--delta-m", "0,0.1", "--delta-sp-grid", "0.05:0.1:0.05"
    )
    assert code == 0
    t = load(out)
    rows = {(r[0], r[1]): r[3] for r in t.rows}
    assert rows[(0.1, 0.0)] == pytest.approx(2.344, abs=5e-3)
    assert rows[(0.1, 0.1)] == pytest.approx(7.79, abs=0.015)
    code, out = run_cli(tmp_path, "nupper", "--r", "1000", "--delta-m", "0", "--delta-sp-grid", "1e-9:1e-9:1")
    assert load(out).rows[0][3] == pytest.approx(1.0, abs=1e-6)
    assert "7.79" in t.meta["note"]


def test_nupper_diverges_toward_half(tmp_path):
    code, out = run_cli(tmp_path, "nupper", "--r", "100", "--delta-m", "0", "--delta-sp-grid", "0.3:0.49:0.01")
    vals = load(out).column("n_upper")
    assert code == 0 and vals == sorted(vals) and vals[-1] > 50


def test_mc_validate_passes_and_embeds_metadata(tmp_path):
    code, out = run_cli(tmp_path, "mc-validate", "--shots", "20000", "--seed", "11", "--grid-points", "5")
    assert code == 0
    t = load(out)
    assert t.meta["all_pass"] == 1 and t.meta["seed"] == 11
    assert str(t.meta["config_hash"]).startswith("sha256:")
    fail = [r for r in t.rows if r[1] == "mbac2_failure" and r[2:5] == (0.1, 0.1, 0.0)]
    assert fail and fail[0][6] == pytest.approx(0.5, abs=1e-12)
    zeros = [r for r in t.rows if r[0] == 0]
    assert all(r[9] == 1 for r in zeros)
    assert all(r[6] == (1.0 if r[1] == "step_acceptance_prob" else 0.0) for r in zeros)


def test_mc_validate_fail_flag_sets_exit_status(tmp_path, monkeypatch):
    real = cli._validate_point

    def broken(d1, dt, dm):
        for name, ana, exact, mc in real(d1, dt, dm):
            yield name, ana + 1e-6, exact, mc

    monkeypatch.setattr(cli, "_validate_point", broken)
    code, out = run_cli(tmp_path, "mc-validate", "--shots", "10000", "--seed", "1", "--grid-points", "0")
    assert code == 1 and load(out).meta["all_pass"] == 0


def test_characterize_row(tmp_path):
    code, out = run_cli(
        tmp_path, "characterize", "--sp", "0.08", "--m", "0.05", "--ancilla-sp", "0.08",
        "--ancilla-m", "0.05", "--k", "5", "--shots", "200000", "--seed", "3", name="c.json",
    )
    assert code == 0
    row = dict(zip(*[load(out).columns, load(out).rows[0]]))
    assert row["status"] == 0 and row["k"] == 5 and row["closure_ok"] == 1
    assert abs(row["delta_m_hat"] - 0.05) <= 4 * row["std_err_m"] + row["residual_bias_bound"]


def test_characterize_failure_becomes_status_row(tmp_path):
    code, out = run_cli(
        tmp_path, "characterize", "--sp", "0.1", "--m", "0.1", "--ancilla-sp", "0.49",
        "--ancilla-m", "0.49", "--k", "13", "--shots", "100", "--seed", "7",
    )
    t = load(out)
    assert code == 1 and t.column("status") == [1] and "error" in t.meta


@pytest.mark.parametrize(
    "argv",
    [
        ["mc-validate", "--shots", "20000", "--grid-points", "2"],
        ["mc-validate", "--shots", "100", "--seed", "1"],
        ["characterize", "--sp", "0.1", "--m", "0.1", "--seed", "1"],
        ["characterize", "--sp", "0.6", "--m", "0.1", "--ancilla-sp", "0.1", "--ancilla-m", "0.1", "--seed", "1"],
        ["compare", "--delta", "0.5", "--k-max", "3"],
        ["compare", "--delta", "abc"],
        ["nupper", "--delta-sp-grid", "0.1:0.2"],
        ["compare", "--bogus"],
    ],
)
def test_invalid_configuration_exits_2(tmp_path, argv):
    try:
        code, _ = run_cli(tmp_path, *argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_toml_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[compare]\ndelta = "0.2"\nk_max = 2\nformat = "json"\n')
    code, out = run_cli(tmp_path, "compare", "--config", str(cfg), "--k-max", "4", name="o.txt")
    t = json.loads(out.read_text())
    assert code == 0
    assert [r["k"] for r in t["rows"]] == [1, 2, 3, 4]
    assert {r["delta_initial"] for r in t["rows"]} == {0.2}


def test_toml_unknown_key(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("nonsense = 1\n")
    assert cli.main(["compare", "--config", str(cfg)]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["compare", "--delta", "0.1", "--k-max", "5"],
        ["mc-validate", "--shots", "10000", "--seed", "5", "--grid-points", "3"],
        ["characterize", "--sp", "0.1", "--m", "0.05", "--ancilla-sp", "0.1", "--ancilla-m", "0.1",
         "--shots", "50000", "--seed", "2"],
    ],
)
def test_reruns_are_byte_identical(tmp_path, argv):
    _, a = run_cli(tmp_path, *argv, name="a.csv")
    _, b = run_cli(tmp_path, *argv, name="b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_config_hash_ignores_output_location():
    a = cli.ExperimentConfig("compare", {"delta": "0.1", "k_max": 3}, "x.csv", "csv")
    b = cli.ExperimentConfig("compare", {"delta": "0.1", "k_max": 3}, "y.json", "json")
    c = cli.ExperimentConfig("compare", {"delta": "0.1", "k_max": 4})
    assert a.hash() == b.hash() != c.hash()


def test_console_entry_point_stdout():
    res = subprocess.run(
        [sys.executable, "-m", "cooltrace.cli", "compare", "--delta", "0.1", "--k-max", "2"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout.startswith("# command=compare")
