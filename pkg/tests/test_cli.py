import csv
import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

import recoilscatter.cli as cli
from recoilscatter.cli import (
    BASE_COLUMNS,
    ConfigError,
    RunConfig,
    main,
    parse_config,
    serialize_config,
)

MINIMAL = "epsilon_ld = 0.8\nomega_ratio = 0.2\ngamma_ratio = 0.05\n"


def test_minimal_document_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg == RunConfig(0.8, 0.2, 0.05)
    assert cfg.n_points == 400 and cfg.format == "csv" and cfg.auto_truncation
    assert cfg.n_max is None and not cfg.channel_detail


def test_negative_parameter_rejected():
    with pytest.raises(ConfigError, match="positive"):
        parse_config(MINIMAL.replace("0.8", "-0.5"))


def test_unknown_key_named():
    with pytest.raises(ConfigError, match=r"'temperature'.*line 4"):
        parse_config(MINIMAL + "temperature = 3.0\n")


def test_type_mismatch_has_line():
    with pytest.raises(ConfigError, match=r"n_points.*line 5"):
        parse_config(MINIMAL + "\nn_points = 2.5\n")
    with pytest.raises(ConfigError, match=r"channel_detail.*line 4"):
        parse_config(MINIMAL + 'channel_detail = "yes"\n')


def test_other_config_errors():
    with pytest.raises(ConfigError, match="syntax"):
        parse_config("epsilon_ld = \n")
    with pytest.raises(ConfigError, match="flat"):
        parse_config(MINIMAL + "[extra]\na = 1\n")
    with pytest.raises(ConfigError, match="missing"):
        parse_config("epsilon_ld = 0.8\n")
    with pytest.raises(ConfigError, match="format"):
        parse_config(MINIMAL + 'format = "xml"\n')
    with pytest.raises(ConfigError, match="n_max"):
        parse_config(MINIMAL + "auto_truncation = false\n")
    with pytest.raises(ConfigError, match="omega_k_max"):
        parse_config(MINIMAL + "omega_k_min = 2.0\nomega_k_max = 1.0\n")


def test_integers_accepted_for_real_keys():
    cfg = parse_config("epsilon_ld = 1\nomega_ratio = 0.2\ngamma_ratio = 0.05\n")
    assert cfg.epsilon_ld == 1.0 and isinstance(cfg.epsilon_ld, float)


pos = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False, allow_infinity=False)
configs = st.builds(
    lambda e, w, g, lo, span, n, nmax, auto, at, rt, out, fmt, cd: RunConfig(
        e, w, g, lo, lo + span, n, nmax, auto or nmax is None, at, rt, out, fmt, cd),
    pos, pos, pos, pos, pos, st.integers(2, 10_000), st.none() | st.integers(0, 200),
    st.booleans(), pos, pos,
    st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=20),
    st.sampled_from(["csv", "json"]), st.booleans(),
)


@settings(max_examples=200)
@given(configs)
def test_round_trip(cfg):
    text = serialize_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert parse_config(serialize_config(again)) == again


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


ARGS = ["--epsilon-ld", "0.8", "--omega-ratio", "0.2", "--gamma-ratio", "0.05",
        "--omega-k-min", "0.9", "--omega-k-max", "1.3", "--n-points", "4"]


def test_spectrum_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", *ARGS, "-o", str(out)]) == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == BASE_COLUMNS
    assert len(rows) == 5
    first = rows[1]
    assert first[0] == "0.90000000000000002"  # 17 significant digits
    assert first[5] == "true"
    R, T = float(first[1]), float(first[2])
    assert abs(R + T - 1) < 1e-12
    # bit-stable
    out2 = tmp_path / "s2.csv"
    main(["spectrum", *ARGS, "-o", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_spectrum_json_mirrors_csv(tmp_path):
    c, j = tmp_path / "a.csv", tmp_path / "a.json"
    main(["spectrum", *ARGS, "-o", str(c)])
    main(["spectrum", *ARGS, "-o", str(j), "--format", "json"])
    rows = read_csv(c)
    objs = json.loads(j.read_text())
    assert list(objs[0]) == rows[0]
    for obj, row in zip(objs, rows[1:]):
        assert obj["R"] == float(row[1])
        assert obj["n_max_used"] == int(row[4])
        assert obj["converged"] is True


def test_channel_detail_columns(tmp_path):
    out = tmp_path / "d.csv"
    main(["spectrum", *ARGS, "--channel-detail", "-o", str(out)])
    rows = read_csv(out)
    head = rows[0]
    assert head[:6] == list(BASE_COLUMNS)
    assert head[6:9] == ["k_0", "r2_0", "t2_0"]
    n_ch = (len(head) - 6) // 3
    for row in rows[1:]:
        R = sum(float(row[7 + 3 * n]) for n in range(n_ch))
        assert R == pytest.approx(float(row[1]), abs=1e-15)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.toml"
    out = tmp_path / "o.csv"
    cfg.write_text(MINIMAL + f'n_points = 3\nomega_k_min = 1.0\nomega_k_max = 1.2\noutput = "{out}"\n')
    assert main(["spectrum", "--config", str(cfg), "--n-points", "2"]) == 0
    assert len(read_csv(out)) == 3


def test_exit_codes(tmp_path, monkeypatch, capsys):
    assert main(["spectrum", "--epsilon-ld", "-1", "--omega-ratio", "0.2", "--gamma-ratio", "0.05"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text(MINIMAL + "colour = 1\n")
    assert main(["spectrum", "--config", str(bad)]) == 2
    assert main(["spectrum", "--config", str(tmp_path / "missing.toml")]) == 4
    assert main(["spectrum", *ARGS, "-o", str(tmp_path / "no" / "dir" / "x.csv")]) == 4
    monkeypatch.setattr("recoilscatter.spectrum.CONVERGENCE_TOL", 0.0)
    assert main(["spectrum", *ARGS, "-o", str(tmp_path / "u.csv")]) == 3
    assert "unconverged" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "--n-points", "many"])
    assert info.value.code == 2


def test_point_table(capsys):
    assert main(["point", "--epsilon-ld", "0.8", "--omega-ratio", "0.2", "--gamma-ratio", "0.05",
                 "--omega-k", "1.3"]) == 0
    text = capsys.readouterr().out
    lines = text.splitlines()
    assert "R =" in lines[0]
    row1 = lines[3].split()
    assert row1[0] == "1" and row1[1] == "true" and float(row1[3]) == pytest.approx(1.1)
    closed = [ln for ln in lines[2:] if ln.split()[1] == "false"]
    assert closed and all(float(ln.split()[4]) == 0 and float(ln.split()[5]) == 0 for ln in closed)


def test_point_json(capsys):
    main(["point", "--epsilon-ld", "0.8", "--omega-ratio", "0.2", "--gamma-ratio", "0.05",
          "--omega-k", "1.3", "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    ch = doc["channels"]
    assert ch[2]["omega_out"] == pytest.approx(0.9)
    assert ch[10]["omega_out"] is None
    assert sum(c["r2_n"] for c in ch) == pytest.approx(doc["R"], abs=1e-15)


def test_peaks_subcommand(capsys):
    code = main(["peaks", "--epsilon-ld", "0.8", "--omega-ratio", "0.2", "--gamma-ratio", "0.05",
                 "--omega-k-min", "0.9", "--omega-k-max", "1.5", "--n-points", "61"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["location", "height", "nearest_resonance_index", "shift", "prominence"]
    assert [r[2] for r in rows[1:]] == ["0", "1", "2"]


def test_ld_limit_table(capsys):
    assert main(["ld-limit", "--gamma-ratio", "0.05", "--omega-k-min", "0.9",
                 "--omega-k-max", "1.1", "--n-points", "5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["omega_k_over_Omega", "R", "T"]
    vals = [[float(x) for x in r] for r in rows[1:]]
    assert vals[2] == [1.0, 1.0, 0.0]
    assert vals[1][1] == pytest.approx(0.5, abs=1e-15)
    assert vals[3][1] == pytest.approx(0.5, abs=1e-15)


def test_validate_quick(capsys):
    assert main(["validate", "--quick"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out and all(line.startswith("PASS") for line in out)


def test_validate_failure_exit(monkeypatch, capsys):
    from recoilscatter.validation import CheckResult

    monkeypatch.setattr(cli, "run_validation", lambda quick: [CheckResult("x", False, "broken")])
    assert main(["validate"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "recoilscatter", "ld-limit", "--gamma-ratio", "0.1",
                          "--n-points", "2"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "omega_k_over_Omega,R,T"
