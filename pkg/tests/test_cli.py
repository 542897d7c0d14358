import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

import siet.cli as cli
from siet.specfile import ChannelSpec, ConstraintSpec, Options, ProblemSpec, SpecError, SpecWarning, emit_spec, parse_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"

BSC_Z = """\
task: multicast
channels:
  - {kind: bsc, eps: 0.12}
  - {kind: z, eps0: 0.3}
energy: hamming
constraints: {start: 0, stop: 0.7, steps: 8}
"""


def write(tmp_path, text, name="spec.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_bsc_z():
    spec = parse_spec(BSC_Z)
    assert spec.task == "multicast"
    assert spec.channels == (ChannelSpec("bsc", 0.12), ChannelSpec("z", 0.3))
    assert spec.constraints == ConstraintSpec("grid", (0.0, 0.7, 8))
    assert spec.problem().size == 2


def test_parse_checked_in_specs():
    for path in sorted(SPECS.glob("*.yaml")):
        parse_spec(path.read_text())


@pytest.mark.parametrize(
    "text, field, line",
    [
        ("task: multicast\nchannels: []\n", "channels", 2),
        ("task: multicast\nchannels:\n  - kind: matrix\n    rows: [[0.5, 0.5], [0.6, 0.3]]\n", "channels[0].rows[1]", 4),
        ("task: multicast\nchannels:\n  - {kind: bsc, eps: 0.1}\ncolour: red\n", "colour", 4),
        ("task: multicast\nchannels:\n  - {kind: bsc, eps: 0.1, eps0: 0.2}\n", "channels[0].eps0", 3),
        ("task: multicast\nchannels:\n  - {kind: erasure, eps: 0.1}\n", "channels[0].kind", 3),
        ("task: party\n", "task", 1),
        ("task: segment\nchannels:\n  - {kind: bsc, eps: 0.1}\n", "options", None),
        ("task: gaussian\noptions: {peak: 1}\n", "options", 2),
        ("task: multicast\nchannels:\n  - {kind: bsc, eps: 0.1}\nconstraints: [0.1, 0.2]\n", "constraints", 4),
        ("task: multicast\nchannels:\n  - {kind: bsc, eps: 0.1}\nenergy: [[0, 1, 2]]\n", "energy[0]", 4),
    ],
)
def test_invalid_specs_name_field_and_line(text, field, line):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert info.value.field == field
    if line is not None:
        assert info.value.line == line


def test_row_sum_error_names_row():
    with pytest.raises(SpecError, match="row 1 sums to 0.9"):
        parse_spec("task: pp\nchannels:\n  - kind: matrix\n    rows: [[1.0, 0.0], [0.5, 0.4]]\n")


def test_syntax_error_has_line():
    with pytest.raises(SpecError) as info:
        parse_spec("task: pp\nchannels: [\n  {kind: bsc\n")
    assert info.value.line is not None


def test_infeasible_constraints_only_warn():
    with pytest.warns(SpecWarning):
        spec = parse_spec("task: pp\nchannels:\n  - {kind: z, eps0: 0.3}\nconstraints: 0.8\n")
    assert spec.constraints.values == (0.8,)


probs = st.floats(0.0, 1.0, allow_nan=False)
channel_specs = st.one_of(
    st.builds(ChannelSpec, st.just("bsc"), probs),
    st.builds(ChannelSpec, st.just("z"), probs, st.sampled_from(["", "rx"])),
)


@given(st.lists(channel_specs, min_size=1, max_size=3), st.floats(0.0, 0.01), st.integers(1, 9))
def test_round_trip(channels, start, steps):
    spec = ProblemSpec("multicast", tuple(channels), "hamming", ConstraintSpec("grid", (start, start + 0.5, steps)), Options())
    with np.errstate(all="ignore"):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SpecWarning)
            assert parse_spec(emit_spec(spec)) == spec


def test_round_trip_other_tasks():
    for path in sorted(SPECS.glob("*.yaml")):
        spec = parse_spec(path.read_text())
        assert parse_spec(emit_spec(spec)) == spec


def test_fmt_twelve_digits():
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(-0.0) == "0"
    assert cli.fmt(True) == "1"
    with pytest.raises(ValueError):
        cli.fmt(float("nan"))


def test_run_multicast_outputs(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", write(tmp_path, BSC_Z), "--out", str(out)])
    assert code == 0
    curve = (out / "curve.csv").read_text().splitlines()
    assert curve[0] == "B,C,q_0,q_1,I_1,I_2,active,converged,gap"
    assert len(curve) == 9
    plot = np.loadtxt(out / "plot.csv", delimiter=",", skiprows=1)
    assert plot.shape == (8, 4)
    np.testing.assert_allclose(plot[:, 1], plot[:, 2:].min(axis=1), atol=1e-12)
    meta = json.loads((out / "run.json").read_text())
    assert meta["exit_code"] == 0 and meta["points"] == 8 and len(meta["spec_sha256"]) == 64


def test_emit_plot_data_single_point():
    from siet.channels import make_bsc, make_z
    from siet.multicast import multicast_capacity_common

    text = cli.emit_plot_data([multicast_capacity_common((make_bsc(0.1), make_z(0.2)), 0.1)])
    lines = text.splitlines()
    assert lines[0] == "B,C,I_1,I_2" and len(lines) == 2
    with pytest.raises(ValueError):
        cli.emit_plot_data([])


def test_run_is_deterministic_across_threads(tmp_path):
    spec = write(tmp_path, BSC_Z)
    cli.main(["run", spec, "--out", str(tmp_path / "a")])
    cli.main(["run", spec, "--out", str(tmp_path / "b"), "--threads", "3"])
    for name in ("curve.csv", "plot.csv", "run.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert cli.main(["run", write(tmp_path, BSC_Z)]) == 0
    assert (tmp_path / "env" / "curve.csv").exists()


def test_exit_code_infeasible(tmp_path, capsys):
    text = BSC_Z.replace("stop: 0.7", "stop: 0.8")
    code = cli.main(["run", write(tmp_path, text), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "not jointly achievable" in err and "receiver 2" in err
    rows = (tmp_path / "o" / "curve.csv").read_text().splitlines()
    assert len(rows) == 8  # header plus the seven feasible points


def test_exit_code_nonconverged(tmp_path, monkeypatch):
    real = cli.solve
    monkeypatch.setattr(cli, "solve", lambda prob, cfg: dataclasses.replace(real(prob, cfg), converged=False))
    assert cli.main(["run", write(tmp_path, BSC_Z), "--out", str(tmp_path / "o")]) == 1


def test_exit_code_bad_spec(tmp_path, capsys):
    assert cli.main(["run", write(tmp_path, "task: multicast\nchannels: []\n")]) == 4
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.yaml")]) == 4


def test_segment_table(tmp_path):
    text = """\
task: segment
channels:
  - {kind: bsc, eps: 0.3}
  - {kind: z, eps0: 0.6}
  - {kind: z, eps0: 0.65}
constraints: 0.25
options: {K: 2, objective: capacity}
"""
    assert cli.main(["run", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "segments.csv").read_text().splitlines()
    assert len(rows) == 4
    winners = [r for r in rows[1:] if r.endswith(",1")]
    assert len(winners) == 1 and '"{1}{2,3}"' in winners[0]


def test_gaussian_task(tmp_path):
    text = "task: gaussian\nconstraints: [1.5]\noptions: {sigmas: [1, 1.5], peak: 1}\n"
    with pytest.raises(SpecError):
        parse_spec(text)
    text = "task: gaussian\nconstraints: 1.5\noptions: {sigmas: [1, 1.5], peak: 1}\n"
    assert cli.main(["run", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 0
    curve = np.genfromtxt(tmp_path / "o" / "curve.csv", delimiter=",", names=True)
    assert curve["kkt_passed"] == 1
    assert curve["C"] == pytest.approx(0.263861377705, abs=1e-9)


def test_verify_subcommand(tmp_path):
    text = BSC_Z.replace("steps: 8", "steps: 4")
    assert cli.main(["verify", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "verify.csv").read_text().splitlines()
    assert rows[0] == "probe,value,tolerance,passed"
    assert all(r.endswith(",1") for r in rows[1:])
    assert any(r.startswith("concavity") for r in rows)
