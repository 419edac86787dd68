import csv
import io as _stdio
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffspec import io
from cliffspec.cli import EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFY, main, run
from cliffspec.clifford_core import CliffordNumber
from cliffspec.clifford_module import (
    CliffordOperator,
    CliffordVector,
    is_anti_self_adjoint,
    is_imaginary,
    is_normal,
    is_positive,
    is_self_adjoint,
    is_unitary,
)
from cliffspec.functional_calculus import spectral_theorem_self_adjoint, random_self_adjoint
from cliffspec.s_spectrum import SpectralPoint, s_spectrum
from strategies import finite

doubles = st.floats(allow_nan=False, allow_infinity=False)


@given(st.integers(0, 3), st.integers(1, 3), st.data())
def test_operator_json_round_trip_is_bit_exact(n, m, data):
    vals = data.draw(st.lists(doubles, min_size=(1 << n) * m * m, max_size=(1 << n) * m * m))
    t = CliffordOperator(n, m, np.array(vals).reshape((1 << n, m, m)))
    back = io.operator_from_json(io.loads(io.dumps(io.operator_to_json(t))))
    assert back.blocks.tobytes() == t.blocks.tobytes()


@given(st.integers(0, 4), st.data())
def test_number_and_vector_round_trip(n, data):
    a = CliffordNumber(n, np.array(data.draw(st.lists(doubles, min_size=1 << n, max_size=1 << n))))
    back = io.number_from_json(io.loads(io.dumps(io.number_to_json(a))))
    assert back.coeffs.tobytes() == a.coeffs.tobytes()
    x = CliffordVector(n, 2, np.array(data.draw(st.lists(finite, min_size=2 << n, max_size=2 << n))).reshape(-1, 2))
    assert io.vector_from_json(io.loads(io.dumps(io.vector_to_json(x)))).coeffs.tobytes() == x.coeffs.tobytes()


def test_negative_zero_survives():
    t = CliffordOperator(0, 1, np.array([[[-0.0]]]))
    back = io.operator_from_json(io.loads(io.dumps(io.operator_to_json(t))))
    assert np.signbit(back.blocks[0, 0, 0])


def test_measure_round_trip():
    e = spectral_theorem_self_adjoint(random_self_adjoint(1, 2, np.random.default_rng(0)))
    back = io.measure_from_json(io.loads(io.dumps(io.measure_to_json(e))))
    assert [(p.u, p.v) for p in back.labels] == [(p.u, p.v) for p in e.labels]
    for p, q in zip(back.projections, e.projections):
        assert p.blocks.tobytes() == q.blocks.tobytes()


@pytest.mark.parametrize("value", [np.nan, np.inf, -np.inf])
def test_non_finite_values_rejected_on_write(value):
    with pytest.raises(io.FormatError):
        io.operator_to_json(CliffordOperator(0, 1, np.array([[[value]]])))


@pytest.mark.parametrize("text", ['{"n": 0, "m": 1, "blocks": {"": [[NaN]]}}',
                                  '{"n": 0, "m": 1, "blocks": {"": [[Infinity]]}}'])
def test_non_finite_values_rejected_on_read(text):
    with pytest.raises(io.FormatError):
        io.operator_from_json(io.loads(text))


@pytest.mark.parametrize("obj", [
    {"n": 1, "m": 2, "blocks": {"": [[1.0]]}},
    {"n": 1, "m": 2, "blocks": {"3": [[1.0, 0.0], [0.0, 1.0]]}},
    {"n": -1, "m": 2},
    {"n": 1},
])
def test_malformed_operators_rejected(obj):
    with pytest.raises(io.FormatError):
        io.operator_from_json(obj)


@pytest.fixture
def gen_file(tmp_path):
    def make(kind, n=2, m=2, seed=7):
        path = tmp_path / f"{kind}-{n}-{m}-{seed}.json"
        code, _, _ = run(["gen", kind, "--n", str(n), "--m", str(m), "--seed", str(seed), "--output", str(path)])
        assert code == EXIT_OK
        return path
    return make


_PREDICATES = {
    "self-adjoint": is_self_adjoint,
    "positive": is_positive,
    "anti-self-adjoint": is_anti_self_adjoint,
    "unitary": is_unitary,
    "imaginary": is_imaginary,
    "normal": is_normal,
}


@pytest.mark.parametrize("kind", sorted(_PREDICATES))
def test_gen_output_passes_its_predicate(gen_file, kind):
    t = io.read_operator(gen_file(kind))
    assert _PREDICATES[kind](t)
    if kind == "imaginary":
        assert s_spectrum(t).matches([SpectralPoint(0.0, 1.0)], 1e-9)


def test_gen_size_guard():
    code, text, _ = run(["gen", "generic", "--n", "7", "--m", "1"])
    assert code == EXIT_PRECONDITION and "error" in text
    assert run(["gen", "generic", "--n", "3", "--m", "9"])[0] == EXIT_PRECONDITION
    # m 2^n = 512 is the largest allowed size
    assert run(["gen", "generic", "--n", "6", "--m", "8"])[0] == EXIT_OK


@pytest.mark.parametrize("command", ["spectrum", "decompose", "polar", "transform", "verify"])
def test_commands_pass_on_normal_input(gen_file, command):
    code, text, _ = run([command, "--input", str(gen_file("normal"))])
    assert code == EXIT_OK, text
    assert "config" in json.loads(text)


def test_decompose_residual_on_normal(gen_file):
    out = json.loads(run(["decompose", "--input", str(gen_file("normal"))])[1])
    assert out["checks"]["residual"] <= 1e-8


def test_sqrt_on_positive_and_non_positive(gen_file):
    assert run(["sqrt", "--input", str(gen_file("positive"))])[0] == EXIT_OK
    assert run(["sqrt", "--input", str(gen_file("anti-self-adjoint"))])[0] == EXIT_PRECONDITION


@pytest.mark.parametrize("function", ["exp", "sin", "poly:1,0,-2"])
def test_funcalc(gen_file, function):
    code, text, _ = run(["funcalc", "--input", str(gen_file("normal")), "--function", function, "--slice", "0,1"])
    assert code == EXIT_OK, text
    assert io.operator_from_json(json.loads(text)["operator"]).n == 2


def test_funcalc_rejects_unknown_function(gen_file):
    assert run(["funcalc", "--input", str(gen_file("normal")), "--function", "cosh"])[0] == EXIT_PARSE


def test_spectrum_of_identity(tmp_path):
    path = tmp_path / "eye.json"
    io.write_json(io.operator_to_json(CliffordOperator.identity(2, 2)), path)
    out = json.loads(run(["spectrum", "--input", str(path)])[1])
    assert out["points"] == [{"u": 1, "v": 0}]


def test_resolvent_grid_on_identity(tmp_path):
    path = tmp_path / "eye.json"
    io.write_json(io.operator_to_json(CliffordOperator.identity(1, 2)), path)
    code, text, _ = run(["resolvent-grid", "--input", str(path), "--grid=-2,2,-2,2,5"])
    assert code == EXIT_OK
    rows = list(csv.DictReader(_stdio.StringIO(text)))
    assert len(rows) == 25
    best = min(rows, key=lambda r: float(r["sigma_min"]))
    assert (float(best["u"]), float(best["v"])) == (1.0, 0.0)
    assert float(best["sigma_min"]) == 0.0 and best["resolvent_norm"] == "inf"


def test_resolvent_grid_json(tmp_path):
    path = tmp_path / "eye.json"
    io.write_json(io.operator_to_json(CliffordOperator.identity(0, 1)), path)
    out = json.loads(run(["resolvent-grid", "--input", str(path), "--grid=0,2,0,0,3", "--format", "json"])[1])
    # three points per axis, u-major
    assert [r[0] for r in out["rows"]] == [0.0] * 3 + [1.0] * 3 + [2.0] * 3
    assert out["rows"][3][3] is None


def test_verify_is_deterministic(gen_file):
    path = str(gen_file("normal", seed=7))
    first, second = run(["verify", "--input", path, "--seed", "7"]), run(["verify", "--input", path, "--seed", "7"])
    assert first[0] == EXIT_OK and first[1] == second[1]


def test_verify_of_identity_passes(tmp_path):
    path = tmp_path / "eye.json"
    io.write_json(io.operator_to_json(CliffordOperator.identity(2, 1)), path)
    code, text, _ = run(["verify", "--input", str(path)])
    out = json.loads(text)
    assert code == EXIT_OK
    assert all(v["status"] == "pass" for v in out["checks"].values())


def test_verify_skips_normal_only_checks(gen_file):
    code, text, _ = run(["verify", "--input", str(gen_file("generic"))])
    checks = json.loads(text)["checks"]
    assert code == EXIT_OK
    assert checks["spectral_theorem"]["status"] == "skipped"
    assert not any(v["status"] == "fail" for v in checks.values())


def test_seed_from_environment(gen_file, tmp_path, monkeypatch):
    monkeypatch.setenv("CLIFFSPEC_SEED", "7")
    code, text, _ = run(["gen", "generic", "--n", "2", "--m", "2"])
    assert code == EXIT_OK
    assert json.loads(text) == json.loads(gen_file("generic", seed=7).read_text())
    monkeypatch.setenv("CLIFFSPEC_SEED", "seven")
    assert run(["gen", "generic", "--n", "2", "--m", "2"])[0] == EXIT_PARSE


def test_exit_codes_for_bad_input(tmp_path):
    assert run(["spectrum", "--input", str(tmp_path / "missing.json")])[0] == EXIT_PARSE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["spectrum", "--input", str(bad)])[0] == EXIT_PARSE
    with pytest.raises(SystemExit) as info:
        run(["spectrum"])
    assert info.value.code == EXIT_PARSE


def test_bad_slice_and_tolerance(gen_file):
    path = str(gen_file("normal"))
    assert run(["spectrum", "--input", path, "--slice", "1,0,0"])[0] == EXIT_PARSE
    assert run(["spectrum", "--input", path, "--tol-eq", "-1"])[0] == EXIT_PARSE


def test_exit_code_constants_are_distinct():
    assert len({EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFY}) == 4


def test_main_writes_errors_to_stderr(tmp_path, capsys):
    assert main(["spectrum", "--input", str(tmp_path / "missing.json")]) == EXIT_PARSE
    captured = capsys.readouterr()
    assert captured.out == "" and "error" in captured.err


def test_console_entry_point(tmp_path):
    out = tmp_path / "t.json"
    proc = subprocess.run([sys.executable, "-m", "cliffspec.cli", "gen", "unitary", "--n", "1", "--m", "2",
                           "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert is_unitary(io.read_operator(out))
