import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsdrank import (KINDS, Tensor3, TensorFileError, classify_square, emit_tensor,
                     generate_instance, is_singular_pencil, parse_tensor, parse_tensor_file,
                     write_tensor_file)
from gsdrank.cli import run_command
from gsdrank.generate import GenerationError

DIAG_DOC = '{"dims":[2,2,2],"slices":[[[1,0],[0,1]],[[1,0],[0,2]]]}'
ROT_DOC = '{"dims":[2,2,2],"slices":[[[1,0],[0,1]],[[0,-1],[1,0]]]}'


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    (tmp_path / "diag.json").write_text(DIAG_DOC)
    (tmp_path / "rot.json").write_text(ROT_DOC)
    return tmp_path


# ---- tensor documents -----------------------------------------------------

def test_parse_example():
    Y = parse_tensor(DIAG_DOC)
    np.testing.assert_array_equal(Y.slices[0], np.eye(2))
    np.testing.assert_array_equal(Y.slices[1], np.diag([1.0, 2.0]))


@pytest.mark.parametrize("doc, msg", [
    ('{"dims":[2,2,3],"slices":[]}', "K must equal 2"),
    ('{"dims":[2,2,2]}', "missing field 'slices'"),
    ('{"dims":[2,2,2],"slices":[[[1,0],[0,1]]]}', "expected 2 matrices"),
    ('{"dims":[2,2,2],"slices":[[[1,0],[0,1]],[[1,0]]]}', r"slices\[1\]: expected 2 rows"),
    ('{"dims":[2,2,2],"slices":[[[1,0],[0,1]],[[1,0],[0]]]}', r"slices\[1\]\[1\]: expected 2 entries"),
    ('{"dims":[2,2,2],"slices":[[[1,0],[0,1]],[[1,0],[0,"x"]]]}', r"\[1\]\[1\]\[1\]: expected a number"),
    ('{"dims":[1,1,2],"slices":[[[NaN]],[[1]]]}', "non-finite"),
    ('{"dims":[1,1,2],"slices":[[[1e999]],[[1]]]}', "non-finite"),
    ('{"dims":[1,1,2],"slices":[[[Infinity]],[[1]]]}', "non-finite"),
    ('{"dims":[0,1,2],"slices":[[],[]]}', "must be positive"),
    ('{"dims":[1.5,1,2],"slices":[]}', "integer"),
    ('[1, 2]', "top level"),
    ('{"dims": [1,1,2],\n "slices": [[[1]], [[2]]', "line 2"),
])
def test_parse_errors(doc, msg):
    with pytest.raises(TensorFileError, match=msg):
        parse_tensor(doc)


def test_file_errors_name_the_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dims":[2,2,3],"slices":[]}')
    with pytest.raises(TensorFileError, match="bad.json"):
        parse_tensor_file(str(p))
    with pytest.raises(TensorFileError, match="missing"):
        parse_tensor_file(str(tmp_path / "missing.json"))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_roundtrip_bit_exact(I, J, data):
    vals = data.draw(st.lists(st.floats(allow_nan=False, allow_infinity=False),
                              min_size=2 * I * J, max_size=2 * I * J))
    Y = Tensor3(np.array(vals).reshape(I, J, 2))
    Z = parse_tensor(emit_tensor(Y))
    assert Z.data.tobytes() == Y.data.tobytes()


def test_stream_roundtrip():
    rng = np.random.default_rng(0)
    Y = Tensor3(rng.standard_normal((3, 2, 2)))
    buf = io.StringIO()
    write_tensor_file(Y, buf, indent=1)
    buf.seek(0)
    assert parse_tensor_file(buf) == Y


# ---- generator ------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_generator_self_checks(kind, n):
    Y = generate_instance(kind, (n, n), seed=7)
    assert Y.shape == (n, n, 2)
    assert generate_instance(kind, (n, n), seed=7) == Y
    if kind == "singular-pencil":
        assert is_singular_pencil(*Y.slices)


def test_generator_examples():
    assert classify_square(generate_instance("interior", (3, 3), R=3, seed=7)).label.value == "Interior"
    assert is_singular_pencil(*generate_instance("singular-pencil", (3, 3), seed=0).slices)
    assert classify_square(generate_instance("exterior", (2, 2), seed=0)).case == "a3"


def test_generator_infeasible():
    with pytest.raises(GenerationError):
        generate_instance("interior", (3, 3), R=2)
    with pytest.raises(GenerationError):
        generate_instance("exterior", (3, 4))
    with pytest.raises(GenerationError):
        generate_instance("nope", (2, 2))
    with pytest.raises(GenerationError):
        generate_instance("cp-random", (2, 3), R=3)


def test_generator_rectangular():
    Y = generate_instance("cp-random", (4, 5), R=2, seed=1)
    assert Y.shape == (4, 5, 2)
    Y = generate_instance("gsd-random", (5, 3), R=2, seed=1)
    assert Y.shape == (5, 3, 2)


# ---- commands -------------------------------------------------------------

def test_classify_diag(files):
    code, out, _ = run(["classify", "--input", str(files / "diag.json"), "--format", "json"])
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["label"] == "Interior" and rep["result"]["case"] == "a1"
    assert len(rep["input_digest"]) == 64
    assert rep["settings"]["tol"] == 1e-8


def test_classify_text(files):
    code, out, _ = run(["classify", "-i", str(files / "diag.json")])
    assert code == 0
    assert "label: Interior" in out and "case: a1" in out


def test_fit_rotation_positive_residual(files):
    code, out, _ = run(["fit", "--input", str(files / "rot.json"), "-R", "2", "--restarts", "8",
                        "--seed", "1", "--format", "json"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["residual"] > 0.5
    tr = res["trace"]
    assert all(b <= a + 1e-12 for a, b in zip(tr, tr[1:]))


def test_perturb_command(tmp_path):
    p = tmp_path / "sp.json"
    code, _, _ = run(["gen", "--kind", "singular-pencil", "--dims", "3", "3", "--seed", "4",
                      "--output", str(p)])
    assert code == 0
    Y = parse_tensor_file(str(p))
    code, out, _ = run(["perturb", "--input", str(p), "--eps", "1e-6", "--format", "json"])
    assert code == 0
    res = json.loads(out)["result"]
    P = Tensor3.from_slices(*res["slices"])
    assert np.linalg.norm((P.data - Y.data).ravel()) <= 1e-6
    assert res["core_classification"]["label"] == "Boundary"
    assert res["core_classification"]["case"] == "a2"


def test_decompose_and_cp(tmp_path):
    p = tmp_path / "in.json"
    run(["gen", "--kind", "interior", "--dims", "3", "3", "--seed", "2", "-o", str(p)])
    code, out, _ = run(["decompose", "-i", str(p), "--format", "json"])
    assert code == 0 and json.loads(out)["result"]["relative_residual"] <= 1e-10
    code, out, _ = run(["decompose", "-i", str(p), "--cp", "--format", "json"])
    assert code == 0 and json.loads(out)["result"]["rank"] == 3


def test_decompose_exterior_fails(files):
    code, _, err = run(["decompose", "-i", str(files / "rot.json")])
    assert code == 1 and "complex" in err


def test_qz_command(files):
    code, out, _ = run(["qz", "-i", str(files / "rot.json"), "--format", "json"])
    res = json.loads(out)["result"]
    assert code == 0 and res["blocks"] == [[0, 2]]
    assert res["orthonormality_error"] <= 1e-12 and res["relative_residual"] <= 1e-10


def test_batch(files):
    (files / "broken.json").write_text("{")
    code, out, _ = run(["classify", "--batch", str(files), "--format", "json"])
    assert code == 1
    res = json.loads(out)["result"]["files"]
    assert [r["file"] for r in res] == ["broken.json", "diag.json", "rot.json"]
    assert "error" in res[0] and res[2]["result"]["case"] == "a3"


def test_rectangular_classify_uses_membership(tmp_path):
    p = tmp_path / "cp.json"
    run(["gen", "--kind", "cp-random", "--dims", "3", "4", "-R", "2", "--seed", "3", "-o", str(p)])
    code, out, _ = run(["classify", "-i", str(p), "-R", "2", "--format", "json"])
    assert code == 0 and json.loads(out)["result"]["label"] == "InClosure"


def test_exit_codes(files):
    assert run(["classify", "--bogus"])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run(["fit", "-i", str(files / "diag.json")])[0] == 2           # -R missing
    assert run(["classify"])[0] == 2                                       # no input
    bad = files / "k3.json"
    bad.write_text('{"dims":[2,2,3],"slices":[]}')
    code, _, err = run(["classify", "-i", str(bad)])
    assert code == 1 and "K must equal 2" in err
    assert run(["perturb", "-i", str(files / "diag.json")])[0] == 1        # not singular


def test_json_is_deterministic(files, tmp_path):
    argv = ["fit", "-i", str(files / "rot.json"), "-R", "2", "--seed", "5", "--format", "json",
            "--restarts", "3"]
    outs = [run(argv)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["gen", "--kind", "exterior", "--dims", "3", "3", "--seed", "9", "-o", str(a)])
    run(["gen", "--kind", "exterior", "--dims", "3", "3", "--seed", "9", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_text_output_six_digits(files):
    _, out, _ = run(["classify", "-i", str(files / "rot.json")])
    margin = [ln for ln in out.splitlines() if ln.strip().startswith("margin")][0]
    assert len(margin.split(":")[1].strip().replace(".", "").lstrip("0")) <= 6


def test_output_file(files, tmp_path):
    dest = tmp_path / "rep.json"
    code, out, _ = run(["classify", "-i", str(files / "diag.json"), "--format", "json",
                        "-o", str(dest)])
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["result"]["case"] == "a1"


def test_console_script_entry_point():
    from importlib.metadata import entry_points
    eps = [e for e in entry_points(group="console_scripts") if e.name == "gsdrank"]
    assert eps and eps[0].value == "gsdrank.cli:main"


def test_classify_eigenvalues_sorted(tmp_path):
    p = tmp_path / "d.json"
    p.write_text('{"dims":[3,3,2],"slices":[[[1,0,0],[0,1,0],[0,0,1]],[[3,0,0],[0,-1,0],[0,0,2]]]}')
    _, out, _ = run(["classify", "-i", str(p), "--format", "json"])
    vals = [e["re"] for e in json.loads(out)["result"]["eigenvalues"]]
    assert vals == sorted(vals)
