import io
import json

import numpy as np
import pydot
import pytest

from cmvm.cli import main, parse_problem, problem_to_json, ProblemFileError

from conftest import random_complex


def run(argv):
    import contextlib
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def problem(tmp_path):
    def write(A, X=None, name="p.json"):
        path = tmp_path / name
        path.write_text(problem_to_json(A, X))
        return str(path)
    return write


def _ys(text):
    return np.array([complex(*map(float, line.split())) for line in text.strip().splitlines()])


class TestProblemFile:
    def test_missing_matrix(self):
        with pytest.raises(ProblemFileError, match='"matrix"'):
            parse_problem('{"m": 1, "n": 1}')

    def test_bad_json_has_position(self):
        with pytest.raises(ProblemFileError, match="line 2"):
            parse_problem('{"m": 1,\n "n": }')

    def test_wrong_length(self):
        with pytest.raises(ProblemFileError, match="expected 4"):
            parse_problem('{"m": 2, "n": 2, "matrix": [[1, 0]]}')

    def test_vector_length(self):
        with pytest.raises(ProblemFileError, match='"vector"'):
            parse_problem('{"m": 1, "n": 2, "matrix": [[1, 0], [0, 1]], "vector": [[1, 0]]}')

    def test_non_numeric(self):
        with pytest.raises(ProblemFileError, match=r'"matrix"\[0\]'):
            parse_problem('{"m": 1, "n": 1, "matrix": [["a", 0]]}')

    def test_non_finite(self):
        with pytest.raises(ProblemFileError, match="non-finite"):
            parse_problem('{"m": 1, "n": 1, "matrix": [[NaN, 0]]}')

    def test_roundtrip(self, rng):
        A, X = random_complex(rng, 2, 3), random_complex(rng, 3)
        p = parse_problem(problem_to_json(A, X))
        assert np.array_equal(p.matrix.entries, A) and np.array_equal(p.vector.entries, X)


class TestCompile:
    def test_worked_size_table(self, problem, rng):
        code, out, _ = run(["compile", "--input", problem(random_complex(rng, 3, 4))])
        assert code == 0
        assert "sigma       9x18" in out
        assert "p_main      12x4" in out
        assert "ga_lift     18x12" in out

    def test_pads_odd(self, problem):
        code, out, _ = run(["compile", "--input", problem([[1 + 0j]])])
        assert code == 0
        assert "padded" in out and "N = 2" in out

    def test_missing_field_exit_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"m": 1, "n": 1}')
        code, _, err = run(["compile", "--input", str(path)])
        assert code == 2 and '"matrix"' in err

    def test_writes_constants(self, problem, tmp_path, rng):
        out_path = tmp_path / "k.json"
        code, _, _ = run(["compile", "--input", problem(random_complex(rng, 2, 4)), "--out", str(out_path)])
        doc = json.loads(out_path.read_text())
        assert code == 0 and len(doc["a1"]) == 8 and len(doc["c_neg"]) == 4
        assert doc["operators"]["sigma"] == [6, 12]


class TestEval:
    def test_identity(self, problem):
        code, out, _ = run(["eval", "--input", problem([[1 + 0j]], [5 - 2j])])
        assert code == 0 and out == "5 -2\n"

    def test_zero_matrix(self, problem, rng):
        code, out, _ = run(["eval", "--input", problem(np.zeros((3, 4)), random_complex(rng, 4))])
        assert code == 0
        assert np.max(np.abs(_ys(out))) < 1e-15
        assert len(out.splitlines()) == 3

    @pytest.mark.parametrize("M,N", [(3, 4), (2, 5), (4, 1)])
    def test_matches_naive_flag(self, problem, rng, M, N):
        path = problem(random_complex(rng, M, N), random_complex(rng, N))
        _, fast, _ = run(["eval", "--input", path])
        _, slow, _ = run(["eval", "--input", path, "--naive"])
        a, b = _ys(fast), _ys(slow)
        assert np.max(np.abs(a - b)) / max(1, np.max(np.abs(b))) <= 1e-12

    def test_missing_vector(self, problem):
        code, _, err = run(["eval", "--input", problem([[1 + 0j]])])
        assert code == 2 and "vector" in err

    def test_missing_file(self, tmp_path):
        code, _, _ = run(["eval", "--input", str(tmp_path / "nope.json")])
        assert code == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["eval"])
        assert exc.value.code == 2


class TestVerify:
    def test_small_grid_passes(self):
        code, out, _ = run(["verify", "--m-max", "2", "--n-max", "4", "--trials", "5", "--seed", "7"])
        assert code == 0
        assert out.count("PASS") == 4

    def test_deterministic(self):
        argv = ["verify", "--m-max", "3", "--n-max", "6", "--trials", "4", "--seed", "123"]
        assert run(argv)[1] == run(argv)[1]

    def test_perturbation_detected(self):
        code, out, _ = run(["verify", "--m-max", "1", "--n-max", "2", "--trials", "3", "--perturb-c", "1e-9"])
        assert code == 1 and "FAIL" in out

    def test_bad_bounds(self):
        assert run(["verify", "--n-max", "1"])[0] == 2


class TestReport:
    @pytest.mark.parametrize("M,N,mult,naive,saving", [
        (3, 4, 24, 48, "50.00%"),
        (1, 2, 6, 8, "25.00%"),
        (6, 8, 84, 192, "56.25%"),
    ])
    def test_rows(self, problem, rng, M, N, mult, naive, saving):
        code, out, _ = run(["report", "--input", problem(random_complex(rng, M, N))])
        assert code == 0
        row = next(line for line in out.splitlines() if line.startswith("multipliers"))
        assert row.split()[1:] == [str(mult), str(mult), str(naive)]
        assert saving in out


class TestDot:
    @pytest.mark.parametrize("M,N,circles", [(3, 4, 24), (1, 2, 6)])
    def test_circle_count(self, problem, tmp_path, rng, M, N, circles):
        out_path = tmp_path / "g.dot"
        code, out, _ = run(["dot", "--input", problem(random_complex(rng, M, N)), "--out", str(out_path)])
        text = out_path.read_text()
        assert code == 0 and text.count("shape=circle") == circles
        (parsed,) = pydot.graph_from_dot_data(text)
        assert f"{len(parsed.get_nodes())} nodes" in out
        assert f"{len(parsed.get_edges())} edges" in out

    def test_unwritable(self, problem, tmp_path):
        code, _, err = run(["dot", "--input", problem([[1, 2]]), "--out", str(tmp_path / "no" / "g.dot")])
        assert code == 2 and "cannot write" in err
