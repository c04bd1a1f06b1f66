import json

import pytest

from toda2d.cli import main
from toda2d.config import parse_config
from toda2d.errors import ParseError

POINT = {"n_modes": 32, "x_modes": 16, "lambda": [[0, 0.1, 0]], "lambdabar": [[-1, 0.25, 0]]}
LOOP = dict(POINT, x_modulation=[[1, 0, 0.05, 0], [1, -1, 0.02, 0, "lambdabar"]])


@pytest.fixture
def cfg(tmp_path):
    def write(obj, name="cfg.json"):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(capsys, cfg):
    code, out, _ = run(capsys, "validate", cfg(POINT))
    rep = json.loads(out)
    assert code == 0 and rep["in_M1"] and rep["in_M0"]
    code, out, _ = run(capsys, "validate", cfg(dict(POINT, lambdabar=[])))
    assert code == 0 and json.loads(out)["in_M1"] is False
    code, out, _ = run(capsys, "validate", cfg(LOOP))
    assert code == 0 and json.loads(out)["diagnostics"]["x_samples"] == 16


def test_parse_errors(capsys, cfg):
    code, _, err = run(capsys, "validate", cfg('{"lambda": [[0, 1, 0]],\n "lambdabar": ]}'))
    assert code == 3 and "line 2" in json.loads(err)["message"]
    code, _, err = run(capsys, "validate", "/nonexistent/cfg.json")
    assert code == 3 and json.loads(err)["error"] == "IoError"
    with pytest.raises(ParseError):
        parse_config('{"lambda": [[0, "a", 0]], "lambdabar": []}')
    with pytest.raises(ParseError):
        parse_config('{"lambda": [], "lambdabar": [], "x_modulation": [[1, 0, 0, 0, "mu"]]}')
    with pytest.raises(ParseError):
        parse_config('{"lambda": []}')


def test_check_exit_codes(capsys, cfg):
    path = cfg(LOOP)
    code, out, _ = run(capsys, "check", "metric", path, "--window", "4")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "check", "levelt", path, "--window", "4", "--tol", "1e-20")
    assert code == 1 and not json.loads(out)["pass"]
    code, _, err = run(capsys, "check", "deformed", path, "--zeta", "0.9")
    assert code == 2 and json.loads(err)["error"] == "ZetaOutOfDisc"
    code, _, err = run(capsys, "check", "zs", cfg(dict(POINT, lambdabar=[]), "bad.json"))
    assert code == 2 and json.loads(err)["error"] == "NotInM1"


def test_check_reports_are_reproducible(capsys, cfg, tmp_path):
    path = cfg(LOOP)
    outs = []
    for k in range(2):
        out = str(tmp_path / f"r{k}.json")
        assert run(capsys, "check", "tau", path, "--no-timing", "--seed", "3", "--threads", str(k + 1),
                   "--out", out)[0] == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["seed"] == 3 and all("runtime_ms" not in c for c in rep["checks"])


def test_evolve(capsys, cfg, tmp_path):
    path = cfg(dict(LOOP, hamiltonians=["u,0", "v,1", "0,0"]))
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run(capsys, "evolve", path, "--flow", "v,1", "--time", "0", "--out", a)[0] == 0
    assert run(capsys, "evolve", path, "--flow", "v,1", "--time", "0", "--out", b)[0] == 0
    assert open(a, "rb").read() == open(b, "rb").read()

    code, _, err = run(capsys, "evolve", path, "--flow", "u,0", "--time", "0.05", "--dt", "0.01", "--out", a)
    snap = json.loads(open(a).read())
    assert code == 0 and "max Hamiltonian drift" in err
    assert [d["index"] for d in snap["drift"]] == ["u,0", "v,1", "0,0"]
    assert max(d["drift"] for d in snap["drift"]) < 1e-9
    # snapshots load back as configurations
    code, out, _ = run(capsys, "validate", a)
    assert code == 0 and json.loads(out)["in_M1"]
