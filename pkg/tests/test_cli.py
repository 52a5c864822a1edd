import csv
import io
import json
import random

import pytest

from padic_charnet.characters import Character
from padic_charnet.cli import main
from padic_charnet.network import Dataset, constant_network, forward
from padic_charnet.padic import PadicContext
from padic_charnet.polysys import IntPolynomial, system_to_json

from conftest import random_character, random_network


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def dump(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_char_eval(capsys):
    code, out, _ = run(["char-eval", "--p", 3, "--E", 3, "--a", 4, "--x", 5], capsys)
    assert code == 0 and out.strip() == "25"
    code, out, _ = run(["char-eval", "--p", 3, "--E", 2, "--exp", "--x", 1, "--method", "taylor"], capsys)
    assert code == 0 and out.strip() == "4"


def test_char_eval_all_methods(capsys):
    code, out, _ = run(["char-eval", "--p", 5, "--E", 4, "--a", 26, "--x", 17, "--all-methods"], capsys)
    lines = dict(line.split("\t") for line in out.strip().splitlines())
    assert code == 0 and lines["agree"] == "yes"
    assert len({lines[m] for m in ("binary", "mahler", "taylor")}) == 1


@pytest.mark.parametrize("argv", [
    ["char-eval", "--p", 4, "--E", 2, "--a", 5, "--x", 1],
    ["char-eval", "--p", 3, "--E", 2, "--a", 5, "--x", 1],
    ["char-eval", "--p", 3, "--E", 0, "--a", 4, "--x", 1],
    ["char-eval", "--p", 3, "--E", 2, "--x", 1],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 64 and "error" in err


def test_argparse_failure_exits_64():
    with pytest.raises(SystemExit) as info:
        main(["char-eval", "--p", "3", "--E", "2", "--a", "4x", "--x", "1"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 64


def test_ddp(tmp_path, capsys):
    x = IntPolynomial.variable(1, 0)
    path = dump(tmp_path, "sys.json", system_to_json([x * x - 2], 1, 3))
    code, out, _ = run(["ddp", "--system", path, "--cap", 3], capsys)
    assert code == 2 and json.loads(out)["e_star"] == 0
    path = dump(tmp_path, "sys2.json", system_to_json([x - 1], 1))
    code, out, _ = run(["ddp", "--system", path, "--cap", 4, "--p", 2, "--strategy", "enumerate"], capsys)
    report = json.loads(out)
    assert code == 0 and report["hit_cap"] and report["e_star"] == 4
    code, _, _ = run(["ddp", "--system", path, "--cap", 4], capsys)
    assert code == 64  # no prime anywhere


def test_ddp_overflow(tmp_path, capsys):
    path = dump(tmp_path, "sys.json", system_to_json([IntPolynomial.constant(3, 0)], 3, 3))
    code, _, err = run(["ddp", "--system", path, "--cap", 4, "--frontier-budget", 50], capsys)
    assert code == 3 and "last completed level" in err


def test_schema_error(tmp_path, capsys):
    bad = dump(tmp_path, "bad.json", {"L": 1, "polynomials": [{"terms": [{"exps": {"0": "a"}}]}]})
    code, _, _ = run(["ddp", "--system", bad, "--cap", 2, "--p", 3], capsys)
    assert code == 65
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, _ = run(["ddp", "--system", broken, "--cap", 2, "--p", 3], capsys)
    assert code == 65
    code, _, _ = run(["ddp", "--system", tmp_path / "missing.json", "--cap", 2, "--p", 3], capsys)
    assert code == 64


def _generated_data(tmp_path):
    rng = random.Random(5)
    ctx = PadicContext(3, 2)
    chi = random_character(rng, 3, 2, allow_negative_base=False)
    truth = random_network(rng, ctx, 0, chi, 1, 1, 1)
    X = [[0], [1], [2]]
    data = Dataset(ctx, 0, X, [forward(truth, x) for x in X])
    return dump(tmp_path, "data.json", data.to_json()), chi


def test_fit_and_eval(tmp_path, capsys):
    data_path, chi = _generated_data(tmp_path)
    out_path = tmp_path / "fit.json"
    code, _, _ = run(["fit", "--data", data_path, "--shape", "1,1,1", "--a", chi.a, "--out", out_path], capsys)
    assert code == 0
    result = json.loads(out_path.read_text())
    assert result["loss"]["zero"] is True
    net_path = dump(tmp_path, "net.json", result["network"])
    code, out, _ = run(["eval", "--net", net_path, "--data", data_path], capsys)
    assert code == 0
    for sample in json.loads(out)["samples"]:
        assert all(v["capped"] and v["valuation"] >= 2 for v in sample["residual_valuations"])


def test_eval_constant_network(tmp_path, capsys):
    ctx = PadicContext(5, 2)
    chi = Character(ctx, 6)
    net = dump(tmp_path, "net.json", constant_network(ctx, chi, 1).to_json())
    data = dump(tmp_path, "data.json", Dataset(ctx, 0, [[0], [7]], [[1], [1]]).to_json())
    code, out, _ = run(["eval", "--net", net, "--data", data], capsys)
    doc = json.loads(out)
    assert code == 0
    assert [s["output"] for s in doc["samples"]] == [[{"num": "1", "F": 0}]] * 2
    assert all(v["valuation"] >= 2 for s in doc["samples"] for v in s["residual_valuations"])


def test_fit_inconsistent_exits_2(tmp_path, capsys):
    ctx = PadicContext(3, 2)
    data = dump(tmp_path, "data.json", Dataset(ctx, 0, [[1], [1]], [[3], [0]]).to_json())
    code, out, _ = run(["fit", "--data", data, "--shape", "1,1,1", "--a", 4], capsys)
    assert code == 2 and json.loads(out)["loss"]["valuation"] == 1


def test_compile_unsupported(tmp_path, capsys):
    ctx = PadicContext(2, 2)
    data = dump(tmp_path, "data.json", Dataset(ctx, 0, [[1]], [[1]]).to_json())
    code, _, err = run(["compile", "--data", data, "--shape", "1,1,1", "--a", 3], capsys)
    assert code == 4 and "unsupported" in err


def test_compile_then_ddp_is_deterministic(tmp_path, capsys):
    data_path, chi = _generated_data(tmp_path)
    argv = ["compile", "--data", data_path, "--shape", "1,1,1", "--a", chi.a]
    code, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert code == 0 and first == second
    sys_path = tmp_path / "sys.json"
    sys_path.write_text(first)
    code, out, _ = run(["ddp", "--system", sys_path, "--cap", 2], capsys)
    assert code == 0 and json.loads(out)["hit_cap"]


def test_bench_csv(tmp_path, capsys):
    out_path = tmp_path / "bench.csv"
    code, _, _ = run(["bench", "--primes", "2,3", "--precisions", "4", "--samples", 3, "--repeat", 1,
                      "--out", out_path], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert len(rows) == 6
    assert {r["method"] for r in rows} == {"binary", "mahler", "taylor"}
    assert rows[0]["label"] == f"t_{rows[0]['method']}(4)"
