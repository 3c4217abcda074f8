import csv
import json
import subprocess
import sys

import pytest

from twistlab.cli import fmt, load_config, main
from twistlab.errors import ConfigError

SMALL_VERIFY = {"samples": 500, "fricke_samples": 2000, "rotation_samples": 100, "flow_samples": 100}


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj), encoding="utf-8")
    return str(p)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3"
    assert fmt(True) == "true"
    assert float(fmt(1 / 3)) == 1 / 3


def test_verify_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL_VERIFY)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    res = doc["result"]
    assert res["passed"] and res["failed_maps"] == []
    assert {"N22.U", "N13.T", "N13.U", "N13.W", "N31.U"} <= set(res["coverage"])
    assert any(c.startswith("flow:") for c in res["coverage"])
    assert "checks passed" in capsys.readouterr().out


def test_verify_corruption_names_map(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {**SMALL_VERIFY, "corrupt": {"map": "N13.W", "coordinate": "x", "delta": 1e-6}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "FAIL N13.W oracle" in err
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["result"]["failed_maps"] == ["N13.W"]


def test_verify_seed_changes_values_not_verdicts(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_VERIFY)
    verdicts = []
    for seed in (1, 2):
        out = tmp_path / str(seed)
        assert main(["verify", "--config", cfg, "--seed", str(seed), "--out", str(out)]) == 0
        checks = json.loads((out / "verify.json").read_text())["result"]["checks"]
        verdicts.append([(c["map"], c["check"], c["passed"]) for c in checks])
    assert verdicts[0] == verdicts[1]


def test_orbit_zero_steps(tmp_path):
    cfg = write_cfg(tmp_path, {"n": 0})
    assert main(["orbit", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "orbit.csv")
    assert rows[0] == ["step", "a", "b", "c", "x", "y", "z", "d", "fricke_residual"]
    assert len(rows) == 2 and rows[1][0] == "0"
    first = (tmp_path / "orbit.csv").read_text().splitlines()[0]
    assert first.startswith("# twistlab orbit config=")


def test_orbit_seventeen_digits(tmp_path):
    cfg = write_cfg(tmp_path, {"n": 5})
    main(["orbit", "--config", cfg, "--seed", "9", "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "orbit.csv")
    for r in rows[1:]:
        for cell in r[1:8]:
            assert float(cell) == float(format(float(cell), ".17g"))
            assert len(cell.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_json_key_order(tmp_path):
    cfg = write_cfg(tmp_path, {"n": 3})
    main(["orbit", "--config", cfg, "--out", str(tmp_path)])
    text = (tmp_path / "orbit.json").read_text()
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert text == json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@pytest.mark.parametrize("command,cfg", [
    ("orbit", {"n": 200}),
    ("equidistribute", {"n": 500}),
    ("flow", {"samples": 50, "times": 8}),
    ("volume", {"samples": 200_000, "epsilon": 0.3}),
    ("ergodicity", {"n": 5000, "space_batches": 2, "space_per_batch": 200, "time_batches": 10}),
])
def test_byte_identical_reruns(tmp_path, command, cfg):
    path = write_cfg(tmp_path, cfg)
    outs = []
    for run in ("r1", "r2"):
        out = tmp_path / run
        assert main([command, "--config", path, "--seed", "11", "--out", str(out), "--svg"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert any(n.endswith(".svg") for n in outs[0])


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 3,\n "program": [}', encoding="utf-8")
    assert main(["orbit", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "line 2 column" in capsys.readouterr().err
    with pytest.raises(ConfigError, match="unknown field"):
        load_config("orbit", write_cfg(tmp_path, {"steps": 3}), None)
    with pytest.raises(ConfigError, match="expects int"):
        load_config("orbit", write_cfg(tmp_path, {"n": "3"}), None)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("orbit", str(tmp_path / "missing.json"), None)
    assert load_config("orbit", None, 2**64 - 1)["seed"] == 2**64 - 1


def test_seed_flag_range():
    with pytest.raises(SystemExit):
        main(["orbit", "--seed", "-1"])
    with pytest.raises(SystemExit):
        main(["orbit", "--seed", str(2**64)])


def test_domain_error_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, {"surface": "N22", "twist": "T", "n": 10})
    assert main(["equidistribute", "--config", cfg, "--out", str(tmp_path)]) in (2, 3)


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "twistlab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "twistlab" in r.stdout
