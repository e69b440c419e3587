import json

import pytest

from curvbound.cli import RunConfig, dump_report, main


def _report(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_check_sphere_passes(tmp_path):
    out = tmp_path / "sphere.json"
    assert main(["check", "--space", "sphere:r=1,n=20,seed=7", "--kappa", "1", "--strategy", "exhaustive",
                 "--out", str(out)]) == 0
    doc = _report(out)
    assert doc["config"]["kappa"] == 1.0
    assert doc["config"]["space"]["type"] == "sphere"
    assert "workers" not in doc["config"]
    assert doc["report"]["counts"]["fails"] == 0
    hist = (tmp_path / "sphere.histogram.csv").read_text().splitlines()
    assert hist[0] == "excess_lo,excess_hi,count" and len(hist) == 31


def test_check_tripod_matrix_fails(tmp_path):
    csv_path = tmp_path / "tripod.csv"
    assert main(["gen", "--space", "tripod", "--out", str(csv_path)]) == 0
    out = tmp_path / "t.json"
    assert main(["check", "--matrix", str(csv_path), "--kappa", "0", "--out", str(out)]) == 1
    assert "hub" in _report(out)["report"]["witness"]


def test_globalize_hemisphere(tmp_path):
    out = tmp_path / "g.json"
    assert main(["globalize", "--space", "hemisphere:open,r=1,n=40,seed=3", "--kappa", "1",
                 "--local-radius", "0.3", "--out", str(out)]) == 0
    assert _report(out)["report"]["verdict"] == "pass"


def test_invalid_inputs_exit_2(tmp_path, capsys):
    assert main(["check", "--space", "torus:n=3", "--kappa", "1"]) == 2
    assert "unknown space type" in capsys.readouterr().err
    with pytest.raises(SystemExit) as err:
        main(["check", "--space", "sphere:n=5", "--kappa", "1", "--strategy", "random:count=9"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["check", "--space", "sphere:n=5", "--matrix", "x.csv", "--kappa", "1"])
    assert err.value.code == 2
    assert main(["check", "--matrix", str(tmp_path / "missing.csv"), "--kappa", "0"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,z\n0,1,3\n1,0,1\n3,1,0\n")
    assert main(["check", "--matrix", str(bad), "--kappa", "0"]) == 2
    assert "triangle" in capsys.readouterr().err


def test_kappa_max(tmp_path):
    out = tmp_path / "k.json"
    assert main(["kappa-max", "--space", "hyperbolic:n=20,seed=2", "--bracket", "-2", "0", "--out", str(out)]) == 0
    assert _report(out)["report"]["kappa_max"] == pytest.approx(-1, abs=0.1)
    assert main(["kappa-max", "--space", "hyperbolic:n=20,seed=2", "--bracket", "0", "1"]) == 2


def test_hinge_with_coordinates(capsys):
    assert main(["hinge", "--space", "sphere:n=5", "--kappa", "1", "@0,0,1", "@1,0,0", "@0,1,0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["angle"] == pytest.approx(1.5707963267948966)


def test_cradle_writes_vertex_series(tmp_path):
    out = tmp_path / "c.json"
    assert main(["cradle", "--space", "euclidean:n=5", "@-1,0", "@1,0", "@0,-1", "--epsilon", "0.1",
                 "--steps", "30", "--radius", "2", "--out", str(out)]) == 0
    rows = (tmp_path / "c.cradle.csv").read_text().splitlines()
    assert rows[0] == "k,x0,x1" and len(rows) == 32
    assert _report(out)["report"]["containment"]["passed"]


def test_keylemma_on_cone_writes_radial_series(tmp_path):
    out = tmp_path / "k.json"
    assert main(["keylemma", "--space", "cone:angle=3pi/2,n=5", "--kappa", "0",
                 "@1,0", "@1,0.7pi", "@0.3,1.1pi", "--out", str(out)]) == 0
    doc = _report(out)["report"]
    assert doc["verdict"] == "verified" and doc["d_pq"] < doc["model_pq"]
    assert (tmp_path / "k.radial.csv").read_text().startswith("t,model_angle")


def test_keylemma_unmet_exits_2():
    assert main(["keylemma", "--space", "tripod:sub=8", "--kappa", "0", "leaf0", "leaf1", "hub~leaf2:2"]) == 2


@pytest.mark.parametrize("argv", [
    ["check", "--space", "sphere:n=30,seed=2", "--kappa", "1.05", "--strategy", "random:count=20000,seed=1"],
    ["globalize", "--space", "cone:angle=5pi/2,punctured,n=20,seed=1", "--kappa", "0", "--local-radius", "0.3"],
])
def test_reports_identical_across_workers(tmp_path, argv):
    texts = []
    for workers in ("1", "3"):
        out = tmp_path / f"r{workers}.json"
        main(argv + ["--workers", workers, "--out", str(out)])
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_config_excludes_volatile_fields():
    cfg = RunConfig("check", {"workers": 8, "out": "x.json", "kappa": 1.0})
    assert cfg.to_dict() == {"subcommand": "check", "kappa": 1.0}
    assert dump_report({"b": float("nan"), "a": 1}) == '{\n  "a": 1,\n  "b": null\n}\n'


@pytest.mark.parametrize("sub", ["gen", "check", "kappa-max", "hinge", "cradle", "keylemma", "globalize"])
def test_help_renders(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    assert "usage: curvbound " + sub in capsys.readouterr().out
