import json

from heightzeta.cli import main


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_count_and_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["count", "--model", "E1", "--S", "inf", "--B", "10", "--out"]
    assert main(args + [str(out1)]) == 0
    assert main(args + [str(out2)]) == 0
    j1 = json.loads(_read(out1 / "count_E1.json"))
    assert j1["rows"][0]["N"] == 21
    # artifacts are byte-identical across runs (and thread counts)
    assert _read(out1 / "count_E1.json") == _read(out2 / "count_E1.json")
    assert _read(out1 / "count_E1.csv") == _read(out2 / "count_E1.csv")
    out3 = tmp_path / "c"
    assert main(args[:-1] + ["--threads", "4", "--out", str(out3)]) == 0
    assert _read(out1 / "count_E1.json") == _read(out3 / "count_E1.json")


def test_theta_json(tmp_path):
    assert main(["theta", "--model", "E5", "--S", "inf", "--prime-cutoff", "500", "--out", str(tmp_path)]) == 0
    d = json.loads(_read(tmp_path / "theta_E5.json"))
    assert d["b"] == 2
    assert abs(d["theta"] - 4.0) < 0.05


def test_clemens_json(tmp_path):
    assert main(["clemens", "--model", "E5", "--place", "real", "--out", str(tmp_path)]) == 0
    d = json.loads(_read(tmp_path / "clemens_E5.json"))
    assert sorted(map(tuple, d["faces"])) == [("Dx",), ("Dx", "Dy"), ("Dy",)]
    assert d["dimension"] == 1


def test_zeta_local(tmp_path):
    assert main(["zeta-local", "--place", "real", "--s", "2", "--out", str(tmp_path)]) == 0
    d = json.loads(_read(tmp_path / "zeta_local.json"))
    assert d["zeta"] == [1.0, 0.0]


def test_osc_command(tmp_path):
    rc = main(
        ["osc", "--place", "2", "--phi", "zp", "--d", "2", "--s", "1",
         "--a-grid", "8,64,512", "--out", str(tmp_path)]
    )
    assert rc == 0
    d = json.loads(_read(tmp_path / "osc_decay.json"))
    assert d["fitted_exponent"] >= 0.45
    assert (tmp_path / "osc_decay.csv").exists()


def test_describe_and_density(tmp_path):
    assert main(["describe", "--model", "E4", "--out", str(tmp_path)]) == 0
    assert main(["density", "--model", "E4", "--place", "3", "--s", "1.5", "--out", str(tmp_path)]) == 0
    d = json.loads(_read(tmp_path / "density_E4.json"))
    assert d["exactness"] == "exact"


def test_equi_command(tmp_path):
    assert main(["equi", "--model", "E3", "--S", "inf", "--B", "10000", "--out", str(tmp_path)]) == 0
    d = json.loads(_read(tmp_path / "equi_E3.json"))
    assert len(d["rows"]) == 4


def test_config_file_and_overrides(tmp_path):
    cfgfile = tmp_path / "exp.cfg"
    cfgfile.write_text("model=E1\nB=10\nS=inf\n")
    out = tmp_path / "o"
    assert main(["count", "--config", str(cfgfile), "--out", str(out)]) == 0
    d = json.loads(_read(out / "count_E1.json"))
    assert d["rows"][0]["N"] == 21
    # a flag beats the file
    assert main(["count", "--config", str(cfgfile), "--B", "100", "--out", str(out)]) == 0
    d = json.loads(_read(out / "count_E1.json"))
    assert d["rows"][0]["N"] == 201


def test_error_exit_codes(tmp_path):
    assert main(["count", "--model", "NOPE", "--S", "inf", "--B", "10", "--out", str(tmp_path)]) == 2
    assert main(["count", "--model", "E1", "--S", "5", "--B", "10", "--out", str(tmp_path)]) == 2
    assert main(["count", "--model", "E5", "--S", "inf", "--B", "1e12", "--out", str(tmp_path)]) == 3
    assert main(["poisson", "--model", "E1", "--s", "0.5", "--A", "5", "--out", str(tmp_path)]) == 2
