import subprocess
import sys

import pytest
from conftest import MAPPED_GEOHASHES

from geotree.bench import read_report
from geotree.cli import main
from geotree.geohash import decode
from geotree.hpi import IndexSeries


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split("\t", 1) for line in out.splitlines())


@pytest.fixture
def sample_csv(tmp_path):
    path = tmp_path / "sample.csv"
    lines = ["id,date,price,lat,lon"]
    for i, g in enumerate(MAPPED_GEOHASHES):
        lat, lon = decode(g).centroid
        lines.append(f"{i},2020-01,{100 + i},{lat!r},{lon!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(capsys, "gen", "--n", "1000", "--months", "12", "--seed", "7", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1001


def test_gen_zero_records(tmp_path, capsys):
    path = tmp_path / "e.csv"
    assert run(capsys, "gen", "--n", "0", "--out", str(path))[0] == 0
    assert path.read_text() == "id,date,price,lat,lon\n"


def test_gen_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"n_records": 5, "n_months": 2, "seed": 1}')
    path = tmp_path / "d.csv"
    assert run(capsys, "gen", "--config", str(cfg), "--out", str(path))[0] == 0
    assert len(path.read_text().splitlines()) == 6


def test_gen_without_out_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "5"])
    assert exc.value.code == 2
    assert "--out" in capsys.readouterr().err


def test_build(sample_csv, capsys):
    code, out, _ = run(capsys, "build", "--data", str(sample_csv), "--height", "6")
    f = fields(out)
    assert code == 0 and f["records"] == "9" and f["stored_references"] == "63"


def test_query_maximal_sample(sample_csv, capsys):
    code, out, _ = run(capsys, "query", "--data", str(sample_csv), "--geohash", "gd7jyb", "--maximal", "--exclude", "7")
    assert code == 0
    assert fields(out) == {"prefix": "gd7j", "depth": "4", "count": "1", "ids": "2"}


def test_query_level(sample_csv, capsys):
    code, out, _ = run(capsys, "query", "--data", str(sample_csv), "--geohash", "gc7j98", "--level", "2")
    assert code == 0 and fields(out)["ids"] == "0,1,4,5,8"


def test_query_level_zero_is_usage_error(sample_csv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["query", "--data", str(sample_csv), "--geohash", "gc7j98", "--level", "0"])
    assert exc.value.code == 2


def test_query_empty_dataset(tmp_path, capsys):
    path = tmp_path / "e.csv"
    path.write_text("id,date,price,lat,lon\n")
    code, out, _ = run(capsys, "query", "--data", str(path), "--geohash", "gc7j98", "--maximal")
    assert code == 0 and fields(out)["count"] == "0"


@pytest.mark.parametrize("geohash", ["gc7", "gc7jai", "GC7J98"])
def test_query_bad_geohash(sample_csv, capsys, geohash):
    code, _, err = run(capsys, "query", "--data", str(sample_csv), "--geohash", geohash, "--maximal")
    assert code == 1 and "error" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "build", "--data", str(tmp_path / "nope.csv"))
    assert code == 1 and "nope.csv" in err


def test_bad_csv_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("id,date,price,lat,lon\n1,2020-01,100,91,0\n")
    code, _, err = run(capsys, "build", "--data", str(path))
    assert code == 1 and "line 2" in err and "lat" in err


@pytest.mark.parametrize("backend", ["naive", "geotree"])
def test_index_flat(tmp_path, capsys, backend):
    data = tmp_path / "flat.csv"
    rows = ["id,date,price,lat,lon"] + [f"{i},2020-0{1 + i % 3},500,{53 + i / 100},{-7 + i / 50}" for i in range(30)]
    data.write_text("\n".join(rows) + "\n")
    out_csv, growth = tmp_path / "i.csv", tmp_path / "g.csv"
    code, out, _ = run(capsys, "index", "--data", str(data), "--backend", backend, "--out", str(out_csv), "--growth-out", str(growth))
    assert code == 0
    assert IndexSeries.read_csv(out_csv).values == [100.0, 100.0, 100.0]
    assert growth.read_text().startswith("from_month,to_month,growth,support\n")
    tag = "+" if backend == "geotree" else ""
    assert [line.split()[0] for line in out.splitlines()[1:]] == [f"Voting{tag}", f"Stratify{tag}", f"Overall{tag}"]


def test_index_single_month_fails(sample_csv, tmp_path, capsys):
    code, _, err = run(capsys, "index", "--data", str(sample_csv), "--out", str(tmp_path / "i.csv"))
    assert code == 1 and "two months" in err


def test_bench_report(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(
        capsys, "bench", "--gen", "500", "--heights", "4,5", "--fractions", "10%,1.0",
        "--trials", "2", "--queries", "10", "--out", str(out),
    )
    assert code == 0
    rows = read_report(out)
    assert len(rows) == 8 and {r.height for r in rows} == {4, 5}
    assert {r.n_records for r in rows} == {50, 500}


def test_bench_zero_trials_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--gen", "10", "--trials", "0"])
    assert exc.value.code == 2


def test_console_entry_point(tmp_path):
    path = tmp_path / "d.csv"
    proc = subprocess.run([sys.executable, "-m", "geotree", "gen", "--n", "3", "--out", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0 and path.exists()
