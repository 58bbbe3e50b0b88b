import json

import numpy as np
import pytest

from conftest import random_pointset
from hpquad.builder import PointSet, build_index
from hpquad.cli import main
from hpquad.io import (
    IndexFormatError, PointsFileError, dumps_index, loads_index, parse_points, read_points,
    write_points,
)
from hpquad.k2 import k2_build
from hpquad.morton import GridSpec


@pytest.mark.parametrize("build", [build_index, k2_build])
def test_index_round_trip(build):
    rng = np.random.default_rng(4)
    for lg in (0, 1, 4, 7):
        for clustered in (False, True):
            ps = random_pointset(rng, lg, clustered)
            idx = build(ps)
            data = dumps_index(idx)
            back = loads_index(data)
            assert back == idx and dumps_index(back) == data


def test_example_file_round_trip(example_index):
    assert loads_index(dumps_index(example_index)) == example_index


def test_corrupt_files_rejected():
    data = dumps_index(build_index(PointSet.from_points([(1, 2), (3, 0)], GridSpec(2))))
    for bad in (b"XXXX" + data[4:], data[:-1], data + b"\0", data[:10],
                data[:4] + b"\x07" + data[5:], data[:6] + b"\x28" + data[7:]):
        with pytest.raises(IndexFormatError):
            loads_index(bad)
    flipped = bytearray(data)
    flipped[8:16] = (5).to_bytes(8, "little")
    with pytest.raises(IndexFormatError):
        loads_index(bytes(flipped))


def test_parse_points_reports_line():
    with pytest.raises(PointsFileError) as err:
        parse_points(["# header", "1 2", "", "3"], GridSpec(2))
    assert err.value.lineno == 4
    with pytest.raises(PointsFileError, match="line 1"):
        parse_points(["4 0"], GridSpec(2))
    xs, ys, lines = parse_points(["1 2", "# c", "3 0"], GridSpec(2))
    assert xs.tolist() == [1, 3] and lines.tolist() == [1, 3]


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_pipeline(tmp_path, capsys):
    pts, idx = tmp_path / "p.txt", tmp_path / "p.hpq"
    assert _run(capsys, "gen", "--mode", "clusters", "--n", 500, "--lg-u", 8,
                "--clusters", 3, "--diameter", 32, "--seed", 7, "--out", pts)[0] == 0
    assert _run(capsys, "build", "--input", pts, "--lg-u", 8, "--out", idx)[0] == 0
    ps = read_points(pts, GridSpec(8))
    x, y = ps.xs[0], ps.ys[0]
    code, out, _ = _run(capsys, "query", idx, "--point", f"{x},{y}", "--trace")
    assert code == 0 and out.startswith("1 segments=")
    q = tmp_path / "q.txt"
    write_points(q, [(x, y), (0, 0) if (0, 0) not in ps else (255, 255)])
    assert _run(capsys, "query", idx, "--batch", q)[1].split()[0] == "1"
    code, out, _ = _run(capsys, "range", idx, "--rect", "0,0,256,256")
    assert code == 0 and len(out.splitlines()) == ps.n
    stats = json.loads(_run(capsys, "stats", idx)[1])
    assert stats["n"] == ps.n and stats["structure"] == "hp"
    dec = tmp_path / "d.txt"
    assert _run(capsys, "decode", idx, "--out", dec)[0] == 0
    assert read_points(dec, GridSpec(8)) == ps
    for cls in ("empty", "filled", "isolated"):
        w = tmp_path / f"{cls}.txt"
        assert _run(capsys, "sample", pts, "--lg-u", 8, "--class", cls, "--count", 50,
                    "--out", w)[0] == 0
        code, out, _ = _run(capsys, "bench", idx, "--queries", w, "--class", cls, "--repeat", 3)
        header, row = out.strip().splitlines()
        assert header == "class,structure,n,lg_u,bpp,ns_per_query,mean_segments"
        assert row.startswith(f"{cls},hp,{ps.n},8,")


def test_cli_golden_determinism(tmp_path, capsys):
    pts = tmp_path / "p.txt"
    _run(capsys, "gen", "--mode", "uniform", "--n", 300, "--lg-u", 6, "--seed", 1, "--out", pts)
    blobs = []
    for k in range(2):
        out = tmp_path / f"i{k}.hpq"
        _run(capsys, "build", "--input", pts, "--lg-u", 6, "--out", out)
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]


def test_cli_error_codes(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1\n2 x\n")
    code, _, err = _run(capsys, "build", "--input", bad, "--lg-u", 4, "--out", tmp_path / "o")
    assert code == 2 and "line 2" in err
    assert _run(capsys, "gen", "--mode", "uniform", "--n", 17, "--lg-u", 2,
                "--out", tmp_path / "g")[0] == 2
    corrupt = tmp_path / "c.hpq"
    corrupt.write_bytes(b"HPQ1garbage")
    assert _run(capsys, "stats", corrupt)[0] == 3
    assert _run(capsys, "stats", tmp_path / "missing")[0] == 2
    good = tmp_path / "g.hpq"
    pts = tmp_path / "p.txt"
    pts.write_text("1 1\n")
    _run(capsys, "build", "--input", pts, "--lg-u", 2, "--out", good)
    assert _run(capsys, "query", good, "--point", "9,9")[0] == 2
    assert _run(capsys, "range", good, "--rect", "0,0,5,1")[0] == 2
    q = tmp_path / "q.txt"
    q.write_text("0 0\n")
    assert _run(capsys, "bench", good, "--queries", q, "--class", "x", "--repeat", 2)[0] == 2


def test_cli_k2(tmp_path, capsys):
    pts = tmp_path / "p.txt"
    pts.write_text("0 0\n3 3\n")
    idx = tmp_path / "k.hpq"
    assert _run(capsys, "build", "--input", pts, "--lg-u", 2, "--structure", "k2",
                "--out", idx)[0] == 0
    assert _run(capsys, "query", idx, "--point", "3,3")[1] == "1\n"
    assert json.loads(_run(capsys, "stats", idx)[1])["structure"] == "k2"
