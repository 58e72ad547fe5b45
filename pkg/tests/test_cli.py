import json

import numpy as np
import numpy.testing as npt
import pytest

from netgw.analysis import load_dissimilarity_csv
from netgw.cli import main
from netgw.core import load_network, new_network, one_point_network, save_network


@pytest.fixture
def point_dir(tmp_path):
    d = tmp_path / "nets"
    d.mkdir()
    for name, a in (("p0", 0.0), ("p1", 1.0), ("p3", 3.0)):
        save_network(one_point_network(a), d / f"{name}.json")
    return d


@pytest.fixture
def fig2_file(tmp_path, fig2_triple):
    path = tmp_path / "fig2x.json"
    save_network(fig2_triple[0], path)
    return path


# ---------------------------------------------------------------------------
# generate


def test_generate_cycle(tmp_path, capsys):
    out = tmp_path / "gen"
    assert main(["generate", "--cycle", "0,1,2", "--out", str(out)]) == 0
    net = load_network(out / "cycle.json")
    npt.assert_array_equal(
        net.weights, [[0.0, 1.0, 2.0], [2.0, 0.0, 1.0], [1.0, 2.0, 0.0]]
    )
    assert "cycle.json" in capsys.readouterr().out


def test_generate_preset_writes_manifest(tmp_path):
    out = tmp_path / "gen"
    code = main(
        ["generate", "--preset", "table3", "--per-class", "1", "--out", str(out)]
    )
    assert code == 0
    manifest = (out / "manifest.csv").read_text().splitlines()
    assert manifest[0] == "label,class,file"
    assert manifest[1] == "c1-00,0,c1-00.json"
    assert len(manifest) == 6
    net = load_network(out / "c5-00.json")
    assert net.n == 20


def test_generate_from_spec_file(tmp_path):
    spec = {
        "means": [[0.0, 2.0], [2.0, 0.0]],
        "variances": [[0.0, 0.0], [0.0, 0.0]],
        "block_sizes": [1, 2],
        "name": "toy",
    }
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(spec))
    out = tmp_path / "gen"
    code = main(
        ["generate", "--spec", str(spec_file), "--per-class", "2", "--out", str(out)]
    )
    assert code == 0
    net = load_network(out / "toy-00.json")
    assert net.n == 3
    expect = np.zeros((3, 3))
    expect[0, 1:] = 2.0
    expect[1:, 0] = 2.0
    npt.assert_array_equal(net.weights, expect)  # zero variance: exact means


def test_generate_requires_one_source(tmp_path, capsys):
    out = str(tmp_path / "gen")
    assert main(["generate", "--out", out]) == 2
    assert (
        main(["generate", "--preset", "table1", "--cycle", "1,2", "--out", out])
        == 2
    )
    assert "exactly one" in capsys.readouterr().err


def test_generate_rejects_bad_spec_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"means": [[0.0]]}')
    assert main(["generate", "--spec", str(bad), "--out", str(tmp_path / "g")]) == 2
    assert "missing field" in capsys.readouterr().err
    bad.write_text("{not json")
    assert main(["generate", "--spec", str(bad), "--out", str(tmp_path / "g")]) == 2


# ---------------------------------------------------------------------------
# compare


def test_compare_directory(point_dir, tmp_path, capsys):
    out = tmp_path / "cmp"
    code = main(["compare", str(point_dir), "--method", "szlb", "--out", str(out)])
    assert code == 0
    matrix = load_dissimilarity_csv(out / "dissimilarity.csv")
    assert matrix.labels == ("p0", "p1", "p3")
    npt.assert_allclose(
        matrix.D, [[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]], atol=1e-12
    )
    report = json.loads((out / "report.json").read_text())
    assert report["method"] == "szlb"
    assert report["n_pairs"] == 3
    assert report["failures"] == []


def test_compare_explicit_files(point_dir, tmp_path):
    out = tmp_path / "cmp"
    code = main(
        [
            "compare",
            str(point_dir / "p0.json"),
            str(point_dir / "p3.json"),
            "--method",
            "rtlb_max",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    matrix = load_dissimilarity_csv(out / "dissimilarity.csv")
    assert matrix.D[0, 1] == pytest.approx(3.0, abs=1e-9)


def test_compare_entropic_uses_lam(point_dir, tmp_path):
    out = tmp_path / "cmp"
    code = main(
        [
            "compare",
            str(point_dir),
            "--method",
            "entropic_gw",
            "--lam",
            "50.0",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    matrix = load_dissimilarity_csv(out / "dissimilarity.csv")
    npt.assert_allclose(matrix.D[0, 1], 1.0, atol=1e-6)


def test_compare_partial_failure_exits_one(point_dir, tmp_path, capsys):
    # entropic at p=1 is unsupported, so every pair lands in the manifest
    out = tmp_path / "cmp"
    code = main(
        [
            "compare",
            str(point_dir),
            "--method",
            "entropic_gw",
            "--p",
            "1.0",
            "--out",
            str(out),
        ]
    )
    assert code == 1
    assert "pairs failed" in capsys.readouterr().err
    report = json.loads((out / "report.json").read_text())
    assert len(report["failures"]) == 3
    matrix = load_dissimilarity_csv(out / "dissimilarity.csv")
    assert not matrix.complete


def test_compare_rejects_oversized_network(tmp_path, capsys):
    n = 1001
    doc = {"weights": [[0.0] * n] * n}
    big = tmp_path / "big.json"
    big.write_text(json.dumps(doc))
    code = main(["compare", str(big), str(big), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "1001 nodes" in err and "subsample" in err


def test_compare_rejects_bad_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    code = main(["compare", str(bad), str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_compare_empty_directory(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["compare", str(empty), "--out", str(tmp_path / "o")]) == 2


def test_compare_reads_csv_with_measure_row(tmp_path):
    f = tmp_path / "net.csv"
    f.write_text("0,2\n2,0\n0.5,0.5\n")
    g = tmp_path / "net2.csv"
    g.write_text("0,4\n4,0\n0.5,0.5\n")
    out = tmp_path / "cmp"
    code = main(
        [
            "compare",
            str(f),
            str(g),
            "--method",
            "szlb",
            "--p",
            "1.0",
            "--measure",
            "last-row",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    matrix = load_dissimilarity_csv(out / "dissimilarity.csv")
    assert matrix.D[0, 1] == pytest.approx(1.0, abs=1e-12)  # 1-sizes 1 vs 2


# ---------------------------------------------------------------------------
# cluster


def test_cluster_pipeline(point_dir, tmp_path):
    cmp_out = tmp_path / "cmp"
    assert main(["compare", str(point_dir), "--out", str(cmp_out)]) == 0
    cl_out = tmp_path / "cl"
    code = main(
        ["cluster", str(cmp_out / "dissimilarity.csv"), "--out", str(cl_out)]
    )
    assert code == 0
    newick = (cl_out / "dendrogram.newick").read_text().strip()
    assert newick.endswith(";")
    assert "p0" in newick and "p3" in newick
    merges = (cl_out / "merges.csv").read_text().splitlines()
    assert merges[0] == "left,right,height,size"
    assert len(merges) == 3  # two merges for three leaves


def test_cluster_rejects_bad_matrix(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,0\n0,0\n")  # not square
    assert main(["cluster", str(bad), "--out", str(tmp_path / "o")]) == 2


# ---------------------------------------------------------------------------
# invariant


def test_invariant_size(fig2_file, capsys):
    assert main(["invariant", str(fig2_file), "--kind", "size", "--p", "1"]) == 0
    assert capsys.readouterr().out.strip() == "1.75"


def test_invariant_eccentricity(fig2_file, capsys):
    assert main(["invariant", str(fig2_file), "--kind", "ecc", "--p", "1"]) == 0
    assert capsys.readouterr().out.strip() == "1.5,1.5,2"


def test_invariant_weight_dist(fig2_file, capsys):
    assert main(["invariant", str(fig2_file), "--kind", "weight-dist"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "atom,mass"
    assert lines[1] == "1,0.5"
    assert len(lines) == 4


def test_invariant_curve_to_stdout(fig2_file, capsys):
    code = main(
        ["invariant", str(fig2_file), "--kind", "subsize", "--grid", "8"]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,value"
    assert len(lines) == 9


def test_invariant_curve_to_file(fig2_file, tmp_path):
    out = tmp_path / "inv"
    code = main(
        [
            "invariant",
            str(fig2_file),
            "--kind",
            "supsize",
            "--grid",
            "8",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    curve = (out / "curve_fig2x_superlevel.csv").read_text().splitlines()
    assert curve[0] == "t,value"
    assert len(curve) == 9


# ---------------------------------------------------------------------------
# sphere-bound


def test_sphere_bound_identical_dimensions(capsys):
    code = main(["sphere-bound", "--n1", "1", "--n2", "1", "--grid", "64"])
    assert code == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_sphere_bound_circle_vs_sphere(tmp_path, capsys):
    out = tmp_path / "sph"
    code = main(
        [
            "sphere-bound",
            "--n1",
            "1",
            "--n2",
            "2",
            "--grid",
            "128",
            "--tol",
            "1e-3",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    value = float(capsys.readouterr().out.strip().splitlines()[0])
    assert 0.1 < value < 0.3
    assert (out / "curve_sphere1_p1.csv").exists()
    assert (out / "curve_sphere2_p1.csv").exists()
