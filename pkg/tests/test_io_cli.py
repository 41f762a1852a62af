import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from density_fingerprint import cli
from density_fingerprint import lattice as lat
from density_fingerprint import zones as zn
from density_fingerprint.errors import ParseError
from density_fingerprint.fingerprint import FingerprintConfig, psi_table
from density_fingerprint.io import (
    export_zone_geometry,
    parse_pps,
    read_density_csv,
    write_density_csv,
    write_pps,
)

from conftest import random_set


# -- PPS parsing ---------------------------------------------------------------------

def test_parse_minimal():
    p = parse_pps("dim 2\nbasis\n1 0\n0 1\nmotif\n0 0\n")
    np.testing.assert_allclose(p.lattice.basis, np.eye(2))
    assert len(p) == 1


def test_parse_wrong_row_length():
    with pytest.raises(ParseError) as err:
        parse_pps("dim 2\nbasis\n1 0 0\n0 1\nmotif\n0 0\n")
    assert err.value.line == 3


def test_parse_chain_with_comments_and_labels():
    text = "# chain\ndim 1\nbasis\n15 # period\nmotif 3\n0 a\n0.2667 b\n0.6 c\n"
    p = parse_pps(text)
    assert p.labels == ("a", "b", "c")
    np.testing.assert_allclose(p.positions[:, 0], [0, 4.0005, 9])


def test_parse_counterexample_fixture():
    p = parse_pps(cli.fixture_text("chain_sum.pps"))
    np.testing.assert_allclose(np.sort(np.round(p.positions[:, 0])), [0, 1, 3, 4, 5, 7, 9, 10, 12])


@pytest.mark.parametrize(
    "text,line",
    [
        ("basis\n1\n", 1),
        ("dim 4\n", 1),
        ("dim 2\nbasis\n1 0\nmotif\n0 0\n", 4),
        ("dim 1\nbasis\n1\nmotif 2\n0\n", 5),
        ("dim 1\nbasis\nx\nmotif\n0\n", 3),
        ("dim 1\nbasis\n1\nmotif\nnan\n", 5),
        ("dim 1\nbasis\n1\nmotif\n", 4),
        ("dim 1\nbasis\n1\nmotif\n0 a\n0.5\n", 6),
        ("dim 1\nhello\n", 2),
    ],
)
def test_parse_errors_report_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_pps(text)
    assert err.value.line == line


def test_parse_rejects_singular_basis():
    with pytest.raises(ValueError):
        parse_pps("dim 2\nbasis\n1 1\n2 2\nmotif\n0 0\n")


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]))
def test_pps_round_trip(seed, dim):
    p = random_set(np.random.default_rng(seed), dim)
    q = parse_pps(write_pps(p, comment="round trip"))
    np.testing.assert_array_equal(q.lattice.basis, p.lattice.basis)
    np.testing.assert_array_equal(q.motif, p.motif)


def test_pps_round_trip_labels():
    p = lat.periodic_set(np.eye(2), [[0, 0], [0.5, 0.5]], ["Na", "Cl"])
    assert parse_pps(write_pps(p)).labels == ("Na", "Cl")


# -- density CSV ---------------------------------------------------------------------

def test_csv_line_row(z1):
    tb = psi_table(z1, FingerprintConfig(kmax=2), tgrid=[0.3])
    text = write_density_csv(tb)
    header, row = text.strip().split("\n")
    assert header == "t,psi_0,psi_1,psi_2,rho_0,rho_1,rho_2"
    assert row == "0.3,1,0.6,0,0.4,0.6,0"


def test_csv_round_trip(z2):
    tb = psi_table(z2, FingerprintConfig(kmax=3, t_steps=20))
    t, psi, rho = read_density_csv(write_density_csv(tb))
    np.testing.assert_array_equal(t, [float(f"{v:.9g}") for v in tb.tgrid])
    np.testing.assert_array_equal(psi, np.vectorize(lambda v: float(f"{v:.9g}"))(tb.psi[:4]))
    np.testing.assert_array_equal(rho, np.vectorize(lambda v: float(f"{v:.9g}"))(tb.rho))


# -- zone export ---------------------------------------------------------------------

def test_export_square(z2):
    text = export_zone_geometry(zn.build_zones(z2, 0, 1))
    assert text.count("\ncell ") == 1
    block = text.split("vertices 4\n")[1].split("halfspaces")[0].split("\n")[:4]
    pts = sorted(tuple(float(v) for v in line.split()) for line in block)
    assert pts == [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]


def test_export_line(z1):
    text = export_zone_geometry(zn.build_zones(z1, 0, 2))
    cells = text.split("\ncell ")[1:]
    got = []
    for c in cells:
        lines = c.split("\n")
        depth = int(lines[0].split()[2])
        got.append((depth, float(lines[2]), float(lines[3])))
    assert sorted(got) == [(0, -0.5, 0.5), (1, -1.0, -0.5), (1, 0.5, 1.0)]


def test_export_polygons_have_three_vertices():
    p = lat.periodic_set([[1, 0.2], [0.3, 1]], [[0, 0], [0.4, 0.6]])
    text = export_zone_geometry(zn.build_zones(p, 0, 3))
    counts = [int(line.split()[1]) for line in text.splitlines() if line.startswith("vertices")]
    assert counts and min(counts) >= 3


# -- CLI ---------------------------------------------------------------------------------

@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.pps"
    path.write_text(cli.fixture_text("square.pps"))
    return path


def test_cli_fingerprint_is_deterministic(square_file, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["fingerprint", str(square_file), "--kmax", "3", "--steps", "16"]
    assert cli.main(args + ["-o", str(out1)]) == 0
    assert cli.main(args + ["-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("t,psi_0,psi_1,psi_2,psi_3,rho_0")


def test_cli_oracle(square_file, capsys):
    assert cli.main(["oracle", str(square_file), "--kmax", "1", "--t", "0.25", "--mode", "grid", "--n", "250000"]) == 0
    value = float(capsys.readouterr().out.split()[1])
    assert value == pytest.approx(np.pi / 16, abs=1e-3)


def test_cli_zones(square_file, tmp_path):
    out = tmp_path / "z.txt"
    assert cli.main(["zones", str(square_file), "--point", "0", "--kmax", "2", "-o", str(out)]) == 0
    assert out.read_text().startswith("zones motif_index 0 kmax 2")


def test_cli_compare(tmp_path, capsys):
    a = tmp_path / "a.pps"
    b = tmp_path / "b.pps"
    a.write_text("dim 2\nbasis\n1 0\n0 1\nmotif\n0 0\n")
    b.write_text("dim 2\nbasis\n1 0\n0 1\nmotif\n0.1 0\n")
    assert cli.main(["compare", str(a), str(b), "--kmax", "2", "--steps", "8", "--metric", "bottleneck"]) == 0
    assert "d_B 0.1" in capsys.readouterr().out


def test_cli_compare_precondition(tmp_path):
    a = tmp_path / "a.pps"
    b = tmp_path / "b.pps"
    a.write_text(cli.fixture_text("square.pps"))
    b.write_text(cli.fixture_text("hexagonal.pps"))
    assert cli.main(["compare", str(a), str(b), "--kmax", "2", "--steps", "8"]) == 4


def test_cli_parse_error(tmp_path):
    bad = tmp_path / "bad.pps"
    bad.write_text("dim 2\nbasis\n1 0 0\n")
    assert cli.main(["fingerprint", str(bad), "--kmax", "2", "--steps", "8"]) == 2


def test_cli_missing_file():
    assert cli.main(["fingerprint", "/nonexistent.pps", "--kmax", "2", "--steps", "8"]) == 2


def test_cli_bad_flags():
    assert cli.main(["fingerprint"]) == 2


def test_cli_degeneracy_exit_code(square_file, monkeypatch):
    from density_fingerprint.errors import DegenerateArrangement

    def boom(*args, **kwargs):
        raise DegenerateArrangement("forced")

    monkeypatch.setattr(cli.zn, "build_zones", boom)
    assert cli.main(["zones", str(square_file), "--point", "0", "--kmax", "2"]) == 3


def test_cli_stability(tmp_path):
    cubic = tmp_path / "cubic.pps"
    cubic.write_text(cli.fixture_text("cubic.pps"))
    out = tmp_path / "s.csv"
    args = ["stability", str(cubic), "--delta", "0.02", "--trials", "2", "--kmax", "2", "--steps", "16", "--seed", "1", "-o", str(out)]
    assert cli.main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "trial,d_B,d_F,ratio,bound" and len(lines) == 3


def test_cli_selftest():
    assert cli.main(["selftest"]) == 0
