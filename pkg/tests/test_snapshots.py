import numpy as np

from scnls import Grid
from scnls.snapshots import read_snapshots, write_snapshots


def test_complex_round_trip(tmp_path):
    g = Grid(32, 4.0)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    v = rng.standard_normal(g.shape)
    path = tmp_path / "fields.snap"
    write_snapshots(path, [("u", 0.25, u, g), ("v", 0.5, v, g)],
                    extra={"config_hash": "sha256:test"})
    recs = read_snapshots(path)
    assert len(recs) == 2
    h0, f0 = recs[0]
    assert h0["name"] == "u"
    assert h0["time"] == 0.25
    assert h0["layout"] == "interleaved-re-im-float64-le"
    assert h0["grid"] == g.descriptor()
    assert h0["config_hash"] == "sha256:test"
    assert np.array_equal(f0, u)
    h1, f1 = recs[1]
    assert h1["layout"] == "float64-le"
    assert np.array_equal(f1, v)


def test_2d_shape_restored(tmp_path):
    g = Grid((16, 32), (1.0, 2.0))
    u = np.arange(16 * 32, dtype=float).reshape(16, 32) + 0.5j
    path = tmp_path / "f.snap"
    write_snapshots(path, [("u", 0.0, u, g)])
    (_, back), = read_snapshots(path)
    assert back.shape == (16, 32)
    assert np.array_equal(back, u)


def test_little_endian_layout(tmp_path):
    # byte-level check of the interleaving contract
    g = Grid(16, 1.0)
    u = np.zeros(g.shape, dtype=complex)
    u[0] = 1.0 + 2.0j
    path = tmp_path / "f.snap"
    write_snapshots(path, [("u", 0.0, u, g)])
    raw = path.read_bytes()
    header_end = raw.index(b"\n") + 1
    first_two = np.frombuffer(raw[header_end:header_end + 16], dtype="<f8")
    assert first_two[0] == 1.0 and first_two[1] == 2.0
