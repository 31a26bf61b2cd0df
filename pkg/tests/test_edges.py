"""Image loading, edge-map bookkeeping, and the built-in edge detector."""

import io

import numpy as np
import pytest

from evocircles import (
    CannyParams,
    EdgeMap,
    GrayImage,
    canny_edges,
    load_edge_map,
    load_gray_image,
    save_edge_map,
    save_gray_image,
)
from evocircles.errors import NetpbmError


def test_edge_map_invariants_hold():
    rng = np.random.default_rng(3)
    mask = rng.random((20, 30)) < 0.2
    em = EdgeMap(mask)
    assert em.num_points == len(em.points) == int(mask.sum())
    xs, ys = em.points[:, 0], em.points[:, 1]
    assert ((xs >= 0) & (xs < em.width) & (ys >= 0) & (ys < em.height)).all()
    assert mask[ys, xs].all()


def test_edge_points_are_row_major():
    mask = np.zeros((4, 4), dtype=bool)
    mask[2, 1] = mask[0, 3] = mask[2, 0] = True
    em = EdgeMap(mask)
    assert em.points.tolist() == [[3, 0], [0, 2], [1, 2]]


def test_gray_image_rejects_bad_shapes():
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        GrayImage(np.zeros(9, dtype=np.uint8))


def test_rasters_are_immutable():
    img = GrayImage(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1
    em = EdgeMap(np.eye(4, dtype=bool))
    with pytest.raises(ValueError):
        em.mask[0, 0] = False
    with pytest.raises(ValueError):
        em.points[0, 0] = 9


def test_edge_map_rejects_inconsistent_points():
    mask = np.eye(4, dtype=bool)
    with pytest.raises(ValueError):
        EdgeMap(mask, points=np.array([[0, 0]]))
    with pytest.raises(ValueError):
        EdgeMap(mask, points=np.array([[1, 0], [1, 1], [2, 2], [3, 3]]))


def test_load_gray_image_all_zero(tmp_path):
    path = tmp_path / "zero.pgm"
    path.write_bytes(b"P2\n3 3\n255\n" + b"0 " * 9)
    img = load_gray_image(path)
    assert (img.width, img.height) == (3, 3)
    assert not img.pixels.any()


def test_load_gray_image_16bit(tmp_path):
    path = tmp_path / "deep.pgm"
    raster = b"".join(v.to_bytes(2, "big") for v in (0, 65535, 32768, 257))
    path.write_bytes(b"P5\n2 2\n65535\n" + raster)
    assert load_gray_image(path).pixels.ravel().tolist() == [0, 255, 128, 1]


def test_load_gray_image_missing_file(tmp_path):
    with pytest.raises(IOError):
        load_gray_image(tmp_path / "nope.pgm")


def test_load_gray_image_png(tmp_path):
    PIL = pytest.importorskip("PIL.Image")
    arr = np.arange(64, dtype=np.uint8).reshape(8, 8) * 4
    buf = io.BytesIO()
    PIL.fromarray(arr, mode="L").save(buf, format="PNG")
    path = tmp_path / "img.png"
    path.write_bytes(buf.getvalue())
    assert np.array_equal(load_gray_image(path).pixels, arr)


def test_load_edge_map_three_pixels(tmp_path):
    path = tmp_path / "three.pbm"
    path.write_bytes(b"P1\n3 3\n0 1 0\n0 0 0\n1 1 0\n")
    em = load_edge_map(path)
    assert em.num_points == 3
    assert em.points.tolist() == [[1, 0], [0, 2], [1, 2]]


def test_load_edge_map_all_zero(tmp_path):
    path = tmp_path / "blank.pbm"
    path.write_bytes(b"P1\n2 2\n0 0 0 0\n")
    assert load_edge_map(path).num_points == 0


def test_edge_map_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    em = EdgeMap(rng.random((9, 17)) < 0.3)
    for binary in (True, False):
        path = tmp_path / f"rt_{binary}.pbm"
        save_edge_map(em, path, binary=binary)
        back = load_edge_map(path)
        assert np.array_equal(back.mask, em.mask)
        assert np.array_equal(back.points, em.points)


def test_load_edge_map_accepts_thresholded_pgm(tmp_path):
    path = tmp_path / "thresh.pgm"
    path.write_bytes(b"P2\n3 1\n255\n0 255 7\n")
    assert load_edge_map(path).points.tolist() == [[1, 0], [2, 0]]


def test_load_edge_map_rejects_png(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"\x89PNG\r\n\x1a\n junk")
    with pytest.raises(NetpbmError):
        load_edge_map(path)


def test_gray_image_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    img = GrayImage(rng.integers(0, 256, (12, 8), dtype=np.uint8))
    path = tmp_path / "img.pgm"
    save_gray_image(img, path)
    assert np.array_equal(load_gray_image(path).pixels, img.pixels)


def test_deterministic_reload(tmp_path):
    rng = np.random.default_rng(7)
    em = EdgeMap(rng.random((30, 30)) < 0.1)
    path = tmp_path / "det.pbm"
    save_edge_map(em, path)
    first, second = load_edge_map(path), load_edge_map(path)
    assert np.array_equal(first.points, second.points)


def test_canny_params_validation():
    with pytest.raises(ValueError):
        CannyParams(gaussian_sigma=0)
    with pytest.raises(ValueError):
        CannyParams(low_threshold=0.5, high_threshold=0.2)


def test_canny_constant_image_has_no_edges():
    img = GrayImage(np.full((32, 32), 137, dtype=np.uint8))
    assert canny_edges(img).num_points == 0


def test_canny_vertical_step_gives_single_line():
    arr = np.zeros((8, 8), dtype=np.uint8)
    arr[:, 4:] = 255
    em = canny_edges(GrayImage(arr))
    assert em.num_points > 0
    cols = np.unique(em.points[:, 0])
    assert len(cols) == 1, f"expected one column, got {cols}"
    rows = em.points[:, 1]
    # interior rows present, border rows suppressed by the NMS margin
    assert set(rows.tolist()) == set(range(1, 7))


def test_canny_disk_edges_near_circumference():
    h = w = 200
    yy, xx = np.mgrid[0:h, 0:w]
    disk = ((xx - 100) ** 2 + (yy - 100) ** 2 <= 50 * 50)
    img = GrayImage(np.where(disk, 255, 0).astype(np.uint8))
    em = canny_edges(img)
    assert em.num_points > 100
    dist = np.hypot(em.points[:, 0] - 100, em.points[:, 1] - 100)
    assert np.abs(dist - 50).max() <= 2.0


def test_canny_output_is_thin():
    # no edge pixel may have all four axis neighbors set
    arr = np.zeros((32, 32), dtype=np.uint8)
    arr[:, 16:] = 255
    arr[16:, :] = 255
    m = canny_edges(GrayImage(arr)).mask
    interior = m[1:-1, 1:-1]
    plus = m[:-2, 1:-1] & m[2:, 1:-1] & m[1:-1, :-2] & m[1:-1, 2:]
    assert not (interior & plus).any()
