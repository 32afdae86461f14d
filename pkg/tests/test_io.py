import struct

import numpy as np
import pytest

from granulometry import DistanceConfig, ValidationError, load_dataset, load_distances
from granulometry import io as gio


@pytest.fixture
def feature_file(tmp_path):
    def make(X, name="features.grnf"):
        path = tmp_path / name
        gio.write_features_binary(path, np.asarray(X))
        return path

    return make


@pytest.fixture
def label_file(tmp_path):
    def make(labels, name="labels.txt"):
        path = tmp_path / name
        gio.write_labels_text(path, labels)
        return path

    return make


class TestFeatureBinary:
    def test_roundtrip(self, tmp_path):
        X = np.array([[0.5, 1.25], [3.0, -2.5]], dtype=np.float32)
        path = tmp_path / "f.grnf"
        gio.write_features_binary(path, X)
        back = gio.read_features_binary(path)
        assert back.dtype == np.float64
        np.testing.assert_array_equal(back, X.astype(np.float64))

    def test_header_layout(self, tmp_path):
        path = tmp_path / "f.grnf"
        gio.write_features_binary(path, np.zeros((3, 2), dtype=np.float32))
        raw = path.read_bytes()
        assert raw[:4] == b"GRNF"
        version, = struct.unpack("<I", raw[4:8])
        n, d = struct.unpack("<QQ", raw[8:24])
        assert (version, n, d) == (1, 3, 2)
        assert len(raw) == 24 + 4 * 3 * 2

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "f.grnf"
        path.write_bytes(b"NOPE" + b"\x00" * 24)
        with pytest.raises(ValidationError, match="magic"):
            gio.read_features_binary(path)

    def test_truncation_rejected(self, tmp_path):
        path = tmp_path / "f.grnf"
        gio.write_features_binary(path, np.zeros((3, 2), dtype=np.float32))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ValidationError, match="truncated"):
            gio.read_features_binary(path)


class TestFeatureCsv:
    def test_plain_rows(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("0.0,1.0\n2.0,3.0\n")
        np.testing.assert_array_equal(gio.read_features_csv(path), [[0, 1], [2, 3]])

    def test_header_autodetected(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("x,y\n0.0,1.0\n2.0,3.0\n")
        assert gio.read_features_csv(path).shape == (2, 2)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("0.0,1.0\n2.0\n")
        with pytest.raises(ValidationError, match="columns"):
            gio.read_features_csv(path)

    def test_csv_binary_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(5, 3)).astype(np.float32)
        bin_path, csv_path = tmp_path / "f.grnf", tmp_path / "f.csv"
        gio.write_features_binary(bin_path, X)
        gio.write_features_csv(csv_path, gio.read_features_binary(bin_path))
        again = gio.read_features_csv(csv_path).astype(np.float32)
        np.testing.assert_array_equal(again, X)


class TestLabels:
    def test_text_roundtrip(self, tmp_path):
        path = tmp_path / "l.txt"
        gio.write_labels_text(path, [3, 7, 3])
        assert list(gio.read_labels_text(path)) == [3, 7, 3]

    def test_text_rejects_non_integer(self, tmp_path):
        path = tmp_path / "l.txt"
        path.write_text("1\nfoo\n")
        with pytest.raises(ValidationError, match="integer"):
            gio.read_labels_text(path)

    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "l.csv"
        gio.write_labels_csv(path, [5, 6, 5])
        assert list(gio.read_labels_csv(path)) == [5, 6, 5]

    def test_csv_out_of_order_rejected(self, tmp_path):
        path = tmp_path / "l.csv"
        path.write_text("row_index,label\n1,4\n0,5\n")
        with pytest.raises(ValidationError, match="out of order"):
            gio.read_labels_csv(path)

    def test_auto_detects_csv(self, tmp_path):
        path = tmp_path / "l.csv"
        gio.write_labels_csv(path, [1, 2])
        assert list(gio.read_labels_auto(path)) == [1, 2]


class TestDistanceBinary:
    def test_roundtrip_and_symmetrization(self, tmp_path):
        V = np.array([[0.0, 1.0], [1.0 + 4e-7, 0.0]], dtype=np.float32)
        path = tmp_path / "d.grnd"
        gio.write_distances_binary(path, V)
        back = gio.read_distances_binary(path)
        assert back[0, 1] == back[1, 0]
        assert back[0, 0] == 0.0

    def test_asymmetry_beyond_tolerance_rejected(self, tmp_path):
        V = np.array([[0.0, 1.0], [1.1, 0.0]], dtype=np.float32)
        path = tmp_path / "d.grnd"
        gio.write_distances_binary(path, V)
        with pytest.raises(ValidationError, match="asymmetry"):
            gio.read_distances_binary(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "d.grnd"
        path.write_bytes(b"GRNF" + b"\x00" * 12)
        with pytest.raises(ValidationError, match="magic"):
            gio.read_distances_binary(path)

    def test_negative_rejected(self, tmp_path):
        V = np.array([[0.0, -1.0], [-1.0, 0.0]], dtype=np.float32)
        path = tmp_path / "d.grnd"
        gio.write_distances_binary(path, V)
        with pytest.raises(ValidationError, match="negative"):
            gio.read_distances_binary(path)


class TestLoadDataset:
    def test_happy_path(self, feature_file, label_file):
        fp = feature_file(np.array([[0.0], [1.0], [4.0], [5.0]], dtype=np.float32))
        lp = label_file([0, 0, 1, 1])
        ds = load_dataset(fp, lp, DistanceConfig("euclidean", normalize=False))
        assert (ds.n, ds.d, ds.k) == (4, 1, 2)

    def test_nan_feature_rejected(self, feature_file, label_file):
        fp = feature_file(np.array([[np.nan], [1.0]], dtype=np.float32))
        lp = label_file([0, 1])
        with pytest.raises(ValidationError, match="non-finite"):
            load_dataset(fp, lp, DistanceConfig("euclidean", normalize=False))

    def test_sparse_ids_remapped_dense(self, feature_file, label_file):
        fp = feature_file(np.zeros((4, 1), dtype=np.float32) + [[0], [1], [2], [3]])
        lp = label_file([3, 7, 3, 7])
        ds = load_dataset(fp, lp, DistanceConfig("euclidean", normalize=False))
        assert list(ds.labels) == [0, 1, 0, 1]
        assert list(ds.class_ids) == [3, 7]

    def test_row_count_mismatch_rejected(self, feature_file, label_file):
        fp = feature_file(np.zeros((3, 1), dtype=np.float32))
        lp = label_file([0, 1])
        with pytest.raises(ValidationError, match="mismatch"):
            load_dataset(fp, lp, DistanceConfig("euclidean", normalize=False))

    def test_fewer_than_two_classes_rejected(self, feature_file, label_file):
        fp = feature_file(np.zeros((2, 1), dtype=np.float32))
        lp = label_file([4, 4])
        with pytest.raises(ValidationError, match="2 classes"):
            load_dataset(fp, lp, DistanceConfig("euclidean", normalize=False))

    def test_zero_norm_row_rejected_under_normalize(self, feature_file, label_file):
        fp = feature_file(np.array([[0.0], [1.0]], dtype=np.float32))
        lp = label_file([0, 1])
        with pytest.raises(ValidationError, match="zero-norm"):
            load_dataset(fp, lp, DistanceConfig("euclidean", normalize=True))

    def test_distance_input_route(self, tmp_path):
        V = np.array([[0.0, 2.0], [2.0, 0.0]], dtype=np.float32)
        path = tmp_path / "d.grnd"
        gio.write_distances_binary(path, V)
        assert load_distances(path)[0, 1] == 2.0
