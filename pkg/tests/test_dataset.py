import numpy as np
import pytest

from cfire.dataset import ClassBlock, Dataset, SplitSpec, class_block, load_csv, split
from cfire.errors import ConfigError, DataError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_with_label_column(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n"), "y")
        assert ds.d == 2
        assert ds.n_samples == 3
        assert ds.labels == (0, 1, 0)
        assert ds.feature_names == ("a", "b")
        np.testing.assert_array_equal(ds.samples, [[1, 2], [3, 4], [5, 6]])

    def test_without_label_column(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n"))
        assert ds.d == 3
        assert ds.labels is None

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,abc\n")
        with pytest.raises(DataError, match=r"row 3.*'b'.*'abc'"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "nope.csv")

    def test_duplicate_headers(self, tmp_path):
        with pytest.raises(DataError, match="duplicate header"):
            load_csv(write(tmp_path, "a,a\n1,2\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError, match="empty"):
            load_csv(write(tmp_path, ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(DataError, match="no data rows"):
            load_csv(write(tmp_path, "a,b\n"))

    def test_missing_label_column(self, tmp_path):
        with pytest.raises(DataError, match="label column"):
            load_csv(write(tmp_path, "a,b\n1,2\n"), "y")

    def test_non_integer_label(self, tmp_path):
        with pytest.raises(DataError, match="integer class id"):
            load_csv(write(tmp_path, "a,y\n1,zero\n"), "y")


class TestDatasetInvariants:
    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(np.array([[float("nan")]]), ("a",))

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError, match="unique"):
            Dataset(np.zeros((1, 2)), ("a", "a"))

    def test_rejects_name_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((1, 2)), ("a",))

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((2, 1)), ("a",), (0,))

    def test_samples_are_readonly(self):
        ds = Dataset(np.zeros((2, 1)), ("a",))
        with pytest.raises(ValueError):
            ds.samples[0, 0] = 1.0


def rand_dataset(n, d=3, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(
        rng.normal(size=(n, d)),
        tuple(f"f{i}" for i in range(d)),
        tuple(int(v) for v in rng.integers(0, 2, size=n)),
    )


class TestSplit:
    def test_sizes_with_floor_and_remainder_to_train(self):
        tr, xi, te = split(rand_dataset(10), SplitSpec(0.8, 0.1, 0.1, seed=7))
        assert (tr.n_samples, xi.n_samples, te.n_samples) == (8, 1, 1)

    def test_deterministic(self):
        ds = rand_dataset(40)
        a = split(ds, SplitSpec(0.8, 0.1, 0.1, seed=5))
        b = split(ds, SplitSpec(0.8, 0.1, 0.1, seed=5))
        for pa, pb in zip(a, b):
            np.testing.assert_array_equal(pa.samples, pb.samples)
            assert pa.labels == pb.labels

    def test_partition_is_exhaustive_and_disjoint(self):
        ds = rand_dataset(100)
        tr, xi, te = split(ds, SplitSpec(0.6, 0.2, 0.2, seed=1))
        assert (tr.n_samples, xi.n_samples, te.n_samples) == (60, 20, 20)
        combined = np.vstack([tr.samples, xi.samples, te.samples])
        # bijection on indices: the multiset of rows is preserved
        original = sorted(map(tuple, ds.samples))
        assert sorted(map(tuple, combined)) == original

    def test_empty_part_is_an_error(self):
        with pytest.raises(DataError, match="empty part"):
            split(rand_dataset(5), SplitSpec(0.8, 0.1, 0.1))

    def test_too_few_samples(self):
        with pytest.raises(DataError, match="at least 3"):
            split(rand_dataset(2), SplitSpec(0.4, 0.3, 0.3))

    def test_fraction_validation(self):
        with pytest.raises(ConfigError):
            SplitSpec(0.5, 0.5, 0.5)
        with pytest.raises(ConfigError):
            SplitSpec(1.0, 0.0, 0.0)


class TestClassBlock:
    def test_filter(self):
        ds = rand_dataset(4)
        assert class_block(ds, [0, 1, 0, 1], 1).indices == (1, 3)

    def test_empty_block_is_legal(self):
        ds = rand_dataset(2)
        assert class_block(ds, [2, 2], 0).indices == ()

    def test_blocks_partition_the_index_set(self):
        rng = np.random.default_rng(9)
        ds = rand_dataset(627)
        preds = rng.integers(0, 3, size=627)
        blocks = [class_block(ds, preds, c) for c in range(3)]
        assert sum(len(b) for b in blocks) == 627
        union = sorted(i for b in blocks for i in b.indices)
        assert union == list(range(627))

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            class_block(rand_dataset(3), [0], 0)

    def test_duplicate_indices_rejected(self):
        with pytest.raises(DataError):
            ClassBlock(0, (1, 1))
