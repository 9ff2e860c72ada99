"""Export pipeline: file contracts, consumer round trip, determinism."""

import io
import warnings
from pathlib import Path

import numpy as np
import pytest

from dppsum import (
    ClusterInstance,
    Document,
    load_clusters,
    load_embeddings,
    load_pair_similarity,
    write_clusters,
)

from dpp_exporter import ExportJob, export_all, export_embeddings, export_similarity, pair_similarity

CORPUS = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "clusters.jsonl"


@pytest.fixture(scope="module")
def corpus_clusters():
    return load_clusters(CORPUS)


class TestPairSimilarity:
    def test_identical_rows_score_one(self):
        rows = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        s = pair_similarity(rows)
        assert s[0, 1] == 1.0 and s[1, 0] == 1.0

    def test_antipodal_rows_score_zero(self):
        rows = np.array([[1.0, 0.0], [-1.0, 0.0]])
        s = pair_similarity(rows)
        assert s[0, 1] == 0.0 and s[1, 0] == 0.0

    def test_orthogonal_rows_score_half(self):
        rows = np.eye(2)
        assert pair_similarity(rows)[0, 1] == 0.5

    def test_zero_rows_behave(self):
        rows = np.array([[0.0, 0.0], [1.0, 0.0]])
        s = pair_similarity(rows)
        assert s[0, 1] == 0.5  # zero vector treated as cosine 0
        assert s[0, 0] == 1.0

    def test_output_contract(self):
        rng = np.random.default_rng(7)
        s = pair_similarity(rng.normal(size=(12, 5)))
        assert np.array_equal(s, s.T)
        assert np.all(np.diag(s) == 1.0)
        assert s.min() >= 0.0 and s.max() <= 1.0


class TestExport:
    def test_emits_both_tables_per_cluster(self, corpus_clusters, tmp_path):
        written = export_all(ExportJob(CORPUS, tmp_path))
        names = sorted(p.name for p in written)
        expected = sorted(
            f"{c.cluster_id}{ext}" for c in corpus_clusters for ext in (".dppe", ".dpps")
        )
        assert names == expected
        assert not list(tmp_path.glob("*.tmp"))

    def test_round_trip_with_zero_warnings(self, corpus_clusters, tmp_path):
        # consumer-side acceptance: loaders take every file without complaint
        export_all(ExportJob(CORPUS, tmp_path))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for cluster in corpus_clusters:
                n = cluster.sentence_count
                table = load_embeddings(tmp_path / f"{cluster.cluster_id}.dppe", n)
                assert table.n == n
                load_pair_similarity(tmp_path / f"{cluster.cluster_id}.dpps", n)

    def test_reruns_byte_identical(self, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        export_all(ExportJob(CORPUS, first))
        export_all(ExportJob(CORPUS, second))
        files = sorted(p.name for p in first.iterdir())
        assert files == sorted(p.name for p in second.iterdir())
        for name in files:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_similarity_range_diagonal_symmetry(self, corpus_clusters, tmp_path):
        export_similarity(ExportJob(CORPUS, tmp_path))
        for cluster in corpus_clusters:
            table = load_pair_similarity(
                tmp_path / f"{cluster.cluster_id}.dpps", cluster.sentence_count
            )
            m = table.matrix
            assert np.array_equal(m, m.T)
            assert np.all(np.diag(m) == 1.0)
            assert m.min() >= 0.0 and m.max() <= 1.0

    def test_embedding_width_consistent_across_clusters(self, corpus_clusters, tmp_path):
        export_embeddings(ExportJob(CORPUS, tmp_path))
        widths = {
            load_embeddings(
                tmp_path / f"{c.cluster_id}.dppe", c.sentence_count
            ).d
            for c in corpus_clusters
        }
        assert len(widths) == 1

    def test_duplicate_sentences_get_identical_rows_and_unit_similarity(self, tmp_path):
        data = tmp_path / "c.jsonl"
        buffer = io.StringIO()
        write_clusters(buffer, [ClusterInstance(
            cluster_id="dup",
            documents=(
                Document("a", ("the same sentence appears twice", "some other line")),
                Document("b", ("the same sentence appears twice",)),
            ),
            references=("anything",),
        )])
        data.write_text(buffer.getvalue())
        out = tmp_path / "out"
        export_all(ExportJob(data, out))
        rows = load_embeddings(out / "dup.dppe", 3).rows
        np.testing.assert_array_equal(rows[0], rows[2])
        s = load_pair_similarity(out / "dup.dpps", 3).matrix
        assert s[0, 2] == 1.0

    def test_row_order_follows_global_indexing(self, tmp_path):
        data = tmp_path / "c.jsonl"
        buffer = io.StringIO()
        write_clusters(buffer, [ClusterInstance(
            cluster_id="order",
            documents=(
                Document("a", ("alpha", "beta")),
                Document("b", ("gamma",)),
            ),
            references=("ref",),
        )])
        data.write_text(buffer.getvalue())
        out = tmp_path / "out"
        export_embeddings(ExportJob(data, out, encoder="hash-32"))
        rows = load_embeddings(out / "order.dppe", 3).rows

        from dpp_exporter import HashEncoder

        direct = HashEncoder(dim=32).encode(["alpha", "beta", "gamma"])
        np.testing.assert_array_equal(rows, direct.astype("<f4").astype(np.float64))

    def test_hash_dim_flows_into_header(self, tmp_path):
        out = tmp_path / "out"
        export_embeddings(ExportJob(CORPUS, out, encoder="hash-64"))
        table = load_embeddings(out / "reef.dppe", 6)
        assert table.d == 64

    def test_max_len_validation(self, tmp_path):
        with pytest.raises(ValueError, match="max_len"):
            ExportJob(CORPUS, tmp_path, max_len=100)

    def test_batch_size_validation(self, tmp_path):
        with pytest.raises(ValueError, match="batch_size"):
            ExportJob(CORPUS, tmp_path, batch_size=0)
