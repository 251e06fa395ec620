"""Tests for the characteristic-direction estimators and gene calling."""

import io

import numpy as np
import pytest

from chardir.direction import (
    NoDifferentialSignalError,
    call_significant,
    lr1_direction,
    np1_direction,
    write_ranked_json,
    write_ranked_tsv,
)

from oracles import normal_equation_direction

TOY_X1 = np.array([[0.0, 0.1, 0.0], [0.0, 0.0, 0.1]])
TOY_X2 = np.array([[5.0, 5.1, 5.0], [0.0, 0.0, 0.1]])


def random_two_class(rng, n_genes=None, n1=None, n2=None, shift=None):
    n_genes = n_genes or int(rng.integers(3, 30))
    n1 = n1 or int(rng.integers(2, 8))
    n2 = n2 or int(rng.integers(2, 8))
    x1 = rng.standard_normal((n_genes, n1))
    x2 = rng.standard_normal((n_genes, n2))
    if shift is None:
        shift = rng.standard_normal(n_genes)
    x2 = x2 + np.asarray(shift)[:, None]
    gene_ids = [f"g{i:03d}" for i in range(n_genes)]
    return gene_ids, x1, x2


class TestLr1:
    def test_toy_concentrates_on_shifted_gene(self):
        d = lr1_direction(["A", "B"], TOY_X1, TOY_X2)
        assert d.coefficients[0] ** 2 > 0.99
        assert d.coefficients[0] > 0

    def test_toy_magnitude_is_centroid_distance(self):
        d = lr1_direction(["A", "B"], TOY_X1, TOY_X2)
        diff = TOY_X2.mean(axis=1) - TOY_X1.mean(axis=1)
        assert d.magnitude == pytest.approx(float(np.linalg.norm(diff)))

    def test_identical_classes_raise(self):
        x = np.array([[0.0, 1.0, 2.0], [3.0, 1.0, 0.5]])
        with pytest.raises(NoDifferentialSignalError):
            lr1_direction(["A", "B"], x, x.copy())

    def test_unit_norm_on_random_inputs(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            gene_ids, x1, x2 = random_two_class(rng)
            d = lr1_direction(gene_ids, x1, x2)
            assert abs(float(np.sum(d.coefficients**2)) - 1.0) <= 1e-10

    def test_sign_convention_on_random_inputs(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            gene_ids, x1, x2 = random_two_class(rng)
            d = lr1_direction(gene_ids, x1, x2)
            assert float(d.coefficients @ (x2.mean(axis=1) - x1.mean(axis=1))) >= 0

    def test_matches_normal_equation_oracle_without_truncation(self):
        # Small instances, epsilon tiny so no component is dropped.
        rng = np.random.default_rng(2)
        for _ in range(100):
            gene_ids, x1, x2 = random_two_class(rng, n_genes=int(rng.integers(2, 6)))
            d = lr1_direction(gene_ids, x1, x2, epsilon=1e-12, max_components=50)
            oracle = normal_equation_direction(x1, x2)
            assert float(d.coefficients @ oracle) > 1 - 1e-8

    def test_global_sign_flip_negates_coefficients(self):
        rng = np.random.default_rng(3)
        gene_ids, x1, x2 = random_two_class(rng)
        d = lr1_direction(gene_ids, x1, x2)
        d_flip = lr1_direction(gene_ids, -x1, -x2)
        np.testing.assert_allclose(d_flip.coefficients, -d.coefficients, atol=1e-10)

    def test_sample_order_invariance_within_class(self):
        rng = np.random.default_rng(4)
        gene_ids, x1, x2 = random_two_class(rng, n_genes=12, n1=5, n2=6)
        d = lr1_direction(gene_ids, x1, x2)
        perm1 = rng.permutation(5)
        perm2 = rng.permutation(6)
        d_perm = lr1_direction(gene_ids, x1[:, perm1], x2[:, perm2])
        np.testing.assert_allclose(d_perm.coefficients, d.coefficients, atol=1e-10)

    def test_gene_order_equivariance(self):
        rng = np.random.default_rng(5)
        gene_ids, x1, x2 = random_two_class(rng, n_genes=9)
        d = lr1_direction(gene_ids, x1, x2)
        perm = rng.permutation(9)
        d_perm = lr1_direction(
            [gene_ids[i] for i in perm], x1[perm], x2[perm]
        )
        np.testing.assert_allclose(d_perm.coefficients, d.coefficients[perm], atol=1e-10)

    def test_single_gene_scaling_keeps_invariants(self):
        rng = np.random.default_rng(6)
        gene_ids, x1, x2 = random_two_class(rng, n_genes=8)
        x1s, x2s = x1.copy(), x2.copy()
        x1s[3] *= 7.0
        x2s[3] *= 7.0
        d = lr1_direction(gene_ids, x1s, x2s)
        assert abs(float(np.sum(d.coefficients**2)) - 1.0) <= 1e-10
        assert float(d.coefficients @ (x2s.mean(axis=1) - x1s.mean(axis=1))) >= 0


class TestNp1:
    def test_unit_norm_and_sign(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            gene_ids, x1, x2 = random_two_class(rng)
            d = np1_direction(gene_ids, x1, x2, 100, rng)
            assert abs(float(np.sum(d.coefficients**2)) - 1.0) <= 1e-10
            assert float(d.coefficients @ (x2.mean(axis=1) - x1.mean(axis=1))) >= 0

    def test_isotropic_noise_stays_near_centroid_difference(self):
        # Without gene correlations the null scaling is near-uniform, so
        # the corrected direction stays close to the raw difference. The
        # planted shift does inflate its own axis's null spread, which
        # costs 10-15 degrees for typical seeds; this seed is mid-range.
        rng = np.random.default_rng(1002)
        x1 = rng.standard_normal((20, 6))
        x2 = rng.standard_normal((20, 6))
        x2[0] += 5.0
        gene_ids = [f"g{i}" for i in range(20)]
        d = np1_direction(gene_ids, x1, x2, 200, np.random.default_rng(2))
        diff = x2.mean(axis=1) - x1.mean(axis=1)
        cosine = float(d.coefficients @ (diff / np.linalg.norm(diff)))
        assert np.degrees(np.arccos(min(1.0, cosine))) < 15.0

    def test_same_seed_bit_identical(self):
        rng = np.random.default_rng(8)
        gene_ids, x1, x2 = random_two_class(rng)
        a = np1_direction(gene_ids, x1, x2, 150, np.random.default_rng(5))
        b = np1_direction(gene_ids, x1, x2, 150, np.random.default_rng(5))
        assert np.array_equal(a.coefficients, b.coefficients)

    def test_too_few_permutations_rejected(self):
        rng = np.random.default_rng(9)
        gene_ids, x1, x2 = random_two_class(rng)
        with pytest.raises(ValueError, match="100"):
            np1_direction(gene_ids, x1, x2, 99, rng)

    def test_identical_classes_raise(self):
        x = np.arange(12.0).reshape(3, 4)
        with pytest.raises(NoDifferentialSignalError):
            np1_direction(["a", "b", "c"], x, x.copy(), 100, np.random.default_rng(0))

    def test_global_sign_flip_negates_coefficients(self):
        rng = np.random.default_rng(10)
        gene_ids, x1, x2 = random_two_class(rng)
        a = np1_direction(gene_ids, x1, x2, 120, np.random.default_rng(3))
        b = np1_direction(gene_ids, -x1, -x2, 120, np.random.default_rng(3))
        np.testing.assert_allclose(b.coefficients, -a.coefficients, atol=1e-10)


class TestCallSignificant:
    def make_direction(self, coefficients, ids=None):
        coefficients = np.asarray(coefficients, dtype=float)
        ids = ids or [f"g{i}" for i in range(len(coefficients))]
        from chardir.direction import CharacteristicDirection

        return CharacteristicDirection(tuple(ids), coefficients, "LR1", 1.0)

    def test_alpha_one_selects_everything(self):
        d = self.make_direction(np.sqrt([0.5, 0.3, 0.2]))
        assert call_significant(d, 1.0).selected_count == 3

    def test_half_alpha_selects_top_gene(self):
        d = self.make_direction(np.sqrt([0.5, 0.3, 0.2]))
        assert call_significant(d, 0.5).selected_count == 1

    def test_point79_selects_two(self):
        d = self.make_direction(np.sqrt([0.5, 0.3, 0.2]))
        assert call_significant(d, 0.79).selected_count == 2

    def test_ranking_sorted_with_lexicographic_ties(self):
        d = self.make_direction([0.5, -0.5, 0.5, -0.5], ids=["d", "b", "a", "c"])
        call = call_significant(d, 1.0)
        assert [g.gene_id for g in call.ranked_genes] == ["a", "b", "c", "d"]
        squared = [g.squared_coefficient for g in call.ranked_genes]
        assert squared == sorted(squared, reverse=True)

    def test_cumulative_fraction_runs_to_one(self):
        rng = np.random.default_rng(11)
        b = rng.standard_normal(10)
        b /= np.linalg.norm(b)
        call = call_significant(self.make_direction(b), 0.3)
        assert call.ranked_genes[-1].cumulative_fraction == pytest.approx(1.0)

    def test_alpha_out_of_range(self):
        d = self.make_direction([1.0])
        with pytest.raises(ValueError):
            call_significant(d, 0.0)
        with pytest.raises(ValueError):
            call_significant(d, 1.2)

    def test_rankings_unchanged_by_global_flip(self):
        rng = np.random.default_rng(12)
        gene_ids, x1, x2 = [f"g{i}" for i in range(6)], *random_two_class(
            rng, n_genes=6
        )[1:]
        a = call_significant(lr1_direction(gene_ids, x1, x2), 0.6)
        b = call_significant(lr1_direction(gene_ids, -x1, -x2), 0.6)
        assert [g.gene_id for g in a.ranked_genes] == [g.gene_id for g in b.ranked_genes]
        assert a.selected_count == b.selected_count


class TestWriters:
    def test_tsv_schema_and_flags(self):
        d = TestCallSignificant().make_direction(np.sqrt([0.5, 0.3, 0.2]))
        call = call_significant(d, 0.79)
        buf = io.StringIO()
        write_ranked_tsv(call, buf, method="LR1")
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# method: LR1"
        header = lines[2].split("\t")
        assert header == [
            "gene_id",
            "coefficient",
            "squared_coefficient",
            "cumulative_fraction",
            "rank",
            "discriminant_sign",
            "significant",
        ]
        flags = [line.split("\t")[-1] for line in lines[3:]]
        assert flags == ["true", "true", "false"]

    def test_json_fields_match_tsv(self):
        import json

        d = TestCallSignificant().make_direction(np.sqrt([0.6, 0.4]))
        call = call_significant(d, 0.5)
        buf = io.StringIO()
        write_ranked_json(call, buf, method="NP1")
        payload = json.loads(buf.getvalue())
        assert payload["method"] == "NP1"
        assert payload["selected_count"] == 1
        assert [g["rank"] for g in payload["genes"]] == [1, 2]
        assert set(payload["genes"][0]) == {
            "gene_id",
            "coefficient",
            "squared_coefficient",
            "cumulative_fraction",
            "rank",
            "discriminant_sign",
            "significant",
        }
