"""Distortion profiles, envelope verification, and CSV/JSON export."""

import csv
import io

import numpy as np
import pytest

from lpembed.coarse_embedder import CoarseEmbedding, build_embedding, pairwise_image_distances
from lpembed.distortion_report import (
    empirical_profile,
    export,
    profile_from_json,
    verify_bounds,
)
from lpembed.metric_spaces import FiniteMetricSpace, generate


@pytest.fixture(scope="module")
def hc5_p1():
    return build_embedding(generate("hypercube", 5), p=1.0)


@pytest.fixture(scope="module")
def path40_p1():
    # path graphs keep two levels non-saturated at delta = 1, so the lower
    # envelope has mass to violate
    return build_embedding(generate("path", 40), p=1.0, level_count=5)


def tampered(E, idx, scale):
    mat = E.image_matrix.copy()
    mat[idx] = mat[idx] * scale
    return CoarseEmbedding(
        space=E.space,
        exponent=E.exponent,
        base_index=E.base_index,
        delta=E.delta,
        schedule=E.schedule,
        image_matrix=mat,
        block_dims=E.block_dims,
        family=None,
    )


class TestProfile:
    def test_single_bucket_is_global_extremes(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 1)
        _, _, _, image_d = pairwise_image_distances(hc5_p1)
        b = profile.buckets[0]
        assert b.emp_min == pytest.approx(image_d.min())
        assert b.emp_max == pytest.approx(image_d.max())
        assert b.pair_count == image_d.size

    def test_two_point_space_single_nonempty_bucket(self):
        X = FiniteMetricSpace(labels=("a", "b"), dist=np.array([[0.0, 2.0], [2.0, 0.0]]))
        E = build_embedding(X, p=2.0, level_count=2)
        profile = empirical_profile(E, 4)
        nonempty = [b for b in profile.buckets if b.pair_count]
        assert len(nonempty) == 1
        assert nonempty[0].emp_min == nonempty[0].emp_max

    def test_hypercube5_buckets_match_exhaustive_scan(self, hc5_p1):
        B = 7
        profile = empirical_profile(hc5_p1, B)
        ii, jj, d_src, image_d = pairwise_image_distances(hc5_p1)
        D = hc5_p1.space.diameter()
        for j, b in enumerate(profile.buckets):
            if j < B - 1:
                mask = (d_src >= j * D / B) & (d_src < (j + 1) * D / B)
            else:
                mask = (d_src >= j * D / B) & (d_src <= D)
            assert b.pair_count == int(mask.sum())
            if b.pair_count:
                assert b.emp_min == pytest.approx(image_d[mask].min())
                assert b.emp_max == pytest.approx(image_d[mask].max())
            else:
                assert b.emp_min is None and b.emp_max is None

    def test_pair_conservation(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 13)
        n = hc5_p1.space.n
        assert sum(b.pair_count for b in profile.buckets) == n * (n - 1) // 2

    def test_buckets_partition_diameter(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 5)
        assert profile.buckets[0].t_lo == 0.0
        assert profile.buckets[-1].t_hi == hc5_p1.space.diameter()
        for a, b in zip(profile.buckets, profile.buckets[1:]):
            assert a.t_hi == b.t_lo

    def test_monotone_envelopes_at_edges(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 16)
        assert all(b >= a for a, b in zip(profile.rho1_theory, profile.rho1_theory[1:]))
        assert all(b >= a for a, b in zip(profile.rho2_theory, profile.rho2_theory[1:]))

    def test_sandwich_per_bucket(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 8)
        assert not profile.violations
        for j, b in enumerate(profile.buckets):
            if b.pair_count:
                assert profile.rho1_theory[j] <= b.emp_min + 1e-9
                assert b.emp_max <= profile.rho2_theory[j + 1] + 1e-9

    def test_bucket_count_validated(self, hc5_p1):
        with pytest.raises(ValueError):
            empirical_profile(hc5_p1, 0)


class TestVerifyBounds:
    def test_correct_embedding_clean(self, hc5_p1):
        assert verify_bounds(hc5_p1) == []

    def test_scaled_image_triggers_upper_violations(self, path40_p1):
        bad = tampered(path40_p1, 39, 10.0)
        violations = verify_bounds(bad)
        assert violations
        assert all(v.side == "upper" for v in violations)
        assert all("39" in v.pair for v in violations)
        assert all(v.measured > v.bound for v in violations)

    def test_zeroed_image_triggers_lower_violations(self, path40_p1):
        bad = tampered(path40_p1, 39, 0.0)
        violations = verify_bounds(bad)
        assert violations
        assert all(v.side == "lower" for v in violations)
        assert all(v.measured < v.bound for v in violations)

    def test_violations_surface_in_profile(self, path40_p1):
        profile = empirical_profile(tampered(path40_p1, 39, 10.0), 4)
        assert profile.violations


class TestExport:
    def test_csv_layout(self, hc5_p1):
        B = 6
        profile = empirical_profile(hc5_p1, B)
        text = export(profile, "csv").decode("utf-8")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["t_lo", "t_hi", "pair_count", "emp_min", "emp_max", "rho1", "rho2"]
        assert len(rows) == B + 1

    def test_csv_significant_digits(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 3)
        text = export(profile, "csv").decode("utf-8")
        row = next(csv.DictReader(io.StringIO(text)))
        assert float(row["emp_max"]) == profile.buckets[0].emp_max  # 17g round-trips

    def test_csv_empty_bucket_fields(self):
        X = FiniteMetricSpace(labels=("a", "b"), dist=np.array([[0.0, 1.0], [1.0, 0.0]]))
        E = build_embedding(X, p=1.0, level_count=2)
        profile = empirical_profile(E, 5)
        rows = list(csv.DictReader(io.StringIO(export(profile, "csv").decode())))
        empties = [r for r in rows if r["pair_count"] == "0"]
        assert empties
        assert all(r["emp_min"] == "" and r["emp_max"] == "" for r in empties)

    def test_json_round_trip_exact(self, hc5_p1):
        profile = empirical_profile(hc5_p1, 9)
        back = profile_from_json(export(profile, "json"))
        assert back == profile

    def test_json_round_trip_with_violations(self, path40_p1):
        profile = empirical_profile(tampered(path40_p1, 39, 0.0), 5)
        back = profile_from_json(export(profile, "json"))
        assert back == profile
        assert back.violations

    def test_unknown_format(self, hc5_p1):
        with pytest.raises(ValueError):
            export(empirical_profile(hc5_p1, 2), "xml")

    def test_malformed_profile_payload(self):
        with pytest.raises(ValueError):
            profile_from_json({"buckets": []})
