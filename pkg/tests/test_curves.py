import numpy as np
import pytest

from dirout.curves import (
    Curve,
    FunctionalGroup,
    Grid,
    derivative_augment,
    integrate,
    read_groups_csv,
    write_groups_csv,
)
from dirout.errors import CsvFormatError


def uniform_grid(m=50, a=0.0, b=1.0):
    return Grid(np.linspace(a, b, m))


class TestGrid:
    def test_rejects_short_or_unsorted(self):
        with pytest.raises(ValueError):
            Grid(np.array([1.0]))
        with pytest.raises(ValueError):
            Grid(np.array([0.0, 2.0, 1.0]))
        with pytest.raises(ValueError):
            Grid(np.array([0.0, 0.0, 1.0]))

    def test_weights_normalized_and_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            pts = np.sort(rng.uniform(0, 10, size=rng.integers(2, 40)))
            pts += np.arange(pts.size) * 1e-6  # ensure strict increase
            g = Grid(pts)
            assert np.all(g.weights >= 0)
            assert g.weights.sum() == pytest.approx(1.0, abs=1e-15)


class TestIntegrate:
    def test_constant_recovered_exactly(self):
        g = uniform_grid(7)
        assert integrate(np.full(7, 3.25), g) == pytest.approx(3.25, abs=1e-15)

    def test_two_point_symmetry(self):
        g = Grid(np.array([0.0, 1.0]))
        assert integrate(np.array([0.0, 1.0]), g) == pytest.approx(0.5, abs=1e-15)

    def test_full_period_sine_nearly_zero(self):
        g = uniform_grid(50)
        vals = np.sin(2 * np.pi * g.points)
        assert abs(integrate(vals, g)) < 5e-2

    def test_linearity(self):
        rng = np.random.default_rng(1)
        g = Grid(np.sort(rng.uniform(0, 1, 30)))
        u, v = rng.normal(size=30), rng.normal(size=30)
        a, b = 2.5, -1.25
        lhs = integrate(a * u + b * v, g)
        rhs = a * integrate(u, g) + b * integrate(v, g)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_ones_integrate_to_one(self):
        rng = np.random.default_rng(2)
        g = Grid(np.sort(rng.uniform(0, 5, 23)))
        assert integrate(np.ones(23), g) == pytest.approx(1.0, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            integrate(np.ones(5), uniform_grid(6))


class TestDerivativeAugment:
    def test_constant_curve_has_zero_derivative(self):
        g = uniform_grid(10)
        grp = FunctionalGroup.from_values("g", np.full((3, 10, 1), 2.0), g)
        out = derivative_augment(grp)
        assert np.all(out.values[:, :, 1] == 0.0)

    def test_linear_curve_exact_on_uniform_grid(self):
        g = uniform_grid(15)
        a = -3.7
        vals = (a * g.points)[None, :, None]
        out = derivative_augment(FunctionalGroup.from_values("g", vals, g))
        assert np.allclose(out.values[0, :, 1], a, atol=1e-12)

    def test_sine_derivative_within_finite_difference_bound(self):
        g = uniform_grid(50)
        vals = np.sin(2 * np.pi * g.points)[None, :, None]
        out = derivative_augment(FunctionalGroup.from_values("g", vals, g))
        truth = 2 * np.pi * np.cos(2 * np.pi * g.points)
        err = np.abs(out.values[0, 1:-1, 1] - truth[1:-1])
        assert err.max() <= 0.05 * np.abs(truth).max()

    def test_preserves_n_and_doubles_p(self):
        g = uniform_grid(8)
        grp = FunctionalGroup.from_values("g", np.random.default_rng(3).normal(size=(5, 8, 2)), g)
        out = derivative_augment(grp)
        assert out.n == 5 and out.p == 4

    def test_too_few_points(self):
        g = Grid(np.array([0.0, 1.0]))
        grp = FunctionalGroup.from_values("g", np.zeros((2, 2, 1)), g)
        with pytest.raises(ValueError):
            derivative_augment(grp)


class TestDataModel:
    def test_curve_shape_checks(self):
        g = uniform_grid(4)
        with pytest.raises(ValueError):
            Curve(np.zeros((5, 1)), g)
        with pytest.raises(ValueError):
            Curve(np.array([[np.nan], [0.0], [0.0], [0.0]]), g)

    def test_group_requires_common_grid(self):
        c1 = Curve(np.zeros(4), uniform_grid(4))
        c2 = Curve(np.zeros(5), uniform_grid(5))
        with pytest.raises(ValueError):
            FunctionalGroup("g", (c1, c2))


class TestCsv:
    def test_round_trip_identity(self, tmp_path):
        rng = np.random.default_rng(4)
        g = uniform_grid(12)
        groups = [
            FunctionalGroup.from_values("a", rng.normal(size=(3, 12, 2)), g),
            FunctionalGroup.from_values("b", rng.normal(size=(4, 12, 2)), g),
        ]
        path = tmp_path / "data.csv"
        write_groups_csv(groups, path)
        loaded, report = read_groups_csv(path)
        assert sorted(loaded) == ["a", "b"]
        assert report["n_per_group"] == {"a": 3, "b": 4}
        assert report["m"] == 12 and report["p"] == 2
        for grp in groups:
            assert np.array_equal(loaded[grp.label].values, grp.values)
            assert np.array_equal(loaded[grp.label].grid.points, g.points)

    def test_malformed_row_names_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "curve_id,group,t,c1\n"
            "c0,a,0.0,1.0\n"
            "c0,a,0.5,oops\n"
            "c0,a,1.0,1.0\n"
        )
        with pytest.raises(CsvFormatError) as exc:
            read_groups_csv(path)
        assert exc.value.row == 3

    def test_ragged_grid_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text(
            "curve_id,group,t,c1\n"
            "c0,a,0.0,1.0\n"
            "c0,a,1.0,1.0\n"
            "c1,a,0.0,2.0\n"
            "c1,a,0.5,2.0\n"
        )
        with pytest.raises(CsvFormatError):
            read_groups_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("id,group,t,c1\nc0,a,0.0,1.0\n")
        with pytest.raises(CsvFormatError) as exc:
            read_groups_csv(path)
        assert exc.value.row == 1
