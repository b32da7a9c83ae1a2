import numpy as np
import pytest

from meanfix.geometry import Disk
from meanfix.gridfield import BoundaryData, build_initial, sup_norm_diff
from meanfix.operators import (H_alpha_at, H_alpha_at_many, M_at, M_at_many,
                               OperatorSpec, S_at, T_alpha_at, make_ball_rule,
                               sweep)
from meanfix.radius import RadiusParams, default_params
from meanfix.solver import residual

from conftest import affine_boundary, harmonic2_boundary, make_spec


def lattice_field(domain, h, fn):
    bd = BoundaryData(lambda x, y, th: 0.0, name="zero")
    f = build_initial(domain, bd, h)
    pts = f.node_points()
    return f.with_values(fn(pts[:, 0], pts[:, 1]).reshape(f.nx, f.ny))


class TestBallRule:
    def test_weights_sum_exactly_one_default(self):
        rule = make_ball_rule(8, 32)
        # 256 = 2^8 nodes with weight 2^-8: the float sum is exact
        assert rule.weights.sum() == 1.0

    def test_weights_sum_other_sizes(self):
        for n_r, n_th in [(3, 6), (5, 12), (2, 4)]:
            rule = make_ball_rule(n_r, n_th)
            assert abs(rule.weights.sum() - 1.0) <= 1e-14
            assert np.all(rule.weights > 0)

    def test_nodes_inside_unit_disk(self):
        rule = make_ball_rule(8, 32)
        assert np.all(np.hypot(*rule.nodes.T) <= 1.0)

    def test_reflection_symmetry_exact(self):
        rule = make_ball_rule(8, 32)
        nodes = rule.nodes
        mirrored = -nodes
        a = nodes[np.lexsort((nodes[:, 1], nodes[:, 0]))]
        b = mirrored[np.lexsort((mirrored[:, 1], mirrored[:, 0]))]
        assert np.array_equal(a, b)

    def test_integrates_one_exactly(self):
        rule = make_ball_rule(8, 32)
        assert float(np.ones(len(rule.nodes)) @ rule.weights) == 1.0

    def test_integrates_radius_squared(self):
        rule = make_ball_rule(8, 32)
        got = float(rule.weights @ (rule.nodes ** 2).sum(axis=1))
        assert got == pytest.approx(0.5, abs=1e-12)

    def test_radius_squared_monte_carlo_oracle(self):
        # independent oracle: uniform samples on the unit disk
        rng = np.random.default_rng(123)
        n = 10_000_000
        r2 = rng.uniform(0, 1, n)  # radius^2 is uniform for area measure
        mc = r2.mean()
        sigma = r2.std() / np.sqrt(n)
        assert abs(mc - 0.5) <= 3 * sigma
        rule = make_ball_rule(8, 32)
        got = float(rule.weights @ (rule.nodes ** 2).sum(axis=1))
        assert abs(got - mc) <= 3 * sigma + 1e-12

    def test_parameter_bounds(self):
        with pytest.raises(ValueError):
            make_ball_rule(1, 8)
        with pytest.raises(ValueError):
            make_ball_rule(4, 7)  # odd angular count breaks the symmetry
        with pytest.raises(ValueError):
            make_ball_rule(4, 2)


class TestOperatorSpec:
    def test_rejects_invalid_params(self, unit_disk):
        bad = RadiusParams(alpha=0.5, epsilon=0.6, beta=1.0, lam=0.1)
        with pytest.raises(ValueError, match="rejected"):
            OperatorSpec(params=bad, rule=make_ball_rule(2, 4), domain=unit_disk)


class TestPointwise:
    def test_M_constant(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: np.full_like(x, 3.5))
        assert M_at(f, spec, (0.2, 0.1)) == pytest.approx(3.5, abs=1e-14)

    def test_M_affine_symmetry(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: 1 + 2 * x - y)
        for p in [(0, 0), (0.3, 0.2), (-0.5, 0.1)]:
            want = 1 + 2 * p[0] - p[1]
            assert M_at(f, spec, p) == pytest.approx(want, abs=1e-10)

    def test_M_radial_quadratic(self, unit_disk):
        # analytic: mean of |y|^2 over B(0, r) is r^2 / 2
        params = RadiusParams(alpha=0.0, epsilon=0.3, beta=1.0, lam=0.25)
        spec = OperatorSpec(params=params, rule=make_ball_rule(8, 32),
                            domain=unit_disk)
        f = lattice_field(unit_disk, 1 / 128, lambda x, y: x * x + y * y)
        r = 0.25  # lam * dist(0)^1
        assert M_at(f, spec, (0, 0)) == pytest.approx(r * r / 2, abs=2e-4)

    def test_S_constant(self, unit_disk):
        spec = make_spec(unit_disk, 0.5)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: np.full_like(x, -2.0))
        assert S_at(f, spec, (0.1, 0.4)) == pytest.approx(-2.0, abs=1e-14)

    def test_S_affine_antipodal_cancellation(self, unit_disk):
        spec = make_spec(unit_disk, 0.5)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: 1 + 2 * x - y)
        for p in [(0, 0), (0.3, 0.2), (-0.4, -0.3)]:
            want = 1 + 2 * p[0] - p[1]
            assert S_at(f, spec, p) == pytest.approx(want, abs=1e-10)

    def test_S_radial_quadratic_within_rule_resolution(self, unit_disk):
        params = RadiusParams(alpha=0.5, epsilon=0.3, beta=1.0, lam=0.25)
        spec = OperatorSpec(params=params, rule=make_ball_rule(8, 32),
                            domain=unit_disk)
        f = lattice_field(unit_disk, 1 / 128, lambda x, y: x * x + y * y)
        r = 0.25
        got = S_at(f, spec, (0, 0))
        # sup underestimated by the outermost ring (rho^2 = 15/16), inf exact
        assert abs(got - r * r / 2) <= 0.07 * r * r

    def test_T_alpha_zero_equals_M(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        rng = np.random.default_rng(5)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: np.zeros_like(x))
        f = f.with_values(rng.normal(size=f.values.shape))
        pts = np.array([[0.1, 0.2], [-0.3, 0.5], [0.0, 0.0]])
        assert np.array_equal(T_alpha_at_many_safe(f, spec, pts),
                              M_at_many(f, spec, pts))

    def test_T_recombination(self, unit_disk):
        spec = make_spec(unit_disk, 0.9, epsilon=0.04)
        rng = np.random.default_rng(6)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: np.zeros_like(x))
        f = f.with_values(rng.normal(size=f.values.shape))
        p = (0.15, -0.2)
        want = 0.9 * S_at(f, spec, p) + 0.1 * M_at(f, spec, p)
        assert T_alpha_at(f, spec, p) == pytest.approx(want, abs=1e-14)

    def test_T_radial_quadratic_alpha_free(self, unit_disk):
        f = lattice_field(unit_disk, 1 / 128, lambda x, y: x * x + y * y)
        for alpha in (0.0, 0.5, 0.9):
            eps = min(0.3, (1 - alpha) / 2)
            params = RadiusParams(alpha=alpha, epsilon=eps, beta=1.0, lam=0.25 * eps / 0.3)
            spec = OperatorSpec(params=params, rule=make_ball_rule(8, 32),
                                domain=unit_disk)
            r = params.lam
            got = T_alpha_at(f, spec, (0, 0))
            assert abs(got - r * r / 2) <= 0.1 * r * r

    def test_H_fixed_points_shared_with_T(self, unit_disk):
        spec = make_spec(unit_disk, 0.5)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: 4 - x + 2 * y)
        for p in [(0.2, 0.1), (0, 0)]:
            want = 4 - p[0] + 2 * p[1]
            assert H_alpha_at(f, spec, p) == pytest.approx(want, abs=1e-10)

    def test_H_constant(self, unit_disk):
        spec = make_spec(unit_disk, 0.3)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: np.full_like(x, 9.0))
        assert H_alpha_at(f, spec, (0.4, 0.0)) == pytest.approx(9.0, abs=1e-14)

    def test_H_radial_quadratic(self, unit_disk):
        params = RadiusParams(alpha=0.5, epsilon=0.25, beta=1.0, lam=0.2)
        spec = OperatorSpec(params=params, rule=make_ball_rule(8, 32),
                            domain=unit_disk)
        f = lattice_field(unit_disk, 1 / 128, lambda x, y: x * x + y * y)
        r = 0.2
        # H = (u(0) + T u(0)) / 2 = (0 + ~r^2/2) / 2
        assert H_alpha_at(f, spec, (0, 0)) == pytest.approx(r * r / 4,
                                                            abs=0.05 * r * r)

    def test_rejects_non_interior(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: x)
        with pytest.raises(ValueError):
            M_at(f, spec, (1.0, 0.0))


def T_alpha_at_many_safe(f, spec, pts):
    from meanfix.operators import T_alpha_at_many
    return T_alpha_at_many(f, spec, pts)


class TestSweep:
    def test_affine_fixed_point(self, unit_disk):
        for alpha in (0.0, 0.5):
            spec = make_spec(unit_disk, alpha)
            f = lattice_field(unit_disk, 1 / 32, lambda x, y: 1 + 2 * x - y)
            for which in ("T", "H"):
                g = sweep(f, spec, which)
                assert sup_norm_diff(f, g) <= 1e-10

    def test_constant_fixed_point(self, unit_disk):
        spec = make_spec(unit_disk, 0.4)
        f = lattice_field(unit_disk, 1 / 32, lambda x, y: np.full_like(x, 2.5))
        g = sweep(f, spec, "H")
        assert sup_norm_diff(f, g) <= 1e-14

    def test_one_H_sweep_decreases_residual(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        u0 = build_initial(unit_disk, harmonic2_boundary(), 1 / 32)
        r0 = residual(u0, spec)
        u1 = sweep(u0, spec, "H")
        r1 = residual(u1, spec)
        assert r0 > 0
        assert r1 < r0

    def test_pinned_nodes_immutable(self, unit_disk):
        spec = make_spec(unit_disk, 0.3)
        f = build_initial(unit_disk, affine_boundary(1, -2, 3), 1 / 16)
        g = f
        for _ in range(5):
            g = sweep(g, spec, "H")
        assert np.array_equal(g.values[g.pinned], f.values[f.pinned])

    def test_sweep_matches_pointwise_path(self, unit_disk):
        spec = make_spec(unit_disk, 0.7)
        rng = np.random.default_rng(17)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: np.zeros_like(x))
        f = f.with_values(rng.normal(size=f.values.shape))
        g = sweep(f, spec, "H")
        idx = f.interior_indices()
        pts = f.node_points()[idx]
        want = H_alpha_at_many(f, spec, pts)
        assert np.abs(g.values.ravel()[idx] - want).max() <= 1e-12

    def test_rejects_unknown_operator(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: x)
        with pytest.raises(ValueError):
            sweep(f, spec, "Q")

    def test_nan_aborts(self, unit_disk):
        spec = make_spec(unit_disk, 0.0)
        f = lattice_field(unit_disk, 1 / 16, lambda x, y: x)
        bad = f.values.copy()
        # bypass the GridField validation to simulate a corrupted buffer
        object.__setattr__(f, "values", bad)
        bad[f.nx // 2, f.ny // 2] = np.inf
        with pytest.raises(FloatingPointError):
            sweep(f, spec, "H")


class TestOperatorProperties:
    def _random_pair(self, base, rng):
        lo = rng.uniform(-1, 1, size=base.values.shape)
        hi = lo + rng.uniform(0, 1, size=base.values.shape)
        return base.with_values(lo), base.with_values(hi)

    def setup_method(self):
        self.domain = Disk()
        self.spec = make_spec(self.domain, 0.5)
        self.base = lattice_field(self.domain, 1 / 16, lambda x, y: np.zeros_like(x))

    def test_monotonicity_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            lo, hi = self._random_pair(self.base, rng)
            s_lo = sweep(lo, self.spec, "H")
            s_hi = sweep(hi, self.spec, "H")
            assert np.all(s_lo.values <= s_hi.values)

    def test_nonexpansiveness(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = self.base.with_values(rng.uniform(-1, 1, self.base.values.shape))
            b = self.base.with_values(rng.uniform(-1, 1, self.base.values.shape))
            lhs = sup_norm_diff(sweep(a, self.spec, "H"), sweep(b, self.spec, "H"))
            assert lhs <= sup_norm_diff(a, b) + 1e-12

    def test_range_containment_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            f = self.base.with_values(rng.uniform(-1, 1, self.base.values.shape))
            g = sweep(f, self.spec, "H")
            assert g.values.max() <= f.values.max()
            assert g.values.min() >= f.values.min()

    def test_M_continuity_bound(self):
        # Lebesgue-case interior continuity of the ball mean with C = 16 d
        rng = np.random.default_rng(3)
        spec = make_spec(self.domain, 0.0)
        f = self.base.with_values(rng.uniform(-1, 1, self.base.values.shape))
        norm = np.abs(f.values).max()
        pts = rng.uniform(-1, 1, size=(4000, 2))
        pts = pts[self.domain.dist_many(pts) > 0.05][:1000]
        dist = self.domain.dist_many(pts)
        r_x = spec.params.lam * dist
        ang = rng.uniform(0, 2 * np.pi, len(pts))
        frac = rng.uniform(0.01, 0.5, len(pts))
        ys = pts + (frac * r_x)[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        gap = np.abs(M_at_many(f, spec, pts) - M_at_many(f, spec, ys))
        t = np.hypot(*(pts - ys).T)
        bound = 32.0 * norm * t / r_x
        assert np.all(gap <= bound + 1e-9)
