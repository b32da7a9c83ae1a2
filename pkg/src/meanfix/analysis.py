"""Executable verdicts for the solver's structural properties.

Each checker returns a CheckResult whose `details` carry the measured
margins, so a failing verdict shows how badly and where.  The checkers are
deterministic given their seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .gridfield import BoundaryData, GridField, build_initial, modulus_estimate, sup_norm_diff
from .operators import (H_alpha_at_many, M_at_many, OperatorSpec, S_at_many,
                        T_alpha_at_many, build_sweep_plan, sweep)
from .solver import Problem, _amplification, _rho_estimate

EXACT = 0.0
NONEXPANSIVE_TOL = 1e-12
AFFINE_IDENTITY_TOL = 1e-10
HULL_TOL_FACTOR = 1e-7


@dataclass
class CheckResult:
    name: str
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "vacuous": bool(self.vacuous),
                "details": {k: _jsonable(v) for k, v in self.details.items()}}


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# ---------------------------------------------------------------------------
# comparison principle


def check_comparison(problem: Problem, f1: BoundaryData, f2: BoundaryData,
                     n_boundary_samples: int = 512,
                     d_traces: bool = False) -> CheckResult:
    """Ordered boundary data must give ordered solutions.

    Validates f1 <= f2 on a dense boundary sample first (otherwise the check
    is vacuous), then runs both solves in lockstep.  When the two initial
    fields are ordered nodewise, each pair of iterates must be ordered
    exactly (the sweep is monotone with non-negative weights); the final
    fields must satisfy u1 <= u2 + 2 tol regardless.
    """
    dom = problem.domain
    ts = np.linspace(0.0, 2 * np.pi, n_boundary_samples, endpoint=False)
    bpts = dom.boundary_points(ts)
    g1 = f1.on_boundary(dom, bpts)
    g2 = f2.on_boundary(dom, bpts)
    if np.any(g1 > g2):
        worst = float((g1 - g2).max())
        return CheckResult("comparison", passed=False, vacuous=True,
                           details={"boundary_violation": worst})

    u1 = build_initial(dom, f1, problem.h)
    u2 = build_initial(dom, f2, problem.h)
    initials_ordered = bool(np.all(u1.values <= u2.values))

    plan = build_sweep_plan(u1, problem.spec)
    max_iter = problem.resolved_max_iter()
    tol = problem.tol
    d1_hist: list[float] = []
    d2_hist: list[float] = []
    done1 = done2 = False
    iter_violation = 0.0
    k = 0
    while k < max_iter and not (done1 and done2):
        advanced_both = not (done1 or done2)
        if not done1:
            nxt = sweep(u1, problem.spec, "H", plan=plan)
            d = sup_norm_diff(nxt, u1)
            d1_hist.append(d)
            u1 = nxt
            if 2 * d <= tol and _amplification(_rho_estimate(d1_hist)) * 2 * d <= 0.5 * tol:
                done1 = True
        if not done2:
            nxt = sweep(u2, problem.spec, "H", plan=plan)
            d = sup_norm_diff(nxt, u2)
            d2_hist.append(d)
            u2 = nxt
            if 2 * d <= tol and _amplification(_rho_estimate(d2_hist)) * 2 * d <= 0.5 * tol:
                done2 = True
        if initials_ordered and advanced_both:
            # iterates at matching k: ordering must hold with no tolerance
            gap = float((u1.values - u2.values).max())
            iter_violation = max(iter_violation, gap)
        k += 1

    final_violation = float((u1.values - u2.values).max())
    passed = final_violation <= 2 * tol and (not initials_ordered
                                             or iter_violation <= EXACT)
    details = {
        "initials_ordered": initials_ordered,
        "per_iterate_worst_violation": iter_violation,
        "final_worst_violation": final_violation,
        "allowed_final": 2 * tol,
        "converged": done1 and done2,
        "iterations": k,
    }
    if d_traces:
        details["d_trace_1"] = d1_hist
        details["d_trace_2"] = d2_hist
    return CheckResult("comparison", passed=passed, details=details)


# ---------------------------------------------------------------------------
# graph-in-convex-hull containment


def _facet_distances(hull: ConvexHull, queries: np.ndarray) -> np.ndarray:
    """Signed distance to the hull surface: <= 0 inside (qhull normalizes)."""
    eq = hull.equations  # (n_facets, 4): A x + b <= 0 inside
    return (queries @ eq[:, :3].T + eq[:, 3]).max(axis=1)


def _lp_infeasibility(points: np.ndarray, query: np.ndarray) -> float:
    """L1 distance from the query to the convex hull of the points.

    Linear program: minimize the slack needed to write the query as a convex
    combination.  Zero (up to solver tolerance) means containment; this is
    the independent oracle backing the facet-distance test.
    """
    n = len(points)
    c = np.concatenate([np.zeros(n), np.ones(6)])
    a_eq = np.zeros((4, n + 6))
    a_eq[:3, :n] = points.T
    a_eq[:3, n:n + 3] = np.eye(3)
    a_eq[:3, n + 3:] = -np.eye(3)
    a_eq[3, :n] = 1.0
    b_eq = np.concatenate([query, [1.0]])
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * (n + 6),
                  method="highs")
    if not res.success:
        return float("inf")
    return float(res.fun)


def coarsen_field(fld: GridField, domain, budget: int) -> GridField:
    """Restrict the field to a divisor-compatible sublattice of <= budget nodes.

    The sublattice spans the same hull as the fine lattice (the stride must
    divide both node ranges), so ball quadrature on the coarse field never
    leaves the lattice.  Node classification is geometric and recomputed for
    the coarse spacing.
    """
    import math

    from .geometry import TOL_GEOM

    g = math.gcd(fld.nx - 1, fld.ny - 1)
    strides = sorted(s for s in range(1, g + 1) if g % s == 0)
    stride = strides[-1]
    for s in strides:
        if ((fld.nx - 1) // s + 1) * ((fld.ny - 1) // s + 1) <= budget:
            stride = s
            break
    nx = (fld.nx - 1) // stride + 1
    ny = (fld.ny - 1) // stride + 1
    values = fld.values[::stride, ::stride].copy()
    xs = fld.origin[0] + fld.h * stride * np.arange(nx)
    ys = fld.origin[1] + fld.h * stride * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    pinned = (domain.dist_many(pts) <= TOL_GEOM).reshape(nx, ny)
    return GridField(fld.origin, fld.h * stride, nx, ny, values, pinned)


def check_graph_hull(fld: GridField, spec: OperatorSpec, boundary: BoundaryData,
                     coarse_sample_count: int = 300,
                     hull_tol_factor: float = HULL_TOL_FACTOR,
                     lp_oracle: bool = True) -> CheckResult:
    """Graphs of S u, M u, T u, H u lie in the convex hull of the graph of u.

    The field is restricted to a coarse sublattice (every pinned sample of
    that sublattice included), the hull is built over its complete graph, and
    the four operators of the restricted field are evaluated at its interior
    nodes.  Containment is exact in principle for any lattice field; the
    verdict reports the worst signed facet distance against the tolerance
    hull_tol_factor * (value range), cross-checked by an LP point-in-hull
    oracle.
    """
    if coarse_sample_count > 500:
        raise ValueError("coarse_sample_count capped at 500 (3-D hull cost)")
    coarse = coarsen_field(fld, spec.domain, coarse_sample_count)
    pts = coarse.node_points()
    samples = np.column_stack([pts, coarse.values.ravel()])
    if len(coarse.interior_indices()) == 0:
        return CheckResult("graph_hull", passed=False, vacuous=True,
                           details={"reason": "no interior nodes at the coarse scale"})
    queries_xy = pts[coarse.interior_indices()]
    vrange = float(samples[:, 2].max() - samples[:, 2].min())
    tol = hull_tol_factor * max(vrange, 1e-30)

    ops = {
        "S": S_at_many(coarse, spec, queries_xy),
        "M": M_at_many(coarse, spec, queries_xy),
        "T": T_alpha_at_many(coarse, spec, queries_xy),
        "H": H_alpha_at_many(coarse, spec, queries_xy),
    }
    vmin = float(coarse.values.min())
    vmax = float(coarse.values.max())
    value_axis_ok = all(
        float(v.min()) >= vmin and float(v.max()) <= vmax for v in ops.values())

    details: dict = {"value_range": vrange, "hull_tol": tol,
                     "value_axis_exact": value_axis_ok}

    if vrange <= 1e-13 * max(1.0, abs(vmax)):
        # constant field: the hull is a flat disk; interval test only
        worst = max(max(v.max() - vmax, vmin - v.min()) for v in ops.values())
        details["degenerate"] = "constant"
        details["worst_interval_excess"] = float(worst)
        return CheckResult("graph_hull", passed=bool(worst <= tol), details=details)

    try:
        hull = ConvexHull(samples)
        worst = -np.inf
        for v in ops.values():
            q = np.column_stack([queries_xy, v])
            worst = max(worst, float(_facet_distances(hull, q).max()))
        details["worst_facet_distance"] = worst
        facet_pass = worst <= tol
    except QhullError:
        # coplanar graph (affine field): measure deviation from the plane
        a = np.column_stack([np.ones(len(samples)), samples[:, :2]])
        coef, *_ = np.linalg.lstsq(a, samples[:, 2], rcond=None)
        worst = max(
            float(np.abs(v - (coef[0] + queries_xy @ coef[1:])).max())
            for v in ops.values())
        details["degenerate"] = "planar"
        details["worst_facet_distance"] = worst
        return CheckResult("graph_hull",
                           passed=bool(worst <= max(tol, 1e-9 * max(1.0, abs(vmax)))),
                           details=details)

    lp_pass = True
    if lp_oracle:
        lp_worst = 0.0
        for v in ops.values():
            for xy, z in zip(queries_xy, v):
                q = np.array([xy[0], xy[1], z])
                lp_worst = max(lp_worst, _lp_infeasibility(samples, q))
        details["lp_worst_infeasibility"] = lp_worst
        # L1 infeasibility bounds the Euclidean distance from above
        lp_pass = lp_worst <= 3.0 * max(tol, 1e-9)
    passed = bool(facet_pass and lp_pass and value_axis_ok)
    return CheckResult("graph_hull", passed=passed, details=details)


# ---------------------------------------------------------------------------
# equicontinuity / modulus decay report


@dataclass
class ModulusReport:
    t_grid: np.ndarray
    omega: np.ndarray        # (k_max+1, len(t_grid))
    rho: float
    a_fit: float
    b_fit: float
    fit_max_err: float
    monotone_in_t: bool
    bound_margin: float      # max over k,t of omega_k(t) - (omega_0(t) + b_fit t)

    def to_json_dict(self) -> dict:
        return {"t_grid": self.t_grid.tolist(), "omega": self.omega.tolist(),
                "rho": self.rho, "a_fit": self.a_fit, "b_fit": self.b_fit,
                "fit_max_err": self.fit_max_err,
                "monotone_in_t": self.monotone_in_t,
                "bound_margin": self.bound_margin}


def equicontinuity_report(problem: Problem, n: int, k_max: int, t_grid,
                          which: str = "H", n_pairs: int = 3000,
                          seed: int = 0, u0: GridField | None = None) -> ModulusReport:
    """Modulus-of-continuity traces of the iterates on a nested subdomain.

    The subdomain keeps dist > (1-epsilon)^n; the decay model
    a * rho^k + b * t is fitted in the Chebyshev sense with
    rho = alpha for the T iteration and (1+alpha)/2 for H.  Descriptive: the
    only asserted structure is monotonicity of each omega_k in t and the
    fitted bound omega_k <= omega_0 + b_fit * t.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0:
        raise ValueError("empty separation grid")
    eps = problem.spec.params.epsilon
    dist_min = (1.0 - eps) ** n
    alpha = problem.spec.params.alpha
    rho = alpha if which == "T" else 0.5 * (1.0 + alpha)

    u = u0 if u0 is not None else build_initial(problem.domain, problem.boundary,
                                                problem.h)
    plan = build_sweep_plan(u, problem.spec)
    omega = np.zeros((k_max + 1, len(t_grid)))
    for k in range(k_max + 1):
        omega[k] = modulus_estimate(u, problem.domain, dist_min, t_grid,
                                    n_pairs=n_pairs, seed=seed)
        if k < k_max:
            u = sweep(u, problem.spec, which, plan=plan)

    a_fit, b_fit, fit_err = _chebyshev_decay_fit(omega, rho, t_grid)
    monotone = bool(np.all(np.diff(omega, axis=1) >= -1e-15))
    bound_margin = float((omega - (omega[0][None, :] + b_fit * t_grid[None, :])).max())
    return ModulusReport(t_grid=t_grid, omega=omega, rho=rho, a_fit=a_fit,
                         b_fit=b_fit, fit_max_err=fit_err,
                         monotone_in_t=monotone, bound_margin=bound_margin)


def _chebyshev_decay_fit(omega: np.ndarray, rho: float, t_grid: np.ndarray):
    """min-max fit of omega_k(t) ~ a rho^k + b t with a, b >= 0 (an LP)."""
    k_count, t_count = omega.shape
    rows = []
    rhs = []
    for k in range(k_count):
        for j in range(t_count):
            rows.append([rho ** k, t_grid[j], -1.0])
            rhs.append(omega[k, j])
            rows.append([-rho ** k, -t_grid[j], -1.0])
            rhs.append(-omega[k, j])
    res = linprog(c=[0.0, 0.0, 1.0], A_ub=np.asarray(rows), b_ub=np.asarray(rhs),
                  bounds=[(0, None), (0, None), (0, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"modulus decay fit failed: {res.message}")
    a, b, e = res.x
    return float(a), float(b), float(e)


# ---------------------------------------------------------------------------
# operator property suite (random fields)


def random_field_pair(base: GridField, rng: np.random.Generator
                      ) -> tuple[GridField, GridField]:
    """Nodewise-ordered pair of random fields on the base lattice."""
    lo = rng.uniform(-1.0, 1.0, size=(base.nx, base.ny))
    hi = lo + rng.uniform(0.0, 1.0, size=(base.nx, base.ny))
    return base.with_values(lo), base.with_values(hi)


def operator_property_suite(base: GridField, spec: OperatorSpec,
                            n_pairs: int = 100, seed: int = 0) -> CheckResult:
    """Monotonicity (exact), nonexpansiveness (1e-12), range containment
    (exact) over seeded random field pairs, and S = M = identity on affine
    fields (1e-10)."""
    rng = np.random.default_rng(seed)
    plan = build_sweep_plan(base, spec)
    worst_mono = -np.inf
    worst_nonexp = -np.inf
    worst_range = -np.inf
    for _ in range(n_pairs):
        lo, hi = random_field_pair(base, rng)
        s_lo = sweep(lo, spec, "H", plan=plan)
        s_hi = sweep(hi, spec, "H", plan=plan)
        worst_mono = max(worst_mono, float((s_lo.values - s_hi.values).max()))
        worst_nonexp = max(worst_nonexp,
                           sup_norm_diff(s_lo, s_hi) - sup_norm_diff(lo, hi))
        for f, s in ((lo, s_lo), (hi, s_hi)):
            worst_range = max(worst_range,
                              float(s.values.max() - f.values.max()),
                              float(f.values.min() - s.values.min()))

    worst_affine = -np.inf
    pts = base.node_points()[base.interior_indices()]
    for _ in range(10):
        a, b, c = rng.uniform(-2, 2, size=3)
        vals = (a + b * pts_full_x(base) + c * pts_full_y(base))
        aff = base.with_values(vals)
        s_vals = S_at_many(aff, spec, pts)
        m_vals = M_at_many(aff, spec, pts)
        center = aff.values.ravel()[base.interior_indices()]
        worst_affine = max(worst_affine,
                           float(np.abs(s_vals - center).max()),
                           float(np.abs(m_vals - center).max()))

    passed = (worst_mono <= EXACT and worst_nonexp <= NONEXPANSIVE_TOL
              and worst_range <= EXACT and worst_affine <= AFFINE_IDENTITY_TOL)
    return CheckResult("operators", passed=bool(passed), details={
        "n_pairs": n_pairs,
        "worst_monotonicity_violation": worst_mono,
        "worst_nonexpansiveness_excess": worst_nonexp,
        "worst_range_excess": worst_range,
        "worst_affine_identity_error": worst_affine,
    })


def pts_full_x(base: GridField) -> np.ndarray:
    return base.node_points()[:, 0].reshape(base.nx, base.ny)


def pts_full_y(base: GridField) -> np.ndarray:
    return base.node_points()[:, 1].reshape(base.nx, base.ny)


# ---------------------------------------------------------------------------
# asymptotic regularity


def check_regularity(problem: Problem, report=None) -> CheckResult:
    """d_k non-increasing (to 1e-12) with final value below tol."""
    from .solver import solve
    if report is None:
        report = solve(problem)
    d = report.d_trace
    increases = float(np.max(np.diff(d))) if len(d) > 1 else 0.0
    final_ok = bool(d[-1] <= problem.tol)
    passed = increases <= 1e-12 and final_ok and report.termination == "converged"
    return CheckResult("regularity", passed=bool(passed), details={
        "worst_d_increase": increases,
        "final_d": float(d[-1]),
        "tol": problem.tol,
        "termination": report.termination,
    })
