"""Run configuration: a single JSON document describing one problem.

Canonical serialization (sorted keys, two-space indent) keeps golden outputs
byte-stable.  Exactly one of `alpha` and `p` must be given; `p` is routed
through the p-Laplacian weight formula with d = 2.

Schema:

    {
      "domain":     {"shape": "disk"|"ellipse"|"pnorm", ...numeric params},
      "alpha":      float in [0, 1)          -- or instead:
      "p":          float >= 2,
      "epsilon":    float (optional),
      "beta":       float (optional),
      "lambda":     float (optional),
      "h":          float                    -- or instead:
      "resolution": int  (h = diameter / resolution; default 32),
      "quadrature": {"n_r": int, "n_th": int} (optional),
      "tol":        float (optional, default 1e-8),
      "max_iter":   int (optional),
      "boundary":   {"builtin": "affine(1,2,-1)"} | {"expression": "x^2-y^2"},
      "seed":       int (optional, default 0),
      "output":     {"field_csv": name, "field_meta": name, "report": name}
                    (optional; names are relative to the --out directory)
    }
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import expr as expr_mod
from .geometry import Domain, domain_from_config
from .gridfield import BoundaryData
from .operators import DEFAULT_N_R, DEFAULT_N_TH, OperatorSpec, make_ball_rule
from .radius import alpha_from_p, default_params
from .solver import Problem

DEFAULT_RESOLUTION = 32
DEFAULT_TOL = 1e-8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    domain: dict
    boundary: dict
    alpha: float | None = None
    p: float | None = None
    epsilon: float | None = None
    beta: float | None = None
    lam: float | None = None
    h: float | None = None
    resolution: int | None = None
    n_r: int = DEFAULT_N_R
    n_th: int = DEFAULT_N_TH
    tol: float = DEFAULT_TOL
    max_iter: int | None = None
    seed: int = 0
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.alpha is None) == (self.p is None):
            raise ConfigError("exactly one of 'alpha' and 'p' must be given")
        if self.h is not None and self.resolution is not None:
            raise ConfigError("give at most one of 'h' and 'resolution'")

    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return alpha_from_p(float(self.p), d=2)

    def to_dict(self) -> dict:
        out = {"domain": self.domain, "boundary": self.boundary, "seed": self.seed,
               "tol": self.tol, "quadrature": {"n_r": self.n_r, "n_th": self.n_th}}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.p is not None:
            out["p"] = self.p
        for k, v in (("epsilon", self.epsilon), ("beta", self.beta),
                     ("lambda", self.lam), ("h", self.h),
                     ("resolution", self.resolution), ("max_iter", self.max_iter)):
            if v is not None:
                out[k] = v
        if self.output:
            out["output"] = self.output
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_KNOWN_KEYS = {"domain", "boundary", "alpha", "p", "epsilon", "beta", "lambda",
               "h", "resolution", "quadrature", "tol", "max_iter", "seed",
               "output"}


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for req in ("domain", "boundary"):
        if req not in raw:
            raise ConfigError(f"missing required key {req!r}")
    quad = raw.get("quadrature", {})
    return RunConfig(
        domain=raw["domain"],
        boundary=raw["boundary"],
        alpha=raw.get("alpha"),
        p=raw.get("p"),
        epsilon=raw.get("epsilon"),
        beta=raw.get("beta"),
        lam=raw.get("lambda"),
        h=raw.get("h"),
        resolution=raw.get("resolution"),
        n_r=int(quad.get("n_r", DEFAULT_N_R)),
        n_th=int(quad.get("n_th", DEFAULT_N_TH)),
        tol=float(raw.get("tol", DEFAULT_TOL)),
        max_iter=raw.get("max_iter"),
        seed=int(raw.get("seed", 0)),
        output=raw.get("output", {}),
    )


def config_from_json(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return config_from_json(fh.read())


# ---------------------------------------------------------------------------
# boundary data catalog

_BUILTIN_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\((.*)\))?\s*$")


def _parse_builtin(text: str) -> tuple[str, list[float]]:
    m = _BUILTIN_RE.match(text)
    if m is None:
        raise ConfigError(f"malformed builtin boundary name {text!r}")
    name = m.group(1)
    args = []
    if m.group(2):
        try:
            args = [float(a) for a in m.group(2).split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad builtin arguments in {text!r}") from exc
    return name, args


def builtin_boundary(text: str) -> BoundaryData:
    """Catalog: affine(a,b,c) = a + b x + c y; harmonic2 = x^2 - y^2;
    cosk(k) = cos(k theta)."""
    name, args = _parse_builtin(text)
    if name == "affine":
        if len(args) != 3:
            raise ConfigError(f"affine needs 3 arguments, got {len(args)}")
        a, b, c = args
        return BoundaryData(lambda x, y, theta: a + b * x + c * y,
                            name=f"affine({a},{b},{c})")
    if name == "harmonic2":
        if args:
            raise ConfigError("harmonic2 takes no arguments")
        return BoundaryData(lambda x, y, theta: x * x - y * y, name="harmonic2")
    if name == "cosk":
        if len(args) != 1:
            raise ConfigError(f"cosk needs 1 argument, got {len(args)}")
        k = args[0]
        return BoundaryData(lambda x, y, theta: math.cos(k * theta),
                            name=f"cosk({k})")
    raise ConfigError(f"unknown builtin boundary {name!r}; "
                      "expected affine(a,b,c) | harmonic2 | cosk(k)")


def expression_boundary(text: str) -> BoundaryData:
    tree = expr_mod.parse(text)
    return BoundaryData(
        lambda x, y, theta: expr_mod.evaluate(tree, x=x, y=y, theta=theta),
        name=f"expr:{text}")


def boundary_from_config(cfg: dict) -> BoundaryData:
    if not isinstance(cfg, dict):
        raise ConfigError("boundary config must be a mapping")
    keys = set(cfg)
    if keys == {"builtin"}:
        return builtin_boundary(cfg["builtin"])
    if keys == {"expression"}:
        return expression_boundary(cfg["expression"])
    raise ConfigError(
        "boundary config needs exactly one of 'builtin' or 'expression'")


# ---------------------------------------------------------------------------
# problem assembly


def build_domain(cfg: RunConfig) -> Domain:
    return domain_from_config(cfg.domain)


def build_problem(cfg: RunConfig) -> Problem:
    domain = build_domain(cfg)
    boundary = boundary_from_config(cfg.boundary)
    alpha = cfg.resolved_alpha()
    params = default_params(domain, alpha, epsilon=cfg.epsilon, beta=cfg.beta,
                            lam=cfg.lam)
    rule = make_ball_rule(cfg.n_r, cfg.n_th)
    spec = OperatorSpec(params=params, rule=rule, domain=domain)
    if cfg.h is not None:
        h = float(cfg.h)
    else:
        res = cfg.resolution if cfg.resolution is not None else DEFAULT_RESOLUTION
        h = domain.diameter() / int(res)
    return Problem(domain=domain, spec=spec, boundary=boundary, h=h,
                   tol=cfg.tol, max_iter=cfg.max_iter)


def canonical_json_dump(obj: dict) -> str:
    """Stable serialization for all emitted JSON documents."""
    return json.dumps(_sanitize(obj), indent=2, sort_keys=True) + "\n"


def _sanitize(v):
    if isinstance(v, dict):
        return {k: _sanitize(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_sanitize(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_sanitize(x) for x in v.tolist()]
    if isinstance(v, np.bool_):
        return bool(v)
    return v
