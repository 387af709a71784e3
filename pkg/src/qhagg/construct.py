"""Builders for quasi-homogeneous aggregation functions.

Three construction routes:

* ``from_triple`` realizes the generator-triple formula

      A(x, y) = 0                        at (0, 0)
               f(y * f_inv(h(x / y)))    when x <= y, y != 0
               f(x * f_inv(g(y / x)))    when y <= x, x != 0

  (ties evaluate the x<=y branch; both branches agree on ties).
* ``class_flat`` builds the family that is 1 on (0,1]^2 with boundary
  constants alpha, beta.
* ``class_boundary`` builds the family that is 0 on [0,1)^2 with boundary
  sections g, h.

``triple_of`` recovers the canonical triple (diagonal and boundary
sections) from any aggregation function; whether that triple actually
regenerates the function is a classification question, not a construction
error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AggregationFunction, UnitFunction, diagonal
from .errors import ContractError, DomainError
from .numerics import Grid, bisect_increasing, default_grid

__all__ = [
    "GeneratorTriple",
    "ConditionCheck",
    "TripleValidationReport",
    "validate_triple",
    "from_triple",
    "class_flat",
    "class_boundary",
    "triple_of",
]


@dataclass(frozen=True, eq=False)
class GeneratorTriple:
    """(f, g, h): an increasing bijection plus two increasing sections.

    Construction is permissive; ``validate_triple`` measures the actual
    conditions (endpoints, monotonicity, and the nonincreasing ratios
    f_inv(h(x))/x and f_inv(g(x))/x on (0, 1]) on a grid.
    """

    f: UnitFunction
    g: UnitFunction
    h: UnitFunction

    def __repr__(self):
        return f"GeneratorTriple(f={self.f.name}, g={self.g.name}, h={self.h.name})"


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    witness: tuple | None = None
    detail: str = ""

    def __str__(self):
        status = "ok" if self.passed else "FAIL"
        extra = f" witness={self.witness}" if self.witness is not None else ""
        detail = f" ({self.detail})" if self.detail else ""
        return f"{self.name}: {status}{extra}{detail}"


@dataclass(frozen=True)
class TripleValidationReport:
    conditions: tuple[ConditionCheck, ...]
    grid_n: int
    tol: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failures(self) -> tuple[ConditionCheck, ...]:
        return tuple(c for c in self.conditions if not c.passed)

    def __str__(self):
        lines = [str(c) for c in self.conditions]
        lines.append(f"triple: {'valid' if self.ok else 'INVALID'} "
                     f"(grid n={self.grid_n}, tol={self.tol:g})")
        return "\n".join(lines)


def _f_inverse(f: UnitFunction, inv_tol: float = 1e-12):
    """Inverse evaluator for f, preferring the closed form."""
    if f.inverse is not None:
        return f.inverse
    return lambda y: bisect_increasing(f.evaluator, y, tol=inv_tol)


def validate_triple(t: GeneratorTriple, grid: Grid | None = None,
                    tol: float = 1e-9) -> TripleValidationReport:
    """Measure every sufficiency condition of the triple construction.

    Failures are data (each with a witness grid point), not exceptions.
    The nonincreasing-ratio conditions are checked pairwise on consecutive
    grid points of (0, 1] only: the ratio may diverge as x -> 0.
    """
    g = grid or default_grid()
    p = g.points
    checks: list[ConditionCheck] = []

    fv = np.asarray(t.f.evaluator(p), dtype=float)
    checks.append(ConditionCheck("f(0)=0", abs(float(fv[0])) <= tol,
                                 None if abs(float(fv[0])) <= tol else (0.0, float(fv[0]))))
    checks.append(ConditionCheck("f(1)=1", abs(float(fv[-1]) - 1.0) <= tol,
                                 None if abs(float(fv[-1]) - 1.0) <= tol else (1.0, float(fv[-1]))))
    fd = np.diff(fv)
    f_strict = not np.any(fd <= 0.0)
    fw = None
    if not f_strict:
        i = int(np.argmax(fd <= 0.0))
        fw = (float(p[i]), float(p[i + 1]))
    checks.append(ConditionCheck("f strictly increasing", f_strict, fw))
    f_bijective_evidence = checks[0].passed and checks[1].passed and f_strict

    for label, u in (("g", t.g), ("h", t.h)):
        uv = np.asarray(u.evaluator(p), dtype=float)
        ok_end = abs(float(uv[-1]) - 1.0) <= tol
        checks.append(ConditionCheck(f"{label}(1)=1", ok_end,
                                     None if ok_end else (1.0, float(uv[-1]))))
        ud = np.diff(uv)
        mono = not np.any(ud < -tol)
        uw = None
        if not mono:
            i = int(np.argmax(ud < -tol))
            uw = (float(p[i]), float(p[i + 1]))
        checks.append(ConditionCheck(f"{label} increasing", mono, uw))

    # ratio conditions need f_inv; without bijection evidence they are
    # reported failed rather than computed on a non-invertible f
    if f_bijective_evidence:
        f_inv = _f_inverse(t.f)
        xs = p[1:]  # (0, 1]
        for label, u in (("h", t.h), ("g", t.g)):
            vals = np.asarray(u.evaluator(xs), dtype=float)
            ratio = np.asarray(f_inv(np.clip(vals, 0.0, 1.0)), dtype=float) / xs
            rd = np.diff(ratio)
            ok = not np.any(rd > tol)
            w = None
            if not ok:
                i = int(np.argmax(rd > tol))
                w = (float(xs[i]), float(xs[i + 1]))
            checks.append(ConditionCheck(
                f"f_inv({label}(x))/x nonincreasing on (0,1]", ok, w,
                detail="" if ok else
                f"ratio rises {float(ratio[i])!r} -> {float(ratio[i + 1])!r}"))
    else:
        for label in ("h", "g"):
            checks.append(ConditionCheck(
                f"f_inv({label}(x))/x nonincreasing on (0,1]", False, None,
                detail="not evaluated: f is not an increasing bijection on the grid"))

    return TripleValidationReport(tuple(checks), g.n, tol)


def from_triple(t: GeneratorTriple, *, validate: bool = True,
                grid: Grid | None = None, tol: float = 1e-9) -> AggregationFunction:
    """Aggregation function generated by the triple.

    By contract the result satisfies A(x, 1) = h(x), A(1, y) = g(y) and
    A(x, x) = f(x). With ``validate=False`` the raw formula is built even
    for invalid triples; that is how one demonstrates the ratio conditions
    are not vacuous (the raw formula then fails monotonicity).
    """
    if validate:
        report = validate_triple(t, grid=grid, tol=tol)
        if not report.ok:
            raise ContractError(
                "invalid generator triple:\n" + str(report), report=report)

    f_ev, g_ev, h_ev = t.f.evaluator, t.g.evaluator, t.h.evaluator
    f_inv = _f_inverse(t.f)

    def evaluate(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        y_safe = np.where(y == 0.0, 1.0, y)
        x_safe = np.where(x == 0.0, 1.0, x)
        # dummy lanes (masked out below) are clipped into the domain
        r_xy = np.clip(x / y_safe, 0.0, 1.0)
        r_yx = np.clip(y / x_safe, 0.0, 1.0)
        upper = f_ev(y * np.asarray(f_inv(np.clip(h_ev(r_xy), 0.0, 1.0)), dtype=float))
        lower = f_ev(x * np.asarray(f_inv(np.clip(g_ev(r_yx), 0.0, 1.0)), dtype=float))
        out = np.where((x <= y) & (y != 0.0), upper, lower)
        return np.where((x == 0.0) & (y == 0.0), 0.0, out)

    return AggregationFunction(
        evaluator=evaluate,
        provenance="triple-generated",
        name=f"triple(f={t.f.name}, g={t.g.name}, h={t.h.name})",
    )


def class_flat(alpha: float, beta: float) -> AggregationFunction:
    """The scaling-indifferent family: 1 on (0,1]^2, alpha/beta on the axes.

    Quasi-homogeneous with the step-at-zero scaling for every increasing
    bijection of [0, 1].
    """
    if not (0.0 <= alpha <= 1.0) or not (0.0 <= beta <= 1.0):
        raise DomainError(f"alpha and beta must lie in [0, 1], got ({alpha}, {beta})")

    def evaluate(x, y, a=float(alpha), b=float(beta)):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.where((x > 0.0) & (y > 0.0), 1.0, np.where(x == 0.0, a, b))
        return np.where((x == 0.0) & (y == 0.0), 0.0, out)

    return AggregationFunction(
        evaluator=evaluate,
        provenance="class-2",
        name=f"flat(alpha={alpha:g}, beta={beta:g})",
    )


def class_boundary(g: UnitFunction, h: UnitFunction,
                   grid: Grid | None = None) -> AggregationFunction:
    """The boundary-supported family: 0 on [0,1)^2, sections g, h on the edges.

    Requires g, h declared increasing with g(1) = h(1) = 1; violations are
    rejected here (sampled on the grid), not deferred to later checks.
    """
    if not g.increasing or not h.increasing:
        raise ContractError("class_boundary requires g and h declared increasing")
    gd = grid or default_grid()
    for label, u in (("g", g), ("h", h)):
        end = float(u(1.0))
        if abs(end - 1.0) > 1e-12:
            raise ContractError(f"class_boundary requires {label}(1)=1, got {end!r}")
        vals = np.asarray(u.evaluator(gd.points), dtype=float)
        d = np.diff(vals)
        if np.any(d < 0.0):
            i = int(np.argmax(d < 0.0))
            raise ContractError(
                f"class_boundary: {label} decreases on "
                f"({float(gd.points[i])!r}, {float(gd.points[i + 1])!r})")
        if np.any((vals < 0.0) | (vals > 1.0)):
            raise ContractError(f"class_boundary: {label} leaves [0, 1] on the grid")

    g_ev, h_ev = g.evaluator, h.evaluator

    def evaluate(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.where((x < 1.0) & (y < 1.0), 0.0,
                       np.where(x == 1.0, g_ev(y), h_ev(x)))
        return np.where((x == 1.0) & (y == 1.0), 1.0, out)

    return AggregationFunction(
        evaluator=evaluate,
        provenance="class-3",
        name=f"boundary(g={g.name}, h={h.name})",
    )


def triple_of(A: AggregationFunction) -> GeneratorTriple:
    """Canonical triple of A: diagonal plus the two boundary sections.

    Never fails; the sections carry no declared flags. For a function with
    a bijective diagonal generated by some triple, this recovers it
    (f = A(x,x), g = A(1, .), h = A(., 1)); otherwise classification decides
    what the sections mean.
    """
    a_ev = A.evaluator

    def g_eval(y):
        y = np.asarray(y, dtype=float)
        return a_ev(np.ones_like(y), y)

    def h_eval(x):
        x = np.asarray(x, dtype=float)
        return a_ev(x, np.ones_like(x))

    label = A.name or A.provenance
    return GeneratorTriple(
        f=diagonal(A),
        g=UnitFunction(evaluator=g_eval, increasing=True, name=f"{label}(1,.)"),
        h=UnitFunction(evaluator=h_eval, increasing=True, name=f"{label}(.,1)"),
    )
