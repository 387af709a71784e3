"""Numerical verification and classification.

Everything here is evidence on a grid: a passing check certifies the
property at the sampled points within the stated tolerance, nothing more.
Verdicts therefore always record the grid resolution and tolerance used.
Functions designed to defeat sampling are out of scope.

The central predicate is the scaling law

    A(lam*x, lam*y) = phi_inv( psi(lam) * phi(A(x, y)) )

for a scaling function psi on [0,1] and a continuous increasing bijection
phi: [0,1] -> [0,b], b possibly infinite (the product is then taken with
the 0*inf = 0 convention). The admissible psi are exactly the monotone
multiplicative functions on [0,1]: the powers x^c and the two step
indicators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import AggregationFunction, UnitFunction, diagonal, power_function
from .errors import ContractError, DomainError
from .exprparse import eval_expr, parse_expr
from .numerics import Grid, bisect_increasing, default_grid, ext_mul

__all__ = [
    "PsiSpec",
    "PhiSpec",
    "AggregationReport",
    "ResidualReport",
    "MultiplicativeReport",
    "DiagonalReport",
    "PsiRecovery",
    "ClassificationReport",
    "CLASS1",
    "CLASS2",
    "CLASS3",
    "NOT_QH",
    "check_aggregation",
    "check_quasi_homogeneity",
    "check_multiplicative",
    "check_homogeneous_order",
    "recover_psi",
    "diagonal_bijection_check",
    "classify",
    "canonical_pair",
    "fit_power_exponent",
]


# ------------------------------------------------------------------- psi

_PSI_KINDS = ("power", "step0", "step1")


@dataclass(frozen=True)
class PsiSpec:
    """One of the three admissible scaling functions.

    power : psi(x) = x^c, c > 0
    step0 : 0 at x = 0, 1 on (0, 1]   (step at zero)
    step1 : 0 on [0, 1), 1 at x = 1   (step at one)

    Each variant is increasing, multiplicative and fixes psi(0)=0,
    psi(1)=1.
    """

    kind: str
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in _PSI_KINDS:
            raise DomainError(f"unknown psi kind {self.kind!r}")
        if self.kind == "power" and not self.c > 0:
            raise DomainError(f"power scaling needs c > 0, got {self.c}")

    @staticmethod
    def power(c: float) -> "PsiSpec":
        return PsiSpec("power", float(c))

    @staticmethod
    def step_at_zero() -> "PsiSpec":
        return PsiSpec("step0")

    @staticmethod
    def step_at_one() -> "PsiSpec":
        return PsiSpec("step1")

    def __call__(self, lam):
        scalar = np.ndim(lam) == 0
        lam = np.asarray(lam, dtype=float)
        if self.kind == "power":
            out = np.power(lam, self.c)
        elif self.kind == "step0":
            out = np.where(lam > 0.0, 1.0, 0.0)
        else:
            out = np.where(lam == 1.0, 1.0, 0.0)
        return float(out) if scalar else out

    def describe(self) -> str:
        if self.kind == "power":
            return f"power:c={self.c:g}"
        return self.kind


# ------------------------------------------------------------------- phi


@dataclass(frozen=True, eq=False)
class PhiSpec:
    """A continuous increasing bijection [0, 1] -> [0, b], phi(0) = 0.

    ``b`` may be ``inf``; the inverse is then total on [0, inf] with
    phi_inv(inf) = 1. ``closed_form`` records whether both directions are
    closed-form (no bisection anywhere), which drives tolerance selection.
    """

    b: float
    evaluator: Callable
    inverse: Callable
    name: str = "phi"
    closed_form: bool = False

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"phi must have positive codomain endpoint, got b={self.b}")

    def __call__(self, x):
        out = self.evaluator(np.asarray(x, dtype=float))
        return float(out) if np.ndim(x) == 0 else np.asarray(out, dtype=float)

    def invert(self, y):
        out = self.inverse(np.asarray(y, dtype=float))
        return float(out) if np.ndim(y) == 0 else np.asarray(out, dtype=float)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def identity() -> "PhiSpec":
        return PhiSpec(b=1.0,
                       evaluator=lambda x: np.asarray(x, dtype=float),
                       inverse=lambda y: np.asarray(y, dtype=float),
                       name="x", closed_form=True)

    @staticmethod
    def from_unit_function(u: UnitFunction) -> "PhiSpec":
        """Use a declared continuous bijection of [0, 1] directly (b = 1)."""
        if not u.continuous_bijection:
            raise ContractError(
                f"phi must be a declared continuous bijection, got {u!r}")
        if u.inverse is not None:
            return PhiSpec(b=1.0, evaluator=u.evaluator, inverse=u.inverse,
                           name=u.name, closed_form=True)
        return PhiSpec(b=1.0, evaluator=u.evaluator,
                       inverse=lambda y, ev=u.evaluator: bisect_increasing(ev, y),
                       name=u.name, closed_form=False)

    @staticmethod
    def power(c: float) -> "PhiSpec":
        return PhiSpec.from_unit_function(power_function(c))

    @staticmethod
    def inverse_of(u: UnitFunction, c: float = 1.0) -> "PhiSpec":
        """phi(x) = (u_inv(x))^c for a declared bijection u (b = 1).

        The canonical scaling pair of a bijective-diagonal function is
        psi = power(c), phi = (diagonal_inv)^c; with c = 1 this is the
        normalized pair (psi = id, phi = diagonal_inv).
        """
        if not u.continuous_bijection:
            raise ContractError(
                f"inverse_of needs a declared continuous bijection, got {u!r}")
        if not c > 0:
            raise DomainError(f"exponent must be positive, got {c}")
        u_inv = u.inverse
        if u_inv is None:
            u_inv = lambda y, ev=u.evaluator: bisect_increasing(ev, y)  # noqa: E731
        inv_c = 1.0 / c

        def evaluator(x, ui=u_inv, cc=c):
            return np.power(np.asarray(ui(x), dtype=float), cc)

        def inverse(y, ev=u.evaluator, e=inv_c):
            return ev(np.power(np.asarray(y, dtype=float), e))

        return PhiSpec(b=1.0, evaluator=evaluator, inverse=inverse,
                       name=f"({u.name})^-1" + (f"^{c:g}" if c != 1.0 else ""),
                       closed_form=u.inverse is not None)

    @staticmethod
    def from_expr(text: str, *, b: float | None = None,
                  grid: Grid | None = None) -> "PhiSpec":
        """Expression-backed phi, validated eagerly on the grid.

        With finite ``b`` (default: the expression's value at 1) the
        expression must satisfy phi(0) = 0 exactly and increase strictly.
        With ``b = inf`` the expression is read on [0, 1) and phi(1) is the
        point at infinity; inversion works through the bounded transform
        t = phi/(1 + phi).
        """
        tree = parse_expr(text)
        g = grid or default_grid()
        pts = g.points
        unbounded = b is not None and np.isinf(b)
        sample_pts = pts[:-1] if unbounded else pts
        vals = np.asarray(eval_expr(tree, sample_pts), dtype=float)
        if vals[0] != 0.0:
            raise ContractError(
                f"phi expression {text!r}: phi(0) must be 0, got {float(vals[0])!r}")
        d = np.diff(vals)
        if np.any(d <= 0.0):
            i = int(np.argmax(d <= 0.0))
            raise ContractError(
                f"phi expression {text!r} is not strictly increasing on "
                f"({float(sample_pts[i])!r}, {float(sample_pts[i + 1])!r})")
        if np.any(vals < 0.0):
            raise ContractError(f"phi expression {text!r} takes negative values")

        if unbounded:
            def evaluator(x, t=tree):
                x = np.asarray(x, dtype=float)
                inner = np.asarray(eval_expr(t, np.where(x == 1.0, 0.0, x)), dtype=float)
                return np.where(x == 1.0, np.inf, inner)

            def transform(x, ev=evaluator):
                v = np.asarray(ev(x), dtype=float)
                with np.errstate(invalid="ignore"):
                    tt = v / (1.0 + v)
                return np.where(np.isinf(v), 1.0, tt)

            def inverse(y, tr=transform):
                y = np.asarray(y, dtype=float)
                with np.errstate(invalid="ignore"):
                    target = np.where(np.isinf(y), 1.0, y / (1.0 + y))
                return bisect_increasing(tr, target)

            return PhiSpec(b=float("inf"), evaluator=evaluator, inverse=inverse,
                           name=text, closed_form=False)

        b_val = float(vals[-1]) if b is None else float(b)
        if b is not None and abs(float(vals[-1]) - b_val) > 1e-12:
            raise ContractError(
                f"phi expression {text!r} has phi(1)={float(vals[-1])!r}, "
                f"expected b={b_val!r}")

        def evaluator(x, t=tree):
            return np.asarray(eval_expr(t, x), dtype=float)

        def inverse(y, ev=evaluator):
            return bisect_increasing(ev, y)

        return PhiSpec(b=b_val, evaluator=evaluator, inverse=inverse,
                       name=text, closed_form=False)


# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class AggregationReport:
    passed: bool
    boundary_ok: bool
    monotone_ok: bool
    range_ok: bool
    max_violation: float
    witness: tuple | None
    reason: str
    grid_n: int
    tol: float

    def __str__(self):
        lines = [
            f"boundary A(0,0)=0 and A(1,1)=1: {'ok' if self.boundary_ok else 'FAIL'}",
            f"values within [0,1]: {'ok' if self.range_ok else 'FAIL'}",
            f"nondecreasing in each argument: {'ok' if self.monotone_ok else 'FAIL'}",
        ]
        if not self.passed:
            lines.append(f"first violation: {self.reason}")
        lines.append(f"max violation {self.max_violation!r} "
                     f"(grid n={self.grid_n}, tol={self.tol:g})")
        return "\n".join(lines)


@dataclass(frozen=True)
class ResidualReport:
    """Max-residual sweep result; witness is the argmax point."""

    passed: bool
    max_residual: float
    witness: tuple
    grid_n: int
    tol: float
    label: str = ""

    def __str__(self):
        head = f"{self.label}: " if self.label else ""
        return (f"{head}max residual {self.max_residual!r} at {self.witness} "
                f"(grid n={self.grid_n}, tol={self.tol:g}) -> "
                f"{'pass' if self.passed else 'FAIL'}")


@dataclass(frozen=True)
class MultiplicativeReport:
    passed: bool
    max_residual: float
    witness: tuple | None
    grid_n: int
    tol: float


@dataclass(frozen=True)
class DiagonalReport:
    passed: bool
    endpoints_ok: bool
    strictly_increasing_ok: bool
    continuity_ok: bool
    max_jump: float
    max_jump_at: tuple
    witness: tuple | None
    grid_n: int

    def __str__(self):
        return (
            f"diagonal bijection check (grid n={self.grid_n}): "
            f"endpoints={'ok' if self.endpoints_ok else 'FAIL'}, "
            f"strict increase={'ok' if self.strictly_increasing_ok else 'FAIL'}, "
            f"continuity heuristic={'ok' if self.continuity_ok else 'FAIL'} "
            f"(max jump {self.max_jump!r} on {self.max_jump_at})"
        )


# ------------------------------------------------------------------ checks


def check_aggregation(A: AggregationFunction, grid: Grid | None = None,
                      tol: float = 1e-9) -> AggregationReport:
    """Boundary values, range, and monotonicity in each argument on the grid.

    Failures carry the first witness pair in deterministic grid order
    (x-direction violations scanned before y-direction).
    """
    g = grid or default_grid()
    p = g.points
    V = np.asarray(A.evaluator(p[:, None], p[None, :]), dtype=float)

    dev00 = abs(float(V[0, 0]))
    dev11 = abs(float(V[-1, -1]) - 1.0)
    boundary_ok = dev00 <= tol and dev11 <= tol

    over = np.maximum(V - 1.0, -V)
    range_excess = float(np.max(over))
    range_ok = range_excess <= tol

    dx = V[1:, :] - V[:-1, :]
    dy = V[:, 1:] - V[:, :-1]
    worst_decrease = max(float(np.max(-dx, initial=0.0)),
                         float(np.max(-dy, initial=0.0)))
    monotone_ok = worst_decrease <= tol

    witness = None
    reason = ""
    if not boundary_ok:
        if dev00 > tol:
            witness = ((0.0, 0.0, float(V[0, 0])),)
            reason = f"A(0,0)={float(V[0, 0])!r}, expected 0"
        else:
            witness = ((1.0, 1.0, float(V[-1, -1])),)
            reason = f"A(1,1)={float(V[-1, -1])!r}, expected 1"
    elif not range_ok:
        idx = np.argwhere(over > tol)[0]
        i, j = int(idx[0]), int(idx[1])
        witness = ((float(p[i]), float(p[j]), float(V[i, j])),)
        reason = f"A({float(p[i])!r},{float(p[j])!r})={float(V[i, j])!r} outside [0,1]"
    elif not monotone_ok:
        bad_x = np.argwhere(dx < -tol)
        bad_y = np.argwhere(dy < -tol)
        if bad_x.size:
            i, j = int(bad_x[0][0]), int(bad_x[0][1])
            witness = ((float(p[i]), float(p[j]), float(V[i, j])),
                       (float(p[i + 1]), float(p[j]), float(V[i + 1, j])))
            reason = (f"decreasing in x: A({float(p[i + 1])!r},{float(p[j])!r})"
                      f"={float(V[i + 1, j])!r} < A({float(p[i])!r},{float(p[j])!r})"
                      f"={float(V[i, j])!r}")
        else:
            i, j = int(bad_y[0][0]), int(bad_y[0][1])
            witness = ((float(p[i]), float(p[j]), float(V[i, j])),
                       (float(p[i]), float(p[j + 1]), float(V[i, j + 1])))
            reason = (f"decreasing in y: A({float(p[i])!r},{float(p[j + 1])!r})"
                      f"={float(V[i, j + 1])!r} < A({float(p[i])!r},{float(p[j])!r})"
                      f"={float(V[i, j])!r}")

    max_violation = max(dev00, dev11, max(range_excess, 0.0), max(worst_decrease, 0.0))
    passed = boundary_ok and range_ok and monotone_ok
    return AggregationReport(passed=passed, boundary_ok=boundary_ok,
                             monotone_ok=monotone_ok, range_ok=range_ok,
                             max_violation=max_violation, witness=witness,
                             reason=reason, grid_n=g.n, tol=tol)


def _resolve_qh_tol(tol: float | None, phi: PhiSpec) -> float:
    # closed-form pipelines hold 1e-9; a bisection inversion in the loop
    # composes through two function applications, hence 1e-6
    if tol is not None:
        return tol
    return 1e-9 if phi.closed_form else 1e-6


def check_quasi_homogeneity(A: AggregationFunction, phi: PhiSpec, psi: PsiSpec,
                            grid: Grid | None = None,
                            tol: float | None = None) -> ResidualReport:
    """Max residual of the scaling law over the grid cubed.

    residual(lam, x, y) = |A(lam x, lam y) - phi_inv(psi(lam) * phi(A(x, y)))|

    The product uses extended arithmetic (0 * inf = 0) so unbounded phi is
    handled. Multiplier values exactly 0 and 1 take the algebraic short
    cut (psi*phi(t) = 0 resp. phi(t)): the inverse-bijection identity is a
    contract of phi, checked separately, and routing those lanes through a
    numeric inverse round trip would only add noise to the residual of the
    scaling law itself.
    """
    g = grid or default_grid()
    tol = _resolve_qh_tol(tol, phi)
    p = g.points

    V = np.asarray(A.evaluator(p[:, None], p[None, :]), dtype=float)
    W = np.asarray(phi.evaluator(V), dtype=float)
    S = np.asarray(psi(p), dtype=float)

    L = p[:, None, None]
    lhs = np.asarray(A.evaluator(L * p[None, :, None], L * p[None, None, :]),
                     dtype=float)

    M = ext_mul(S[:, None, None], W[None, :, :])
    rhs = np.asarray(phi.inverse(M), dtype=float)
    rhs = np.where((S == 1.0)[:, None, None], V[None, :, :], rhs)

    resid = np.abs(lhs - rhs)
    flat = int(np.argmax(resid))
    k, i, j = np.unravel_index(flat, resid.shape)
    max_res = float(resid[k, i, j])
    witness = (float(p[k]), float(p[i]), float(p[j]))
    return ResidualReport(passed=max_res <= tol, max_residual=max_res,
                          witness=witness, grid_n=g.n, tol=tol,
                          label=f"quasi-homogeneity psi={psi.describe()} phi={phi.name}")


def check_multiplicative(psi, grid: Grid | None = None,
                         tol: float = 1e-12) -> MultiplicativeReport:
    """Verify psi(lam * x) = psi(lam) * psi(x) over all grid pairs.

    Accepts a PsiSpec, a UnitFunction, or any elementwise callable.
    """
    fn = psi.evaluator if isinstance(psi, UnitFunction) else psi
    g = grid or default_grid()
    p = g.points
    F = np.asarray(fn(p), dtype=float)
    lhs = np.asarray(fn(p[:, None] * p[None, :]), dtype=float)
    rhs = F[:, None] * F[None, :]
    resid = np.abs(lhs - rhs)
    max_res = float(np.max(resid))
    witness = None
    if max_res > tol:
        idx = np.argwhere(resid > tol)[0]
        witness = (float(p[int(idx[0])]), float(p[int(idx[1])]))
    return MultiplicativeReport(passed=max_res <= tol, max_residual=max_res,
                                witness=witness, grid_n=g.n, tol=tol)


def check_homogeneous_order(F, k: float, grid: Grid | None = None,
                            tol: float = 1e-6) -> ResidualReport:
    """Verify F(lam x, lam y) = lam^k F(x, y) over the grid cubed.

    ``F`` is an AggregationFunction or any elementwise bivariate callable
    (typically a composite like diagonal_inv o A).
    """
    if not k > 0:
        raise DomainError(f"homogeneity order must be positive, got {k}")
    fn = F.evaluator if isinstance(F, AggregationFunction) else F
    g = grid or default_grid()
    p = g.points
    base = np.asarray(fn(p[:, None], p[None, :]), dtype=float)
    L = p[:, None, None]
    lhs = np.asarray(fn(L * p[None, :, None], L * p[None, None, :]), dtype=float)
    rhs = np.power(L, k) * base[None, :, :]
    resid = np.abs(lhs - rhs)
    flat = int(np.argmax(resid))
    kk, i, j = np.unravel_index(flat, resid.shape)
    max_res = float(resid[kk, i, j])
    witness = (float(p[kk]), float(p[i]), float(p[j]))
    return ResidualReport(passed=max_res <= tol, max_residual=max_res,
                          witness=witness, grid_n=g.n, tol=tol,
                          label=f"homogeneity of order {k:g}")


# ------------------------------------------------------------ psi recovery


def fit_power_exponent(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares exponent of y = x^c on log-log axes (no intercept).

    Returns (c, max absolute deviation of x^c from y on the given points).
    All inputs must be positive.
    """
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    denom = float(np.dot(lx, lx))
    if denom == 0.0:
        raise DomainError("cannot fit an exponent on the point x=1 alone")
    c = float(np.dot(lx, ly) / denom)
    resid = float(np.max(np.abs(np.power(xs, c) - ys)))
    return c, resid


@dataclass(frozen=True)
class PsiRecovery:
    lam: np.ndarray
    samples: np.ndarray
    fitted: PsiSpec | None
    max_fit_residual: float
    note: str
    grid_n: int

    def __str__(self):
        if self.fitted is None:
            return f"psi recovery: no fit ({self.note})"
        return (f"psi recovery: {self.fitted.describe()} "
                f"(max fit residual {self.max_fit_residual!r})")


def recover_psi(A: AggregationFunction, phi: PhiSpec, grid: Grid | None = None,
                fit_tol: float = 1e-6) -> PsiRecovery:
    """Sample psi(lam) = phi(A(lam, lam)) / phi(1) and fit its form.

    For unbounded phi the ratio is taken pointwise with the 1/inf = 0
    convention: finite phi-values over phi(1) = inf give 0, and the
    infinite value itself gives 1. The power fit uses interior points
    lam in [0.1, 0.9] only (the endpoints are forced and the log fit is
    singular at 0). An ambiguous fit is reported as no-fit, never forced.
    """
    g = grid or default_grid()
    p = g.points
    d = np.asarray(A.evaluator(p, p), dtype=float)
    W = np.asarray(phi.evaluator(d), dtype=float)
    if np.isinf(phi.b):
        samples = np.where(np.isinf(W), 1.0, 0.0)
    else:
        samples = W / float(phi.b)

    mask = (p >= 0.1) & (p <= 0.9)
    s = samples[mask]
    if s.size == 0:
        return PsiRecovery(p, samples, None, float("nan"),
                           "grid too coarse for an interior fit", g.n)
    if np.all(s == 0.0):
        return PsiRecovery(p, samples, PsiSpec.step_at_one(), 0.0,
                           "interior samples constant 0", g.n)
    if np.all(s == 1.0):
        return PsiRecovery(p, samples, PsiSpec.step_at_zero(), 0.0,
                           "interior samples constant 1", g.n)
    if np.any(s <= 0.0):
        return PsiRecovery(p, samples, None, float("nan"),
                           "mixed zero and positive interior samples", g.n)
    c, resid = fit_power_exponent(p[mask], s)
    if c <= 0.0:
        return PsiRecovery(p, samples, None, resid,
                           f"fitted exponent {c:g} is not positive", g.n)
    if resid > fit_tol:
        return PsiRecovery(p, samples, None, resid,
                           f"power fit residual {resid:g} above {fit_tol:g}", g.n)
    return PsiRecovery(p, samples, PsiSpec.power(c), resid, "power fit", g.n)


# ------------------------------------------------------- diagonal and class


def diagonal_bijection_check(delta: UnitFunction, grid: Grid | None = None,
                             tol: float = 1e-9,
                             gap_tol: float | None = None) -> DiagonalReport:
    """Grid evidence that a diagonal section is an increasing bijection.

    Endpoints within ``tol``, strictly increasing samples, and a largest
    adjacent jump at most ``gap_tol`` (default 10/n). The jump bound is a
    continuity heuristic, not a proof: it admits Lipschitz-like sections
    while catching unit jumps. A declared continuous_bijection flag on the
    input is evidence enough to skip nothing here; checks always run.
    """
    g = grid or default_grid()
    if gap_tol is None:
        gap_tol = 10.0 / g.n
    p = g.points
    d = np.asarray(delta.evaluator(p), dtype=float)

    endpoints_ok = abs(float(d[0])) <= tol and abs(float(d[-1]) - 1.0) <= tol
    diffs = np.diff(d)
    strict_ok = not np.any(diffs <= 0.0)
    jmax = int(np.argmax(diffs))
    max_jump = float(diffs[jmax])
    max_jump_at = (float(p[jmax]), float(p[jmax + 1]))
    continuity_ok = max_jump <= gap_tol

    witness = None
    if not strict_ok:
        i = int(np.argmax(diffs <= 0.0))
        witness = (float(p[i]), float(p[i + 1]), float(d[i]), float(d[i + 1]))
    elif not endpoints_ok:
        witness = (0.0, 1.0, float(d[0]), float(d[-1]))
    elif not continuity_ok:
        witness = (*max_jump_at, float(d[jmax]), float(d[jmax + 1]))

    return DiagonalReport(passed=endpoints_ok and strict_ok and continuity_ok,
                          endpoints_ok=endpoints_ok,
                          strictly_increasing_ok=strict_ok,
                          continuity_ok=continuity_ok,
                          max_jump=max_jump, max_jump_at=max_jump_at,
                          witness=witness, grid_n=g.n)


CLASS1 = "Class1"
CLASS2 = "Class2"
CLASS3 = "Class3"
NOT_QH = "NotQuasiHomogeneous"


@dataclass(frozen=True)
class ClassificationReport:
    """Verdict plus recovered parameters or a counterexample witness.

    witness is present exactly when the verdict is NotQuasiHomogeneous; it
    is a (lam, x, y, residual) tuple for scaling-law and homogeneity
    failures, and for diagonal failures (lam, x) name the offending
    adjacent diagonal points (y repeats x). ``reason`` says which check
    produced it. ``diagnostics`` holds per-check residual maxima.
    """

    verdict: str
    delta: UnitFunction | None = None
    alpha: float | None = None
    beta: float | None = None
    g: UnitFunction | None = None
    h: UnitFunction | None = None
    witness: tuple | None = None
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)
    grid_n: int = 0
    tol: float = 0.0

    def __post_init__(self):
        if (self.verdict == NOT_QH) != (self.witness is not None):
            raise AssertionError(
                "witness must be present exactly for NotQuasiHomogeneous verdicts")

    #: diagnostics keys that measure a residual against the tolerance
    #: (diagonal_max_jump is a gap measurement, not a violation)
    _RESIDUAL_KEYS = ("aggregation", "class2_formula", "class3_formula",
                      "scaling_law", "order1_homogeneity")

    @property
    def is_quasi_homogeneous(self) -> bool:
        return self.verdict != NOT_QH

    @property
    def max_residual(self) -> float:
        vals = [self.diagnostics[k] for k in self._RESIDUAL_KEYS
                if k in self.diagnostics]
        return max(vals, default=0.0)

    def __str__(self):
        if self.verdict == CLASS1:
            return f"{CLASS1} delta={self.delta.name}"
        if self.verdict == CLASS2:
            return f"{CLASS2} alpha={self.alpha:g} beta={self.beta:g}"
        if self.verdict == CLASS3:
            return f"{CLASS3} g={self.g.name} h={self.h.name}"
        return f"{NOT_QH} witness={self.witness} ({self.reason})"


def _formula_witness(p, V, formula, tol):
    resid = np.abs(V - formula)
    idx = np.argwhere(resid > tol)
    i, j = int(idx[0][0]), int(idx[0][1])
    return (float(p[i]), float(p[j]), float(resid[i, j]))


def classify(A: AggregationFunction, grid: Grid | None = None,
             tol: float = 1e-6) -> ClassificationReport:
    """Decide which canonical class the function belongs to, or refute.

    Decision procedure, in order:

    1. Not an aggregation function on the grid: NotQuasiHomogeneous with
       the monotonicity/boundary witness.
    2. Diagonal constant 1 on interior points: read alpha = A(0,1),
       beta = A(1,0) and verify the flat-class formula everywhere.
    3. Diagonal constant 0 on interior points: read g = A(1,.), h = A(.,1)
       and verify the boundary-class formula everywhere.
    4. Otherwise the diagonal must be an increasing bijection and
       diagonal_inv o A homogeneous of order 1 (the normalized scaling
       pair is then psi = id, phi = diagonal_inv).

    Branches 2 and 3 are mutually exclusive and both preclude a bijective
    diagonal, so at most one branch can succeed. Witnesses are reported in
    deterministic grid order. The verdict is evidence relative to the grid
    and tolerance recorded in the report.
    """
    g = grid or default_grid()
    if g.n < 2:
        raise DomainError(
            "classification needs interior grid points; use a grid with n >= 2")
    p = g.points

    agg = check_aggregation(A, grid=g, tol=tol)
    diagnostics = {"aggregation": agg.max_violation}
    if not agg.passed:
        w = agg.witness[-1]
        return ClassificationReport(
            verdict=NOT_QH, witness=(1.0, w[0], w[1], agg.max_violation),
            reason=f"not an aggregation function: {agg.reason}",
            diagnostics=diagnostics, grid_n=g.n, tol=tol)

    delta = diagonal(A)
    d = np.asarray(delta.evaluator(p), dtype=float)
    interior = d[1:-1]
    V = np.asarray(A.evaluator(p[:, None], p[None, :]), dtype=float)
    X, Y = p[:, None], p[None, :]

    if np.all(np.abs(interior - 1.0) <= tol):
        alpha = float(A(0.0, 1.0))
        beta = float(A(1.0, 0.0))
        formula = np.where((X > 0.0) & (Y > 0.0), 1.0, np.where(X == 0.0, alpha, beta))
        formula = np.where((X == 0.0) & (Y == 0.0), 0.0, formula)
        resid = float(np.max(np.abs(V - formula)))
        diagnostics["class2_formula"] = resid
        if resid <= tol:
            return ClassificationReport(verdict=CLASS2, alpha=alpha, beta=beta,
                                        diagnostics=diagnostics, grid_n=g.n, tol=tol)
        qh = check_quasi_homogeneity(A, PhiSpec.identity(), PsiSpec.step_at_zero(),
                                     grid=g, tol=tol)
        diagnostics["scaling_law"] = qh.max_residual
        if not qh.passed:
            return ClassificationReport(
                verdict=NOT_QH, witness=(*qh.witness, qh.max_residual),
                reason="interior diagonal is 1 but the step-at-zero scaling law fails",
                diagnostics=diagnostics, grid_n=g.n, tol=tol)
        fx, fy, fr = _formula_witness(p, V, formula, tol)
        return ClassificationReport(
            verdict=NOT_QH, witness=(1.0, fx, fy, fr),
            reason="interior diagonal is 1 but the flat-class formula fails",
            diagnostics=diagnostics, grid_n=g.n, tol=tol)

    if np.all(np.abs(interior) <= tol):
        g_sec = UnitFunction(
            evaluator=lambda y, ev=A.evaluator: ev(np.ones_like(np.asarray(y, float)), np.asarray(y, float)),
            increasing=True, name=f"{A.name or A.provenance}(1,.)")
        h_sec = UnitFunction(
            evaluator=lambda x, ev=A.evaluator: ev(np.asarray(x, float), np.ones_like(np.asarray(x, float))),
            increasing=True, name=f"{A.name or A.provenance}(.,1)")
        gv = np.asarray(g_sec.evaluator(p), dtype=float)
        hv = np.asarray(h_sec.evaluator(p), dtype=float)
        formula = np.where((X < 1.0) & (Y < 1.0), 0.0,
                           np.where(X == 1.0, gv[None, :], hv[:, None]))
        formula = np.where((X == 1.0) & (Y == 1.0), 1.0, formula)
        resid = float(np.max(np.abs(V - formula)))
        diagnostics["class3_formula"] = resid
        if resid <= tol:
            return ClassificationReport(verdict=CLASS3, g=g_sec, h=h_sec,
                                        diagnostics=diagnostics, grid_n=g.n, tol=tol)
        qh = check_quasi_homogeneity(A, PhiSpec.identity(), PsiSpec.step_at_one(),
                                     grid=g, tol=tol)
        diagnostics["scaling_law"] = qh.max_residual
        if not qh.passed:
            return ClassificationReport(
                verdict=NOT_QH, witness=(*qh.witness, qh.max_residual),
                reason="interior diagonal is 0 but the step-at-one scaling law fails",
                diagnostics=diagnostics, grid_n=g.n, tol=tol)
        fx, fy, fr = _formula_witness(p, V, formula, tol)
        return ClassificationReport(
            verdict=NOT_QH, witness=(1.0, fx, fy, fr),
            reason="interior diagonal is 0 but the boundary-class formula fails",
            diagnostics=diagnostics, grid_n=g.n, tol=tol)

    dbc = diagonal_bijection_check(delta, grid=g, tol=tol)
    diagnostics["diagonal_max_jump"] = dbc.max_jump
    if not dbc.passed:
        x1, x2 = dbc.witness[0], dbc.witness[1]
        gap = abs(dbc.witness[3] - dbc.witness[2])
        if not dbc.strictly_increasing_ok:
            why = "diagonal is not strictly increasing"
        elif not dbc.endpoints_ok:
            why = "diagonal endpoints are not (0, 1)"
        else:
            why = "diagonal jumps beyond the continuity heuristic"
        return ClassificationReport(
            verdict=NOT_QH, witness=(x1, x2, x2, gap),
            reason=f"{why}: delta({x1!r})={dbc.witness[2]!r}, delta({x2!r})={dbc.witness[3]!r}",
            diagnostics=diagnostics, grid_n=g.n, tol=tol)

    delta_b = delta.declared(increasing=True, strictly_increasing=True,
                             continuous_bijection=True)

    def composite(x, y, ev=A.evaluator, db=delta_b):
        vals = np.clip(np.asarray(ev(x, y), dtype=float), 0.0, 1.0)
        return db.invert(vals)

    hom = check_homogeneous_order(composite, 1.0, grid=g, tol=tol)
    diagnostics["order1_homogeneity"] = hom.max_residual
    if not hom.passed:
        return ClassificationReport(
            verdict=NOT_QH, witness=(*hom.witness, hom.max_residual),
            reason="diagonal is bijective but diagonal_inv o A is not homogeneous of order 1",
            diagnostics=diagnostics, grid_n=g.n, tol=tol)

    return ClassificationReport(verdict=CLASS1, delta=delta_b,
                                diagnostics=diagnostics, grid_n=g.n, tol=tol)


def canonical_pair(report: ClassificationReport) -> tuple[PhiSpec, PsiSpec]:
    """The class's canonical (phi, psi) for re-verifying the scaling law.

    Class 1 uses the normalized pair (diagonal_inv, identity power); the
    two discontinuous classes use any increasing bijection (identity here)
    with their step scaling.
    """
    if report.verdict == CLASS1:
        return PhiSpec.inverse_of(report.delta), PsiSpec.power(1.0)
    if report.verdict == CLASS2:
        return PhiSpec.identity(), PsiSpec.step_at_zero()
    if report.verdict == CLASS3:
        return PhiSpec.identity(), PsiSpec.step_at_one()
    raise DomainError("no canonical scaling pair for a refuted function")
