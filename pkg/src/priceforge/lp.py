"""Small dense linear-programming solver used by the scheduling case study.

Problems have the form::

    min  c.x
    s.t. A_eq x  = b_eq
         A_in x <= b_in
         lower <= x <= upper      (infinite bounds allowed)

and are solved by a bounded-variable primal simplex (revised form with an
explicit basis inverse). The method is deterministic: Dantzig pricing with
lowest-index tie-breaking, switching to Bland's rule once degenerate pivots
pile up.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.linalg.blas import dger

from .errors import DimensionMismatch, NumericalFailure

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
BOUND_TOL = 1e-9
REINVERT_EVERY = 128


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _as_matrix(a, n):
    if a is None:
        return np.zeros((0, n))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, n))
    return a


def _as_vector(v, m):
    if v is None:
        return np.zeros(m)
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass
class LpProblem:
    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_in: Optional[np.ndarray] = None
    b_in: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    names: Optional[Sequence[str]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_eq = _as_matrix(self.A_eq, n)
        self.A_in = _as_matrix(self.A_in, n)
        self.b_eq = _as_vector(self.b_eq, self.A_eq.shape[0])
        self.b_in = _as_vector(self.b_in, self.A_in.shape[0])
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(-1)
        if self.A_eq.shape[1] != n or self.A_in.shape[1] != n:
            raise DimensionMismatch("constraint matrices must have one column per variable")
        if self.b_eq.size != self.A_eq.shape[0] or self.b_in.size != self.A_in.shape[0]:
            raise DimensionMismatch("right-hand sides must have one entry per row")
        if self.lower.size != n or self.upper.size != n:
            raise DimensionMismatch("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            bad = int(np.flatnonzero(self.lower > self.upper)[0])
            raise ValueError(f"lower bound exceeds upper bound for variable {self.var_name(bad)}")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds may not exclude every finite value")
        if self.names is not None and len(self.names) != n:
            raise DimensionMismatch("names must have one entry per variable")

    @property
    def n_vars(self) -> int:
        return self.c.size

    def var_name(self, j: int) -> str:
        return self.names[j] if self.names is not None else f"x{j}"


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class ResidualReport:
    eq_residual: float
    ineq_violation: float
    bound_violation: float

    def within(self, p: LpProblem, feas_tol: float = FEAS_TOL, bound_tol: float = BOUND_TOL) -> bool:
        scale = 1.0 + max(
            np.max(np.abs(p.b_eq), initial=0.0),
            np.max(np.abs(p.b_in), initial=0.0),
        )
        return (
            self.eq_residual <= feas_tol * scale
            and self.ineq_violation <= feas_tol * scale
            and self.bound_violation <= bound_tol * max(1.0, _finite_bound_scale(p))
        )


def _finite_bound_scale(p: LpProblem) -> float:
    finite = np.concatenate([p.lower[np.isfinite(p.lower)], p.upper[np.isfinite(p.upper)]])
    return float(np.max(np.abs(finite), initial=0.0))


def check_solution(p: LpProblem, x) -> ResidualReport:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p.n_vars:
        raise DimensionMismatch(f"expected {p.n_vars} values, got {x.size}")
    eq = float(np.max(np.abs(p.A_eq @ x - p.b_eq), initial=0.0))
    ineq = float(np.max(p.A_in @ x - p.b_in, initial=0.0))
    with np.errstate(invalid="ignore"):
        below = np.where(np.isfinite(p.lower), p.lower - x, 0.0)
        above = np.where(np.isfinite(p.upper), x - p.upper, 0.0)
    bound = float(max(np.max(below, initial=0.0), np.max(above, initial=0.0), 0.0))
    return ResidualReport(eq, max(ineq, 0.0), bound)


class _StandardForm:
    """x = offset + M y with 0 <= y <= ub; rows A y (+ slacks) = b."""

    def __init__(self, p: LpProblem):
        n = p.n_vars
        cols = []  # (original index, sign)
        offset = np.zeros(n)
        ub = []
        for j in range(n):
            lo, hi = p.lower[j], p.upper[j]
            if np.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0))
                ub.append(hi - lo)
            elif np.isfinite(hi):
                offset[j] = hi
                cols.append((j, -1.0))
                ub.append(np.inf)
            else:
                cols.append((j, 1.0))
                ub.append(np.inf)
                cols.append((j, -1.0))
                ub.append(np.inf)
        M = np.zeros((n, len(cols)))
        for k, (j, s) in enumerate(cols):
            M[j, k] = s
        m_eq, m_in = p.A_eq.shape[0], p.A_in.shape[0]
        n_struct = len(cols)
        A = np.zeros((m_eq + m_in, n_struct + m_in))
        A[:m_eq, :n_struct] = p.A_eq @ M
        A[m_eq:, :n_struct] = p.A_in @ M
        A[m_eq:, n_struct:] = np.eye(m_in)
        b = np.concatenate([p.b_eq - p.A_eq @ offset, p.b_in - p.A_in @ offset])
        self.M = M
        self.offset = offset
        self.n_struct = n_struct
        self.A = A
        self.b = b
        self.ub = np.concatenate([np.asarray(ub, dtype=float), np.full(m_in, np.inf)])
        self.c = np.concatenate([M.T @ p.c, np.zeros(m_in)])
        self.c0 = float(p.c @ offset)

    def transform_cost(self, c):
        return np.concatenate([self.M.T @ c, np.zeros(self.c.size - self.M.shape[1])])

    def recover(self, y):
        return self.offset + self.M @ y[: self.n_struct]


class _Simplex:
    def __init__(self, A, b, ub, n_real):
        self.A = A
        self.b = b
        self.ub = ub
        self.n_real = n_real
        self.m, self.N = A.shape
        self.iterations = 0

    # basis bookkeeping -------------------------------------------------
    def start(self, basis, at_upper):
        self.basis = np.asarray(basis, dtype=int)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.at_upper = at_upper
        self.locked = np.zeros(self.N, dtype=bool)
        self.reinvert()

    def nonbasic_values(self):
        vals = np.where(self.at_upper, self.ub, 0.0)
        vals[self.is_basic] = 0.0
        return vals

    def reinvert(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.asfortranarray(scipy.linalg.inv(B))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure("singular basis") from exc
        self.xB = self.Binv @ (self.b - self.A @ self.nonbasic_values())

    def values(self):
        x = self.nonbasic_values()
        x[self.basis] = self.xB
        return x

    # one phase ---------------------------------------------------------
    def infeasibility(self):
        ub_b = self.ub[self.basis]
        below = np.maximum(-self.xB, 0.0)
        above = np.where(np.isfinite(ub_b), np.maximum(self.xB - ub_b, 0.0), 0.0)
        return float(np.sum(below) + np.sum(above))

    def lock_optimal_face(self, c, tol):
        """Freeze nonbasics whose reduced cost is nonzero; later runs then
        stay on the optimal face of ``c``."""
        d = c - (c[self.basis] @ self.Binv) @ self.A
        self.locked |= ~self.is_basic & (np.abs(d) > tol)

    def run(self, c, max_iter, phase1=False):
        """Iterate to optimality of ``c``; with ``phase1`` minimise the sum of
        bound violations of basic variables instead (``c`` is ignored)."""
        m, N = self.m, self.N
        degenerate_run = 0
        bland = False
        bland_after = 10 * (m + N)
        since_inversion = 0
        movable = (self.ub > 0) & ~self.locked
        while True:
            if self.iterations >= max_iter:
                raise NumericalFailure(f"iteration limit {max_iter} reached")
            ub_b = self.ub[self.basis]
            if phase1:
                low = self.xB < -FEAS_TOL
                high = np.isfinite(ub_b) & (self.xB > ub_b + FEAS_TOL)
                if not (low.any() or high.any()):
                    return "optimal"
                cb = high.astype(float) - low.astype(float)
                d = -((cb @ self.Binv) @ self.A)
            else:
                low = high = np.zeros(m, dtype=bool)
                y = c[self.basis] @ self.Binv
                d = c - y @ self.A
            d[self.basis] = 0.0
            eligible = movable & ~self.is_basic & np.where(self.at_upper, d > OPT_TOL, d < -OPT_TOL)
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return "infeasible" if phase1 else "optimal"
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = -1.0 if self.at_upper[j] else 1.0
            alpha = self.Binv @ self.A[:, j]
            step = direction * alpha

            # basics move by -theta*step; each blocks at the bound it runs into,
            # infeasible ones only once they have crossed back into range
            dec = step > PIVOT_TOL
            inc = step < -PIVOT_TOL
            ratios = np.full(m, np.inf)
            to_zero = dec & ~low
            to_upper = inc & np.isfinite(ub_b) & ~high
            ratios[to_zero] = np.maximum(self.xB[to_zero], 0.0) / step[to_zero]
            ratios[to_upper] = np.maximum(ub_b[to_upper] - self.xB[to_upper], 0.0) / -step[to_upper]
            theta = np.inf
            leave = -1
            leave_to_upper = False
            if np.any(np.isfinite(ratios)):
                theta = float(np.min(ratios))
                ties = np.flatnonzero(ratios <= theta + 1e-12 * max(1.0, theta))
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    mags = np.abs(alpha[ties])
                    cand = ties[mags >= mags.max() * (1 - 1e-12)]
                    r = int(cand[np.argmin(self.basis[cand])])
                leave = r
                theta = float(ratios[r])
                leave_to_upper = bool(to_upper[r])
            flip = self.ub[j]
            if not np.isfinite(theta) and not np.isfinite(flip):
                if phase1:
                    raise NumericalFailure("unbounded phase-1 ray")
                return "unbounded"
            self.iterations += 1
            if flip <= theta:
                # entering variable reaches its opposite bound first
                self.xB -= flip * step
                self.at_upper[j] = not self.at_upper[j]
                degenerate_run = 0
                continue
            self.xB -= theta * step
            entering_value = (self.ub[j] if self.at_upper[j] else 0.0) + direction * theta
            old = self.basis[leave]
            self.basis[leave] = j
            self.is_basic[j] = True
            self.is_basic[old] = False
            self.at_upper[old] = leave_to_upper
            self.at_upper[j] = False
            self.xB[leave] = entering_value
            row = self.Binv[leave] / alpha[leave]
            alpha[leave] = 0.0
            self.Binv = dger(-1.0, alpha, row, a=self.Binv, overwrite_a=1)
            self.Binv[leave] = row
            since_inversion += 1
            if since_inversion >= REINVERT_EVERY:
                self.reinvert()
                since_inversion = 0
            if theta <= 1e-12:
                degenerate_run += 1
                if degenerate_run > bland_after:
                    bland = True
            else:
                degenerate_run = 0


def _crash(A, b, ub):
    """Initial basis from singleton columns (feasible ones preferred).

    Rows without a singleton column get -1 and are covered by artificials.
    """
    m = A.shape[0]
    nz = A != 0
    counts = nz.sum(axis=0)
    basis = [-1] * m
    feasible = [False] * m
    for j in np.flatnonzero(counts == 1):
        i = int(np.flatnonzero(nz[:, j])[0])
        v = b[i] / A[i, j]
        ok = -FEAS_TOL <= v <= ub[j] + FEAS_TOL
        if basis[i] < 0 or (ok and not feasible[i]):
            basis[i] = int(j)
            feasible[i] = ok
    return basis


def solve_lp(p: LpProblem, max_iter: Optional[int] = None, tie_break=None) -> LpSolution:
    """Solve ``p``; infeasibility and unboundedness come back as statuses.

    ``tie_break`` is an optional secondary cost: among optimal points the one
    minimising it is returned, which makes the answer canonical when the
    optimum is not unique.
    """
    sf = _StandardForm(p)
    A, b, ub = sf.A, sf.b, sf.ub
    m, n = A.shape
    if m == 0:
        return _solve_unconstrained(p, sf)

    basis = _crash(A, b, ub)
    art_rows = [i for i in range(m) if basis[i] < 0]
    n_art = len(art_rows)
    A_full = np.zeros((m, n + n_art))
    A_full[:, :n] = A
    for k, i in enumerate(art_rows):
        A_full[i, n + k] = 1.0 if b[i] >= 0 else -1.0
        basis[i] = n + k
    # artificials are fixed at zero: phase 1 treats any value as infeasible
    ub_full = np.concatenate([ub, np.zeros(n_art)])
    at_upper = np.zeros(n + n_art, dtype=bool)

    simplex = _Simplex(A_full, b, ub_full, n)
    simplex.start(basis, at_upper)
    limit = max_iter if max_iter is not None else 50 * (m + n + n_art) + 1000
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))

    if simplex.infeasibility() > 0:
        outcome = simplex.run(None, limit, phase1=True)
        simplex.reinvert()
        if outcome == "infeasible" and simplex.infeasibility() > FEAS_TOL * scale:
            return LpSolution(LpStatus.INFEASIBLE, iterations=simplex.iterations)

    c2 = np.concatenate([sf.c, np.zeros(n_art)])
    outcome = simplex.run(c2, limit)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=simplex.iterations)
    simplex.reinvert()
    if tie_break is not None:
        w = np.asarray(tie_break, dtype=float).reshape(-1)
        if w.size != p.n_vars:
            raise DimensionMismatch(f"tie_break has {w.size} entries, expected {p.n_vars}")
        simplex.lock_optimal_face(c2, OPT_TOL * (1.0 + float(np.max(np.abs(c2), initial=0.0))))
        w2 = np.concatenate([sf.transform_cost(w), np.zeros(n_art)])
        if simplex.run(w2, limit) == "optimal":
            simplex.reinvert()
    y = simplex.values()[:n]
    y = np.clip(y, 0.0, ub)
    x = sf.recover(y)
    report = check_solution(p, x)
    if not report.within(p):
        raise NumericalFailure(f"residuals exceed tolerance: {report}")
    return LpSolution(LpStatus.OPTIMAL, x, float(p.c @ x), simplex.iterations)


def _solve_unconstrained(p: LpProblem, sf: _StandardForm) -> LpSolution:
    y = np.zeros(sf.c.size)
    for k, ck in enumerate(sf.c):
        if ck < 0:
            if not np.isfinite(sf.ub[k]):
                return LpSolution(LpStatus.UNBOUNDED)
            y[k] = sf.ub[k]
    x = sf.recover(y)
    return LpSolution(LpStatus.OPTIMAL, x, float(p.c @ x))


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def dump_lp(p: LpProblem) -> str:
    """Render ``p`` in CPLEX-style LP text for cross-checking elsewhere."""
    names = [p.var_name(j) for j in range(p.n_vars)]

    def expr(coefs):
        terms = []
        for j in np.flatnonzero(coefs):
            v = coefs[j]
            sign = "-" if v < 0 else "+"
            terms.append(f"{sign} {_fmt(abs(v))} {names[j]}")
        if not terms:
            return "0 " + names[0] if names else "0"
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else text

    lines = ["Minimize", f" obj: {expr(p.c)}", "Subject To"]
    for i, row in enumerate(p.A_eq):
        lines.append(f" e{i}: {expr(row)} = {_fmt(p.b_eq[i])}")
    for i, row in enumerate(p.A_in):
        lines.append(f" c{i}: {expr(row)} <= {_fmt(p.b_in[i])}")
    lines.append("Bounds")
    for j in range(p.n_vars):
        lo, hi = p.lower[j], p.upper[j]
        if not np.isfinite(lo) and not np.isfinite(hi):
            lines.append(f" {names[j]} free")
        elif lo == hi:
            lines.append(f" {names[j]} = {_fmt(lo)}")
        else:
            lo_s = "-inf" if not np.isfinite(lo) else _fmt(lo)
            hi_s = "+inf" if not np.isfinite(hi) else _fmt(hi)
            lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
    lines.append("End")
    return "\n".join(lines) + "\n"
