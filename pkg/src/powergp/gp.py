"""Geometric-program solver built on the log transform.

A GP in standard form minimizes a posynomial subject to posynomial
constraints ``f_i(x) <= 1`` and monomial equalities ``g_j(x) = 1`` over
strictly positive ``x``.  Substituting ``y = log x`` turns every posynomial
into a log-sum-exp of affine functions of ``y`` and every monomial equality
into a linear equation, giving a smooth convex program::

    minimize    F0(y) = logsumexp(A0 y + b0)
    subject to  F_i(y) = logsumexp(A_i y + b_i) <= 0
                C y + e = 0

The solver eliminates the equalities by affine substitution, finds a strictly
feasible point with an auxiliary-slack phase when needed, follows the primal
log-barrier central path with damped Newton steps, and finishes with an
active-set Newton polish that drives the KKT residual to machine precision.
Everything is deterministic: no randomized pivoting, fixed starting points.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .posynomial import Monomial, Posynomial, posy_eval

# Hard box on log-variables; keeps exp() finite and bounds runaway iterates
# on degenerate (unbounded) problems.
_YBOX = 600.0
_ARMIJO = 0.01
_BACKTRACK = 0.5
_MIN_STEP = 1e-18
_INNER_CAP = 60


class GpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and barrier parameters.

    ``max_iterations`` budgets total Newton steps across the feasibility
    phase, the barrier rounds and the polish.  ``t_init`` and ``mu`` are the
    initial barrier weight and its growth factor.
    """

    feasibility_tol: float = 1e-8
    kkt_tol: float = 1e-8
    max_iterations: int = 200
    t_init: float = 1.0
    mu: float = 30.0
    gap_tol: float = 1e-10
    newton_tol: float = 1e-12
    polish: bool = True

    def __post_init__(self):
        if self.feasibility_tol <= 0 or self.kkt_tol <= 0 or self.gap_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.mu <= 1:
            raise ValueError("barrier growth factor mu must exceed 1")
        if self.t_init <= 0:
            raise ValueError("t_init must be positive")


@dataclass(frozen=True)
class GpProblem:
    """Standard-form GP: minimize a posynomial s.t. posynomials <= 1 and monomials = 1."""

    objective: Posynomial
    ineq_constraints: tuple[Posynomial, ...] = ()
    mono_eq_constraints: tuple[Monomial, ...] = ()
    var_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ineq_constraints", tuple(self.ineq_constraints))
        object.__setattr__(self, "mono_eq_constraints", tuple(self.mono_eq_constraints))
        if self.var_count < 1:
            raise ValueError("a GP needs at least one variable")
        used = self.objective.max_var()
        for p in self.ineq_constraints:
            used = max(used, p.max_var())
        for m in self.mono_eq_constraints:
            used = max(used, m.max_var())
        if used >= self.var_count:
            raise ValueError(
                f"variable id {used} out of range for var_count={self.var_count}"
            )


@dataclass(frozen=True)
class GpSolution:
    x: np.ndarray
    objective_value: float
    status: GpStatus
    kkt_residual: float
    iterations: int
    ineq_multipliers: np.ndarray
    eq_multipliers: np.ndarray


class ConvexForm:
    """Log-domain view of a GP: stacked affine terms grouped per constraint."""

    def __init__(self, gp: GpProblem):
        n = gp.var_count
        self.var_count = n
        self.obj_exponents, self.obj_logc = _posy_rows(gp.objective, n)

        blocks = [_posy_rows(p, n) for p in gp.ineq_constraints]
        self.constraint_count = len(blocks)
        if blocks:
            self.con_exponents = np.vstack([a for a, _ in blocks])
            self.con_logc = np.concatenate([b for _, b in blocks])
            counts = np.array([a.shape[0] for a, _ in blocks])
        else:
            self.con_exponents = np.zeros((0, n))
            self.con_logc = np.zeros(0)
            counts = np.zeros(0, dtype=int)
        self.con_starts = np.concatenate(([0], np.cumsum(counts)))[:-1].astype(int)
        self.con_row = np.repeat(np.arange(self.constraint_count), counts)

        q = len(gp.mono_eq_constraints)
        self.eq_matrix = np.zeros((q, n))
        self.eq_rhs = np.zeros(q)
        for j, m in enumerate(gp.mono_eq_constraints):
            for var, e in m.exponents.items():
                self.eq_matrix[j, var] = e
            self.eq_rhs[j] = np.log(m.coefficient)

    # -- evaluation helpers (used directly by tests and by kkt_residual) --

    def objective_value(self, y: np.ndarray) -> float:
        v, _ = _lse_single(self.obj_exponents, self.obj_logc, np.asarray(y, float))
        return v

    def objective_gradient(self, y: np.ndarray) -> np.ndarray:
        _, w = _lse_single(self.obj_exponents, self.obj_logc, np.asarray(y, float))
        return self.obj_exponents.T @ w

    def constraint_values(self, y: np.ndarray) -> np.ndarray:
        if self.constraint_count == 0:
            return np.zeros(0)
        vals, _ = _lse_rows(
            self.con_exponents, self.con_logc, self.con_starts, self.con_row,
            np.asarray(y, float),
        )
        return vals

    def constraint_gradients(self, y: np.ndarray) -> np.ndarray:
        if self.constraint_count == 0:
            return np.zeros((0, self.var_count))
        _, w = _lse_rows(
            self.con_exponents, self.con_logc, self.con_starts, self.con_row,
            np.asarray(y, float),
        )
        return np.add.reduceat(self.con_exponents * w[:, None], self.con_starts, axis=0)

    def equality_residuals(self, y: np.ndarray) -> np.ndarray:
        return self.eq_matrix @ np.asarray(y, float) + self.eq_rhs


def to_convex(gp: GpProblem) -> ConvexForm:
    """Log-transform a GP; ``log(posy_eval(p, exp(y))) == logsumexp`` exactly."""
    return ConvexForm(gp)


def _posy_rows(p: Posynomial, n: int) -> tuple[np.ndarray, np.ndarray]:
    A = np.zeros((len(p.terms), n))
    b = np.zeros(len(p.terms))
    for k, t in enumerate(p.terms):
        for var, e in t.exponents.items():
            A[k, var] = e
        b[k] = np.log(t.coefficient)
    return A, b


def _lse_single(A: np.ndarray, b: np.ndarray, y: np.ndarray):
    z = A @ y + b
    mx = z.max()
    e = np.exp(z - mx)
    s = e.sum()
    return float(mx + np.log(s)), e / s


def _lse_rows(A, b, starts, row, y):
    z = A @ y + b
    mx = np.maximum.reduceat(z, starts)
    e = np.exp(z - mx[row])
    s = np.add.reduceat(e, starts)
    return mx + np.log(s), e / s[row]


# ---------------------------------------------------------------------------
# internal solver machinery
# ---------------------------------------------------------------------------


@dataclass
class _Stacked:
    """Reduced convex program: one objective logsumexp plus stacked constraints.

    For large, sparse term matrices (the usual case for network problems,
    where each term touches two or three variables) ``refresh`` installs CSR
    operators for the three hot products; callers that patch ``A``/``b`` in
    place must call ``refresh`` again.
    """

    n: int
    m: int
    A0: np.ndarray
    b0: np.ndarray
    A: np.ndarray
    b: np.ndarray
    starts: np.ndarray
    row: np.ndarray

    def __post_init__(self):
        self._A_sp = None
        self._P_sp = None
        self.refresh()

    def refresh(self):
        T = self.A.shape[0]
        if T * self.n >= 50_000:
            from scipy import sparse

            A_sp = sparse.csr_matrix(self.A)
            if A_sp.nnz <= 0.3 * T * self.n:
                self._A_sp = A_sp
                self._P_sp = sparse.csr_matrix(
                    (np.ones(T), (self.row, np.arange(T))), shape=(self.m, T))
                return
        self._A_sp = None
        self._P_sp = None

    def term_affine(self, y):
        """A @ y + b for the constraint block."""
        if self._A_sp is not None:
            return self._A_sp.dot(y) + self.b
        return self.A @ y + self.b

    def con_values(self, y):
        if self.m == 0:
            return np.zeros(0), np.zeros(0)
        z = self.term_affine(y)
        mx = np.maximum.reduceat(z, self.starts)
        e = np.exp(z - mx[self.row])
        s = np.add.reduceat(e, self.starts)
        return mx + np.log(s), e / s[self.row]

    def con_grads(self, w):
        """Per-constraint gradient rows sum_k w_k a_k, shape (m, n)."""
        if self._A_sp is not None:
            return (self._P_sp @ self._A_sp.multiply(w[:, None])).toarray()
        return np.add.reduceat(self.A * w[:, None], self.starts, axis=0)

    def term_quad(self, weights):
        """A^T diag(weights) A over the constraint terms, dense (n, n)."""
        if self._A_sp is not None:
            W = self._A_sp.multiply(weights[:, None])
            return (self._A_sp.T @ W).toarray()
        return (self.A * weights[:, None]).T @ self.A

    def obj(self, y):
        return _lse_single(self.A0, self.b0, y)


def _psi(st: _Stacked, t: float, y: np.ndarray):
    """Barrier merit t*F0 - sum log(-F); None if infeasible or non-finite."""
    F0, _ = st.obj(y)
    F, _ = st.con_values(y)
    if not np.isfinite(F0) or not np.all(np.isfinite(F)):
        return None
    if F.size and F.max() >= 0.0:
        return None
    return t * F0 - (np.log(-F).sum() if F.size else 0.0)


def _solve_sym(H: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    scale = max(1.0, float(np.abs(np.diag(H)).max(initial=0.0)))
    for ridge in (0.0, 1e-12, 1e-9, 1e-6, 1e-3):
        try:
            d = np.linalg.solve(H + ridge * scale * np.eye(H.shape[0]), rhs)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(d)):
            return d
    return None


def _newton(st: _Stacked, t: float, y: np.ndarray, budget: int, newton_tol: float,
            early: Optional[Callable[[np.ndarray], bool]] = None):
    """Damped Newton descent on the barrier merit.

    Returns ``(y, steps, flag)`` with flag in {'converged', 'early', 'budget',
    'stall', 'numfail'}.
    """
    steps = 0
    while steps < min(budget, _INNER_CAP):
        F, w = st.con_values(y)
        F0, w0 = st.obj(y)
        if not np.isfinite(F0) or not np.all(np.isfinite(F)):
            return y, steps, "numfail"
        if F.size and F.max() >= 0.0:
            return y, steps, "numfail"
        g0 = st.A0.T @ w0
        H = t * (st.A0.T @ (w0[:, None] * st.A0) - np.outer(g0, g0))
        grad = t * g0
        if st.m:
            c1 = -1.0 / F
            G = st.con_grads(w)
            grad = grad + G.T @ c1
            H = H + st.term_quad(w * c1[st.row])
            H = H + (G * (c1 * c1 - c1)[:, None]).T @ G
        delta = _solve_sym(H, -grad)
        if delta is None:
            return y, steps, "numfail"
        lam2 = float(-grad @ delta)
        if lam2 <= 2.0 * newton_tol:
            return y, steps, "converged"

        # keep iterates inside the log-domain box
        alpha = 1.0
        big = np.abs(delta) > 1e-12
        if np.any(big):
            room = (_YBOX * np.sign(delta[big]) - y[big]) / delta[big]
            room = room[room > 0]
            if room.size:
                alpha = min(1.0, 0.999 * float(room.min()))
        if alpha <= _MIN_STEP:
            return y, steps, "stall"

        psi0 = t * F0 - (np.log(-F).sum() if st.m else 0.0)
        gTd = float(grad @ delta)
        while alpha > _MIN_STEP:
            cand = _psi(st, t, y + alpha * delta)
            if cand is not None and cand <= psi0 + _ARMIJO * alpha * gTd:
                break
            alpha *= _BACKTRACK
        else:
            return y, steps, "stall"
        y = y + alpha * delta
        steps += 1
        if early is not None and early(y):
            return y, steps, "early"
    if steps >= budget:
        return y, steps, "budget"
    return y, steps, "inner_cap"


def _barrier(st: _Stacked, y: np.ndarray, opts: SolverOptions, budget: int,
             gap_target: float, early=None, t_init: Optional[float] = None):
    """Outer barrier loop; returns (y, t, steps_used, flag).

    Intermediate centering rounds run at a loose Newton tolerance; only the
    final round (the one that meets ``gap_target``) is solved tightly.
    """
    t = opts.t_init if t_init is None else max(t_init, opts.t_init)
    used = 0
    while True:
        final = st.m == 0 or st.m / t <= gap_target
        tol = opts.newton_tol if final else max(opts.newton_tol, 1e-5)
        y, k, flag = _newton(st, t, y, budget - used, tol, early)
        used += k
        if flag in ("numfail", "stall", "early", "budget"):
            return y, t, used, flag
        if final:
            return y, t, used, "converged"
        if used >= budget:
            return y, t, used, "budget"
        t *= opts.mu


def _pd_residuals(st: _Stacked, y, lam, t):
    F, w = st.con_values(y)
    F0, w0 = st.obj(y)
    if not (np.isfinite(F0) and np.all(np.isfinite(F))):
        return None
    g0 = st.A0.T @ w0
    G = st.con_grads(w)
    r_dual = g0 + G.T @ lam
    r_cent = -(lam * F) - 1.0 / t
    return F, w, w0, g0, G, r_dual, r_cent


def _refine(st: _Stacked, y: np.ndarray, lam: np.ndarray, opts: SolverOptions,
            budget: int):
    """Primal-dual Newton finish from a near-central barrier point.

    The pure primal barrier cannot certify tight KKT residuals: weakly active
    constraints keep moderate slacks at any float64-safe barrier weight, and
    the primal Hessian's conditioning grows like t**2.  Newton steps on the
    primal-dual system (stationarity plus relaxed complementarity
    ``-lam_i F_i = 1/t``) have neither problem and converge to machine
    precision from the barrier's warm start.  Returns (y, lam, steps) or None
    when no trustworthy progress is made.
    """
    if st.m == 0 or lam.size != st.m or lam.min() <= 0.0:
        return None
    mu = 10.0
    n, m = st.n, st.m
    steps = 0
    best = None
    best_score = np.inf

    def result():
        return None if best is None else (best[0], best[1], steps)

    for _ in range(min(budget, 80)):
        F, _ = st.con_values(y)
        if not np.all(np.isfinite(F)) or F.max(initial=-1.0) >= 0:
            return result()
        eta = float(-(lam @ F))
        t = mu * m / max(eta, 1e-300)
        out = _pd_residuals(st, y, lam, t)
        if out is None:
            return result()
        F, w, w0, g0, G, r_dual, r_cent = out
        res_d = np.abs(r_dual).max(initial=0.0)
        comp = np.abs(lam * F).max(initial=0.0)
        score = max(res_d, comp)
        if score < best_score:
            best, best_score = (y.copy(), lam.copy()), score
        if res_d <= 1e-12 * (1.0 + np.abs(g0).max()) and eta <= m * 1e-13:
            return y, lam, steps

        H = st.A0.T @ (w0[:, None] * st.A0) - np.outer(g0, g0)
        H = H + st.term_quad(w * lam[st.row])
        H = H - (G * lam[:, None]).T @ G
        K = np.zeros((n + m, n + m))
        K[:n, :n] = H
        K[:n, n:] = G.T
        K[n:, :n] = -lam[:, None] * G
        K[n:, n:] = -np.diag(F)
        rhs = -np.concatenate([r_dual, r_cent])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            return result()
        if not np.all(np.isfinite(sol)):
            return result()
        dy, dlam = sol[:n], sol[n:]

        alpha = 1.0
        neg = dlam < 0
        if np.any(neg):
            alpha = min(alpha, 0.99 * float(np.min(-lam[neg] / dlam[neg])))
        norm0 = np.linalg.norm(np.concatenate([r_dual, r_cent]))
        ok = False
        for _ls in range(40):
            y_n = y + alpha * dy
            lam_n = lam + alpha * dlam
            Fn, _ = st.con_values(y_n)
            if np.all(np.isfinite(Fn)) and Fn.max(initial=-1.0) < 0 and lam_n.min() > 0:
                out_n = _pd_residuals(st, y_n, lam_n, t)
                if out_n is not None:
                    norm_n = np.linalg.norm(np.concatenate([out_n[5], out_n[6]]))
                    if norm_n <= (1.0 - 0.01 * alpha) * norm0:
                        ok = True
                        break
            alpha *= 0.5
        if not ok:
            return result()
        y, lam = y_n, lam_n
        steps += 1
    return result()


def _phase1(st: _Stacked, y: np.ndarray, opts: SolverOptions, budget: int):
    """Find a strictly feasible point by minimizing the worst constraint slack.

    Works on the extended program over (y, s) with constraints F_i(y) - s <= 0
    and linear objective s, which is the same logsumexp machinery with one
    extra column.  Returns (y_feasible_or_best, steps, max_violation).
    """
    F, _ = st.con_values(y)
    s0 = float(np.max(F)) + 1.0 if np.all(np.isfinite(F)) else 1.0
    yx = np.concatenate([y, [s0]])

    ext_A = np.hstack([st.A, -np.ones((st.A.shape[0], 1))])
    ext_A0 = np.zeros((1, st.n + 1))
    ext_A0[0, st.n] = 1.0
    ext = _Stacked(
        n=st.n + 1, m=st.m, A0=ext_A0, b0=np.zeros(1),
        A=ext_A, b=st.b, starts=st.starts, row=st.row,
    )

    def early(y_ext):
        vals, _ = st.con_values(y_ext[: st.n])
        return bool(np.all(np.isfinite(vals)) and vals.max() <= -1e-6)

    opts1 = SolverOptions(
        feasibility_tol=opts.feasibility_tol, kkt_tol=opts.kkt_tol,
        max_iterations=opts.max_iterations, t_init=opts.t_init, mu=opts.mu,
        gap_tol=min(1e-9, 0.1 * opts.feasibility_tol),
        newton_tol=opts.newton_tol, polish=opts.polish,
    )
    gap_switch = max(1e-6, opts1.gap_tol) if opts.polish else opts1.gap_tol
    yx, t, used, flag = _barrier(ext, yx, opts1, budget, gap_switch, early)
    if flag not in ("early",) and opts.polish and used < budget:
        F_ext, _ = ext.con_values(yx)
        if np.all(np.isfinite(F_ext)) and F_ext.max(initial=-1.0) < 0:
            lam = 1.0 / (t * (-F_ext)) if st.m else np.zeros(0)
            out = _refine(ext, yx, lam, opts1, budget - used)
            if out is not None:
                yx, _, ksteps = out
                used += ksteps
    best = yx[: st.n]
    F, _ = st.con_values(best)
    viol = float(F.max()) if F.size else -np.inf
    return best, used, viol


@dataclass
class _Reduction:
    """Affine substitution eliminating monomial equalities: y = y_p + B z."""

    y_particular: np.ndarray
    basis: Optional[np.ndarray]  # None means identity (no equalities)
    consistent: bool = True

    def lift(self, z: np.ndarray) -> np.ndarray:
        if self.basis is None:
            return z
        return self.y_particular + self.basis @ z

    def project(self, y: np.ndarray) -> np.ndarray:
        if self.basis is None:
            return y
        return self.basis.T @ (y - self.y_particular)

    @property
    def dim(self) -> int:
        if self.basis is None:
            return self.y_particular.shape[0]
        return self.basis.shape[1]


def _reduce(form: ConvexForm) -> tuple[_Stacked, _Reduction]:
    n = form.var_count
    C, e = form.eq_matrix, form.eq_rhs
    if C.shape[0] == 0:
        red = _Reduction(y_particular=np.zeros(n), basis=None)
        st = _Stacked(
            n=n, m=form.constraint_count,
            A0=form.obj_exponents, b0=form.obj_logc,
            A=form.con_exponents, b=form.con_logc,
            starts=form.con_starts, row=form.con_row,
        )
        return st, red
    y_p, *_ = np.linalg.lstsq(C, -e, rcond=None)
    consistent = bool(np.abs(C @ y_p + e).max(initial=0.0) <= 1e-9)
    _, sv, Vt = np.linalg.svd(C)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
    B = Vt[rank:].T  # orthonormal null-space basis, deterministic
    red = _Reduction(y_particular=y_p, basis=B, consistent=consistent)
    st = _Stacked(
        n=B.shape[1], m=form.constraint_count,
        A0=form.obj_exponents @ B, b0=form.obj_logc + form.obj_exponents @ y_p,
        A=form.con_exponents @ B, b=form.con_logc + form.con_exponents @ y_p,
        starts=form.con_starts, row=form.con_row,
    )
    return st, red


def kkt_residual(gp: GpProblem, x: Sequence[float],
                 ineq_multipliers: Sequence[float],
                 eq_multipliers: Optional[Sequence[float]] = None) -> float:
    """Max-norm KKT residual of the log-domain formulation at (x, multipliers).

    Combines stationarity, complementary slackness, primal feasibility of
    inequalities and equalities, and dual feasibility.  When the problem has
    equalities and no equality multipliers are supplied, the best-fitting
    ones (least-squares on stationarity) are used.
    """
    form = to_convex(gp)
    xs = np.asarray(x, dtype=float)
    if xs.shape != (gp.var_count,) or not np.all(xs > 0):
        raise ValueError("x must be a strictly positive vector of length var_count")
    y = np.log(xs)
    lam = np.asarray(ineq_multipliers, dtype=float)
    if lam.shape != (len(gp.ineq_constraints),):
        raise ValueError("one multiplier per inequality constraint required")
    nu = None if eq_multipliers is None else np.asarray(eq_multipliers, dtype=float)
    return _kkt_from_form(form, y, lam, nu)


def _kkt_from_form(form: ConvexForm, y: np.ndarray, lam: np.ndarray,
                   nu: Optional[np.ndarray]) -> float:
    F = form.constraint_values(y)
    G = form.constraint_gradients(y)
    stat = form.objective_gradient(y) + (G.T @ lam if lam.size else 0.0)
    q = form.eq_matrix.shape[0]
    if q:
        if nu is None:
            nu, *_ = np.linalg.lstsq(form.eq_matrix.T, -stat, rcond=None)
        stat = stat + form.eq_matrix.T @ nu
    parts = [np.abs(stat).max(initial=0.0)]
    if lam.size:
        parts.append(np.abs(lam * F).max())
        parts.append(max(0.0, float(F.max())))
        parts.append(max(0.0, float(-lam.min())))
    if q:
        parts.append(np.abs(form.equality_residuals(y)).max())
    return float(max(parts))


@dataclass
class _Prepared:
    """A GP with its log-domain arrays built once, reusable across solves.

    Callers that re-solve structurally identical problems may patch the
    ``form``/``st`` coefficient arrays in place between solves (they alias
    when there are no equality constraints); ``gp`` itself is only consulted
    for the objective and the variable count.
    """

    gp: GpProblem
    form: ConvexForm
    st: _Stacked
    red: _Reduction


def _prepare(gp: GpProblem) -> _Prepared:
    form = to_convex(gp)
    st, red = _reduce(form)
    return _Prepared(gp=gp, form=form, st=st, red=red)


def solve(gp: GpProblem, opts: Optional[SolverOptions] = None,
          initial_point: Optional[Sequence[float]] = None) -> GpSolution:
    """Solve a standard-form GP.

    ``initial_point`` is an optional strictly positive primal point; when it
    is strictly feasible the feasibility phase is skipped entirely.
    """
    return _solve_prepared(_prepare(gp), opts or SolverOptions(),
                           initial_point=initial_point)


def _solve_prepared(prep: _Prepared, opts: SolverOptions,
                    initial_point: Optional[Sequence[float]] = None,
                    t_init_hint: Optional[float] = None) -> GpSolution:
    gp, form, st, red = prep.gp, prep.form, prep.st, prep.red

    if not red.consistent:
        x = np.exp(np.clip(red.lift(np.zeros(red.dim)), -_YBOX, _YBOX))
        return _finish(gp, form, x, np.zeros(st.m), GpStatus.INFEASIBLE, 0, opts)

    if initial_point is not None:
        x0 = np.asarray(initial_point, dtype=float)
        if x0.shape != (gp.var_count,) or not np.all(x0 > 0):
            raise ValueError("initial_point must be strictly positive, length var_count")
        z = red.project(np.log(x0))
    else:
        z = np.zeros(red.dim)

    budget = opts.max_iterations
    used = 0

    F, _ = st.con_values(z)
    feasible_start = bool(st.m == 0 or (np.all(np.isfinite(F)) and F.max() < 0.0))
    if not feasible_start:
        t_init_hint = None
        z, k, viol = _phase1(st, z, opts, budget)
        used += k
        ftol_log = np.log1p(opts.feasibility_tol)
        if viol > ftol_log:
            x = np.exp(np.clip(red.lift(z), -_YBOX, _YBOX))
            return _finish(gp, form, x, np.zeros(st.m),
                           GpStatus.INFEASIBLE, used, opts)
        if viol >= 0.0:
            # feasible within tolerance but with (numerically) empty interior:
            # open the tight constraints just enough to admit a barrier path.
            F, _ = st.con_values(z)
            shifts = np.maximum(F, 0.0) + 1e-12
            st = _Stacked(n=st.n, m=st.m, A0=st.A0, b0=st.b0, A=st.A,
                          b=st.b - shifts[st.row], starts=st.starts, row=st.row)

    gap_switch = max(1e-6, opts.gap_tol) if opts.polish else opts.gap_tol
    z, t, k, flag = _barrier(st, z, opts, budget - used, gap_switch,
                             t_init=t_init_hint)
    used += k

    numfail = flag == "numfail"
    F, _ = st.con_values(z)
    if st.m and np.all(np.isfinite(F)) and F.max() < 0:
        lam = 1.0 / (t * (-F))
    else:
        lam = np.zeros(st.m)

    if opts.polish and not numfail and st.m and budget - used >= 5:
        out = _refine(st, z, lam, opts, budget - used)
        if out is not None:
            z, lam, ksteps = out
            used += ksteps
        elif flag == "converged":
            # refinement unusable; push the barrier the rest of the way instead
            while st.m / t > opts.gap_tol and used < budget:
                t *= opts.mu
                z, k, flag = _newton(st, t, z, budget - used, opts.newton_tol)
                used += k
                if flag in ("numfail", "stall"):
                    numfail = numfail or flag == "numfail"
                    break
            F, _ = st.con_values(z)
            if np.all(np.isfinite(F)) and st.m and F.max() < 0:
                lam = 1.0 / (t * (-F))

    y_full = red.lift(z)
    if not np.all(np.isfinite(y_full)):
        y_full = np.clip(np.nan_to_num(y_full, nan=0.0, posinf=_YBOX, neginf=-_YBOX),
                         -_YBOX, _YBOX)
        numfail = True
    x = np.exp(y_full)
    status = None
    if numfail:
        status = GpStatus.NUMERICAL_FAILURE
    return _finish(gp, form, x, lam, status, used, opts)


def _finish(gp, form, x, lam, forced_status, iterations, opts):
    y = np.log(x)
    F = form.constraint_values(y)
    q = form.eq_matrix.shape[0]
    if q:
        G = form.constraint_gradients(y)
        stat = form.objective_gradient(y) + (G.T @ lam if lam.size else 0.0)
        nu, *_ = np.linalg.lstsq(form.eq_matrix.T, -stat, rcond=None)
    else:
        nu = np.zeros(0)
    try:
        res = _kkt_from_form(form, y, lam, nu)
    except (ValueError, np.linalg.LinAlgError):
        res = np.inf
    obj = posy_eval(gp.objective, x)
    status = forced_status
    if status is None:
        feas_ok = (F.size == 0) or (F.max() <= np.log1p(opts.feasibility_tol))
        eq_ok = q == 0 or np.abs(form.equality_residuals(y)).max() <= opts.feasibility_tol
        if feas_ok and eq_ok and res <= opts.kkt_tol and np.isfinite(obj):
            status = GpStatus.OPTIMAL
        else:
            status = GpStatus.MAX_ITERATIONS
    return GpSolution(
        x=x, objective_value=float(obj), status=status,
        kkt_residual=float(res), iterations=int(iterations),
        ineq_multipliers=np.asarray(lam, dtype=float),
        eq_multipliers=np.asarray(nu, dtype=float),
    )
