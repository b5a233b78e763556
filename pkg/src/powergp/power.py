"""Weighted-sum-rate power control by successive geometric programming.

The network model: ``N`` transmit/receive pairs with linear gain matrix
``G`` (``G[i, j]`` is the gain from transmitter ``i`` to receiver ``j``),
per-receiver noise ``n`` and transmit powers ``p`` bounded per link.  The
SINR of link ``i`` is::

    sinr_i(p) = p_i G_ii / (n_i + sum_{j != i} p_j G_ji)

and the link rate is ``a * log2(1 + b * sinr_i)`` with constants
``a, b in (0, 1]`` (``a = b = 1`` gives Shannon capacity).  Maximizing the
weighted sum of rates subject to power bounds and SINR floors is non-convex;
after introducing auxiliaries ``s`` (SINR surrogates) and ``r`` (the weighted
product ``prod (1+s_i)^{w_i}``) it becomes a geometric program except for the
single constraint ``r <= prod (1+s_i)^{w_i}``.  Each outer iteration replaces
that product with a monomial under-estimator tangent at the current SINR
point (see :func:`condense_factorwise`), solves the resulting GP, and
re-expands at the new operating point until the power vector stops moving.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .gp import (
    GpProblem,
    GpSolution,
    GpStatus,
    SolverOptions,
    _prepare,
    _solve_prepared,
    solve,
)
from .posynomial import (
    DEFAULT_TERM_CAP,
    Monomial,
    Posynomial,
    PosynomialError,
    mono_eval,
    posy_eval,
    posy_mul,
)

# Expansion points below this are floored before condensing; the closed form
# needs s0 > 0 while d -> 0 is perfectly well behaved.
SINR_FLOOR = 1e-12

# Off-diagonal gains of exactly zero are floored so every SINR constraint
# stays a genuine posynomial; 1e-30 is far below thermal noise in any unit
# system this model is used with.
GAIN_FLOOR = 1e-30

# Links driven to twice their minimum power or less count as muted.
MUTED_FACTOR = 2.0


class PowerControlError(Exception):
    """Base class for power-control failures."""


class InfeasibleError(PowerControlError):
    """No power vector satisfies bounds and SINR floors."""


class InfeasibleInitialError(PowerControlError):
    """The supplied starting point violates bounds or SINR floors."""


class SolverFailureError(PowerControlError):
    """A GP subproblem failed; carries the partial trajectory."""

    def __init__(self, message: str, report: "ScaReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class PowerControlProblem:
    """Immutable problem data for one interference network.

    ``gains[i, j]`` is the linear channel gain from transmitter ``i`` to
    receiver ``j``; diagonal entries are the serving links.  ``gamma_min``
    holds linear SINR floors (0 disables the floor for that link).
    """

    gains: np.ndarray
    noise_w: np.ndarray
    weights: np.ndarray
    p_min_w: np.ndarray
    p_max_w: np.ndarray
    gamma_min: np.ndarray
    rate_a: float = 1.0
    rate_b: float = 1.0

    def __post_init__(self):
        g = np.array(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gains must be a square matrix")
        n_links = g.shape[0]
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("gains must be finite and non-negative")
        if np.any(np.diag(g) <= 0):
            raise ValueError("serving gains (diagonal) must be strictly positive")
        off = ~np.eye(n_links, dtype=bool)
        g[off] = np.maximum(g[off], GAIN_FLOOR)

        def vec(name, value, positive=False, nonneg=False):
            v = np.array(value, dtype=float)
            if v.shape != (n_links,):
                raise ValueError(f"{name} must have length {n_links}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            if positive and np.any(v <= 0):
                raise ValueError(f"{name} must be strictly positive")
            if nonneg and np.any(v < 0):
                raise ValueError(f"{name} must be non-negative")
            return v

        noise = vec("noise_w", self.noise_w, positive=True)
        w = vec("weights", self.weights, nonneg=True)
        if not np.any(w > 0):
            raise ValueError("weights need at least one positive entry")
        p_min = vec("p_min_w", self.p_min_w, positive=True)
        p_max = vec("p_max_w", self.p_max_w, positive=True)
        if np.any(p_min > p_max):
            raise ValueError("p_min_w must not exceed p_max_w")
        gmin = vec("gamma_min", self.gamma_min, nonneg=True)
        if not (0 < self.rate_a <= 1 and 0 < self.rate_b <= 1):
            raise ValueError("rate_a and rate_b must lie in (0, 1]")

        for name, arr in (("gains", g), ("noise_w", noise), ("weights", w),
                          ("p_min_w", p_min), ("p_max_w", p_max),
                          ("gamma_min", gmin)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "rate_a", float(self.rate_a))
        object.__setattr__(self, "rate_b", float(self.rate_b))

    @property
    def n_links(self) -> int:
        return self.gains.shape[0]


@dataclass(frozen=True)
class CondensedMonomial:
    """Monomial under-estimator ``c * prod s_i**d_i`` of the weighted rate product.

    Exactly ``N + 1`` stored quantities: one coefficient plus one exponent
    per link (``d_i`` already includes the link weight).
    """

    coefficient: float
    exponents: np.ndarray

    def __post_init__(self):
        e = np.array(self.exponents, dtype=float)
        e.flags.writeable = False
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    def evaluate(self, s: Sequence[float]) -> float:
        s = np.asarray(s, dtype=float)
        return float(self.coefficient * np.exp(np.sum(self.exponents * np.log(s))))


@dataclass(frozen=True)
class ScaReport:
    """Outcome of one successive-approximation run."""

    p_star: np.ndarray
    trajectory: tuple[tuple[np.ndarray, float], ...]
    converged: bool
    iterations: int


@dataclass(frozen=True)
class StandardForm:
    """A power-control GP plus the variable layout used to build it."""

    gp: GpProblem
    power_vars: np.ndarray   # ids of p_1..p_N
    aux_vars: np.ndarray     # ids of s_1..s_N
    r_var: int

    def power_from(self, x: Sequence[float]) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.power_vars]

    def aux_from(self, x: Sequence[float]) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.aux_vars]


# ---------------------------------------------------------------------------
# rate model
# ---------------------------------------------------------------------------


def sinr(prob: PowerControlProblem, p: Sequence[float]) -> np.ndarray:
    """Per-link SINR at transmit powers ``p`` (pure evaluation, no bound check)."""
    pv = _check_powers(prob, p)
    received = prob.gains.T @ pv
    own = pv * np.diag(prob.gains)
    return own / (prob.noise_w + received - own)


def sinr_batch(prob: PowerControlProblem, p_batch: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sinr` over rows of ``p_batch`` (shape ``(M, N)``)."""
    pb = np.asarray(p_batch, dtype=float)
    received = pb @ prob.gains
    own = pb * np.diag(prob.gains)
    return own / (prob.noise_w + received - own)


def rates(prob: PowerControlProblem, p: Sequence[float]) -> np.ndarray:
    """Link rates ``a * log2(1 + b * sinr)`` in bit/s/Hz."""
    return prob.rate_a * np.log2(1.0 + prob.rate_b * sinr(prob, p))


def weighted_sum_rate(prob: PowerControlProblem, p: Sequence[float]) -> float:
    return float(prob.weights @ rates(prob, p))


def weighted_sum_rate_batch(prob: PowerControlProblem, p_batch: np.ndarray) -> np.ndarray:
    g = sinr_batch(prob, p_batch)
    return (prob.rate_a * np.log2(1.0 + prob.rate_b * g)) @ prob.weights


def muted_links(prob: PowerControlProblem, p: Sequence[float]) -> np.ndarray:
    """Links driven (essentially) to minimum power to protect the others."""
    return np.asarray(p, dtype=float) <= MUTED_FACTOR * prob.p_min_w


def _check_powers(prob: PowerControlProblem, p) -> np.ndarray:
    pv = np.asarray(p, dtype=float)
    if pv.shape != (prob.n_links,):
        raise ValueError(f"power vector must have length {prob.n_links}")
    if not np.all(pv > 0):
        raise ValueError("powers must be strictly positive")
    return pv


# ---------------------------------------------------------------------------
# condensation
# ---------------------------------------------------------------------------


def condense_factorwise(s0: Sequence[float], w: Sequence[float],
                        floor: float = SINR_FLOOR) -> CondensedMonomial:
    """Monomial under-estimator of ``prod (1+s_i)^{w_i}`` tangent at ``s0``.

    Each factor ``1 + s_i`` is independently replaced by ``c_i s_i^{d_i}``
    with ``d_i = s0_i/(1+s0_i)`` and ``c_i = (1+s0_i) s0_i^{-d_i}``, which
    matches value and gradient at ``s0_i`` and never exceeds the factor.
    Aggregation over links costs N + 1 quantities, independent of how many
    monomial terms the expanded product would have.
    """
    s0 = np.asarray(s0, dtype=float)
    w = np.asarray(w, dtype=float)
    if s0.shape != w.shape or s0.ndim != 1:
        raise ValueError("s0 and w must be 1-d vectors of equal length")
    if np.any(s0 <= 0) or not np.all(np.isfinite(s0)):
        raise PosynomialError("expansion point must be strictly positive")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    s = np.maximum(s0, floor)
    d = s / (1.0 + s)
    log_c = np.sum(w * (np.log1p(s) - d * np.log(s)))
    return CondensedMonomial(coefficient=float(np.exp(log_c)), exponents=w * d)


def condense_agm(g: Posynomial, x0: Sequence[float]) -> Monomial:
    """Classic monomial condensation of a posynomial via the AM-GM inequality.

    With weights ``alpha_i = u_i(x0) / g(x0)`` the monomial
    ``prod (u_i(x)/alpha_i)**alpha_i`` matches ``g`` in value and gradient at
    ``x0`` and under-estimates it everywhere.  The number of weights equals
    the number of terms of ``g``.
    """
    x0 = np.asarray(x0, dtype=float)
    total = posy_eval(g, x0)
    log_coeff = 0.0
    exps: dict[int, float] = {}
    for term in g.terms:
        alpha = mono_eval(term, x0) / total
        if alpha <= 0.0:
            continue  # zero-weight factor drops out (limit convention)
        log_coeff += alpha * (np.log(term.coefficient) - np.log(alpha))
        for var, e in term.exponents.items():
            exps[var] = exps.get(var, 0.0) + alpha * e
    return Monomial(float(np.exp(log_coeff)), exps)


def rate_product_posynomial(n_links: int,
                            term_cap: int = DEFAULT_TERM_CAP) -> Posynomial:
    """Fully expanded ``prod_{i<n} (1 + s_i)``: 2**n monomial terms.

    This is the object the AM-GM condensation has to weight term by term;
    expanding it is what makes that route collapse on larger networks, and
    the term cap turns the collapse into a :class:`TermLimitError`.
    """
    out = Posynomial((Monomial(1.0, {}),))
    for i in range(n_links):
        factor = Posynomial((Monomial(1.0, {}), Monomial(1.0, {i: 1.0})))
        out = posy_mul(out, factor, term_cap=term_cap)
    return out


# ---------------------------------------------------------------------------
# GP assembly
# ---------------------------------------------------------------------------


def build_standard_form(prob: PowerControlProblem,
                        condensed: CondensedMonomial) -> StandardForm:
    """Assemble the GP over ``(p_1..p_N, s_1..s_N, r)``.

    Minimizes ``1/r`` subject to:

    * ``r / ghat(s) <= 1`` with ``ghat`` the condensed monomial,
    * ``s_i <= sinr_i(p)`` written as a posynomial row per link,
    * ``gamma_min_i / s_i <= 1`` for links with an SINR floor,
    * box rows ``p_min_i / p_i <= 1`` and ``p_i / p_max_i <= 1``.
    """
    n = prob.n_links
    if condensed.exponents.shape != (n,):
        raise ValueError("condensed monomial does not match the problem size")
    p_ids = np.arange(n)
    s_ids = np.arange(n, 2 * n)
    r_id = 2 * n

    cons: list[Posynomial] = []

    exps = {int(r_id): 1.0}
    for i in range(n):
        if condensed.exponents[i] != 0.0:
            exps[int(s_ids[i])] = -float(condensed.exponents[i])
    cons.append(Posynomial((Monomial(1.0 / condensed.coefficient, exps),)))

    diag = np.diag(prob.gains)
    for i in range(n):
        terms = [Monomial(prob.noise_w[i] / diag[i],
                          {int(s_ids[i]): 1.0, int(p_ids[i]): -1.0})]
        for j in range(n):
            if j == i:
                continue
            terms.append(Monomial(prob.gains[j, i] / diag[i],
                                  {int(s_ids[i]): 1.0, int(p_ids[i]): -1.0,
                                   int(p_ids[j]): 1.0}))
        cons.append(Posynomial(tuple(terms)))

    for i in range(n):
        if prob.gamma_min[i] > 0:
            cons.append(Posynomial((Monomial(prob.gamma_min[i],
                                             {int(s_ids[i]): -1.0}),)))

    for i in range(n):
        cons.append(Posynomial((Monomial(prob.p_min_w[i], {int(p_ids[i]): -1.0}),)))
    for i in range(n):
        cons.append(Posynomial((Monomial(1.0 / prob.p_max_w[i], {int(p_ids[i]): 1.0}),)))

    gp = GpProblem(
        objective=Posynomial((Monomial(1.0, {int(r_id): -1.0}),)),
        ineq_constraints=tuple(cons),
        mono_eq_constraints=(),
        var_count=2 * n + 1,
    )
    return StandardForm(gp=gp, power_vars=p_ids, aux_vars=s_ids, r_var=r_id)


# ---------------------------------------------------------------------------
# feasibility and the successive-approximation loop
# ---------------------------------------------------------------------------


def _within_bounds(prob, p, tol) -> bool:
    return bool(np.all(p >= prob.p_min_w * (1 - tol))
                and np.all(p <= prob.p_max_w * (1 + tol)))


def _meets_qos(prob, p, tol) -> bool:
    if not np.any(prob.gamma_min > 0):
        return True
    g = sinr(prob, p)
    need = prob.gamma_min > 0
    return bool(np.all(g[need] >= prob.gamma_min[need] * (1 - tol)))


def feasible_init(prob: PowerControlProblem,
                  candidate: Optional[Sequence[float]] = None,
                  opts: Optional[SolverOptions] = None) -> np.ndarray:
    """Return a power vector satisfying bounds and SINR floors.

    A feasible ``candidate`` is returned unchanged.  Without floors the
    answer is simply ``p_max``.  With floors, a helper GP minimizes a common
    slack ``t`` subject to ``sinr_i(p) >= gamma_min_i / t``; the floors are
    satisfiable iff the optimal slack is <= 1 (up to the feasibility
    tolerance).  Raises :class:`InfeasibleError` otherwise.
    """
    opts = opts or SolverOptions()
    tol = opts.feasibility_tol
    if candidate is not None:
        cand = _check_powers(prob, candidate)
        if _within_bounds(prob, cand, tol) and _meets_qos(prob, cand, tol):
            return cand.copy()
    if not np.any(prob.gamma_min > 0):
        return prob.p_max_w.copy()

    n = prob.n_links
    t_id = n
    diag = np.diag(prob.gains)
    cons: list[Posynomial] = []
    for i in range(n):
        if prob.gamma_min[i] <= 0:
            continue
        scale = prob.gamma_min[i] / diag[i]
        terms = [Monomial(scale * prob.noise_w[i], {t_id: -1.0, i: -1.0})]
        for j in range(n):
            if j == i:
                continue
            terms.append(Monomial(scale * prob.gains[j, i],
                                  {t_id: -1.0, i: -1.0, j: 1.0}))
        cons.append(Posynomial(tuple(terms)))
    for i in range(n):
        cons.append(Posynomial((Monomial(prob.p_min_w[i], {i: -1.0}),)))
        cons.append(Posynomial((Monomial(1.0 / prob.p_max_w[i], {i: 1.0}),)))
    cons.append(Posynomial((Monomial(1e-3, {t_id: -1.0}),)))  # keeps t bounded below

    gp = GpProblem(
        objective=Posynomial((Monomial(1.0, {t_id: 1.0}),)),
        ineq_constraints=tuple(cons),
        var_count=n + 1,
    )
    p0 = np.sqrt(prob.p_min_w * prob.p_max_w)
    g0 = sinr(prob, p0)
    t0 = 2.0 * float(np.max(prob.gamma_min / np.maximum(g0, 1e-300))) + 1.0
    sol = solve(gp, opts, initial_point=np.concatenate([p0, [t0]]))
    t_star = float(sol.x[t_id])
    if sol.status not in (GpStatus.OPTIMAL,) or t_star > 1.0 + tol:
        raise InfeasibleError(
            f"SINR floors unreachable: best common slack {t_star:.6g} "
            f"(status {sol.status.value})"
        )
    return np.clip(sol.x[:n], prob.p_min_w, prob.p_max_w)


def _sinr_floor_vector(prob: PowerControlProblem) -> np.ndarray:
    """Worst-case SINR per link (own power at minimum, everyone else at maximum)."""
    inter = prob.gains.T @ prob.p_max_w - np.diag(prob.gains) * prob.p_max_w
    return prob.p_min_w * np.diag(prob.gains) / (prob.noise_w + inter)


def _solver_problem(prob: PowerControlProblem) -> PowerControlProblem:
    """Problem copy whose SINR floors are shaped for the barrier solver.

    Stated floors are relaxed by a hair (1e-10 relative) so operating points
    sitting exactly on a floor still admit an interior; all remaining links
    get a floor just below their worst-case SINR, which never excludes a
    feasible power vector but keeps every auxiliary variable boxed.
    """
    floor = _sinr_floor_vector(prob) * (1.0 - 1e-6)
    eff = np.maximum(prob.gamma_min * (1.0 - 1e-10), floor)
    return replace(prob, gamma_min=eff)


def _interior_point(prob_eff: PowerControlProblem, sf: StandardForm,
                    p: np.ndarray, condensed: CondensedMonomial,
                    bound_margin: float = 1e-9,
                    sinr_margin: float = 1e-6) -> np.ndarray:
    """Strictly feasible GP point built from a power vector, or best effort.

    The margins trade closeness to ``p`` against how wall-hugging (and hence
    barrier-hostile) the start is; callers relax them when no exact SINR
    floor forces the start onto a constraint boundary.
    """
    p_c = np.clip(p, prob_eff.p_min_w * (1 + bound_margin),
                  prob_eff.p_max_w * (1 - bound_margin))
    g = sinr(prob_eff, p_c)
    lo = prob_eff.gamma_min
    s = np.maximum(g * (1 - sinr_margin), np.sqrt(np.maximum(lo, 1e-300) * g))
    s = np.minimum(s, g * (1 - 1e-12))
    r = condensed.evaluate(s) * (1 - sinr_margin)
    x0 = np.empty(2 * prob_eff.n_links + 1)
    x0[sf.power_vars] = p_c
    x0[sf.aux_vars] = s
    x0[sf.r_var] = r
    return x0


def sca_solve(prob: PowerControlProblem, p_init: Sequence[float],
              eps: float = 1e-6, opts: Optional[SolverOptions] = None,
              max_sca_iterations: int = 50) -> ScaReport:
    """Iterate condense / solve / re-expand from a feasible starting point.

    Each round condenses the rate product at the current SINRs, solves the
    resulting GP and moves to its power allocation; the weighted sum rate is
    non-decreasing along the way because the surrogate is tight at the
    expansion point and valid everywhere below the true product.  Stops when
    the Euclidean move of the power vector drops under ``eps`` (watts).
    """
    opts = opts or SolverOptions()
    p = _check_powers(prob, p_init)
    if not _within_bounds(prob, p, opts.feasibility_tol):
        raise InfeasibleInitialError("p_init violates the power bounds")
    if not _meets_qos(prob, p, opts.feasibility_tol):
        raise InfeasibleInitialError("p_init violates the SINR floors")

    prob_eff = _solver_problem(prob)
    trajectory: list[tuple[np.ndarray, float]] = [(p.copy(), weighted_sum_rate(prob, p))]
    converged = False
    sf = None
    prep = None
    delta_log = np.inf
    # exact SINR floors pin the start onto constraint boundaries, which rules
    # out the roomier interior margins and the warm barrier weight
    has_qos = bool(np.any(prob.gamma_min > 0))
    bound_margin, sinr_margin = (1e-9, 1e-6) if has_qos else (1e-4, 1e-3)
    for _ in range(max_sca_iterations):
        s0 = np.maximum(sinr(prob, p), SINR_FLOOR)
        condensed = condense_factorwise(s0, prob.weights)
        if sf is None:
            sf = build_standard_form(prob_eff, condensed)
            prep = _prepare(sf.gp)
        else:
            _patch_condensed_row(prep, sf, condensed)
        x0 = _interior_point(prob_eff, sf, p, condensed, bound_margin, sinr_margin)
        hint = 1e4 if (not has_qos and delta_log <= 0.05) else None
        sol = _solve_prepared(prep, opts, initial_point=x0, t_init_hint=hint)
        if sol.status != GpStatus.OPTIMAL:
            report = ScaReport(p_star=p, trajectory=tuple(trajectory),
                               converged=False, iterations=len(trajectory) - 1)
            raise SolverFailureError(
                f"GP subproblem ended with status {sol.status.value}", report)
        p_new = sf.power_from(sol.x)
        trajectory.append((p_new, weighted_sum_rate(prob, p_new)))
        delta = float(np.linalg.norm(p_new - p))
        delta_log = float(np.abs(np.log(p_new / p)).max())
        p = p_new
        if delta < eps:
            converged = True
            break
    return ScaReport(p_star=p, trajectory=tuple(trajectory),
                     converged=converged, iterations=len(trajectory) - 1)


def _patch_condensed_row(prep, sf: StandardForm, condensed: CondensedMonomial) -> None:
    """Rewrite the condensed constraint's coefficients in a prepared GP.

    Between successive approximations only this one row changes, and for the
    equality-free power GP the prepared solver arrays alias the convex form,
    so updating the form updates the solver's view too.
    """
    assert prep.red.basis is None
    row = prep.form.con_exponents[0]
    row[:] = 0.0
    row[sf.r_var] = 1.0
    row[sf.aux_vars] = -condensed.exponents
    prep.form.con_logc[0] = -np.log(condensed.coefficient)
    prep.st.refresh()
