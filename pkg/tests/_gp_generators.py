"""Random GP instances and the independent grid reference used to check them."""

import numpy as np

from powergp.posynomial import Monomial, Posynomial, posy_eval
from powergp.gp import GpProblem

BOX_LO, BOX_HI = 0.2, 5.0


def random_gp2(rng) -> GpProblem:
    """Random bounded two-variable GP whose geometric midpoint is feasible."""
    def random_posy(n_terms):
        terms = []
        for _ in range(n_terms):
            exps = {v: float(rng.uniform(-2, 2)) for v in range(2)}
            terms.append(Monomial(float(rng.uniform(0.2, 3.0)), exps))
        return Posynomial(tuple(terms))

    objective = random_posy(int(rng.integers(1, 4)))
    mid = np.sqrt(BOX_LO * BOX_HI) * np.ones(2)
    cons = []
    for _ in range(int(rng.integers(1, 3))):
        p = random_posy(int(rng.integers(1, 4)))
        scale = 2.0 * posy_eval(p, mid)  # midpoint feasible with 2x slack
        cons.append(Posynomial(tuple(
            Monomial(t.coefficient / scale, dict(t.exponents)) for t in p.terms)))
    for v in range(2):
        cons.append(Posynomial((Monomial(BOX_LO, {v: -1.0}),)))
        cons.append(Posynomial((Monomial(1.0 / BOX_HI, {v: 1.0}),)))
    return GpProblem(objective=objective, ineq_constraints=tuple(cons), var_count=2)


def grid_reference(gp: GpProblem, center: np.ndarray, span: float,
                   points: int = 400) -> float:
    """Best feasible objective on a log-space grid around ``center``.

    Independent of the solver: plain evaluation of the posynomials on every
    grid point, keeping only those with all constraints <= 1.
    """
    axes = [np.exp(np.linspace(np.log(center[v]) - span, np.log(center[v]) + span,
                               points)) for v in range(2)]
    xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    pts = np.clip(pts, BOX_LO, BOX_HI)

    def eval_posy_batch(p):
        total = np.zeros(pts.shape[0])
        for t in p.terms:
            term = np.full(pts.shape[0], t.coefficient)
            for v, e in t.exponents.items():
                term = term * pts[:, v] ** e
            total += term
        return total

    feasible = np.ones(pts.shape[0], dtype=bool)
    for c in gp.ineq_constraints:
        feasible &= eval_posy_batch(c) <= 1.0
    vals = eval_posy_batch(gp.objective)
    vals[~feasible] = np.inf
    return float(vals.min())
