"""Monomial and posynomial algebra over strictly positive variables.

Variables are dense integer ids, normally handed out by a
:class:`VariableRegistry` owned by whoever builds a problem.  All values are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

# posy_mul refuses products whose expansion would exceed this many terms
# unless the caller raises the cap explicitly.
DEFAULT_TERM_CAP = 1 << 20


class PosynomialError(ValueError):
    """Invalid construction or evaluation of a monomial/posynomial."""


class TermLimitError(PosynomialError):
    """A product would exceed the configured term cap."""

    def __init__(self, needed: int, cap: int):
        super().__init__(f"product would create {needed} terms, cap is {cap}")
        self.needed = needed
        self.cap = cap


@dataclass(frozen=True, eq=True)
class Monomial:
    """``c * prod_i x_i**d_i`` with ``c > 0``.

    Zero exponents are dropped on construction, so the stored mapping is
    canonical and two monomials compare equal iff coefficient and exponent
    map match exactly.
    """

    coefficient: float
    exponents: Mapping[int, float]

    def __post_init__(self):
        c = float(self.coefficient)
        if not np.isfinite(c) or c <= 0.0:
            raise PosynomialError(
                f"monomial coefficient must be positive and finite, got {c!r}"
            )
        clean: dict[int, float] = {}
        for var, exp in self.exponents.items():
            v = int(var)
            e = float(exp)
            if v < 0:
                raise PosynomialError(f"variable id must be non-negative, got {v}")
            if not np.isfinite(e):
                raise PosynomialError(f"exponent of variable {v} is not finite")
            if e != 0.0:
                clean[v] = e
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "exponents", MappingProxyType(clean))

    def max_var(self) -> int:
        """Largest variable id referenced, or -1 for a constant."""
        return max(self.exponents, default=-1)

    def key(self) -> tuple:
        """Canonical hashable exponent signature, used for like-term merging."""
        return tuple(sorted(self.exponents.items()))


@dataclass(frozen=True, eq=True)
class Posynomial:
    """Non-empty sum of monomials over one shared variable namespace."""

    terms: tuple[Monomial, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise PosynomialError("a posynomial needs at least one term")
        for t in terms:
            if not isinstance(t, Monomial):
                raise PosynomialError(f"posynomial term is not a Monomial: {t!r}")
        object.__setattr__(self, "terms", terms)

    def max_var(self) -> int:
        return max(t.max_var() for t in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


class VariableRegistry:
    """Hands out dense integer variable ids keyed by name, in first-use order."""

    def __init__(self):
        self._by_name: dict = {}
        self._names: list = []

    def var(self, name) -> int:
        if name not in self._by_name:
            self._by_name[name] = len(self._names)
            self._names.append(name)
        return self._by_name[name]

    def name_of(self, vid: int):
        return self._names[vid]

    def __len__(self) -> int:
        return len(self._names)


def mono_eval(m: Monomial, x: Sequence[float]) -> float:
    """Evaluate ``c * prod x_i**d_i`` at a strictly positive point.

    Raises :class:`PosynomialError` when a referenced variable is missing
    from ``x`` or has a non-positive entry.
    """
    xs = np.asarray(x, dtype=float)
    value = m.coefficient
    for var, exp in m.exponents.items():
        if var >= xs.shape[0]:
            raise PosynomialError(
                f"variable {var} missing from point of length {xs.shape[0]}"
            )
        base = xs[var]
        if not base > 0.0:
            raise PosynomialError(f"variable {var} must be positive, got {base}")
        value *= base ** exp
    return float(value)


def posy_eval(p: Posynomial, x: Sequence[float]) -> float:
    """Sum of term evaluations; strictly positive for positive ``x``."""
    return float(sum(mono_eval(t, x) for t in p.terms))


def posy_mul(p: Posynomial, q: Posynomial, term_cap: int = DEFAULT_TERM_CAP) -> Posynomial:
    """Distributed product of two posynomials with like-term merging.

    Like terms are merged on exact (bitwise) exponent equality, which is the
    right notion here because exponents come from closed forms rather than
    accumulated arithmetic.  Raises :class:`TermLimitError` before doing any
    work if the un-merged product would exceed ``term_cap`` terms.
    """
    needed = len(p.terms) * len(q.terms)
    if needed > term_cap:
        raise TermLimitError(needed, term_cap)
    acc: dict[tuple, float] = {}
    for a in p.terms:
        for b in q.terms:
            exps = dict(a.exponents)
            for var, e in b.exponents.items():
                s = exps.get(var, 0.0) + e
                if s == 0.0:
                    exps.pop(var, None)
                else:
                    exps[var] = s
            key = tuple(sorted(exps.items()))
            acc[key] = acc.get(key, 0.0) + a.coefficient * b.coefficient
    terms = tuple(
        Monomial(c, dict(key)) for key, c in sorted(acc.items())
    )
    return Posynomial(terms)
