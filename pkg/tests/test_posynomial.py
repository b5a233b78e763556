import numpy as np
import pytest

from powergp.posynomial import (
    Monomial,
    Posynomial,
    PosynomialError,
    TermLimitError,
    VariableRegistry,
    mono_eval,
    posy_eval,
    posy_mul,
)


def m(c, exps):
    return Monomial(c, exps)


class TestMonoEval:
    def test_fractional_exponent(self):
        assert mono_eval(m(2.0, {0: 0.5}), [4.0]) == pytest.approx(4.0)

    def test_constant_term_ignores_point(self):
        assert mono_eval(m(1.0, {}), [7.0, 3.0]) == 1.0

    def test_mixed_exponents(self):
        assert mono_eval(m(3.0, {0: -1.0, 1: 2.0}), [3.0, 2.0]) == pytest.approx(4.0)

    def test_missing_variable(self):
        with pytest.raises(PosynomialError):
            mono_eval(m(1.0, {3: 1.0}), [1.0, 2.0])

    def test_nonpositive_point(self):
        with pytest.raises(PosynomialError):
            mono_eval(m(1.0, {0: 1.0}), [0.0])
        with pytest.raises(PosynomialError):
            mono_eval(m(1.0, {0: 2.0}), [-1.0])

    def test_invalid_coefficient(self):
        with pytest.raises(PosynomialError):
            Monomial(0.0, {})
        with pytest.raises(PosynomialError):
            Monomial(-2.0, {0: 1.0})


class TestPosyEval:
    def test_one_plus_s(self):
        p = Posynomial((m(1.0, {}), m(1.0, {0: 1.0})))
        assert posy_eval(p, [1.0]) == pytest.approx(2.0)
        assert posy_eval(p, [3.0]) == pytest.approx(4.0)

    def test_expanded_product_matches_direct(self):
        one_plus = lambda i: Posynomial((m(1.0, {}), m(1.0, {i: 1.0})))
        prod = posy_mul(one_plus(0), one_plus(1))
        assert posy_eval(prod, [1.0, 1.0]) == pytest.approx(4.0)

    def test_empty_terms_rejected(self):
        with pytest.raises(PosynomialError):
            Posynomial(())


class TestPosyMul:
    def test_two_factor_expansion_term_count(self):
        one_plus = lambda i: Posynomial((m(1.0, {}), m(1.0, {i: 1.0})))
        prod = posy_mul(one_plus(0), one_plus(1))
        assert len(prod) == 4
        keys = {t.key() for t in prod.terms}
        assert keys == {(), ((0, 1.0),), ((1, 1.0),), ((0, 1.0), (1, 1.0))}

    def test_identity(self):
        one = Posynomial((m(1.0, {}),))
        p = Posynomial((m(2.0, {0: 1.5}), m(3.0, {1: -1.0})))
        assert posy_mul(one, p) == p

    def test_binomial_merges_like_terms(self):
        one_plus_s = Posynomial((m(1.0, {}), m(1.0, {0: 1.0})))
        sq = posy_mul(one_plus_s, one_plus_s)
        assert len(sq) == 3
        by_key = {t.key(): t.coefficient for t in sq.terms}
        assert by_key[()] == pytest.approx(1.0)
        assert by_key[((0, 1.0),)] == pytest.approx(2.0)
        assert by_key[((0, 2.0),)] == pytest.approx(1.0)

    def test_inverse_factors_cancel(self):
        p = Posynomial((m(2.0, {0: 1.0}),))
        q = Posynomial((m(3.0, {0: -1.0}),))
        prod = posy_mul(p, q)
        assert len(prod) == 1
        assert prod.terms[0].exponents == {}
        assert prod.terms[0].coefficient == pytest.approx(6.0)

    def test_term_cap_checked_up_front(self):
        p = Posynomial(tuple(m(1.0, {0: float(k)}) for k in range(3)))
        with pytest.raises(TermLimitError) as err:
            posy_mul(p, p, term_cap=8)
        assert err.value.needed == 9
        assert err.value.cap == 8

    def test_product_evaluation_identity(self, rng):
        # posy_eval(p*q, x) == posy_eval(p,x) * posy_eval(q,x)
        for _ in range(50):
            nv = 3
            p = Posynomial(tuple(
                m(float(rng.uniform(0.1, 5.0)),
                  {v: float(rng.uniform(-2, 2)) for v in range(nv)})
                for _ in range(rng.integers(1, 4))))
            q = Posynomial(tuple(
                m(float(rng.uniform(0.1, 5.0)),
                  {v: float(rng.uniform(-2, 2)) for v in range(nv)})
                for _ in range(rng.integers(1, 4))))
            x = rng.uniform(0.2, 4.0, nv)
            lhs = posy_eval(posy_mul(p, q), x)
            rhs = posy_eval(p, x) * posy_eval(q, x)
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestCanonicalization:
    def test_zero_exponents_dropped(self):
        mono = Monomial(2.0, {0: 0.0, 1: 2.0, 2: 0.0})
        assert dict(mono.exponents) == {1: 2.0}

    def test_idempotent(self):
        mono = Monomial(2.0, {0: 0.5, 1: -1.0})
        again = Monomial(mono.coefficient, dict(mono.exponents))
        assert again == mono

    def test_expansion_term_counts(self):
        # prod_{i<n} (1 + s_i) has exactly 2^n terms
        from powergp.power import rate_product_posynomial

        for n in range(1, 13):
            assert len(rate_product_posynomial(n)) == 2 ** n


def test_registry_dense_ids():
    reg = VariableRegistry()
    assert reg.var("p1") == 0
    assert reg.var("p2") == 1
    assert reg.var("p1") == 0
    assert len(reg) == 2
    assert reg.name_of(1) == "p2"
