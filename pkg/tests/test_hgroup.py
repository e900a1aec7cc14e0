"""
三パラメータ群のテストモジュール

テスト対象:
- 群の公理（結合・単位元・逆元）
- 所属判定と射影 f₁, f₂
- テキスト表現
"""

import random
import unittest

from hypothesis import given, settings, strategies as st

from mst3herm.algebra.field import make_field
from mst3herm.algebra.hgroup import (
    ElementConstraint,
    GroupElement,
    f1_project,
    f2_project,
    from_text,
    g_identity,
    g_inv,
    g_mul,
    g_product,
    halfnorm_element,
    is_member,
    member_inverse,
    random_element,
    to_text,
)
from mst3herm.errors import BadGroupElement, ContextMismatch

F9 = make_field(3, 1, (2, 2, 1))
F25 = make_field(5, 1, (2, 4, 1))
F729 = make_field(3, 3, (2, 2, 0, 0, 0, 0, 1))

triples = st.tuples(
    st.integers(min_value=1, max_value=24),
    st.integers(min_value=0, max_value=24),
    st.integers(min_value=0, max_value=24),
)


def _element(t):
    a, b, c = t
    return GroupElement(F25.element(a), F25.element(b), F25.element(c))


class TestGroupLaw(unittest.TestCase):
    @settings(max_examples=60, deadline=None)
    @given(triples, triples, triples)
    def test_associativity(self, x, y, z):
        a, b, c = _element(x), _element(y), _element(z)
        self.assertEqual(g_mul(g_mul(a, b), c), g_mul(a, g_mul(b, c)))

    @settings(max_examples=60, deadline=None)
    @given(triples)
    def test_identity_and_inverse(self, x):
        a = _element(x)
        e = g_identity(F25)
        self.assertEqual(g_mul(a, e), a)
        self.assertEqual(g_mul(e, a), a)
        self.assertEqual(g_mul(a, g_inv(a)), e)
        self.assertEqual(g_mul(g_inv(a), a), e)

    def test_group_axioms_random(self):
        """各体で 10⁴ 組の結合律と単位元・逆元"""
        for seed, ctx in enumerate((F9, F25, F729)):
            rng = random.Random(500 + seed)
            e = g_identity(ctx)
            for _ in range(10000):
                a, b, c = (random_element(ctx, rng, ElementConstraint.ANY) for _ in range(3))
                self.assertEqual(g_mul(g_mul(a, b), c), g_mul(a, g_mul(b, c)))
                self.assertEqual(g_mul(a, g_inv(a)), e)
                self.assertEqual(g_mul(e, a), a)

    def test_member_inverse_agrees_on_members(self):
        """所属元では一般公式と所属元専用の公式が一致"""
        rng = random.Random(7)
        for _ in range(200):
            x = random_element(F729, rng)
            self.assertTrue(is_member(x))
            self.assertEqual(member_inverse(x), g_inv(x))

    def test_members_closed(self):
        """所属元の積と逆元は所属元"""
        rng = random.Random(11)
        for _ in range(100):
            x = random_element(F729, rng)
            y = random_element(F729, rng)
            self.assertTrue(is_member(g_mul(x, y)))
            self.assertTrue(is_member(g_inv(x)))

    def test_product(self):
        rng = random.Random(3)
        xs = [random_element(F729, rng, ElementConstraint.ANY) for _ in range(4)]
        self.assertEqual(g_product(xs, F729), g_mul(g_mul(g_mul(xs[0], xs[1]), xs[2]), xs[3]))
        self.assertEqual(g_product([], F729), g_identity(F729))
        self.assertEqual(xs[0] * xs[1], g_mul(xs[0], xs[1]))

    def test_zero_alpha_rejected(self):
        with self.assertRaises(BadGroupElement):
            GroupElement(F25.zero, F25.one, F25.one)

    def test_context_mismatch(self):
        with self.assertRaises(ContextMismatch):
            GroupElement(F25.one, F729.one, F25.zero)
        with self.assertRaises(ContextMismatch):
            g_mul(g_identity(F25), g_identity(F729))


class TestProjections(unittest.TestCase):
    def test_f1_shape(self):
        """f₁(S) = S(1, β, N(β)/2)"""
        rng = random.Random(5)
        for _ in range(50):
            x = random_element(F729, rng, ElementConstraint.ANY)
            y = f1_project(x)
            self.assertEqual(y, halfnorm_element(F729.one, x.b))
            self.assertTrue(is_member(y))

    def test_f2_shape(self):
        """f₂(S) = S(1, 0, β)"""
        rng = random.Random(6)
        x = random_element(F729, rng, ElementConstraint.ANY)
        self.assertEqual(f2_project(x), GroupElement(F729.one, F729.zero, x.b))

    def test_f1_beta_is_additive_on_products(self):
        """a=1 の元同士では f₁ 像の積の β は β の和"""
        rng = random.Random(8)
        for _ in range(50):
            u = f1_project(random_element(F729, rng))
            v = f1_project(random_element(F729, rng))
            self.assertEqual(g_mul(u, v).b, u.b + v.b)


class TestTextForm(unittest.TestCase):
    def test_digit_form(self):
        x = GroupElement(F729.one, F729.generator, F729.zero)
        self.assertEqual(to_text(x), "(100000,010000,000000)")
        self.assertEqual(from_text(to_text(x), F729), x)

    def test_power_form(self):
        x = from_text("(a^0,a^1,a^392)", F729)
        self.assertEqual(x, GroupElement(F729.one, F729.generator, F729.alpha_power(392)))
        self.assertEqual(from_text("(a^0,0,a^2)", F729).b, F729.zero)

    def test_bad_text(self):
        with self.assertRaises(BadGroupElement):
            from_text("(a^0,a^1)", F729)
        with self.assertRaises(BadGroupElement):
            from_text("(0,a^1,a^2)", F729)


if __name__ == "__main__":
    unittest.main()
