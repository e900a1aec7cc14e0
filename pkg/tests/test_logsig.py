"""
対数署名のテストモジュール

テスト対象:
- 型ベクトルと混合基数分解
- tame 対数署名の構成・検査・分解
- ランダムカバーと行ごとの射影
"""

import random
import unittest

from mst3herm.algebra.field import make_field
from mst3herm.algebra.hgroup import f1_project, f2_project, g_identity, g_mul, g_product
from mst3herm.errors import BadTypeForStage, OutOfRange, ResidualNonzero
from mst3herm.scheme.logsig import (
    LsType,
    Stage,
    block_product,
    compose,
    cover_evaluate,
    cover_project,
    decompose,
    gen_random_cover,
    gen_tame_ls,
    ls_evaluate,
    ls_factor,
    ls_factor_trace,
    tame_violations,
)

F9 = make_field(3, 1, (2, 2, 1))
F729 = make_field(3, 3, (2, 2, 0, 0, 0, 0, 1))

TYPE1 = LsType((27, 9, 3), 3)
TYPE2 = LsType((9, 3), 3)


class TestLsType(unittest.TestCase):
    def test_layout(self):
        self.assertEqual(TYPE1.exponents, (3, 2, 1))
        self.assertEqual(TYPE1.offsets, (0, 3, 5))
        self.assertEqual(TYPE1.total_digits, 6)
        self.assertEqual(TYPE1.size, 729)
        self.assertEqual(list(TYPE1.owned(1)), [3, 4])
        self.assertEqual(TYPE1.text(), "27,9,3")

    def test_bad_radix(self):
        with self.assertRaises(BadTypeForStage):
            LsType((6, 3), 3)
        with self.assertRaises(BadTypeForStage):
            LsType((1, 3), 3)
        with self.assertRaises(BadTypeForStage):
            LsType((), 3)

    def test_decompose(self):
        """379 = 1 + 5·27 + 1·243、17 = 8 + 1·9"""
        self.assertEqual(decompose(379, TYPE1), (1, 5, 1))
        self.assertEqual(decompose(17, TYPE2), (8, 1))
        for Q in range(TYPE1.size):
            self.assertEqual(compose(decompose(Q, TYPE1), TYPE1), Q)

    def test_decompose_range(self):
        with self.assertRaises(OutOfRange):
            decompose(729, TYPE1)
        with self.assertRaises(OutOfRange):
            decompose(-1, TYPE1)
        with self.assertRaises(OutOfRange):
            compose((1, 9, 0), TYPE1)


class TestTameLogSignature(unittest.TestCase):
    def setUp(self):
        """テストの前準備"""
        self.rng = random.Random(2024)
        self.v1 = gen_tame_ls(TYPE1, Stage.BETA, F729, self.rng)
        self.v2 = gen_tame_ls(TYPE2, Stage.GAMMA, F729, self.rng)

    def test_structure(self):
        self.assertEqual(tame_violations(self.v1), [])
        self.assertEqual(tame_violations(self.v2), [])
        for block in self.v2.blocks:
            for row in block:
                self.assertEqual(row.b, F729.zero)
                # gamma 段の値は最初の n 個の単項式の範囲
                self.assertLess(row.c.code, F729.q)

    def test_factor_recovers_every_q(self):
        for Q in range(TYPE1.size):
            self.assertEqual(ls_factor(self.v1, ls_evaluate(self.v1, Q).b), Q)
        for Q in range(TYPE2.size):
            self.assertEqual(ls_factor(self.v2, ls_evaluate(self.v2, Q).c), Q)

    def test_trace(self):
        """ブロック s から 1 の順で剥がし、最後の残差は 0"""
        value = ls_evaluate(self.v1, 379).b
        steps = ls_factor_trace(self.v1, value)
        self.assertEqual([s.block for s in steps], [3, 2, 1])
        self.assertEqual([s.digit for s in steps], [1, 5, 1])
        self.assertEqual(steps[0].residual_before, value)
        self.assertEqual(steps[-1].residual_after, F729.zero)

    def test_residual_nonzero(self):
        """像に無い値は分解できない"""
        images = {ls_evaluate(self.v2, Q).c for Q in range(TYPE2.size)}
        outside = next(F729.element(c) for c in range(F729.order) if F729.element(c) not in images)
        with self.assertRaises(ResidualNonzero):
            ls_factor(self.v2, outside)

    def test_noise_free_rows(self):
        """ノイズなしなら各ブロックの行 0 は単位元"""
        ls = gen_tame_ls(TYPE1, Stage.BETA, F729, self.rng, noise=False)
        for block in ls.blocks:
            self.assertEqual(block[0], g_identity(F729))

    def test_noise_does_not_change_factoring(self):
        """担当桁が同じならノイズが違っても同じ Q に分解される"""
        others = [gen_tame_ls(TYPE1, Stage.BETA, F729, random.Random(seed)) for seed in (1, 2)]
        others.append(gen_tame_ls(TYPE1, Stage.BETA, F729, self.rng, noise=False))
        self.assertNotEqual(others[0], others[1])
        for Q in range(TYPE1.size):
            results = {ls_factor(ls, ls_evaluate(ls, Q).b) for ls in [self.v1] + others}
            self.assertEqual(results, {Q})
        gammas = [gen_tame_ls(TYPE2, Stage.GAMMA, F729, random.Random(seed)) for seed in (3, 4)]
        for Q in range(TYPE2.size):
            self.assertEqual({ls_factor(ls, ls_evaluate(ls, Q).c) for ls in gammas}, {Q})

    def test_factor_matches_lookup_table(self):
        """行の値を直接足して作った 値 → Q の表と ls_factor が一致"""
        cases = ((self.v1, TYPE1, lambda row: row.b), (self.v2, TYPE2, lambda row: row.c))
        for ls, t, value_of in cases:
            table = {}
            for Q in range(t.size):
                rest, total = Q, F729.zero
                for k, r in enumerate(t.radices):
                    rest, n = rest // r, rest % r
                    total = total + value_of(ls.blocks[k][n])
                table[total] = Q
            # 表に重複が無いので像は t.size 個
            self.assertEqual(len(table), t.size)
            for code in range(F729.order):
                value = F729.element(code)
                if value in table:
                    self.assertEqual(ls_factor(ls, value), table[value])
                else:
                    with self.assertRaises(ResidualNonzero):
                        ls_factor(ls, value)

    def test_violations_detected(self):
        ls = gen_tame_ls(TYPE2, Stage.GAMMA, F729, self.rng)
        blocks = [list(b) for b in ls.blocks]
        blocks[0][0], blocks[0][1] = blocks[0][1], blocks[0][0]
        swapped = type(ls)(ls.ls_type, ls.stage, tuple(tuple(b) for b in blocks))
        self.assertTrue(tame_violations(swapped))

    def test_stage_shape_checked(self):
        """beta 段は 2n 桁、gamma 段は n 桁"""
        with self.assertRaises(BadTypeForStage):
            gen_tame_ls(TYPE2, Stage.BETA, F729, self.rng)
        with self.assertRaises(BadTypeForStage):
            gen_tame_ls(TYPE1, Stage.GAMMA, F729, self.rng)

    def test_small_field(self):
        t1, t2 = LsType((3, 3), 3), LsType((3,), 3)
        v1 = gen_tame_ls(t1, Stage.BETA, F9, self.rng)
        v2 = gen_tame_ls(t2, Stage.GAMMA, F9, self.rng)
        self.assertEqual([ls_factor(v1, ls_evaluate(v1, Q).b) for Q in range(9)], list(range(9)))
        self.assertEqual([ls_factor(v2, ls_evaluate(v2, Q).c) for Q in range(3)], [0, 1, 2])


class TestRandomCover(unittest.TestCase):
    def setUp(self):
        """テストの前準備"""
        self.rng = random.Random(99)
        self.w1 = gen_random_cover(TYPE1, Stage.BETA, F729, self.rng)
        self.w2 = gen_random_cover(TYPE2, Stage.GAMMA, F729, self.rng)

    def test_row_shape(self):
        for block in self.w1.blocks:
            for row in block:
                self.assertTrue(row.a)
                self.assertTrue(row.b)
                self.assertEqual(row.c, F729.half(F729.norm_q(row.b)))
        for block in self.w2.blocks:
            for row in block:
                extra = row.c - F729.half(F729.norm_q(row.b))
                self.assertTrue(0 < extra.code < F729.q)

    def test_evaluate(self):
        rows = self.w1.rows(379)
        self.assertEqual(cover_evaluate(self.w1, 379), g_product(rows, F729))
        self.assertEqual(block_product(self.w1, 379), g_mul(g_mul(rows[0], rows[1]), rows[2]))

    def test_projected_product(self):
        """行ごとの射影の積の β は選んだ行の β の和"""
        for Q in (0, 17, 379, 728):
            rows = self.w1.rows(Q)
            y3 = cover_project(self.w1, Q, f1_project)
            self.assertEqual(y3.a, F729.one)
            self.assertEqual(y3.b, rows[0].b + rows[1].b + rows[2].b)
        for Q in (0, 17, 26):
            rows = self.w2.rows(Q)
            y4 = cover_project(self.w2, Q, f2_project)
            self.assertEqual((y4.a, y4.b), (F729.one, F729.zero))
            self.assertEqual(y4.c, rows[0].b + rows[1].b)


if __name__ == "__main__":
    unittest.main()
