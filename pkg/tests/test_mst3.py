"""
MST3 型暗号のテストモジュール

テスト対象:
- 鍵生成の構造（τ の共有元、公開配列の式）
- 暗号化と復号の往復
- 復号の途中経過
- 鍵違い・改ざんでの失敗
"""

import random
import unittest

from mst3herm.algebra.field import make_field
from mst3herm.algebra.hgroup import (
    ElementConstraint,
    GroupElement,
    f1_project,
    f2_project,
    g_inv,
    g_mul,
    random_element,
)
from mst3herm.errors import BadGroupElement, BadMessage, BadTypeForStage, FactorizationFailed
from mst3herm.monitoring.metrics import metrics_manager
from mst3herm.scheme.logsig import block_product, cover_evaluate, ls_evaluate
from mst3herm.scheme.mst3 import (
    Ciphertext,
    build_public_arrays,
    decrypt,
    decrypt_trace,
    encrypt,
    g_evaluate,
    keygen,
    make_scheme_params,
    recover_q1,
    recover_q2,
    recover_x,
)

F9 = make_field(3, 1, (2, 2, 1))
F25 = make_field(5, 1, (2, 4, 1))
F729 = make_field(3, 3, (2, 2, 0, 0, 0, 0, 1))

SP9 = make_scheme_params(F9, (3, 3), (3,))
SP25 = make_scheme_params(F25, (5, 5), (5,))
SP729 = make_scheme_params(F729, (27, 9, 3), (9, 3))


class TestSchemeParams(unittest.TestCase):
    def test_type_sizes_checked(self):
        with self.assertRaises(BadTypeForStage):
            make_scheme_params(F729, (27, 9), (9, 3))
        with self.assertRaises(BadTypeForStage):
            make_scheme_params(F729, (27, 9, 3), (3, 3))


class TestKeygen(unittest.TestCase):
    def setUp(self):
        """テストの前準備"""
        self.pk, self.sk = keygen(SP729, random.Random(1))

    def test_hinge(self):
        """段 1 の最後の τ と段 2 の最初の τ は同じ元"""
        self.assertEqual(self.sk.tau1[-1], self.sk.tau2[0])
        self.assertEqual(len(self.sk.tau1), 4)
        self.assertEqual(len(self.sk.tau2), 3)

    def test_public_arrays(self):
        """g_kn = τ_{k−1}⁻¹ · f(w_kn) · v_kn · τ_k"""
        for k in range(3):
            for n in (0, 1, 2):
                expected = g_mul(g_mul(g_mul(g_inv(self.sk.tau1[k]), f1_project(self.pk.w1.blocks[k][n])),
                                       self.sk.v1.blocks[k][n]), self.sk.tau1[k + 1])
                self.assertEqual(self.pk.g1.blocks[k][n], expected)
        self.assertEqual(
            build_public_arrays(self.sk.v1, self.pk.w1, self.sk.tau1, f1_project), self.pk.g1
        )

    def test_deterministic(self):
        """同じシードなら同じ鍵"""
        pk, sk = keygen(SP729, random.Random(1))
        self.assertEqual(pk, self.pk)
        self.assertEqual(sk, self.sk)

    def test_telescoping(self):
        """g₁(Q₁)·g₂(Q₂) で内側の τ が打ち消し合う"""
        q1, q2 = 379, 17
        inner = g_mul(self._masked(self.pk.w1, self.sk.v1, q1, f1_project),
                      self._masked(self.pk.w2, self.sk.v2, q2, f2_project))
        expected = g_mul(g_mul(g_inv(self.sk.tau1[0]), inner), self.sk.tau2[-1])
        self.assertEqual(g_evaluate(self.pk, (q1, q2)), expected)

    def test_hinge_identity_every_q(self):
        """q = 3 のすべての Q で g₁(Q₁)⁻¹·g(Q) = g₂(Q₂)、g₁(Q₁) は τ₀(1) から τ_s(1) へ伸びる"""
        pk, sk = keygen(SP9, random.Random(41))
        for q1 in range(9):
            g1 = block_product(pk.g1, q1)
            expected_g1 = g_mul(g_mul(g_inv(sk.tau1[0]), self._masked(pk.w1, sk.v1, q1, f1_project)),
                                sk.tau1[-1])
            self.assertEqual(g1, expected_g1)
            for q2 in range(3):
                self.assertEqual(g_mul(g_inv(g1), g_evaluate(pk, (q1, q2))), block_product(pk.g2, q2))

    def _masked(self, w, v, Q, projection):
        result = None
        for wr, vr in zip(w.rows(Q), v.rows(Q)):
            term = g_mul(projection(wr), vr)
            result = term if result is None else g_mul(result, term)
        return result


class TestRoundTrip(unittest.TestCase):
    TRIALS = 1000
    KEY_EVERY = 50

    def _round_trip(self, sp, seed):
        """鍵を 50 回ごとに作り直して 10³ 回の往復"""
        rng = random.Random(seed)
        for i in range(self.TRIALS):
            if i % self.KEY_EVERY == 0:
                pk, sk = keygen(sp, rng)
            x = random_element(sp.field, rng, ElementConstraint.ANY)
            ct = encrypt(pk, x, rng=rng)
            self.assertEqual(decrypt(sk, pk, ct), x)

    def test_small_fields(self):
        self._round_trip(SP9, 10)
        self._round_trip(SP25, 11)

    def test_worked_example_field(self):
        self._round_trip(SP729, 12)

    def test_every_q_at_q3(self):
        """q = 3 ではすべての (Q₁, Q₂) で復号できる"""
        rng = random.Random(13)
        pk, sk = keygen(SP9, rng)
        x = random_element(F9, rng, ElementConstraint.ANY)
        for q1 in range(9):
            for q2 in range(3):
                ct = encrypt(pk, x, (q1, q2))
                self.assertEqual(recover_q1(sk, pk, ct), q1)
                self.assertEqual(recover_q2(sk, pk, ct, q1), q2)
                self.assertEqual(decrypt(sk, pk, ct), x)

    def test_fixed_q(self):
        rng = random.Random(14)
        pk, sk = keygen(SP729, rng)
        x = GroupElement(F729.generator, F729.alpha_power(2), F729.alpha_power(3))
        ct = encrypt(pk, x, (379, 17))
        self.assertEqual(ct.y1, g_mul(g_mul(cover_evaluate(pk.w1, 379), cover_evaluate(pk.w2, 17)), x))
        self.assertEqual(ct.y2, g_mul(block_product(pk.g1, 379), block_product(pk.g2, 17)))
        self.assertEqual(recover_x(pk, ct, 379, 17), x)

    def test_ciphertext_shape(self):
        rng = random.Random(15)
        pk, _ = keygen(SP729, rng)
        ct = encrypt(pk, random_element(F729, rng), rng=rng)
        self.assertEqual(ct.y3.a, F729.one)
        self.assertEqual((ct.y4.a, ct.y4.b), (F729.one, F729.zero))


class TestDecryptionTrace(unittest.TestCase):
    def test_trace_values(self):
        rng = random.Random(21)
        pk, sk = keygen(SP729, rng)
        x = random_element(F729, rng, ElementConstraint.ANY)
        ct = encrypt(pk, x, (379, 17))
        trace = decrypt_trace(sk, pk, ct)
        self.assertEqual((trace.q1, trace.q2), (379, 17))
        self.assertEqual(trace.x, x)
        self.assertEqual(trace.d1, g_mul(g_mul(sk.tau1[0], ct.y2), g_inv(sk.tau2[-1])))
        self.assertEqual(trace.dstar1.a, F729.one)
        self.assertEqual(trace.y2_stripped, block_product(pk.g2, 17))
        self.assertEqual((trace.dstar2.a, trace.dstar2.b), (F729.one, F729.zero))

    def test_stage_separation(self):
        """D* の β は v₁(Q₁) の β だけ、段 2 の D* の γ は v₂(Q₂) の γ だけ"""
        rng = random.Random(22)
        pk, sk = keygen(SP729, rng)
        ct = encrypt(pk, random_element(F729, rng, ElementConstraint.ANY), (379, 17))
        trace = decrypt_trace(sk, pk, ct)
        self.assertEqual(trace.dstar1.b, ls_evaluate(sk.v1, 379).b)
        self.assertEqual(trace.dstar2.c, ls_evaluate(sk.v2, 17).c)


class TestFailures(unittest.TestCase):
    def setUp(self):
        """テストの前準備"""
        self.rng = random.Random(31)
        self.pk, self.sk = keygen(SP729, self.rng)
        self.x = random_element(F729, self.rng, ElementConstraint.ANY)
        self.ct = encrypt(self.pk, self.x, (379, 17))

    def test_wrong_key(self):
        """別の鍵の秘密鍵では復号できない"""
        other_pk, other_sk = keygen(SP729, random.Random(32))
        with self.assertRaises(FactorizationFailed):
            decrypt(other_sk, self.pk, self.ct)

    def test_tampered_y2(self):
        """y₂ を α 成分だけ変えると段 1 で失敗"""
        y2 = self.ct.y2
        tampered = Ciphertext(self.ct.y1, GroupElement(y2.a * F729.generator, y2.b, y2.c),
                              self.ct.y3, self.ct.y4)
        with self.assertRaises(FactorizationFailed) as cm:
            decrypt(self.sk, self.pk, tampered)
        self.assertEqual(cm.exception.stage, 1)
        self.assertEqual(cm.exception.exit_code, 3)

    def test_random_beta_tampering(self):
        """y₂ の β 成分を 10³ 通りに書き換えても元のメッセージには戻らない"""
        rng = random.Random(33)
        y2 = self.ct.y2
        failures = 0
        for _ in range(1000):
            b = F729.random_element(rng)
            while b == y2.b:
                b = F729.random_element(rng)
            tampered = Ciphertext(self.ct.y1, GroupElement(y2.a, b, y2.c), self.ct.y3, self.ct.y4)
            try:
                self.assertNotEqual(decrypt(self.sk, self.pk, tampered), self.x)
            except FactorizationFailed:
                failures += 1
        self.assertGreaterEqual(failures, 990)

    def test_failure_counted(self):
        before = metrics_manager.get_metric_value("failures_total", {"error_type": "FactorizationFailed"})
        y2 = self.ct.y2
        tampered = Ciphertext(self.ct.y1, GroupElement(y2.a * F729.generator, y2.b, y2.c),
                              self.ct.y3, self.ct.y4)
        with self.assertRaises(FactorizationFailed):
            decrypt(self.sk, self.pk, tampered)
        after = metrics_manager.get_metric_value("failures_total", {"error_type": "FactorizationFailed"})
        self.assertEqual(after, before + 1)

    def test_ciphertext_shape_checked(self):
        with self.assertRaises(BadGroupElement):
            Ciphertext(self.ct.y1, self.ct.y2, GroupElement(F729.generator, F729.one, F729.zero), self.ct.y4)
        with self.assertRaises(BadGroupElement):
            Ciphertext(self.ct.y1, self.ct.y2, self.ct.y3, GroupElement(F729.one, F729.one, F729.zero))

    def test_message_from_other_field(self):
        with self.assertRaises(BadMessage):
            encrypt(self.pk, random_element(F25, self.rng))


if __name__ == "__main__":
    unittest.main()
