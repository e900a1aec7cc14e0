"""
コマンドラインインターフェースのテストモジュール

テスト対象:
- 各サブコマンドの実行
- 終了コード（0 / 1 / 2 / 3 / 4）
- 同じシードでの出力の再現性
"""

import io
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from mst3herm.algebra.field import make_field
from mst3herm.cli import main
from mst3herm.config import DEFAULT_FIXTURE_PATH
from mst3herm.tools.codec import parse_message

F729 = make_field(3, 3, (2, 2, 0, 0, 0, 0, 1))


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        """テストの前準備"""
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, name: str) -> str:
        return str(self.tmp / name)

    def _keygen(self, seed="7", prefix=""):
        return run("keygen", "--preset", "paper-3-6", "--seed", seed,
                   "--out-pk", self.path(prefix + "pk.txt"), "--out-sk", self.path(prefix + "sk.txt"))

    def test_params(self):
        code, out, _ = run("params", "--preset", "paper-3-6")
        self.assertEqual(code, 0)
        for line in ("q=27", "q2=729", "generator=010000", "kernel_size=27", "type1=27,9,3"):
            self.assertIn(line, out.splitlines())

    def test_params_explicit(self):
        code, out, _ = run("params", "--p", "5", "--n", "1", "--modulus", "2,4,1",
                           "--type1", "5,5", "--type2", "5")
        self.assertEqual(code, 0)
        self.assertIn("kernel_size=5", out)

    def test_usage_errors(self):
        self.assertEqual(run("params")[0], 1)
        self.assertEqual(run("nonsense")[0], 1)
        self.assertEqual(run("params", "--preset", "paper-3-6", "--p", "3")[0], 1)
        self.assertEqual(run("--log-level", "LOUD", "params", "--preset", "toy-3")[0], 1)

    def test_data_error(self):
        code, _, err = run("params", "--p", "4", "--n", "1", "--modulus", "2,2,1",
                           "--type1", "3,3", "--type2", "3")
        self.assertEqual(code, 2)
        self.assertIn("error: NotPrime:", err)

    def test_round_trip(self):
        """keygen → encrypt → decrypt で同じ三つ組に戻る"""
        self.assertEqual(self._keygen()[0], 0)
        Path(self.path("msg.txt")).write_text("(a^1,a^2,a^3)\n", encoding="utf-8")
        code, _, _ = run("encrypt", "--pk", self.path("pk.txt"), "--in", self.path("msg.txt"),
                         "--out", self.path("ct.txt"), "--q1", "379", "--q2", "17")
        self.assertEqual(code, 0)
        code, _, _ = run("decrypt", "--sk", self.path("sk.txt"), "--pk", self.path("pk.txt"),
                         "--in", self.path("ct.txt"), "--out", self.path("out.txt"))
        self.assertEqual(code, 0)
        recovered = parse_message(Path(self.path("out.txt")).read_text(encoding="utf-8"), F729)
        self.assertEqual(recovered, parse_message("(a^1,a^2,a^3)", F729))

    def test_same_seed_same_files(self):
        self._keygen("11", "a_")
        self._keygen("11", "b_")
        for name in ("pk.txt", "sk.txt"):
            self.assertEqual(Path(self.path("a_" + name)).read_bytes(),
                             Path(self.path("b_" + name)).read_bytes())

    def test_zero_alpha_message(self):
        self._keygen()
        Path(self.path("msg.txt")).write_text("(0,a^2,a^3)\n", encoding="utf-8")
        code, _, err = run("encrypt", "--pk", self.path("pk.txt"), "--in", self.path("msg.txt"),
                           "--out", self.path("ct.txt"))
        self.assertEqual(code, 2)
        self.assertIn("BadMessage", err)

    def test_same_in_and_out(self):
        self._keygen()
        code, _, _ = run("encrypt", "--pk", self.path("pk.txt"), "--in", self.path("pk.txt"),
                         "--out", self.path("pk.txt"))
        self.assertEqual(code, 1)

    def test_q_pair_required(self):
        self._keygen()
        Path(self.path("msg.txt")).write_text("(a^1,a^2,a^3)\n", encoding="utf-8")
        code, _, _ = run("encrypt", "--pk", self.path("pk.txt"), "--in", self.path("msg.txt"),
                         "--out", self.path("ct.txt"), "--q1", "3")
        self.assertEqual(code, 1)

    def test_wrong_secret_key(self):
        """別の鍵で復号すると終了コード 3"""
        self._keygen("7")
        self._keygen("8", "other_")
        Path(self.path("msg.txt")).write_text("(a^1,a^2,a^3)\n", encoding="utf-8")
        run("encrypt", "--pk", self.path("pk.txt"), "--in", self.path("msg.txt"),
            "--out", self.path("ct.txt"), "--q1", "379", "--q2", "17")
        code, _, err = run("decrypt", "--sk", self.path("other_sk.txt"), "--pk", self.path("pk.txt"),
                           "--in", self.path("ct.txt"), "--out", self.path("out.txt"))
        self.assertEqual(code, 3)
        self.assertIn("FactorizationFailed", err)

    def test_missing_file(self):
        code, _, err = run("decrypt", "--sk", self.path("none.txt"), "--pk", self.path("none2.txt"),
                           "--in", self.path("ct.txt"), "--out", self.path("out.txt"))
        self.assertEqual(code, 2)
        self.assertIn("error:", err)

    def test_selftest(self):
        code, out, _ = run("selftest")
        self.assertEqual(code, 0)
        self.assertIn("CONFIRMED", out)
        self.assertIn("encrypt y2", out)

    def test_selftest_records(self):
        code, out, _ = run("selftest", "--format", "records")
        self.assertEqual(code, 0)
        self.assertIn("check=encrypt y3 literal status=CORRECTED", out)

    def test_selftest_failure(self):
        broken = self.tmp / "fixtures"
        shutil.copytree(DEFAULT_FIXTURE_PATH, broken)
        vectors = broken / "vectors.txt"
        vectors.write_text(vectors.read_text(encoding="utf-8").replace("q1 = 379", "q1 = 999"),
                           encoding="utf-8")
        code, out, _ = run("selftest", "--fixtures", str(broken))
        self.assertEqual(code, 4)
        self.assertIn("FAILED", out)

    def test_attack(self):
        code, out, _ = run("attack", "--id", "match-y4", "--seed", "1", "--format", "records")
        self.assertEqual(code, 0)
        self.assertIn("search_space_size=3", out)
        self.assertIn("found_planted=True", out)

    def test_attack_table(self):
        code, out, _ = run("attack", "--seed", "2", "--count", "2")
        self.assertEqual(code, 0)
        for attack_id in ("exhaust-q", "match-y3", "match-y4", "strip-covers", "exhaust-tau"):
            self.assertIn(attack_id, out)

    def test_attack_bound(self):
        code, _, err = run("attack", "--id", "exhaust-q", "--bound", "10")
        self.assertEqual(code, 2)
        self.assertIn("SpaceTooLarge", err)

    def test_metrics_flag(self):
        code, _, err = run("--metrics", "params", "--preset", "toy-3")
        self.assertEqual(code, 0)
        self.assertIn("mst3herm_operations_total", err)


if __name__ == "__main__":
    unittest.main()
