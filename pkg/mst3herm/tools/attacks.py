"""
全探索攻撃ベンチのモジュール

小さなパラメータで総当たり攻撃を実行し、探索空間の大きさと候補数を測定します。
ホワイトボックスで使えるように、埋め込んだ秘密（planted）を渡すと発見できたかも記録します。

主な機能:
- exhaust-q: (Q₁, Q₂) の全探索で y₂ と一致する候補（空間 q³）
- match-y3 / match-y4: y₃ の β、y₄ の γ と一致する Q₁, Q₂（空間 q², q）
- strip-covers: 上の 2 つを組み合わせて y₁ からカバーを剥がし x を得る
- exhaust-tau: 既知の v, w から τ₀(1) の (a, b) を全探索（空間 (q²−1)²）
- 複数プロセスでの分割探索と pandas による集計表示
"""

import logging
import random
import time
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, Field

from ..algebra.hgroup import (
    ElementConstraint,
    GroupElement,
    f1_project,
    f2_project,
    g_inv,
    g_mul,
    halfnorm_element,
    random_element,
)
from ..config import get_settings
from ..errors import SpaceTooLarge
from ..monitoring.metrics import metrics_manager
from ..scheme.logsig import cover_project
from ..scheme.mst3 import (
    Ciphertext,
    PublicKey,
    SchemeParams,
    SecretKey,
    encrypt,
    g_evaluate,
    keygen,
    recover_x,
)
from .fixtures import show

logger = logging.getLogger(__name__)

ATTACK_IDS = ("exhaust-q", "match-y3", "match-y4", "strip-covers", "exhaust-tau")


class AttackReport(BaseModel):
    attack_id: str
    q: int
    search_space_size: int
    candidates_found: int
    recovered_q: List[str] = Field(default_factory=list)
    recovered_x: List[str] = Field(default_factory=list)
    found_planted: Optional[bool] = None
    wall_time: float
    note: str = ""

    def as_records(self) -> List[str]:
        """key=value 形式の行"""
        data = self.model_dump()
        lines = []
        for key in ("attack_id", "q", "search_space_size", "candidates_found", "found_planted", "wall_time"):
            value = data[key]
            if key == "wall_time":
                value = f"{value:.6f}"
            lines.append(f"{key}={value}")
        for value in self.recovered_q:
            lines.append(f"recovered_q={value}")
        for value in self.recovered_x:
            lines.append(f"recovered_x={value}")
        if self.note:
            lines.append(f"note={self.note}")
        return lines


def reports_frame(reports: Sequence[AttackReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        rows.append({
            "attack_id": r.attack_id,
            "q": r.q,
            "space": r.search_space_size,
            "candidates": r.candidates_found,
            "planted": "-" if r.found_planted is None else ("yes" if r.found_planted else "no"),
            "wall_time": round(r.wall_time, 4),
        })
    return pd.DataFrame(rows, columns=["attack_id", "q", "space", "candidates", "planted", "wall_time"])


def render_reports(reports: Sequence[AttackReport]) -> str:
    """揃えた表と、攻撃ごとの候補数の要約"""
    frame = reports_frame(reports)
    if frame.empty:
        return "(レポートなし)"
    summary = frame.groupby("attack_id", sort=False)["candidates"].agg(["count", "min", "max", "mean"])
    return f"{frame.to_string(index=False)}\n\n{summary.to_string()}"


# ---- 探索のワーカー ----
# 各テストは (payload, index) -> bool。Pool へ渡すためモジュールの最上位に置く

def _test_exhaust_q(payload, i: int) -> bool:
    pk, y2 = payload
    q = pk.params.field.q
    return g_evaluate(pk, divmod(i, q)) == y2


def _test_match_y3(payload, i: int) -> bool:
    w1, beta = payload
    return cover_project(w1, i, f1_project).b == beta


def _test_match_y4(payload, i: int) -> bool:
    w2, gamma = payload
    return cover_project(w2, i, f2_project).c == gamma


def _tau_candidate(ctx, i: int) -> GroupElement:
    a, b = divmod(i, ctx.order - 1)
    return halfnorm_element(ctx.element(a + 1), ctx.element(b + 1))


def _test_exhaust_tau(payload, i: int) -> bool:
    # g_n = τ₀⁻¹·u_n·τ₁ より τ₁ = u_n⁻¹·τ₀·g_n がブロック内のすべての行で一致する
    ctx, u_inverses, g_rows = payload
    tau0 = _tau_candidate(ctx, i)
    implied = None
    for u_inv, g in zip(u_inverses, g_rows):
        tau1 = g_mul(g_mul(u_inv, tau0), g)
        if implied is None:
            implied = tau1
        elif tau1 != implied:
            return False
    return True


_TESTS: Dict[str, Callable[[Any, int], bool]] = {
    "exhaust-q": _test_exhaust_q,
    "match-y3": _test_match_y3,
    "match-y4": _test_match_y4,
    "exhaust-tau": _test_exhaust_tau,
}


def _scan(task) -> List[int]:
    """ワーカー: start から step 刻みで space 未満を調べる"""
    name, payload, start, step, space = task
    test = _TESTS[name]
    return [i for i in range(start, space, step) if test(payload, i)]


def _guard(attack_id: str, space: int, bound: Optional[int]):
    if bound is None:
        bound = get_settings().attack_bound
    if space > bound:
        raise SpaceTooLarge(f"{attack_id}: 探索空間 {space} が上限 {bound} を超えています")


def enumerate_space(name: str, payload, space: int, workers: Optional[int] = None) -> List[int]:
    """
    [0, space) を調べて条件を満たす添字を返します

    workers が 2 以上なら添字を刻み幅で分けて複数プロセスで探索し、結果を結合します。
    """
    if workers is None:
        workers = get_settings().workers
    if workers <= 1:
        return _scan((name, payload, 0, 1, space))
    tasks = [(name, payload, start, workers, space) for start in range(workers)]
    hits: List[int] = []
    with Pool(workers) as pool:
        for result in pool.imap_unordered(_scan, tasks):
            hits.extend(result)
    return sorted(hits)


def _finish(report: AttackReport) -> AttackReport:
    metrics_manager.set_attack_candidates(report.attack_id, report.candidates_found)
    metrics_manager.record_operation(f"attack:{report.attack_id}")
    logger.info(
        f"攻撃 {report.attack_id}: 空間 {report.search_space_size} 候補 {report.candidates_found} "
        f"planted={report.found_planted} {report.wall_time:.3f}s"
    )
    return report


def attack_exhaust_q(pk: PublicKey, ct: Ciphertext, planted: Optional[Tuple[int, int]] = None,
                     bound: Optional[int] = None, workers: Optional[int] = None) -> AttackReport:
    """
    (Q₁, Q₂) ∈ [0,q²)×[0,q) を総当たりし、g₁(Q₁)·g₂(Q₂) = y₂ となる組を探します

    Args:
        pk (PublicKey): 公開鍵
        ct (Ciphertext): 暗号文
        planted (Optional[Tuple[int, int]]): 暗号化に使った Q（分かっていれば）
        bound (Optional[int]): 探索空間の上限（省略時は設定値）
        workers (Optional[int]): プロセス数

    Returns:
        AttackReport: search_space_size = q³
    """
    q = pk.params.field.q
    space = q ** 3
    _guard("exhaust-q", space, bound)
    start = time.perf_counter()
    hits = [divmod(i, q) for i in enumerate_space("exhaust-q", (pk, ct.y2), space, workers)]
    return _finish(AttackReport(
        attack_id="exhaust-q",
        q=q,
        search_space_size=space,
        candidates_found=len(hits),
        recovered_q=[f"{q1},{q2}" for q1, q2 in hits],
        found_planted=None if planted is None else tuple(planted) in hits,
        wall_time=time.perf_counter() - start,
    ))


def attack_match_y3(pk: PublicKey, ct: Ciphertext, planted: Optional[int] = None,
                    bound: Optional[int] = None, workers: Optional[int] = None) -> AttackReport:
    """y₃ の β と w₁ の行ごとの射影の積が一致する Q₁ を探します（空間 q²）"""
    q = pk.params.field.q
    space = q * q
    _guard("match-y3", space, bound)
    start = time.perf_counter()
    hits = enumerate_space("match-y3", (pk.w1, ct.y3.b), space, workers)
    return _finish(AttackReport(
        attack_id="match-y3",
        q=q,
        search_space_size=space,
        candidates_found=len(hits),
        recovered_q=[str(h) for h in hits],
        found_planted=None if planted is None else planted in hits,
        wall_time=time.perf_counter() - start,
    ))


def attack_match_y4(pk: PublicKey, ct: Ciphertext, planted: Optional[int] = None,
                    bound: Optional[int] = None, workers: Optional[int] = None) -> AttackReport:
    """y₄ の γ と w₂ の行ごとの射影の積が一致する Q₂ を探します（空間 q）"""
    q = pk.params.field.q
    space = q
    _guard("match-y4", space, bound)
    start = time.perf_counter()
    hits = enumerate_space("match-y4", (pk.w2, ct.y4.c), space, workers)
    return _finish(AttackReport(
        attack_id="match-y4",
        q=q,
        search_space_size=space,
        candidates_found=len(hits),
        recovered_q=[str(h) for h in hits],
        found_planted=None if planted is None else planted in hits,
        wall_time=time.perf_counter() - start,
    ))


def attack_strip_covers(pk: PublicKey, ct: Ciphertext, planted_x: Optional[GroupElement] = None,
                        bound: Optional[int] = None, workers: Optional[int] = None) -> AttackReport:
    """
    match-y3 と match-y4 の候補を組み合わせ、y₁ からカバーを剥がして x を復元します

    探索空間は q² + q。秘密鍵を使わずに x が得られることを示します。
    """
    q = pk.params.field.q
    space = q * q + q
    _guard("strip-covers", space, bound)
    start = time.perf_counter()
    q1s = enumerate_space("match-y3", (pk.w1, ct.y3.b), q * q, workers)
    q2s = enumerate_space("match-y4", (pk.w2, ct.y4.c), q, workers)
    pairs = [(q1, q2) for q1 in q1s for q2 in q2s]
    recovered = [recover_x(pk, ct, q1, q2) for q1, q2 in pairs]
    return _finish(AttackReport(
        attack_id="strip-covers",
        q=q,
        search_space_size=space,
        candidates_found=len(pairs),
        recovered_q=[f"{q1},{q2}" for q1, q2 in pairs],
        recovered_x=[show(x) for x in recovered],
        found_planted=None if planted_x is None else planted_x in recovered,
        wall_time=time.perf_counter() - start,
        note="q² + q の読み方（exhaust-q は q³）",
    ))


def attack_exhaust_tau(pk: PublicKey, sk: SecretKey, bound: Optional[int] = None,
                       workers: Optional[int] = None) -> AttackReport:
    """
    τ₀(1) = S(a, b, N(b)/2) の (a, b) ∈ (F_{q²}∖{0})² を総当たりします

    既知の v₁ と公開の w₁, g₁ から、ブロック 1 の全行で τ₁ = (f₁(w)·v)⁻¹·τ₀·g が
    一致する候補を数えます。sk は v₁ と埋め込んだ τ₀(1) の参照にだけ使います。

    Returns:
        AttackReport: search_space_size = (q²−1)²
    """
    ctx = pk.params.field
    space = (ctx.order - 1) ** 2
    _guard("exhaust-tau", space, bound)
    start = time.perf_counter()
    u_inverses = tuple(
        g_inv(g_mul(f1_project(w), v)) for w, v in zip(pk.w1.blocks[0], sk.v1.blocks[0])
    )
    hits = enumerate_space("exhaust-tau", (ctx, u_inverses, pk.g1.blocks[0]), space, workers)
    candidates = [_tau_candidate(ctx, i) for i in hits]
    return _finish(AttackReport(
        attack_id="exhaust-tau",
        q=ctx.q,
        search_space_size=space,
        candidates_found=len(hits),
        recovered_q=[show(t) for t in candidates],
        found_planted=sk.tau1[0] in candidates,
        wall_time=time.perf_counter() - start,
    ))


def run_attack(attack_id: str, pk: PublicKey, sk: SecretKey, ct: Ciphertext,
               planted_q: Optional[Tuple[int, int]] = None, planted_x: Optional[GroupElement] = None,
               bound: Optional[int] = None, workers: Optional[int] = None) -> AttackReport:
    """ID を指定して攻撃を 1 つ実行"""
    if attack_id == "exhaust-q":
        return attack_exhaust_q(pk, ct, planted_q, bound, workers)
    if attack_id == "match-y3":
        return attack_match_y3(pk, ct, None if planted_q is None else planted_q[0], bound, workers)
    if attack_id == "match-y4":
        return attack_match_y4(pk, ct, None if planted_q is None else planted_q[1], bound, workers)
    if attack_id == "strip-covers":
        return attack_strip_covers(pk, ct, planted_x, bound, workers)
    if attack_id == "exhaust-tau":
        return attack_exhaust_tau(pk, sk, bound, workers)
    raise ValueError(f"未知の攻撃 ID です: {attack_id}")


def run_bench(sp: SchemeParams, count: int, rng: random.Random,
              attack_ids: Optional[Sequence[str]] = None, bound: Optional[int] = None,
              workers: Optional[int] = None) -> List[AttackReport]:
    """
    ランダムな鍵と暗号文を count 回作り、各攻撃を実行します

    attack_ids を省略した場合、exhaust-tau は q = 3 のときだけ含めます。

    Args:
        sp (SchemeParams): 体と型
        count (int): 試行回数
        rng (random.Random): 乱数源
        attack_ids (Optional[Sequence[str]]): 実行する攻撃
        bound (Optional[int]): 探索空間の上限
        workers (Optional[int]): プロセス数

    Returns:
        List[AttackReport]: 試行ごと・攻撃ごとのレポート
    """
    ctx = sp.field
    if attack_ids is None:
        attack_ids = [a for a in ATTACK_IDS if a != "exhaust-tau" or ctx.q == 3]
    for attack_id in attack_ids:
        if attack_id not in ATTACK_IDS:
            raise ValueError(f"未知の攻撃 ID です: {attack_id}")

    reports = []
    for trial in range(count):
        pk, sk = keygen(sp, rng)
        x = random_element(ctx, rng, ElementConstraint.ANY)
        Q = (rng.randrange(ctx.q * ctx.q), rng.randrange(ctx.q))
        ct = encrypt(pk, x, Q)
        for attack_id in attack_ids:
            reports.append(run_attack(attack_id, pk, sk, ct, Q, x, bound, workers))
        logger.debug(f"ベンチ試行 {trial + 1}/{count} 完了")
    return reports
