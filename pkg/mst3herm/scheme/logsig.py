"""
対数署名モジュール

型ベクトル、混合基数分解、tame 対数署名の構成と分解、ランダムカバーを提供します。

主な機能:
- LsType（各ブロックの基数 r_k = p^{e_k} と担当桁位置）
- decompose / compose
- gen_tame_ls（担当桁に n の桁、下位にノイズ、上位は 0）
- ls_evaluate / ls_factor（ブロックを上から剥がす分解）
- gen_random_cover / cover_evaluate / cover_project
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Sequence, Tuple

from ..algebra.field import FieldElement, FieldParams, from_base_digits, to_base_digits
from ..algebra.hgroup import GroupElement, g_product, halfnorm_element
from ..errors import BadTypeForStage, OutOfRange, ResidualNonzero

logger = logging.getLogger(__name__)


class Stage(Enum):
    BETA = "beta"
    GAMMA = "gamma"


@dataclass(frozen=True)
class LsType:
    """ブロック基数 (r₁, …, r_s)。各 r_k は p のべき"""
    radices: Tuple[int, ...]
    p: int

    def __post_init__(self):
        object.__setattr__(self, "radices", tuple(int(r) for r in self.radices))
        if not self.radices:
            raise BadTypeForStage("型が空です")
        for r in self.radices:
            e, x = 0, r
            while x > 1 and x % self.p == 0:
                x //= self.p
                e += 1
            if x != 1 or e == 0:
                raise BadTypeForStage(f"基数 {r} は {self.p} のべきではありません")

    @property
    def exponents(self) -> Tuple[int, ...]:
        out = []
        for r in self.radices:
            e = 0
            while r > 1:
                r //= self.p
                e += 1
            out.append(e)
        return tuple(out)

    @property
    def offsets(self) -> Tuple[int, ...]:
        out, acc = [], 0
        for e in self.exponents:
            out.append(acc)
            acc += e
        return tuple(out)

    @property
    def total_digits(self) -> int:
        return sum(self.exponents)

    @property
    def size(self) -> int:
        total = 1
        for r in self.radices:
            total *= r
        return total

    def owned(self, k: int) -> range:
        """ブロック k（0 始まり）の担当桁位置"""
        return range(self.offsets[k], self.offsets[k] + self.exponents[k])

    def text(self) -> str:
        return ",".join(str(r) for r in self.radices)


def decompose(Q: int, t: LsType) -> Tuple[int, ...]:
    """Q = Σ n_k Π_{j<k} r_j となる (n₁, …, n_s)"""
    if not 0 <= Q < t.size:
        raise OutOfRange(f"Q={Q} は [0, {t.size}) の範囲外です")
    out = []
    for r in t.radices:
        Q, n = divmod(Q, r)
        out.append(n)
    return tuple(out)


def compose(digits: Sequence[int], t: LsType) -> int:
    if len(digits) != len(t.radices):
        raise OutOfRange(f"桁数 {len(digits)} が型 {t.text()} と一致しません")
    Q, place = 0, 1
    for n, r in zip(digits, t.radices):
        if not 0 <= n < r:
            raise OutOfRange(f"桁 {n} は [0, {r}) の範囲外です")
        Q += n * place
        place *= r
    return Q


@dataclass(frozen=True)
class BlockArray:
    """型付きのブロック配列（公開鍵の g 配列もこの形）"""
    ls_type: LsType
    stage: Stage
    blocks: Tuple[Tuple[GroupElement, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) != len(self.ls_type.radices):
            raise BadTypeForStage(f"ブロック数 {len(blocks)} が型 {self.ls_type.text()} と一致しません")
        for k, (block, r) in enumerate(zip(blocks, self.ls_type.radices)):
            if len(block) != r:
                raise BadTypeForStage(f"ブロック {k + 1} の行数 {len(block)} が {r} と一致しません")

    @property
    def ctx(self) -> FieldParams:
        return self.blocks[0][0].ctx

    def rows(self, Q: int) -> List[GroupElement]:
        """Q の混合基数桁で選ばれる各ブロックの行"""
        return [block[n] for block, n in zip(self.blocks, decompose(Q, self.ls_type))]


class LogSignature(BlockArray):
    pass


class RandomCover(BlockArray):
    pass


def block_product(array: BlockArray, Q: int) -> GroupElement:
    """選ばれた行をブロック順に掛ける"""
    return g_product(array.rows(Q), array.ctx)


def stage_value(x: GroupElement, stage: Stage) -> FieldElement:
    """段の座標（beta なら β、gamma なら γ）"""
    return x.b if stage is Stage.BETA else x.c


def _check_stage(t: LsType, stage: Stage, ctx: FieldParams):
    if t.p != ctx.p:
        raise BadTypeForStage(f"型の p={t.p} が体の p={ctx.p} と一致しません")
    expected = ctx.degree if stage is Stage.BETA else ctx.n
    if t.total_digits != expected:
        raise BadTypeForStage(
            f"{stage.value} 段の型は桁数 {expected} が必要です（{t.text()} は {t.total_digits}）"
        )


def stage_row(ctx: FieldParams, stage: Stage, v: FieldElement) -> GroupElement:
    if stage is Stage.BETA:
        return halfnorm_element(ctx.one, v)
    return GroupElement(ctx.one, ctx.zero, v)


def gen_tame_ls(t: LsType, stage: Stage, ctx: FieldParams, rng: random.Random,
                noise: bool = True) -> LogSignature:
    """
    tame 対数署名を生成します

    ブロック k の行 n は、担当桁に n の p 進桁、担当より下位に一様乱数のノイズ、
    上位に 0 を持つ値 v から作ります。beta 段は S(1, v, N(v)/2)、gamma 段は S(1, 0, v)。
    gamma 段の値は最初の n 個の単項式の張る空間に収まります。

    Args:
        t (LsType): 型
        stage (Stage): 段
        ctx (FieldParams): 体
        rng (random.Random): 乱数源
        noise (bool): False ならノイズなし（各ブロックの行 0 が単位元になる）

    Returns:
        LogSignature: 生成した対数署名
    """
    _check_stage(t, stage, ctx)
    p, d = ctx.p, ctx.degree
    blocks = []
    for k, r in enumerate(t.radices):
        owned = t.owned(k)
        rows = []
        for n in range(r):
            coeffs = [0] * d
            if noise:
                for pos in range(owned.start):
                    coeffs[pos] = rng.randrange(p)
            for pos, digit in zip(owned, to_base_digits(n, p, len(owned))):
                coeffs[pos] = digit
            rows.append(stage_row(ctx, stage, ctx.element(from_base_digits(coeffs, p))))
        blocks.append(tuple(rows))
    logger.debug(f"tame 対数署名を生成しました: 型 {t.text()} 段 {stage.value}")
    return LogSignature(t, stage, tuple(blocks))


def tame_violations(ls: LogSignature) -> List[str]:
    """ブロック構造の不変条件に反する行を列挙（空なら適合）"""
    ctx = ls.ctx
    t = ls.ls_type
    problems = []
    for k, block in enumerate(ls.blocks):
        owned = t.owned(k)
        for n, row in enumerate(block):
            label = f"ブロック {k + 1} 行 {n}"
            if row.a != ctx.one:
                problems.append(f"{label}: α 成分が 1 ではありません")
                continue
            if ls.stage is Stage.BETA:
                if row.c != ctx.half(ctx.norm_q(row.b)):
                    problems.append(f"{label}: γ 成分が N(β)/2 ではありません")
            elif row.b:
                problems.append(f"{label}: β 成分が 0 ではありません")
            coeffs = stage_value(row, ls.stage).coeffs
            owned_digits = [coeffs[pos] for pos in owned]
            if from_base_digits(owned_digits, ctx.p) != n:
                problems.append(f"{label}: 担当桁が {n} の桁と一致しません")
            if any(coeffs[pos] for pos in range(owned.stop, ctx.degree)):
                problems.append(f"{label}: 担当桁より上位が 0 ではありません")
    return problems


def ls_evaluate(ls: LogSignature, Q: int) -> GroupElement:
    return block_product(ls, Q)


@dataclass(frozen=True)
class PeelStep:
    """分解の1ステップ"""
    block: int
    residual_before: FieldElement
    digit: int
    row_value: FieldElement
    residual_after: FieldElement


def ls_factor_trace(ls: LogSignature, target: FieldElement) -> List[PeelStep]:
    """ブロック s から 1 へ剥がしていく経過（残差の検査はしない）"""
    ctx = ls.ctx
    t = ls.ls_type
    residual = target
    steps = []
    for k in range(len(t.radices) - 1, -1, -1):
        coeffs = residual.coeffs
        n = from_base_digits([coeffs[pos] for pos in t.owned(k)], ctx.p)
        value = stage_value(ls.blocks[k][n], ls.stage)
        after = ctx.sub(residual, value)
        steps.append(PeelStep(k + 1, residual, n, value, after))
        residual = after
    return steps


def ls_factor(ls: LogSignature, target: FieldElement) -> int:
    """
    段の座標値から Q を復元します

    Raises:
        ResidualNonzero: target が対数署名の像に無い
    """
    steps = ls_factor_trace(ls, target)
    if steps[-1].residual_after:
        raise ResidualNonzero(
            f"残差が 0 になりません: {ls.ctx.digits(steps[-1].residual_after)}"
        )
    digits = [0] * len(steps)
    for step in steps:
        digits[step.block - 1] = step.digit
    return compose(digits, ls.ls_type)


def gen_random_cover(t: LsType, stage: Stage, ctx: FieldParams, rng: random.Random) -> RandomCover:
    """
    ランダムカバーを生成します

    beta 段の行は S(w₁, w₂, N(w₂)/2)、gamma 段は S(w₁, w₂, N(w₂)/2 + w₃)。
    w₁, w₂ は F_{q²} の非零元、w₃ は gamma 値空間（コード 1..q−1）の非零元。
    """
    _check_stage(t, stage, ctx)
    blocks = []
    for r in t.radices:
        rows = []
        for _ in range(r):
            w1 = ctx.random_element(rng, nonzero=True)
            w2 = ctx.random_element(rng, nonzero=True)
            row = halfnorm_element(w1, w2)
            if stage is Stage.GAMMA:
                w3 = ctx.element(rng.randrange(1, ctx.q))
                row = GroupElement(row.a, row.b, ctx.add(row.c, w3))
            rows.append(row)
        blocks.append(tuple(rows))
    return RandomCover(t, stage, tuple(blocks))


def cover_evaluate(cover: RandomCover, Q: int) -> GroupElement:
    return block_product(cover, Q)


def cover_project(cover: BlockArray, Q: int,
                  projection: Callable[[GroupElement], GroupElement]) -> GroupElement:
    """選ばれた行ごとに射影してから掛ける"""
    return g_product((projection(row) for row in cover.rows(Q)), cover.ctx)
