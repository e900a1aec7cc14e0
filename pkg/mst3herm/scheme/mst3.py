"""
MST3 型暗号モジュール

三パラメータ群上の鍵生成・暗号化・二段階復号を提供します。

主な機能:
- 鍵生成（tame 対数署名 v、ランダムカバー w、τ 列、公開配列 g）
- 暗号化 (y₁, y₂, y₃, y₄)
- 復号（段 1 で Q₁、段 2 で Q₂ を復元し、カバーを剥がして x を得る）
"""

import logging
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from ..algebra.field import FieldParams
from ..algebra.hgroup import (
    ElementConstraint,
    GroupElement,
    f1_project,
    f2_project,
    g_inv,
    g_mul,
    g_product,
    random_element,
)
from ..errors import (
    BadGroupElement,
    BadMessage,
    BadTypeForStage,
    FactorizationFailed,
    ResidualNonzero,
)
from ..monitoring.metrics import metrics_manager
from .logsig import (
    BlockArray,
    LogSignature,
    LsType,
    RandomCover,
    Stage,
    block_product,
    cover_evaluate,
    cover_project,
    gen_random_cover,
    gen_tame_ls,
    ls_factor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SchemeParams:
    field: FieldParams
    type1: LsType
    type2: LsType

    def __post_init__(self):
        q = self.field.q
        if self.type1.p != self.field.p or self.type2.p != self.field.p:
            raise BadTypeForStage("型の p が体と一致しません")
        if self.type1.size != q * q:
            raise BadTypeForStage(f"type1 の積 {self.type1.size} は q²={q * q} である必要があります")
        if self.type2.size != q:
            raise BadTypeForStage(f"type2 の積 {self.type2.size} は q={q} である必要があります")


def make_scheme_params(ctx: FieldParams, radices1: Sequence[int], radices2: Sequence[int]) -> SchemeParams:
    return SchemeParams(ctx, LsType(tuple(radices1), ctx.p), LsType(tuple(radices2), ctx.p))


@dataclass(frozen=True)
class SecretKey:
    params: SchemeParams
    v1: LogSignature
    v2: LogSignature
    tau1: Tuple[GroupElement, ...]
    tau2: Tuple[GroupElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "tau1", tuple(self.tau1))
        object.__setattr__(self, "tau2", tuple(self.tau2))
        if len(self.tau1) != len(self.v1.blocks) + 1 or len(self.tau2) != len(self.v2.blocks) + 1:
            raise BadGroupElement("τ 列の長さはブロック数 + 1 である必要があります")
        # 段をつなぐ共有元
        if self.tau1[-1] != self.tau2[0]:
            raise BadGroupElement("τ_s(1) と τ_0(2) が一致しません")
        if any(not t.b for t in self.tau1 + self.tau2):
            raise BadGroupElement("τ の β 成分は 0 にできません")


@dataclass(frozen=True)
class PublicKey:
    params: SchemeParams
    w1: RandomCover
    w2: RandomCover
    g1: BlockArray
    g2: BlockArray

    def __post_init__(self):
        for cover, g in ((self.w1, self.g1), (self.w2, self.g2)):
            if cover.ls_type != g.ls_type:
                raise BadTypeForStage("g 配列の形がカバーと一致しません")


@dataclass(frozen=True)
class Ciphertext:
    y1: GroupElement
    y2: GroupElement
    y3: GroupElement
    y4: GroupElement

    def __post_init__(self):
        ctx = self.y1.ctx
        if self.y3.a != ctx.one:
            raise BadGroupElement("y₃ の α 成分は 1 である必要があります")
        if self.y4.a != ctx.one or self.y4.b:
            raise BadGroupElement("y₄ は S(1, 0, γ) の形である必要があります")

    def elements(self) -> Tuple[GroupElement, ...]:
        return (self.y1, self.y2, self.y3, self.y4)


def build_public_arrays(v: LogSignature, w: BlockArray, tau: Sequence[GroupElement],
                        projection: Callable[[GroupElement], GroupElement]) -> BlockArray:
    """g_kn = τ_{k−1}⁻¹ · f(w_kn) · v_kn · τ_k"""
    blocks = []
    for k, (v_block, w_block) in enumerate(zip(v.blocks, w.blocks)):
        left = g_inv(tau[k])
        right = tau[k + 1]
        blocks.append(tuple(
            g_mul(g_mul(g_mul(left, projection(wr)), vr), right)
            for vr, wr in zip(v_block, w_block)
        ))
    return BlockArray(v.ls_type, v.stage, tuple(blocks))


@metrics_manager.measure_latency("keygen")
def keygen(sp: SchemeParams, rng: random.Random) -> Tuple[PublicKey, SecretKey]:
    """
    鍵を生成します

    Args:
        sp (SchemeParams): 体と型
        rng (random.Random): 乱数源（同じシードなら同じ鍵）

    Returns:
        Tuple[PublicKey, SecretKey]: 公開鍵と秘密鍵
    """
    ctx = sp.field
    v1 = gen_tame_ls(sp.type1, Stage.BETA, ctx, rng)
    v2 = gen_tame_ls(sp.type2, Stage.GAMMA, ctx, rng)
    w1 = gen_random_cover(sp.type1, Stage.BETA, ctx, rng)
    w2 = gen_random_cover(sp.type2, Stage.GAMMA, ctx, rng)

    def draw() -> GroupElement:
        return random_element(ctx, rng, ElementConstraint.MEMBER_WITH_HALFNORM_GAMMA)

    tau1 = tuple(draw() for _ in range(len(sp.type1.radices) + 1))
    tau2 = (tau1[-1],) + tuple(draw() for _ in range(len(sp.type2.radices)))

    g1 = build_public_arrays(v1, w1, tau1, f1_project)
    g2 = build_public_arrays(v2, w2, tau2, f2_project)
    logger.info(f"鍵を生成しました: q={ctx.q} type1=({sp.type1.text()}) type2=({sp.type2.text()})")
    return (PublicKey(sp, w1, w2, g1, g2), SecretKey(sp, v1, v2, tau1, tau2))


@metrics_manager.measure_latency("encrypt")
def encrypt(pk: PublicKey, x: GroupElement, Q: Optional[Tuple[int, int]] = None,
            rng: Optional[random.Random] = None) -> Ciphertext:
    """
    メッセージ x を暗号化します

    y₃, y₄ は選ばれたカバー行ごとに f₁, f₂ で射影した積です。

    Args:
        pk (PublicKey): 公開鍵
        x (GroupElement): α ≠ 0 の任意の三つ組
        Q (Optional[Tuple[int, int]]): (Q₁, Q₂)。省略時は rng で [0,q²)×[0,q) から選ぶ
        rng (Optional[random.Random]): 乱数源

    Returns:
        Ciphertext: (y₁, y₂, y₃, y₄)
    """
    ctx = pk.params.field
    if x.ctx != ctx:
        raise BadMessage("メッセージが公開鍵と異なる体の元です")
    if Q is None:
        rng = rng or random.SystemRandom()
        Q = (rng.randrange(ctx.q * ctx.q), rng.randrange(ctx.q))
    q1, q2 = Q
    y1 = g_mul(g_mul(cover_evaluate(pk.w1, q1), cover_evaluate(pk.w2, q2)), x)
    y2 = g_mul(block_product(pk.g1, q1), block_product(pk.g2, q2))
    y3 = cover_project(pk.w1, q1, f1_project)
    y4 = cover_project(pk.w2, q2, f2_project)
    return Ciphertext(y1, y2, y3, y4)


def _factor(ls: LogSignature, target, stage: int) -> int:
    try:
        return ls_factor(ls, target)
    except ResidualNonzero as e:
        raise FactorizationFailed(str(e), stage=stage) from e


def stage_one(sk: SecretKey, ct: Ciphertext) -> Tuple[GroupElement, GroupElement]:
    """D⁽¹⁾ = τ₀(1)·y₂·τ_s(2)⁻¹ と D* = y₃⁻¹·D⁽¹⁾"""
    d1 = g_mul(g_mul(sk.tau1[0], ct.y2), g_inv(sk.tau2[-1]))
    dstar = g_mul(g_inv(ct.y3), d1)
    return d1, dstar


def strip_g1(pk: PublicKey, ct: Ciphertext, q1: int) -> GroupElement:
    """y₂⁽¹⁾ = g₁(Q₁)⁻¹·y₂"""
    return g_mul(g_inv(block_product(pk.g1, q1)), ct.y2)


def stage_two(sk: SecretKey, y2_stripped: GroupElement,
              y4: GroupElement) -> Tuple[GroupElement, GroupElement]:
    """D⁽²⁾ = τ₀(2)·y₂⁽¹⁾·τ_s(2)⁻¹ と D* = D⁽²⁾·y₄⁻¹"""
    d2 = g_mul(g_mul(sk.tau2[0], y2_stripped), g_inv(sk.tau2[-1]))
    dstar = g_mul(d2, g_inv(y4))
    return d2, dstar


def q1_from_dstar(sk: SecretKey, dstar: GroupElement) -> int:
    if dstar.a != dstar.ctx.one:
        raise FactorizationFailed("D* の α 成分が 1 ではありません", stage=1)
    return _factor(sk.v1, dstar.b, stage=1)


def q2_from_dstar(sk: SecretKey, dstar: GroupElement) -> int:
    ctx = dstar.ctx
    if dstar.a != ctx.one or dstar.b:
        raise FactorizationFailed("D* が S(1, 0, γ) の形ではありません", stage=2)
    return _factor(sk.v2, dstar.c, stage=2)


def recover_q1(sk: SecretKey, pk: PublicKey, ct: Ciphertext) -> int:
    _, dstar = stage_one(sk, ct)
    return q1_from_dstar(sk, dstar)


def recover_q2(sk: SecretKey, pk: PublicKey, ct: Ciphertext, q1: int) -> int:
    _, dstar = stage_two(sk, strip_g1(pk, ct, q1), ct.y4)
    return q2_from_dstar(sk, dstar)


def recover_x(pk: PublicKey, ct: Ciphertext, q1: int, q2: int) -> GroupElement:
    """y₁ からカバーを剥がす"""
    mask = g_mul(cover_evaluate(pk.w1, q1), cover_evaluate(pk.w2, q2))
    return g_mul(g_inv(mask), ct.y1)


@dataclass(frozen=True)
class DecryptionTrace:
    d1: GroupElement
    dstar1: GroupElement
    q1: int
    y2_stripped: GroupElement
    d2: GroupElement
    dstar2: GroupElement
    q2: int
    x: GroupElement


def decrypt_trace(sk: SecretKey, pk: PublicKey, ct: Ciphertext) -> DecryptionTrace:
    """復号の途中経過をすべて返す"""
    d1, dstar1 = stage_one(sk, ct)
    q1 = q1_from_dstar(sk, dstar1)
    logger.debug(f"段 1: Q₁={q1}")
    y2p = strip_g1(pk, ct, q1)
    d2, dstar2 = stage_two(sk, y2p, ct.y4)
    q2 = q2_from_dstar(sk, dstar2)
    logger.debug(f"段 2: Q₂={q2}")
    return DecryptionTrace(d1, dstar1, q1, y2p, d2, dstar2, q2, recover_x(pk, ct, q1, q2))


@metrics_manager.measure_latency("decrypt")
def decrypt(sk: SecretKey, pk: PublicKey, ct: Ciphertext) -> GroupElement:
    """
    暗号文を復号します

    Raises:
        FactorizationFailed: 鍵違いまたは暗号文の改ざん
    """
    try:
        return decrypt_trace(sk, pk, ct).x
    except FactorizationFailed as e:
        logger.warning(f"復号に失敗しました: {e}")
        raise


def g_evaluate(pk: PublicKey, Q: Tuple[int, int]) -> GroupElement:
    """公開配列の積 g₁(Q₁)·g₂(Q₂)"""
    return g_product((block_product(pk.g1, Q[0]), block_product(pk.g2, Q[1])), pk.params.field)
