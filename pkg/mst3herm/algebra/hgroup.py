"""
三パラメータ群モジュール

元 S(α, β, γ)（α ≠ 0）の群演算を提供します。

主な機能:
- 群演算・単位元・逆元（一般公式）
- H(P∞) への所属判定 γ^q + γ = β^{q+1}
- 射影 f₁, f₂
- 乱数による元の生成
- テキスト表現 (<a>,<b>,<c>) の読み書き
"""

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .field import FieldElement, FieldParams
from ..errors import BadGroupElement, ContextMismatch


class ElementConstraint(Enum):
    MEMBER_WITH_HALFNORM_GAMMA = "member_with_halfnorm_gamma"
    ANY = "any"


@dataclass(frozen=True)
class GroupElement:
    """三つ組 S(a, b, c)"""
    a: FieldElement
    b: FieldElement
    c: FieldElement

    def __post_init__(self):
        if not self.a:
            raise BadGroupElement("α 成分は 0 にできません")
        ctx = self.a.ctx
        if self.b.ctx != ctx or self.c.ctx != ctx:
            raise ContextMismatch("三つ組の成分が異なる体に属しています")

    @property
    def ctx(self) -> FieldParams:
        return self.a.ctx

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return g_mul(self, other)

    def __repr__(self):
        return f"S{to_text(self)}"


def g_mul(x: GroupElement, y: GroupElement) -> GroupElement:
    """S(a₁a₂, a₂b₁+b₂, a₂^{q+1}c₁ + a₂b₂^q b₁ + c₂)"""
    ctx = x.ctx
    if y.ctx != ctx:
        raise ContextMismatch("異なる体の群元は掛けられません")
    a = ctx.mul(x.a, y.a)
    b = ctx.add(ctx.mul(y.a, x.b), y.b)
    c = ctx.add(
        ctx.add(ctx.mul(ctx.norm_q(y.a), x.c),
                ctx.mul(ctx.mul(y.a, ctx.frobenius_q(y.b)), x.b)),
        y.c,
    )
    return GroupElement(a, b, c)


def g_inv(x: GroupElement) -> GroupElement:
    """S(a⁻¹, −a⁻¹b, −a^{−(q+1)}c + a^{−(q+1)}b^{q+1})"""
    ctx = x.ctx
    ai = ctx.inv(x.a)
    ni = ctx.norm_q(ai)
    return GroupElement(
        ai,
        ctx.neg(ctx.mul(ai, x.b)),
        ctx.mul(ni, ctx.sub(ctx.norm_q(x.b), x.c)),
    )


def member_inverse(x: GroupElement) -> GroupElement:
    """所属元専用の逆元 S(a⁻¹, −a⁻¹b, a^{−(q+1)}c^q)（検証用）"""
    ctx = x.ctx
    ai = ctx.inv(x.a)
    return GroupElement(
        ai,
        ctx.neg(ctx.mul(ai, x.b)),
        ctx.mul(ctx.norm_q(ai), ctx.frobenius_q(x.c)),
    )


def g_identity(ctx: FieldParams) -> GroupElement:
    return GroupElement(ctx.one, ctx.zero, ctx.zero)


def g_product(elements: Iterable[GroupElement], ctx: FieldParams) -> GroupElement:
    """左から順に掛ける（空なら単位元）"""
    result = g_identity(ctx)
    for e in elements:
        result = g_mul(result, e)
    return result


def is_member(x: GroupElement) -> bool:
    ctx = x.ctx
    return ctx.add(ctx.frobenius_q(x.c), x.c) == ctx.norm_q(x.b)


def f1_project(x: GroupElement) -> GroupElement:
    """f₁(S(a,b,c)) = S(1, b, N(b)/2)"""
    ctx = x.ctx
    return GroupElement(ctx.one, x.b, ctx.half(ctx.norm_q(x.b)))


def f2_project(x: GroupElement) -> GroupElement:
    """f₂(S(a,b,c)) = S(1, 0, b)"""
    ctx = x.ctx
    return GroupElement(ctx.one, ctx.zero, x.b)


def halfnorm_element(a: FieldElement, b: FieldElement) -> GroupElement:
    """S(a, b, N(b)/2)"""
    ctx = a.ctx
    return GroupElement(a, b, ctx.half(ctx.norm_q(b)))


def random_element(ctx: FieldParams, rng: random.Random,
                   constraint: ElementConstraint = ElementConstraint.MEMBER_WITH_HALFNORM_GAMMA) -> GroupElement:
    """
    乱数で群元を生成します

    Args:
        ctx (FieldParams): 体
        rng (random.Random): 呼び出し側が与える乱数源
        constraint (ElementConstraint): MEMBER_WITH_HALFNORM_GAMMA なら S(t₁, t₂, N(t₂)/2)
            （t₁, t₂ ≠ 0）、ANY なら任意の三つ組

    Returns:
        GroupElement: 生成した元
    """
    if constraint is ElementConstraint.MEMBER_WITH_HALFNORM_GAMMA:
        t1 = ctx.random_element(rng, nonzero=True)
        t2 = ctx.random_element(rng, nonzero=True)
        return halfnorm_element(t1, t2)
    return GroupElement(
        ctx.random_element(rng, nonzero=True),
        ctx.random_element(rng),
        ctx.random_element(rng),
    )


def to_text(x: GroupElement) -> str:
    ctx = x.ctx
    return f"({ctx.digits(x.a)},{ctx.digits(x.b)},{ctx.digits(x.c)})"


def from_text(text: str, ctx: FieldParams) -> GroupElement:
    """'(<a>,<b>,<c>)' を読む。各成分は桁文字列・'a^k'・'0'"""
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    parts = [t for t in body.split(",")]
    if len(parts) != 3:
        raise BadGroupElement(f"三つ組ではありません: {text!r}")
    a, b, c = (ctx.parse_element(t) for t in parts)
    return GroupElement(a, b, c)
