"""
有限体演算モジュール

F_p ⊂ F_q = F_{p^n} ⊂ F_{q²} = F_{p^{2n}} を多項式基底で扱います。
元は係数ベクトルを p 進数に詰めた整数コード（定数項が最下位桁）で保持します。

主な機能:
- 既約性・原始性を全探索で検証した体の構成
- 四則演算とべき乗（小さな体では exp/log テーブルで高速化）
- q 乗フロベニウス、ノルム x^{q+1}、2 での除算、離散対数
- x^q + x = 0 の解集合（核 K）の全探索
- 桁文字列（"211000" など）との相互変換
"""

import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..errors import (
    BadDigit,
    BadLength,
    ContextMismatch,
    DivisionByZero,
    EvenCharacteristic,
    FieldTooLargeForScan,
    FieldTooLargeForTable,
    InvalidModulus,
    NonPrimitiveGenerator,
    NotPrime,
    ReducibleModulus,
    ZeroArgument,
)

logger = logging.getLogger(__name__)

DIGIT_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


# ---- 多項式ヘルパー（係数リストは little-endian） ----

def to_base_digits(code: int, p: int, d: int) -> List[int]:
    out = []
    for _ in range(d):
        code, r = divmod(code, p)
        out.append(r)
    return out


def from_base_digits(digits: Sequence[int], p: int) -> int:
    code = 0
    for c in reversed(digits):
        code = code * p + c
    return code


def _poly_rem(num: Sequence[int], den: Sequence[int], p: int) -> List[int]:
    """num mod den（den はモニック）"""
    r = list(num)
    dd = len(den) - 1
    for k in range(len(r) - 1, dd - 1, -1):
        c = r[k] % p
        if c:
            for i in range(dd + 1):
                r[k - dd + i] -= c * den[i]
    return [x % p for x in r[:dd]]


def _poly_mulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> List[int]:
    d = len(modulus) - 1
    prod = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] += ai * bj
    return _poly_rem(prod, modulus, p)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def _prime_factors(m: int) -> List[int]:
    out = []
    k = 2
    while k * k <= m:
        if m % k == 0:
            out.append(k)
            while m % k == 0:
                m //= k
        k += 1
    if m > 1:
        out.append(m)
    return out


def _is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """次数 d/2 以下のモニック多項式で割り切れないことを全探索で確認"""
    d = len(modulus) - 1
    for k in range(1, d // 2 + 1):
        for low in range(p ** k):
            factor = to_base_digits(low, p, k) + [1]
            if not any(_poly_rem(modulus, factor, p)):
                return False
    return True


@dataclass(frozen=True, eq=False)
class FieldElement:
    """F_{p^{2n}} の元（不変値）"""
    ctx: "FieldParams" = field(repr=False)
    code: int

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.code == other.code and self.ctx == other.ctx

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        return f"FieldElement({self.ctx.digits(self)})"

    def __bool__(self):
        return self.code != 0

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return tuple(to_base_digits(self.code, self.ctx.p, self.ctx.degree))

    def __add__(self, other):
        return self.ctx.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.ctx.sub(self, other)

    def __rsub__(self, other):
        return self.ctx.sub(self.ctx.coerce(other), self)

    def __neg__(self):
        return self.ctx.neg(self)

    def __mul__(self, other):
        return self.ctx.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.ctx.div(self, other)

    def __pow__(self, k: int):
        return self.ctx.pow(self, k)


class FieldParams:
    """
    体のコンテキスト

    構成後は不変で、並列ワーカー間で共有できます。
    """

    def __init__(self, p: int, n: int, modulus: Tuple[int, ...], generator_code: int,
                 exp_table: Optional[List[int]], log_table: Optional[List[int]]):
        self.p = p
        self.n = n
        self.degree = 2 * n
        self.q = p ** n
        self.order = p ** self.degree
        self.modulus = modulus
        self._exp = exp_table
        self._log = log_table
        self.key = (p, n, modulus, generator_code)
        self.zero = FieldElement(self, 0)
        self.one = FieldElement(self, 1)
        self.generator = FieldElement(self, generator_code)
        self.inv2 = FieldElement(self, (p + 1) // 2)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FieldParams) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"FieldParams(p={self.p}, n={self.n}, modulus={list(self.modulus)})"

    def __reduce__(self):
        # ワーカーへはパラメータだけ送り、テーブルは向こうで再構成する
        generator = self.digits(self.generator)
        return (make_field, (self.p, self.n, self.modulus, generator,
                             self.order if self.has_table else 1))

    @property
    def has_table(self) -> bool:
        return self._exp is not None

    @property
    def mult_order(self) -> int:
        return self.order - 1

    # ---- 元の生成 ----

    def element(self, code: int) -> FieldElement:
        if not 0 <= code < self.order:
            raise BadDigit(f"コードが範囲外です: {code}")
        return FieldElement(self, code)

    def from_int(self, k: int) -> FieldElement:
        """F_p の定数を埋め込む"""
        return FieldElement(self, k % self.p)

    def coerce(self, value: Union[FieldElement, int]) -> FieldElement:
        if isinstance(value, FieldElement):
            self._check(value)
            return value
        if isinstance(value, int):
            return self.from_int(value)
        raise TypeError(f"体の元ではありません: {value!r}")

    def random_element(self, rng: random.Random, nonzero: bool = False) -> FieldElement:
        return FieldElement(self, rng.randrange(1 if nonzero else 0, self.order))

    def alpha_power(self, k: int) -> FieldElement:
        return self.pow(self.generator, k)

    def _check(self, *elements: FieldElement):
        for e in elements:
            if e.ctx is not self and e.ctx != self:
                raise ContextMismatch(f"異なる体の元です: {e.ctx!r} と {self!r}")

    # ---- 加法 ----

    def add(self, a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
        b = self.coerce(b)
        self._check(a)
        p = self.p
        x, y = a.code, b.code
        r, m = 0, 1
        while x or y:
            x, dx = divmod(x, p)
            y, dy = divmod(y, p)
            r += ((dx + dy) % p) * m
            m *= p
        return FieldElement(self, r)

    def neg(self, a: FieldElement) -> FieldElement:
        self._check(a)
        p = self.p
        x = a.code
        r, m = 0, 1
        while x:
            x, dx = divmod(x, p)
            r += ((p - dx) % p) * m
            m *= p
        return FieldElement(self, r)

    def sub(self, a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
        return self.add(a, self.neg(self.coerce(b)))

    # ---- 乗法 ----

    def _mul_codes(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        if self._exp is not None:
            return self._exp[(self._log[x] + self._log[y]) % self.mult_order]
        p, d = self.p, self.degree
        return from_base_digits(
            _poly_mulmod(to_base_digits(x, p, d), to_base_digits(y, p, d), self.modulus, p), p
        )

    def mul(self, a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
        b = self.coerce(b)
        self._check(a)
        return FieldElement(self, self._mul_codes(a.code, b.code))

    def pow(self, a: FieldElement, k: int) -> FieldElement:
        self._check(a)
        if a.code == 0:
            if k == 0:
                return self.one
            if k < 0:
                raise DivisionByZero("0 の負べきは定義されません")
            return self.zero
        k %= self.mult_order
        if self._exp is not None:
            return FieldElement(self, self._exp[(self._log[a.code] * k) % self.mult_order])
        result, base = 1, a.code
        while k:
            if k & 1:
                result = self._mul_codes(result, base)
            base = self._mul_codes(base, base)
            k >>= 1
        return FieldElement(self, result)

    def inv(self, a: FieldElement) -> FieldElement:
        if a.code == 0:
            raise DivisionByZero("0 の逆元は存在しません")
        return self.pow(a, -1)

    def div(self, a: FieldElement, b: Union[FieldElement, int]) -> FieldElement:
        return self.mul(a, self.inv(self.coerce(b)))

    # ---- 特殊写像 ----

    def frobenius_q(self, a: FieldElement) -> FieldElement:
        return self.pow(a, self.q)

    def norm_q(self, a: FieldElement) -> FieldElement:
        return self.pow(a, self.q + 1)

    def half(self, a: FieldElement) -> FieldElement:
        return self.mul(a, self.inv2)

    def dlog(self, a: FieldElement) -> int:
        self._check(a)
        if a.code == 0:
            raise ZeroArgument("0 の離散対数は定義されません")
        if self._log is None:
            raise FieldTooLargeForTable(f"離散対数テーブルがありません（位数 {self.order}）")
        return self._log[a.code]

    def subfield_elements(self) -> FrozenSet[FieldElement]:
        """部分体 F_q = {0} ∪ {λ^{k(q+1)}}"""
        step = self.q + 1
        return frozenset([self.zero] + [self.pow(self.generator, k * step) for k in range(self.q - 1)])

    def kernel_closed_form(self) -> FrozenSet[FieldElement]:
        """x^q + x = 0 の解を λ^{(q+1)/2 + k(q+1)}, k = 0..q−2 と 0 で構成"""
        step = self.q + 1
        return frozenset(
            [self.zero] + [self.pow(self.generator, step // 2 + k * step) for k in range(self.q - 1)]
        )

    # ---- 文字列表現 ----

    def digits(self, a: FieldElement) -> str:
        self._check(a)
        if self.p > len(DIGIT_ALPHABET):
            raise BadDigit(f"p={self.p} は桁文字列で表現できません")
        return "".join(DIGIT_ALPHABET[c] for c in to_base_digits(a.code, self.p, self.degree))

    def parse_digits(self, s: str) -> FieldElement:
        s = s.strip().lower()
        if len(s) != self.degree:
            raise BadLength(f"桁数は {self.degree} である必要があります: {s!r}")
        coeffs = []
        for ch in s:
            value = DIGIT_ALPHABET.find(ch)
            if value < 0 or value >= self.p:
                raise BadDigit(f"不正な桁です: {ch!r}（p={self.p}）")
            coeffs.append(value)
        return FieldElement(self, from_base_digits(coeffs, self.p))

    def power_text(self, a: FieldElement) -> str:
        """'a^k' 形式（0 は '0'）"""
        if a.code == 0:
            return "0"
        return f"a^{self.dlog(a)}"

    def parse_element(self, token: str) -> FieldElement:
        """桁文字列・'a^k'・'0' のいずれかを読む"""
        token = token.strip()
        if token == "0":
            return self.zero
        if token.startswith(("a^", "α^")):
            try:
                k = int(token.split("^", 1)[1])
            except ValueError:
                raise BadDigit(f"指数が読めません: {token!r}")
            return self.pow(self.generator, k)
        return self.parse_digits(token)


# ---- 構成 ----

def _find_generator(p: int, modulus: Tuple[int, ...], requested: Optional[str]) -> int:
    d = len(modulus) - 1
    probe = FieldParams(p, d // 2, modulus, p, None, None)
    m = probe.mult_order
    factors = _prime_factors(m)

    def primitive(code: int) -> bool:
        if code == 0:
            return False
        e = probe.element(code)
        return all(probe.pow(e, m // r).code != 1 for r in factors)

    if requested is not None:
        code = probe.parse_digits(requested).code
        if not primitive(code):
            raise NonPrimitiveGenerator(f"生成元 {requested} は原始元ではありません")
        return code
    # 既定は z、原始元でなければコード順で最小の原始元
    if primitive(p):
        return p
    for code in range(2, probe.order):
        if primitive(code):
            logger.debug(f"z は原始元ではないため生成元にコード {code} を採用")
            return code
    raise NonPrimitiveGenerator("原始元が見つかりません")


@lru_cache(maxsize=32)
def _build_field(p: int, n: int, modulus: Tuple[int, ...], generator: Optional[str],
                 table_bound: int) -> FieldParams:
    if not _is_prime(p):
        raise NotPrime(f"{p} は素数ではありません")
    if p == 2:
        raise EvenCharacteristic("標数 2 では 2 で割れません")
    if n < 1:
        raise InvalidModulus(f"拡大次数が不正です: n={n}")
    d = 2 * n
    if len(modulus) != d + 1 or modulus[-1] != 1:
        raise InvalidModulus(f"法は次数 {d} のモニック多項式である必要があります: {list(modulus)}")
    if any(not 0 <= c < p for c in modulus):
        raise InvalidModulus(f"係数は [0, {p}) の範囲である必要があります: {list(modulus)}")
    if not _is_irreducible(modulus, p):
        raise ReducibleModulus(f"法 {list(modulus)} は F_{p} 上で可約です")

    generator_code = _find_generator(p, modulus, generator)
    order = p ** d
    exp_table = log_table = None
    if order <= table_bound:
        exp_table = [0] * (order - 1)
        log_table = [-1] * order
        gen = to_base_digits(generator_code, p, d)
        cur = [1] + [0] * (d - 1)
        for k in range(order - 1):
            c = from_base_digits(cur, p)
            exp_table[k] = c
            log_table[c] = k
            cur = _poly_mulmod(cur, gen, modulus, p)
    ctx = FieldParams(p, n, modulus, generator_code, exp_table, log_table)
    logger.debug(f"体を構成しました: {ctx!r} テーブル={'あり' if exp_table else 'なし'}")
    return ctx


def make_field(p: int, n: int, modulus: Sequence[int], generator: Optional[str] = None,
               table_bound: Optional[int] = None) -> FieldParams:
    """
    体 F_{p^{2n}} = F_p[z]/(g(z)) を構成します

    Args:
        p (int): 奇素数
        n (int): 基礎拡大次数（q = p^n）
        modulus (Sequence[int]): g(z) の係数 c0..c_{2n}（little-endian、モニック）
        generator (Optional[str]): 生成元の桁文字列（省略時は z か最小の原始元）
        table_bound (Optional[int]): exp/log テーブルを作る位数の上限

    Returns:
        FieldParams: 検証済みのコンテキスト
    """
    if table_bound is None:
        table_bound = get_settings().dlog_table_bound
    return _build_field(int(p), int(n), tuple(int(c) for c in modulus), generator, int(table_bound))


# ---- 演算インターフェース ----

def arith(kind: str, a: FieldElement, b: Union[FieldElement, int, None] = None) -> FieldElement:
    ctx = a.ctx
    if kind == "neg":
        return ctx.neg(a)
    if kind == "inv":
        return ctx.inv(a)
    if kind == "pow":
        return ctx.pow(a, int(b))
    ops = {"add": ctx.add, "sub": ctx.sub, "mul": ctx.mul, "div": ctx.div}
    if kind not in ops:
        raise ValueError(f"未知の演算です: {kind}")
    return ops[kind](a, b)


def frobenius_q(a: FieldElement) -> FieldElement:
    return a.ctx.frobenius_q(a)


def norm_q(a: FieldElement) -> FieldElement:
    return a.ctx.norm_q(a)


def half(a: FieldElement) -> FieldElement:
    return a.ctx.half(a)


def dlog(a: FieldElement) -> int:
    return a.ctx.dlog(a)


def digits(a: FieldElement) -> str:
    return a.ctx.digits(a)


def parse_digits(s: str, ctx: FieldParams) -> FieldElement:
    return ctx.parse_digits(s)


def qtrace_kernel(ctx: FieldParams, scan_bound: Optional[int] = None) -> FrozenSet[FieldElement]:
    """
    K = {x : x^q + x = 0} を全探索で求めます

    Args:
        ctx (FieldParams): 体
        scan_bound (Optional[int]): 走査する位数の上限

    Returns:
        FrozenSet[FieldElement]: 0 を含む位数 q の加法部分群
    """
    if scan_bound is None:
        scan_bound = get_settings().scan_bound
    if ctx.order > scan_bound:
        raise FieldTooLargeForScan(f"位数 {ctx.order} は走査上限 {scan_bound} を超えています")

    p = ctx.p
    codes = np.arange(ctx.order, dtype=np.int64)
    if ctx.has_table:
        exp = np.asarray(ctx._exp, dtype=np.int64)
        log = np.asarray(ctx._log, dtype=np.int64)
        frob = np.where(codes == 0, 0, exp[(log * ctx.q) % ctx.mult_order])
    else:
        frob = np.fromiter(
            (ctx.frobenius_q(FieldElement(ctx, int(c))).code for c in range(ctx.order)),
            dtype=np.int64, count=ctx.order,
        )
    place = p ** np.arange(ctx.degree, dtype=np.int64)
    lhs = (codes[:, None] // place) % p
    rhs = (frob[:, None] // place) % p
    mask = ((lhs + rhs) % p == 0).all(axis=1)
    kernel = frozenset(FieldElement(ctx, int(c)) for c in codes[mask])

    closed = ctx.kernel_closed_form()
    if closed != kernel:
        logger.warning(f"核の閉形式と走査結果が一致しません: 走査 {len(kernel)} 件、閉形式 {len(closed)} 件")
    return kernel
