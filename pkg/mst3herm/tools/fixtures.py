"""
計算例フィクスチャと照合レポートのモジュール

F_729 上の計算例（対数署名・カバー・τ 列・公開配列・暗号化と復号の各段の値）を
同梱のテキストから読み込み、実装の演算で再計算して照合します。

主な機能:
- フィクスチャの読み込み（表が途中で切れていても読める）
- 各値の照合と CONFIRMED / CORRECTED / SKIPPED-TRUNCATED / FAILED の判定
- pandas による整形レポートと key=value 形式の出力
"""

import logging
from dataclasses import dataclass
from dataclasses import field as dataclass_field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel

from ..algebra.field import FieldElement, FieldParams, qtrace_kernel
from ..algebra.hgroup import GroupElement, f1_project, f2_project, g_inv, g_mul, g_product
from ..config import get_settings
from ..errors import FieldTooLargeForTable, Mst3HermError, ParseError
from ..monitoring.metrics import metrics_manager
from ..scheme.logsig import (
    BlockArray,
    LogSignature,
    RandomCover,
    Stage,
    cover_evaluate,
    decompose,
    ls_factor,
    ls_factor_trace,
    stage_row,
    tame_violations,
)
from ..scheme.mst3 import (
    Ciphertext,
    PublicKey,
    SchemeParams,
    SecretKey,
    build_public_arrays,
    encrypt,
    recover_x,
    stage_one,
    stage_two,
)
from .codec import LineReader, parse_triple, read_params

logger = logging.getLogger(__name__)

_SECTION_KEYWORDS = ("LS", "COVER", "G", "TAU", "VECTORS")


class CheckStatus(str, Enum):
    CONFIRMED = "CONFIRMED"
    CORRECTED = "CORRECTED"
    SKIPPED = "SKIPPED-TRUNCATED"
    FAILED = "FAILED"


class FixtureCheck(BaseModel):
    check: str
    status: CheckStatus
    expected: str
    computed: str
    note: str = ""


@dataclass
class PrintedRow:
    """対数署名の 1 行（値の桁文字列と印字された三つ組）"""
    label: str
    stage: Stage
    digits: str
    printed: GroupElement


@dataclass
class FixtureSet:
    params: SchemeParams
    v1: LogSignature
    v2: LogSignature
    ls_rows: List[PrintedRow]
    tau1: Tuple[GroupElement, ...]
    tau2: Tuple[GroupElement, ...]
    tau1_inverse: Tuple[GroupElement, ...]
    tau2_inverse: Tuple[GroupElement, ...]
    w1: Optional[RandomCover]
    w2: Optional[RandomCover]
    g1: Optional[BlockArray]
    g2: Optional[BlockArray]
    vectors: Dict[str, str]
    truncated: Dict[str, str] = dataclass_field(default_factory=dict)

    @property
    def ctx(self) -> FieldParams:
        return self.params.field

    @property
    def complete(self) -> bool:
        return not self.truncated

    def secret_key(self) -> SecretKey:
        return SecretKey(self.params, self.v1, self.v2, self.tau1, self.tau2)

    def public_key(self) -> PublicKey:
        """カバーと公開配列が揃っているときだけ組み立てられる"""
        if not self.complete:
            raise ParseError(f"表が途中で切れています: {', '.join(sorted(self.truncated))}")
        return PublicKey(self.params, self.w1, self.w2, self.g1, self.g2)


# ---- 読み込み ----

def _read_rows(reader: LineReader) -> List[Tuple[int, str]]:
    rows = []
    while not reader.at_end() and reader.peek_keyword() not in _SECTION_KEYWORDS:
        rows.append(reader.next())
    return rows


def _read_ls_file(text: str, sp: SchemeParams) -> Tuple[List[LogSignature], List[PrintedRow]]:
    ctx = sp.field
    reader = LineReader(text)
    reader.read_header()
    arrays, printed = [], []
    for name, ls_type in (("v1", sp.type1), ("v2", sp.type2)):
        number, attrs, _ = reader.expect("LS")
        stage = Stage(attrs.get("stage", ""))
        rows = _read_rows(reader)
        if len(rows) != sum(ls_type.radices):
            raise ParseError(f"{name} の行数 {len(rows)} が型 {ls_type.text()} と一致しません", line=number)
        blocks, it = [], iter(rows)
        for k, r in enumerate(ls_type.radices):
            block = []
            for n in range(r):
                line_no, line = next(it)
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise ParseError("'<桁文字列> <三つ組>' の形式ではありません", line=line_no)
                try:
                    v = ctx.parse_digits(parts[0])
                except Mst3HermError as e:
                    raise ParseError(str(e), line=line_no) from e
                block.append(stage_row(ctx, stage, v))
                printed.append(PrintedRow(f"{name} block {k + 1} row {n}", stage, parts[0],
                                          parse_triple(parts[1], ctx, line_no)))
            blocks.append(tuple(block))
        arrays.append(LogSignature(ls_type, stage, tuple(blocks)))
    reader.finish()
    return arrays, printed


def _read_optional_arrays(text: str, keyword: str, sp: SchemeParams, cls,
                          truncated: Dict[str, str], names: Tuple[str, str]) -> List[Optional[BlockArray]]:
    ctx = sp.field
    reader = LineReader(text)
    reader.read_header()
    out = []
    for name, ls_type in zip(names, (sp.type1, sp.type2)):
        if reader.at_end():
            truncated[name] = "セクションがありません"
            out.append(None)
            continue
        _, attrs, _ = reader.expect(keyword)
        stage = Stage(attrs.get("stage", ""))
        rows = [parse_triple(line, ctx, number) for number, line in _read_rows(reader)]
        if len(rows) != sum(ls_type.radices):
            truncated[name] = f"{len(rows)} / {sum(ls_type.radices)} 行"
            out.append(None)
            continue
        blocks, pos = [], 0
        for r in ls_type.radices:
            blocks.append(tuple(rows[pos:pos + r]))
            pos += r
        out.append(cls(ls_type, stage, tuple(blocks)))
    return out


def _read_tau_file(text: str, ctx: FieldParams):
    reader = LineReader(text)
    reader.read_header()
    result = []
    for stage in (1, 2):
        pairs = read_tau_pairs(reader, stage, ctx)
        result.append((tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)))
    reader.finish()
    return result


def read_tau_pairs(reader: LineReader, stage: int, ctx: FieldParams) -> List[Tuple[GroupElement, GroupElement]]:
    """'τ τ⁻¹' の 2 つ組の行を読む"""
    number, attrs, _ = reader.expect("TAU")
    if attrs.get("stage") != str(stage):
        raise ParseError(f"TAU stage={stage} が必要です", line=number)
    pairs = []
    for line_no, line in _read_rows(reader):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("'<τ> <τ⁻¹>' の形式ではありません", line=line_no)
        pairs.append((parse_triple(parts[0], ctx, line_no), parse_triple(parts[1], ctx, line_no)))
    return pairs


def _read_vectors(text: str) -> Dict[str, str]:
    reader = LineReader(text)
    reader.read_header()
    reader.expect("VECTORS")
    vectors = {}
    while not reader.at_end():
        number, line = reader.next()
        if "=" not in line:
            raise ParseError(f"'名前 = 値' の形式ではありません: {line!r}", line=number)
        key, value = line.split("=", 1)
        vectors[key.strip()] = value.strip()
    return vectors


def load_fixtures(path: Optional[Path] = None) -> FixtureSet:
    """
    同梱の計算例を読み込みます

    Args:
        path (Optional[Path]): フィクスチャのディレクトリ（省略時は設定値）

    Returns:
        FixtureSet: 読み込んだフィクスチャ
    """
    base = Path(path) if path is not None else get_settings().fixture_path

    def read(name: str) -> str:
        return (base / name).read_text(encoding="utf-8")

    reader = LineReader(read("params.txt"))
    reader.read_header()
    sp = read_params(reader)
    ctx = sp.field

    (v1, v2), ls_rows = _read_ls_file(read("ls_arrays.txt"), sp)
    (tau1, tau1_inv), (tau2, tau2_inv) = _read_tau_file(read("tau.txt"), ctx)

    truncated: Dict[str, str] = {}
    w1, w2 = _read_optional_arrays(read("covers.txt"), "COVER", sp, RandomCover, truncated, ("w1", "w2"))
    g1, g2 = _read_optional_arrays(read("public_arrays.txt"), "G", sp, BlockArray, truncated, ("g1", "g2"))
    if truncated:
        logger.info(f"途中で切れている表があります: {truncated}")

    return FixtureSet(sp, v1, v2, ls_rows, tau1, tau2, tau1_inv, tau2_inv,
                      w1, w2, g1, g2, _read_vectors(read("vectors.txt")), truncated)


# ---- 照合 ----

def show(value: Any) -> str:
    """値を a^k 表記で表示（テーブルが無い体では桁文字列）"""
    if isinstance(value, GroupElement):
        return "(" + ",".join(show(s) for s in (value.a, value.b, value.c)) + ")"
    if isinstance(value, FieldElement):
        try:
            return value.ctx.power_text(value)
        except FieldTooLargeForTable:
            return value.ctx.digits(value)
    if isinstance(value, (tuple, list)):
        if any(isinstance(v, GroupElement) for v in value):
            return " ".join(show(v) for v in value)
        return ",".join(str(v) for v in value)
    return str(value)


class FixtureReport:
    def __init__(self, checks: List[FixtureCheck]):
        self.checks = checks

    @property
    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.model_dump(mode="json") for c in self.checks],
                            columns=["check", "status", "expected", "computed", "note"])

    def counts(self) -> Dict[str, int]:
        counts = {s.value: 0 for s in CheckStatus}
        for c in self.checks:
            counts[c.status.value] += 1
        return counts

    def status_of(self, check: str) -> CheckStatus:
        for c in self.checks:
            if c.check == check:
                return c.status
        raise KeyError(check)

    @property
    def ok(self) -> bool:
        """説明のつかない失敗（FAILED）が無い"""
        return all(c.status is not CheckStatus.FAILED for c in self.checks)

    def render_text(self) -> str:
        table = self.frame.to_string(index=False, justify="left")
        summary = "  ".join(f"{k}={v}" for k, v in self.counts().items())
        return f"{table}\n\n{summary}"

    def render_records(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(
                f"check={c.check} status={c.status.value} expected={c.expected} computed={c.computed}"
            )
        return "\n".join(lines)


class _Checker:
    def __init__(self):
        self.checks: List[FixtureCheck] = []

    def add(self, check: str, status: CheckStatus, expected: str, computed: str, note: str = ""):
        self.checks.append(FixtureCheck(check=check, status=status, expected=expected,
                                        computed=computed, note=note))
        metrics_manager.record_fixture_status(status.value)
        if status is CheckStatus.CORRECTED:
            logger.warning(f"計算例と異なる値: {check} 印字={expected} 再計算={computed}")
        elif status is CheckStatus.FAILED:
            logger.error(f"照合に失敗: {check}: {computed}")

    def compare(self, check: str, expected: Callable[[], Any], computed: Callable[[], Any],
                note: str = "", needs: Tuple[Optional[str], ...] = (), fs: Optional[FixtureSet] = None):
        missing = [n for n in needs if fs is not None and n in fs.truncated]
        if missing:
            self.add(check, CheckStatus.SKIPPED, "-", "-", f"表が不完全: {', '.join(missing)}")
            return
        try:
            want = expected()
        except Exception as e:
            self.add(check, CheckStatus.FAILED, "?", f"{type(e).__name__}: {e}", "期待値が読めません")
            return
        try:
            got = computed()
        except Exception as e:
            self.add(check, CheckStatus.FAILED, show(want), f"{type(e).__name__}: {e}", note)
            return
        status = CheckStatus.CONFIRMED if got == want else CheckStatus.CORRECTED
        self.add(check, status, show(want), show(got), note)


def _peel_text(ls: LogSignature, target: FieldElement) -> str:
    ctx = target.ctx
    return " ".join(
        f"{ctx.digits(s.residual_before)}:{ctx.digits(s.row_value)}:{ctx.digits(s.residual_after)}"
        for s in ls_factor_trace(ls, target)
    )


def run_fixture_checks(fs: FixtureSet) -> FixtureReport:
    """
    フィクスチャの各値を再計算して照合します（例外は FAILED として記録）

    Args:
        fs (FixtureSet): load_fixtures の結果

    Returns:
        FixtureReport: 照合レポート
    """
    ctx = fs.ctx
    vec = fs.vectors
    chk = _Checker()

    def element(key: str) -> GroupElement:
        return parse_triple(vec[key], ctx)

    def elements(key: str) -> List[GroupElement]:
        return [parse_triple(t, ctx) for t in vec[key].split()]

    def ciphertext() -> Ciphertext:
        return Ciphertext(element("y1"), element("y2"), element("y3"), element("y4"))

    q1 = lambda: int(vec["q1"])
    q2 = lambda: int(vec["q2"])

    # 体
    chk.compare("field generator", lambda: "010000", lambda: ctx.digits(ctx.generator),
                "生成元は z の類")
    chk.compare("field alpha^364", lambda: ctx.parse_digits(vec["alpha_364"]),
                lambda: ctx.alpha_power(364), "α^{(q²−1)/2} = −1")
    chk.compare("field kernel size", lambda: int(vec["kernel_size"]),
                lambda: len(qtrace_kernel(ctx)),
                "k = 0..q−1 の列挙は k=0 と k=q−1 が重なる。0 を含めて q 個")

    # 秘密の対数署名（値 → 三つ組の規則）
    for row in fs.ls_rows:
        rule = "S(1, v, N(v)/2)" if row.stage is Stage.BETA else "S(1, 0, v)"
        chk.compare(f"ls {row.label}", lambda row=row: row.printed,
                    lambda row=row: stage_row(ctx, row.stage, ctx.parse_digits(row.digits)),
                    f"{row.digits} → {rule}")
    for name, ls in (("v1", fs.v1), ("v2", fs.v2)):
        chk.compare(f"ls {name} tame structure", lambda: [], lambda ls=ls: tame_violations(ls),
                    "担当桁に行番号、上位は 0")

    # τ 列
    for stage, taus, inverses in ((1, fs.tau1, fs.tau1_inverse), (2, fs.tau2, fs.tau2_inverse)):
        for i, (tau, inv) in enumerate(zip(taus, inverses)):
            chk.compare(f"tau {i}({stage}) inverse", lambda inv=inv: inv, lambda tau=tau: g_inv(tau),
                        "一般公式による逆元")
    chk.compare("tau hinge", lambda: fs.tau1[-1], lambda: fs.tau2[0], "τ_s(1) = τ_0(2)")

    # 公開配列 g = τ⁻¹·f(w)·v·τ
    for name, ls, cover_name, tau, projection in (
        ("g1", fs.v1, "w1", fs.tau1, f1_project),
        ("g2", fs.v2, "w2", fs.tau2, f2_project),
    ):
        printed = getattr(fs, name)
        cover = getattr(fs, cover_name)
        if printed is None or cover is None:
            chk.compare(f"{name} rows", lambda: None, lambda: None, needs=(name, cover_name), fs=fs)
            continue
        rebuilt = build_public_arrays(ls, cover, tau, projection)
        for k, (pb, rb) in enumerate(zip(printed.blocks, rebuilt.blocks)):
            for n, (p_row, r_row) in enumerate(zip(pb, rb)):
                chk.compare(f"{name} block {k + 1} row {n}", lambda p_row=p_row: p_row,
                            lambda r_row=r_row: r_row, "τ_{k−1}⁻¹·f(w)·v·τ_k")

    # 混合基数
    chk.compare("decompose q1", lambda: tuple(int(x) for x in vec["q1_digits"].split(",")),
                lambda: decompose(q1(), fs.params.type1))
    chk.compare("decompose q2", lambda: tuple(int(x) for x in vec["q2_digits"].split(",")),
                lambda: decompose(q2(), fs.params.type2))

    # 公開配列の積
    for name, array, qf in (("g1", "g1", q1), ("g2", "g2", q2)):
        chk.compare(f"{name}(Q) product of printed rows",
                    lambda name=name: element(f"{name}_q{name[1]}"),
                    lambda name=name: g_product(elements(f"{name}_q{name[1]}_rows"), ctx))
        chk.compare(f"{name}(Q) rows selected from array",
                    lambda name=name: elements(f"{name}_q{name[1]}_rows"),
                    lambda array=array, qf=qf: getattr(fs, array).rows(qf()),
                    needs=(array,), fs=fs)

    # 暗号化
    def encrypted() -> Ciphertext:
        return encrypt(fs.public_key(), element("message"), (q1(), q2()))

    for y in ("y1", "y2", "y3", "y4"):
        chk.compare(f"encrypt {y}", lambda y=y: element(y), lambda y=y: getattr(encrypted(), y),
                    "y₃, y₄ は行ごとの射影の積" if y in ("y3", "y4") else "",
                    needs=("w1", "w2", "g1", "g2"), fs=fs)
    chk.compare("encrypt y3 literal", lambda: element("y3"),
                lambda: f1_project(cover_evaluate(fs.w1, q1())),
                "f₁ をカバー積にそのまま適用した値（往復しない読み方）", needs=("w1",), fs=fs)
    chk.compare("encrypt y4 literal", lambda: element("y4"),
                lambda: f2_project(cover_evaluate(fs.w2, q2())),
                "f₂ をカバー積にそのまま適用した値（往復しない読み方）", needs=("w2",), fs=fs)

    # 復号 段 1
    sk = fs.secret_key()
    chk.compare("decrypt d1", lambda: element("d1"), lambda: stage_one(sk, ciphertext())[0])
    chk.compare("decrypt y3 inverse", lambda: element("y3_inverse"), lambda: g_inv(element("y3")))
    chk.compare("decrypt dstar1", lambda: element("dstar1"), lambda: stage_one(sk, ciphertext())[1])
    chk.compare("decrypt v1(Q1)", lambda: ctx.parse_digits(vec["v1_q1"]),
                lambda: stage_one(sk, ciphertext())[1].b)
    chk.compare("peel v1", lambda: vec["peel_v1"],
                lambda: _peel_text(fs.v1, ctx.parse_digits(vec["v1_q1"])), "残差:行:差")
    chk.compare("recover q1", q1, lambda: ls_factor(fs.v1, ctx.parse_digits(vec["v1_q1"])))

    # 復号 段 2
    chk.compare("decrypt y2 stripped", lambda: element("y2_stripped"),
                lambda: g_mul(g_inv(element("g1_q1")), element("y2")))
    chk.compare("decrypt d2", lambda: element("d2"),
                lambda: stage_two(sk, element("y2_stripped"), element("y4"))[0])
    chk.compare("decrypt dstar2", lambda: element("dstar2"),
                lambda: stage_two(sk, element("y2_stripped"), element("y4"))[1])
    chk.compare("decrypt v2(Q2)", lambda: ctx.parse_digits(vec["v2_q2"]),
                lambda: stage_two(sk, element("y2_stripped"), element("y4"))[1].c)
    chk.compare("peel v2", lambda: vec["peel_v2"],
                lambda: _peel_text(fs.v2, ctx.parse_digits(vec["v2_q2"])), "残差:行:差")
    chk.compare("recover q2", q2, lambda: ls_factor(fs.v2, ctx.parse_digits(vec["v2_q2"])))

    # メッセージの復元
    chk.compare("cover w1(Q1)", lambda: element("w1_q1"), lambda: cover_evaluate(fs.w1, q1()),
                needs=("w1",), fs=fs)
    chk.compare("cover w2(Q2)", lambda: element("w2_q2"), lambda: cover_evaluate(fs.w2, q2()),
                needs=("w2",), fs=fs)
    chk.compare("recover x from printed operands", lambda: element("message"),
                lambda: g_mul(g_inv(g_mul(element("w1_q1"), element("w2_q2"))), element("y1")))
    chk.compare("recover x", lambda: element("message"),
                lambda: recover_x(fs.public_key(), ciphertext(), q1(), q2()),
                needs=("w1", "w2"), fs=fs)

    report = FixtureReport(chk.checks)
    logger.info(f"フィクスチャ照合: {report.counts()}")
    return report
