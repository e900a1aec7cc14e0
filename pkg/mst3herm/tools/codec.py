"""
テキスト形式の読み書きモジュール

すべての成果物を行指向の UTF-8 テキストで保存・復元します。
各ファイルは 1 行目に "MST3HERM v1" を持ち、2 行目以降にセクションが続きます。

主な機能:
- FIELD / TYPE1 / TYPE2 行（体と型）
- LS / COVER / G セクション（ブロック配列、行ごとに三つ組）
- TAU セクション（τ 列）
- PUBLICKEY / SECRETKEY / CIPHERTEXT / MESSAGE ファイル
"""

from functools import singledispatch
from typing import Dict, List, Optional, Tuple, Type, Union

from ..algebra.field import FieldParams, make_field
from ..algebra.hgroup import GroupElement, from_text, to_text
from ..errors import (
    BadDigit,
    BadGroupElement,
    BadLength,
    BadMessage,
    ContextMismatch,
    ParseError,
    VersionMismatch,
)
from ..scheme.logsig import BlockArray, LogSignature, LsType, RandomCover, Stage
from ..scheme.mst3 import Ciphertext, PublicKey, SchemeParams, SecretKey

FORMAT_NAME = "MST3HERM"
FORMAT_VERSION = "v1"
HEADER = f"{FORMAT_NAME} {FORMAT_VERSION}"


class LineReader:
    """空行と '#' コメントを飛ばしながら行番号付きで読む"""

    def __init__(self, text: str):
        self._lines = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                self._lines.append((number, line))
        self._pos = 0

    @property
    def last_line(self) -> Optional[int]:
        if not self._lines:
            return None
        return self._lines[min(self._pos, len(self._lines) - 1)][0]

    def at_end(self) -> bool:
        return self._pos >= len(self._lines)

    def peek(self) -> Optional[Tuple[int, str]]:
        return None if self.at_end() else self._lines[self._pos]

    def next(self) -> Tuple[int, str]:
        if self.at_end():
            raise ParseError("ファイルが途中で終わっています", line=self.last_line)
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def peek_keyword(self) -> Optional[str]:
        item = self.peek()
        return item[1].split()[0] if item else None

    def expect(self, keyword: str) -> Tuple[int, Dict[str, str], List[str]]:
        """keyword 行を読み、key=value 属性と残りのトークンを返す"""
        number, line = self.next()
        tokens = line.split()
        if tokens[0] != keyword:
            raise ParseError(f"{keyword} が必要ですが {tokens[0]!r} がありました", line=number)
        attrs, rest = {}, []
        for token in tokens[1:]:
            if "=" in token:
                key, value = token.split("=", 1)
                attrs[key] = value
            else:
                rest.append(token)
        return number, attrs, rest

    def read_header(self):
        number, line = self.next()
        if line == HEADER:
            return
        parts = line.split()
        if len(parts) == 2 and parts[0] == FORMAT_NAME:
            raise VersionMismatch(f"未対応の形式バージョンです: {parts[1]}（対応: {FORMAT_VERSION}）")
        raise ParseError(f"ヘッダ {HEADER!r} がありません", line=number)

    def finish(self):
        if not self.at_end():
            number, line = self.peek()
            raise ParseError(f"余分な行があります: {line!r}", line=number)


def _ints(value: str, number: int) -> List[int]:
    try:
        return [int(v) for v in value.split(",")]
    except ValueError:
        raise ParseError(f"整数の列ではありません: {value!r}", line=number)


def _attr(attrs: Dict[str, str], key: str, number: int) -> str:
    if key not in attrs:
        raise ParseError(f"属性 {key}= がありません", line=number)
    return attrs[key]


# ---- 体と型 ----

def field_line(ctx: FieldParams) -> str:
    modulus = ",".join(str(c) for c in ctx.modulus)
    return f"FIELD p={ctx.p} n={ctx.n} modulus={modulus} generator={ctx.digits(ctx.generator)}"


def read_field(reader: LineReader, table_bound: Optional[int] = None) -> FieldParams:
    number, attrs, _ = reader.expect("FIELD")
    p = _ints(_attr(attrs, "p", number), number)[0]
    n = _ints(_attr(attrs, "n", number), number)[0]
    modulus = _ints(_attr(attrs, "modulus", number), number)
    return make_field(p, n, modulus, attrs.get("generator"), table_bound)


def params_lines(sp: SchemeParams) -> List[str]:
    return [field_line(sp.field), f"TYPE1 {sp.type1.text()}", f"TYPE2 {sp.type2.text()}"]


def read_params(reader: LineReader) -> SchemeParams:
    ctx = read_field(reader)
    types = []
    for keyword in ("TYPE1", "TYPE2"):
        number, _, rest = reader.expect(keyword)
        if len(rest) != 1:
            raise ParseError(f"{keyword} には基数の列が 1 つ必要です", line=number)
        types.append(LsType(tuple(_ints(rest[0], number)), ctx.p))
    return SchemeParams(ctx, types[0], types[1])


# ---- 三つ組と配列 ----

def read_triple(reader: LineReader, ctx: FieldParams) -> GroupElement:
    number, line = reader.next()
    return parse_triple(line, ctx, number)


def parse_triple(text: str, ctx: FieldParams, number: Optional[int] = None) -> GroupElement:
    try:
        return from_text(text, ctx)
    except (BadDigit, BadLength, BadGroupElement) as e:
        raise ParseError(str(e), line=number) from e


def array_lines(keyword: str, array: BlockArray) -> List[str]:
    lines = [f"{keyword} type={array.ls_type.text()} stage={array.stage.value}"]
    lines += [to_text(row) for block in array.blocks for row in block]
    return lines


def read_array(reader: LineReader, keyword: str, ctx: FieldParams,
               cls: Type[BlockArray] = BlockArray) -> BlockArray:
    number, attrs, _ = reader.expect(keyword)
    radices = _ints(_attr(attrs, "type", number), number)
    try:
        stage = Stage(_attr(attrs, "stage", number))
    except ValueError:
        raise ParseError(f"未知の段です: {attrs['stage']!r}", line=number)
    ls_type = LsType(tuple(radices), ctx.p)
    blocks = [tuple(read_triple(reader, ctx) for _ in range(r)) for r in radices]
    return cls(ls_type, stage, tuple(blocks))


def tau_lines(stage: int, tau) -> List[str]:
    return [f"TAU stage={stage} count={len(tau)}"] + [to_text(t) for t in tau]


def read_tau(reader: LineReader, stage: int, ctx: FieldParams) -> Tuple[GroupElement, ...]:
    number, attrs, _ = reader.expect("TAU")
    if _attr(attrs, "stage", number) != str(stage):
        raise ParseError(f"TAU stage={stage} が必要です", line=number)
    count = _ints(_attr(attrs, "count", number), number)[0]
    return tuple(read_triple(reader, ctx) for _ in range(count))


# ---- ファイル単位 ----

def _document(marker: str, lines: List[str]) -> str:
    return "\n".join([HEADER, marker] + lines) + "\n"


def dump_public_key(pk: PublicKey) -> str:
    lines = params_lines(pk.params)
    lines += array_lines("COVER", pk.w1) + array_lines("COVER", pk.w2)
    lines += array_lines("G", pk.g1) + array_lines("G", pk.g2)
    return _document("PUBLICKEY", lines)


def _read_public_key(reader: LineReader) -> PublicKey:
    sp = read_params(reader)
    ctx = sp.field
    w1 = read_array(reader, "COVER", ctx, RandomCover)
    w2 = read_array(reader, "COVER", ctx, RandomCover)
    g1 = read_array(reader, "G", ctx)
    g2 = read_array(reader, "G", ctx)
    return PublicKey(sp, w1, w2, g1, g2)


def dump_secret_key(sk: SecretKey) -> str:
    lines = params_lines(sk.params)
    lines += array_lines("LS", sk.v1) + array_lines("LS", sk.v2)
    lines += tau_lines(1, sk.tau1) + tau_lines(2, sk.tau2)
    return _document("SECRETKEY", lines)


def _read_secret_key(reader: LineReader) -> SecretKey:
    sp = read_params(reader)
    ctx = sp.field
    v1 = read_array(reader, "LS", ctx, LogSignature)
    v2 = read_array(reader, "LS", ctx, LogSignature)
    tau1 = read_tau(reader, 1, ctx)
    tau2 = read_tau(reader, 2, ctx)
    return SecretKey(sp, v1, v2, tau1, tau2)


def dump_ciphertext(ct: Ciphertext) -> str:
    return _document("CIPHERTEXT", [field_line(ct.y1.ctx)] + [to_text(y) for y in ct.elements()])


def _read_ciphertext(reader: LineReader) -> Ciphertext:
    ctx = read_field(reader)
    first = reader.peek()
    ys = [read_triple(reader, ctx) for _ in range(4)]
    try:
        return Ciphertext(*ys)
    except BadGroupElement as e:
        raise ParseError(str(e), line=first[0] if first else None) from e


def dump_message(x: GroupElement) -> str:
    return _document("MESSAGE", [field_line(x.ctx), to_text(x)])


def parse_message(text: str, ctx: FieldParams) -> GroupElement:
    """
    メッセージを読む

    ヘッダ付きの MESSAGE ファイルか、三つ組 1 行だけのテキストを受け付けます。
    成分は桁文字列・'a^k'・'0' のいずれでも構いません。

    Raises:
        BadMessage: α 成分が 0
    """
    reader = LineReader(text)
    if reader.peek_keyword() == FORMAT_NAME:
        reader.read_header()
        reader.expect("MESSAGE")
        if reader.peek_keyword() == "FIELD":
            if read_field(reader) != ctx:
                raise ContextMismatch("メッセージの体が鍵の体と一致しません")
    number, line = reader.next()
    reader.finish()
    body = line.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    tokens = body.split(",")
    if len(tokens) != 3:
        raise ParseError(f"三つ組ではありません: {line!r}", line=number)
    try:
        a = ctx.parse_element(tokens[0])
    except (BadDigit, BadLength) as e:
        raise ParseError(str(e), line=number) from e
    if not a:
        raise BadMessage("メッセージの α 成分は 0 にできません")
    return parse_triple(line, ctx, number)


def dump_array_file(array: BlockArray) -> str:
    keyword = "LS" if isinstance(array, LogSignature) else "COVER" if isinstance(array, RandomCover) else "G"
    return "\n".join([HEADER, field_line(array.ctx)] + array_lines(keyword, array)) + "\n"


@singledispatch
def serialize(obj) -> str:
    raise TypeError(f"シリアライズできない型です: {type(obj).__name__}")


@serialize.register
def _(obj: FieldParams) -> str:
    return "\n".join([HEADER, field_line(obj)]) + "\n"


@serialize.register
def _(obj: SchemeParams) -> str:
    return "\n".join([HEADER] + params_lines(obj)) + "\n"


@serialize.register
def _(obj: BlockArray) -> str:
    return dump_array_file(obj)


serialize.register(PublicKey, dump_public_key)
serialize.register(SecretKey, dump_secret_key)
serialize.register(Ciphertext, dump_ciphertext)
serialize.register(GroupElement, dump_message)


_ARRAY_CLASSES = {"LS": LogSignature, "COVER": RandomCover, "G": BlockArray}


def parse(text: str) -> Union[FieldParams, SchemeParams, BlockArray, PublicKey, SecretKey, Ciphertext, GroupElement]:
    """serialize の出力を読み戻す（2 行目のマーカーで種類を判定）"""
    reader = LineReader(text)
    reader.read_header()
    keyword = reader.peek_keyword()
    if keyword == "PUBLICKEY":
        reader.next()
        result = _read_public_key(reader)
    elif keyword == "SECRETKEY":
        reader.next()
        result = _read_secret_key(reader)
    elif keyword == "CIPHERTEXT":
        reader.next()
        result = _read_ciphertext(reader)
    elif keyword == "MESSAGE":
        reader.next()
        ctx = read_field(reader)
        result = read_triple(reader, ctx)
    elif keyword == "FIELD":
        ctx = read_field(reader)
        following = reader.peek_keyword()
        if following == "TYPE1":
            reader = LineReader(text)
            reader.read_header()
            result = read_params(reader)
        elif following in _ARRAY_CLASSES:
            result = read_array(reader, following, ctx, _ARRAY_CLASSES[following])
        else:
            result = ctx
    else:
        number = reader.peek()[0] if reader.peek() else None
        raise ParseError(f"未知のセクションです: {keyword!r}", line=number)
    reader.finish()
    return result


def load_public_key(text: str) -> PublicKey:
    result = parse(text)
    if not isinstance(result, PublicKey):
        raise ParseError("公開鍵ファイルではありません", line=2)
    return result


def load_secret_key(text: str) -> SecretKey:
    result = parse(text)
    if not isinstance(result, SecretKey):
        raise ParseError("秘密鍵ファイルではありません", line=2)
    return result


def load_ciphertext(text: str) -> Ciphertext:
    result = parse(text)
    if not isinstance(result, Ciphertext):
        raise ParseError("暗号文ファイルではありません", line=2)
    return result
