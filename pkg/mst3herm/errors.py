"""
例外定義モジュール

このモジュールは、パッケージ全体で使用する例外クラスを定義します。

主な機能:
- データ/パラメータ不正の例外（終了コード 2）
- 暗号処理失敗の例外（終了コード 3）
"""

from typing import Optional


class Mst3HermError(Exception):
    """パッケージ共通の基底例外"""
    exit_code: int = 2


class DataError(Mst3HermError):
    """入力データ・パラメータの不正"""
    exit_code = 2


class CryptoError(Mst3HermError):
    """暗号処理の失敗"""
    exit_code = 3


# 体の構成
class NotPrime(DataError):
    pass


class EvenCharacteristic(DataError):
    pass


class ReducibleModulus(DataError):
    pass


class NonPrimitiveGenerator(DataError):
    pass


class InvalidModulus(DataError):
    pass


# 体の演算
class ContextMismatch(DataError):
    pass


class DivisionByZero(DataError):
    pass


class ZeroArgument(DataError):
    pass


class FieldTooLargeForTable(DataError):
    pass


class FieldTooLargeForScan(DataError):
    pass


# 文字列表現
class BadLength(DataError):
    pass


class BadDigit(DataError):
    pass


class ParseError(DataError):
    """行番号付きの構文エラー"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionMismatch(DataError):
    pass


# 対数署名
class OutOfRange(DataError):
    pass


class BadTypeForStage(DataError):
    pass


class ResidualNonzero(CryptoError):
    pass


# 群元・メッセージ
class BadGroupElement(DataError):
    pass


class BadMessage(DataError):
    pass


# 暗号化・攻撃
class FactorizationFailed(CryptoError):
    """復号時の分解失敗（鍵違いまたは暗号文の改ざん）"""

    def __init__(self, message: str, stage: Optional[int] = None):
        self.stage = stage
        if stage is not None:
            message = f"stage {stage}: {message}"
        super().__init__(message)


class SpaceTooLarge(DataError):
    pass
