"""
設定管理モジュール

環境変数（および .env ファイル）から実行時設定を読み込みます。

主な機能:
- 離散対数テーブル・全探索・攻撃列挙の上限値
- フィクスチャの格納パス
- ログ出力とワーカー数の設定
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

DEFAULT_FIXTURE_PATH = Path(__file__).resolve().parent / "fixtures" / "worked_example"

_ENV_PREFIX = "MST3HERM_"


class Settings(BaseModel):
    dlog_table_bound: int = Field(default=2 ** 24, ge=1)
    scan_bound: int = Field(default=2 ** 20, ge=1)
    attack_bound: int = Field(default=2 ** 20, ge=1)
    fixture_path: Path = DEFAULT_FIXTURE_PATH
    log_level: str = "WARNING"
    log_dir: Optional[str] = None
    workers: int = Field(default=1, ge=1)

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"未知のログレベルです: {value}")
        return value


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    環境変数から設定を読み込む

    Returns:
        Settings: 検証済みの設定
    """
    load_dotenv()
    values = {}
    for name in Settings.model_fields:
        raw = os.getenv(_ENV_PREFIX + name.upper())
        if raw not in (None, ""):
            values[name] = raw
    return Settings(**values)
