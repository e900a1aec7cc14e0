"""
ロギング設定モジュール

このモジュールは、鍵生成・復号・フィクスチャ検証・攻撃ベンチの
ログを設定・管理するための機能を提供します。

主な機能:
- ログレベルの設定
- ログ出力先の設定（コンソール、JSONファイル）
- ログフォーマットの設定
- ログローテーションの設定
"""

import json
import logging
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler, TimedRotatingFileHandler
from pathlib import Path
from typing import Optional


class CustomJSONFormatter(logging.Formatter):
    """カスタムJSONフォーマッタ"""
    def format(self, record):
        log_obj = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno
        }

        if hasattr(record, "run_id"):
            log_obj["run_id"] = record.run_id

        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)

        if hasattr(record, "extra_data"):
            log_obj["extra"] = record.extra_data

        return json.dumps(log_obj, ensure_ascii=False, default=str)


def setup_logging(
    app_name: str = "mst3herm",
    log_level: str = "WARNING",
    log_dir: Optional[str] = None,
    max_bytes: int = 10485760,  # 10MB
    backup_count: int = 5
) -> logging.Logger:
    """
    ロギング設定をセットアップ

    同じ app_name で再度呼ばれた場合はハンドラを張り直します。

    Args:
        app_name (str): ロガー名
        log_level (str): ログレベル
        log_dir (Optional[str]): JSONログの保存ディレクトリ（None ならコンソールのみ）
        max_bytes (int): ログファイルの最大サイズ
        backup_count (int): 保持する過去ログファイル数

    Returns:
        logging.Logger: 設定済みのロガーインスタンス
    """
    logger = logging.getLogger(app_name)
    logger.setLevel(getattr(logging, log_level.upper()))

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        json_formatter = CustomJSONFormatter()

        # サイズベースのローテーション
        file_handler = RotatingFileHandler(
            filename=log_path / f"{app_name}.log",
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setFormatter(json_formatter)
        logger.addHandler(file_handler)

        # エラーログ用（日付ベースのローテーション）
        error_handler = TimedRotatingFileHandler(
            filename=log_path / f"{app_name}_error.log",
            when='midnight',
            interval=1,
            backupCount=30,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(json_formatter)
        logger.addHandler(error_handler)

    # 標準出力は結果の出力先なのでコンソールログは標準エラーへ
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    ))
    logger.addHandler(console_handler)

    return logger


class _ContextFilter(logging.Filter):
    def __init__(self, fields: dict):
        super().__init__()
        self.fields = fields

    def filter(self, record: logging.LogRecord) -> bool:
        extra = dict(getattr(record, "extra_data", {}) or {})
        for key, value in self.fields.items():
            if key == "run_id":
                record.run_id = value
            else:
                extra[key] = value
        if extra:
            record.extra_data = extra
        return True


class LogContext:
    """ログにコンテキスト情報を追加するためのコンテキストマネージャー"""
    def __init__(self, logger: logging.Logger, **kwargs):
        self.logger = logger
        self._filter = _ContextFilter(kwargs)

    def __enter__(self):
        # ハンドラ側に付けないと子ロガーからのレコードに効かない
        for handler in self.logger.handlers:
            handler.addFilter(self._filter)
        self.logger.addFilter(self._filter)
        return self.logger

    def __exit__(self, exc_type, exc_val, exc_tb):
        for handler in self.logger.handlers:
            handler.removeFilter(self._filter)
        self.logger.removeFilter(self._filter)
        return False
