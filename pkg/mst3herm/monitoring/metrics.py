"""
メトリクス収集モジュール

このモジュールは、暗号処理と検証の各種メトリクスを
収集・管理するための機能を提供します。

主な機能:
- 演算回数の追跡
- 失敗（例外種別ごと）の記録
- フィクスチャ検証結果の集計
- 攻撃ベンチの候補数の記録
"""

import time
from functools import wraps
from typing import Dict, Optional

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    generate_latest,
)

# 専用レジストリ（グローバルレジストリを汚さない）
REGISTRY = CollectorRegistry()

OPERATIONS_TOTAL = Counter(
    'mst3herm_operations_total',
    '実行した演算の回数',
    ['operation'],
    registry=REGISTRY
)

FAILURES_TOTAL = Counter(
    'mst3herm_failures_total',
    '失敗の発生数',
    ['error_type'],
    registry=REGISTRY
)

FIXTURE_CHECKS_TOTAL = Counter(
    'mst3herm_fixture_checks_total',
    'フィクスチャ検証の結果',
    ['status'],
    registry=REGISTRY
)

ATTACK_CANDIDATES = Gauge(
    'mst3herm_attack_candidates',
    '直近の攻撃で見つかった候補数',
    ['attack_id'],
    registry=REGISTRY
)

OPERATION_LATENCY = Histogram(
    'mst3herm_operation_latency_seconds',
    '演算の処理時間',
    ['operation'],
    registry=REGISTRY
)


class MetricsManager:
    def record_operation(self, operation: str):
        """演算を記録"""
        OPERATIONS_TOTAL.labels(operation=operation).inc()

    def record_failure(self, error_type: str):
        """失敗を記録"""
        FAILURES_TOTAL.labels(error_type=error_type).inc()

    def record_fixture_status(self, status: str):
        """フィクスチャ検証の結果を記録"""
        FIXTURE_CHECKS_TOTAL.labels(status=status).inc()

    def set_attack_candidates(self, attack_id: str, count: int):
        """攻撃の候補数を記録"""
        ATTACK_CANDIDATES.labels(attack_id=attack_id).set(count)

    def get_metric_value(self, name: str, labels: Optional[Dict[str, str]] = None) -> float:
        """
        メトリクスの現在値を取得

        Args:
            name (str): 接頭辞 mst3herm_ を除いたサンプル名（例: operations_total）
            labels (Optional[Dict[str, str]]): ラベル

        Returns:
            float: 値（未記録なら 0.0）
        """
        value = REGISTRY.get_sample_value(f"mst3herm_{name}", labels or {})
        return value if value is not None else 0.0

    def render(self) -> str:
        """Prometheus テキスト形式で出力"""
        return generate_latest(REGISTRY).decode("utf-8")

    @staticmethod
    def measure_latency(operation: str):
        """演算の処理時間を測定するデコレータ"""
        def decorator(func):
            @wraps(func)
            def wrapper(*args, **kwargs):
                start_time = time.perf_counter()
                metrics_manager.record_operation(operation)
                try:
                    return func(*args, **kwargs)
                except Exception as e:
                    metrics_manager.record_failure(type(e).__name__)
                    raise
                finally:
                    OPERATION_LATENCY.labels(operation=operation).observe(
                        time.perf_counter() - start_time
                    )
            return wrapper
        return decorator


# グローバルなメトリクスマネージャーのインスタンス
metrics_manager = MetricsManager()
