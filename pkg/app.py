"""
MST3 暗号（エルミート群版）
コマンドラインのエントリポイント

主な機能:
- 鍵生成・暗号化・復号
- 計算例フィクスチャの照合
- 攻撃ベンチの実行

使い方:
    python app.py --help
"""

import sys

from mst3herm.cli import main

if __name__ == "__main__":
    sys.exit(main())
