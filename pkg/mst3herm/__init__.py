"""
mst3herm

三パラメータ群 H(P∞) 上の MST3 型公開鍵暗号と、その計算例・攻撃ベンチ
"""

__version__ = "0.1.0"
