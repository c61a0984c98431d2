"""cmgraphs - 楕円曲線上のCM点・Heegner点の線形関係と特殊グラフの調査ツール"""

__version__ = "0.1.0"
