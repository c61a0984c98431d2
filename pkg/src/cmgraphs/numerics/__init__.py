"""多倍長数値計算の基盤（区間付き複素数、q級数、格子簡約、整数関係探索）。"""

DEFAULT_PREC = 256
MIN_PREC = 64
