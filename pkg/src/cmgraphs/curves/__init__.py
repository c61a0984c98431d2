"""有理数体上の楕円曲線、周期格子、高さ、モジュラー・パラメータ付け。"""
