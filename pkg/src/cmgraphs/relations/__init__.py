"""点の間の End(E) 線形関係（Masser の係数上界と関係格子）。"""
