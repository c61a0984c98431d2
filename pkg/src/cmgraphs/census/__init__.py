"""特殊グラフの走査（従属な組の分類と模範性の判定）。"""
