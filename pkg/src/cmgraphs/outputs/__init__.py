"""報告の出力（コンソールとファイル）。"""
