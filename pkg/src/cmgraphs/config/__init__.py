"""設定ファイルの読み込みと実行設定モデル。"""
