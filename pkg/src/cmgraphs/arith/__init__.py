"""虚二次判別式・二元二次形式・j関数・モジュラー多項式。"""
