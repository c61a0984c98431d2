from pathlib import Path

from src.cmgraphs.config.loader import ConfigLoader, RunConfig


class TestSampleConfig:
    """サンプル設定ファイルのテストクラス。"""

    def setup_method(self) -> None:
        """各テストメソッドの前に実行される初期化処理。"""
        self.loader = ConfigLoader()
        self.sample_config_path = Path("config/sample.yaml")

    def test_sample_config_exists(self) -> None:
        """サンプル設定ファイルが存在することをテスト。"""
        assert self.sample_config_path.exists()

    def test_sample_config_has_sections(self) -> None:
        """settings と scan の二つのセクションを持つことをテスト。"""
        config = self.loader.load_config(self.sample_config_path)
        assert "settings" in config
        assert "scan" in config

    def test_sample_config_builds(self) -> None:
        """サンプルがそのまま RunConfig として検証を通ることをテスト。"""
        config = self.loader.build(self.sample_config_path)
        assert isinstance(config, RunConfig)
        assert config.output_format == "json"
        assert config.scan.n == 2
        assert config.scan.prec == 256
        assert config.scan.small_disc == 163
        assert "~" not in str(config.cache_dir)
