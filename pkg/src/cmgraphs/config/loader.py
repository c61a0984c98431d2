"""設定ファイルの読み込みと実行設定。

YAML の ``settings`` と ``scan`` セクションを pydantic モデルに読み込み、
コマンドライン引数の値（None 以外）で上書きします。
パスの ~ と $VAR は展開されます。
"""

import os
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..arith.modular import MAX_MODPOLY_LEVEL
from ..numerics import DEFAULT_PREC, MIN_PREC

CACHE_DIR_ENV = "CMGRAPHS_CACHE_DIR"
MAX_DELTA = 5000


def default_cache_dir() -> Path:
    """環境変数 CMGRAPHS_CACHE_DIR、なければ ~/.cache/cmgraphs。"""
    value = os.environ.get(CACHE_DIR_ENV)
    if value:
        return Path(expand_env_vars(value))
    return Path(os.path.expanduser("~")) / ".cache" / "cmgraphs"


def expand_env_vars(text: str) -> str:
    """文字列内の環境変数を展開する（~/や$HOME等）。"""
    if text.startswith("~"):
        text = text.replace("~", os.path.expanduser("~"), 1)
    return os.path.expandvars(text)


class ScanConfig(BaseModel):
    """走査の範囲と精度。"""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(1, ge=1, le=6, description="組の長さ")
    delta_max: int = Field(100, ge=1, le=MAX_DELTA, description="|判別式| の上限")
    isog_bound: int = Field(
        10, ge=1, le=MAX_MODPOLY_LEVEL, description="X_N 関係を探す N の上限"
    )
    coeff_cap: int = Field(10, ge=1, description="関係の係数の上限")
    small_disc: int = Field(
        163, ge=0, description="小さい判別式として関係を説明できる |判別式| の上限"
    )
    prec: int = Field(2 * DEFAULT_PREC, ge=MIN_PREC, description="ビット精度")
    samples: int = Field(4, ge=2, description="族の判定に使う標本数")
    depth: int = Field(2, ge=0, le=MAX_MODPOLY_LEVEL, description="ヘッケ軌道の次数の上限")
    degree: int = Field(1, ge=1, le=MAX_MODPOLY_LEVEL, description="ヘッケ対応の次数 M")
    torsion_exponent: int = Field(1, ge=1, description="周期を割る数 t")
    gamma_box: int = Field(10, ge=0, description="Gamma の係数の箱 [-B, B]")
    workers: int = Field(0, ge=0, description="0 なら逐次実行")
    seed: int = Field(0, description="族の標本の乱数シード")


class RunConfig(BaseModel):
    """コマンド全体の設定。"""

    model_config = ConfigDict(extra="forbid")

    prec: int = Field(DEFAULT_PREC, ge=MIN_PREC)
    cache_dir: Path = Field(default_factory=default_cache_dir)
    output_format: Literal["json", "csv"] = "json"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    scan: ScanConfig = Field(default_factory=ScanConfig)

    @field_validator("cache_dir", mode="before")
    @classmethod
    def _expand_cache_dir(cls, value: Any) -> Any:
        if isinstance(value, str):
            return Path(expand_env_vars(value))
        return value

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_level(cls, value: Any) -> Any:
        return value.upper() if isinstance(value, str) else value


SETTINGS_KEYS = {"prec", "cache_dir", "output_format", "log_level"}


class ConfigLoader:
    """YAML 設定ファイルを読み込み、RunConfig を組み立てる。"""

    def load_config(self, config_path: Path) -> Dict[str, Any]:
        """YAML設定ファイルを読み込み、設定辞書として返す。

        Raises:
            FileNotFoundError: ファイルが存在しない場合
            yaml.YAMLError: YAML形式が不正な場合
        """
        if not config_path.exists():
            raise FileNotFoundError(f"設定ファイルが見つかりません: {config_path}")
        result = yaml.safe_load(config_path.read_text(encoding="utf-8"))
        if not isinstance(result, dict):
            return {}
        return result

    def build(
        self,
        config_path: Optional[Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> RunConfig:
        """ファイルの値の上に overrides（None の項目は無視）を重ねて検証する。

        overrides のキーは settings の項目名か ScanConfig のフィールド名です。
        """
        raw = self.load_config(config_path) if config_path else {}
        settings = dict(raw.get("settings") or {})
        if "format" in settings:
            settings["output_format"] = settings.pop("format")
        scan = dict(raw.get("scan") or {})
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key == "prec":
                settings[key] = scan[key] = value
            elif key in SETTINGS_KEYS:
                settings[key] = value
            elif key in ScanConfig.model_fields:
                scan[key] = value
            else:
                raise KeyError(f"unknown configuration key: {key}")
        return RunConfig(**settings, scan=ScanConfig(**scan))
