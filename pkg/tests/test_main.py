"""main.py のテスト。

サブコマンドの実行、報告の書式、終了コードを確認します。
"""

import io
import json

import pytest

from src.cmgraphs.main import build_parser, main, parse_tau
from src.cmgraphs.arith.quadforms import TauPoint
from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.outputs.console import ConsoleOutput


async def run(argv, tmp_path):
    stream = io.StringIO()
    code = await main(
        [*argv, "--cache-dir", str(tmp_path / "cache")], ConsoleOutput(stream)
    )
    return code, stream.getvalue()


def test_parser_has_all_commands():
    """全サブコマンドが解析できることをテスト。"""
    parser = build_parser()
    args = parser.parse_args(["scan", "0,0,1,-1,0", "--n", "2"])
    assert args.command == "scan"
    assert args.n == 2


class TestParseTau:
    """parse_tau のテストクラス。"""

    def test_cusp(self):
        assert parse_tau("oo", 64) == "oo"

    def test_form(self):
        assert isinstance(parse_tau("(1,1,2)", 64), TauPoint)

    def test_rational(self):
        assert str(parse_tau("1/2", 64)) == "1/2"

    def test_complex(self):
        value = parse_tau("0.1+1.5j", 64)
        assert abs(value.imag - 1.5) < 1e-12

    def test_lower_half_plane(self):
        with pytest.raises(InvalidInputError):
            parse_tau("0.1-1.5j", 64)

    def test_indefinite_form(self):
        with pytest.raises(InvalidInputError):
            parse_tau("1,3,1", 64)


class TestMain:
    """main 関数のテストクラス。"""

    @pytest.mark.asyncio
    async def test_classpoly(self, tmp_path):
        """H_-4 = X - 1728 が JSON で出力されることをテスト。"""
        code, out = await run(["classpoly", "-4"], tmp_path)
        assert code == 0
        data = json.loads(out)
        assert data["polynomial"] == "X - 1728"
        assert data["coefficients"] == [1, -1728]
        assert data["provenance"]["command"] == "classpoly"

    @pytest.mark.asyncio
    async def test_classpoly_is_deterministic(self, tmp_path):
        """二回目（キャッシュ経由）でも同じ出力になることをテスト。"""
        first = await run(["classpoly", "-23"], tmp_path)
        second = await run(["classpoly", "-23"], tmp_path)
        assert first == second
        assert json.loads(first[1])["class_number"] == 3

    @pytest.mark.asyncio
    async def test_invalid_discriminant(self, tmp_path):
        """判別式でない値で終了コード 2 になることをテスト。"""
        code, out = await run(["classpoly", "-5"], tmp_path)
        assert code == 2
        assert out == ""

    @pytest.mark.asyncio
    async def test_csv_format(self, tmp_path):
        """--format csv で field,value 表が出ることをテスト。"""
        code, out = await run(["classpoly", "--format", "csv", "-3"], tmp_path)
        assert code == 0
        assert "# provenance.command=classpoly" in out
        assert "polynomial,X\n" in out

    @pytest.mark.asyncio
    async def test_modpoly(self, tmp_path):
        """Phi_2 の項が出力されることをテスト。"""
        code, out = await run(["modpoly", "2"], tmp_path)
        assert code == 0
        data = json.loads(out)
        assert data["degree"] == 3
        assert [3, 0, 1] in data["terms"]
        assert [1, 1, 40773375] in data["terms"]

    @pytest.mark.asyncio
    async def test_bad_precision(self, tmp_path):
        """小さすぎる精度で終了コード 2 になることをテスト。"""
        code, _ = await run(["classpoly", "--prec", "8", "-4"], tmp_path)
        assert code == 2

    @pytest.mark.asyncio
    async def test_missing_config(self, tmp_path):
        """存在しない設定ファイルで終了コード 2 になることをテスト。"""
        missing = str(tmp_path / "missing.yaml")
        code, _ = await run(["classpoly", "--config", missing, "-4"], tmp_path)
        assert code == 2

    @pytest.mark.asyncio
    async def test_output_file(self, tmp_path):
        """--output で報告がファイルに書かれることをテスト。"""
        target = tmp_path / "out" / "h4.json"
        code = await main(
            [
                "classpoly",
                "--cache-dir",
                str(tmp_path / "cache"),
                "--output",
                str(target),
                "-4",
            ]
        )
        assert code == 0
        assert json.loads(target.read_text(encoding="utf-8"))["disc"] == -4

    @pytest.mark.asyncio
    async def test_relations(self, tmp_path):
        """37a1 で (1,0) = 2(0,0) の関係が見つかることをテスト。"""
        code, out = await run(
            ["relations", "0,0,1,-1,0", "(0,0);(1,0)", "--conductor", "37"],
            tmp_path,
        )
        assert code == 0
        data = json.loads(out)
        assert data["basis"] == [[2, -1]]
        assert data["rank"] == 1
        assert data["coset"]["dim"] == 1

    @pytest.mark.asyncio
    async def test_point_off_curve(self, tmp_path):
        """曲線上にない点で終了コード 2 になることをテスト。"""
        code, _ = await run(["relations", "0,0,1,-1,0", "(1,1)"], tmp_path)
        assert code == 2

    @pytest.mark.asyncio
    async def test_sweep(self, tmp_path):
        code, out = await run(["sweep", "8", "--skip-degree"], tmp_path)
        assert code == 0
        data = json.loads(out)
        assert [row["disc"] for row in data["rows"]] == [-3, -4, -7, -8]
        assert data["provenance"]["delta_bound"] == 8

    @pytest.mark.asyncio
    async def test_sweep_bound_too_small(self, tmp_path):
        code, _ = await run(["sweep", "2"], tmp_path)
        assert code == 2


@pytest.mark.slow
class TestMainWithParametrization:
    """モジュラー・パラメータ付けを使うサブコマンド。"""

    @pytest.mark.asyncio
    async def test_param_eval_cusp(self, tmp_path):
        code, out = await run(["param-eval", "0,-1,1,-10,-20", "0"], tmp_path)
        assert code == 0
        data = json.loads(out)
        assert data["kind"] == "param-eval"
        assert data["torsion_order"] == 5

    @pytest.mark.asyncio
    async def test_census_u_rejects_cusp(self, tmp_path):
        code, _ = await run(["census-u", "0,-1,1,-10,-20", "0"], tmp_path)
        assert code == 2
