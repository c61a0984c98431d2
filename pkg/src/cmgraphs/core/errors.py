"""cmgraphsの例外階層。

すべての例外は ``CmGraphsError`` を基底とし、CLIはクラスごとに
終了コードへ対応付けます（``exit_code`` 属性）。

- InvalidInputError: 入力が不正（終了コード 2）
- IndeterminateError: 現在の精度では判定できない（終了コード 3）
- InternalError: 内部エラー（終了コード 4）
"""


class CmGraphsError(Exception):
    """cmgraphsの全例外の基底クラス。"""

    exit_code = 4


class InvalidInputError(CmGraphsError, ValueError):
    """入力が事前条件を満たさない場合の例外。

    例: "invalid discriminant", "not in upper half plane",
    "point not on curve", "degenerate basis", "unsupported cusp",
    "Heegner hypothesis fails"
    """

    exit_code = 2


class IndeterminateError(CmGraphsError):
    """数値的に判定できない場合の例外。

    黙って誤った答えを返す代わりに送出されます。
    例: "insufficient precision", "indeterminate at current precision",
    "unbounded search"
    """

    exit_code = 3


class InternalError(CmGraphsError, RuntimeError):
    """正しい入力に対して起こるはずのない失敗。"""

    exit_code = 4
