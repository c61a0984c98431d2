"""ロギング設定のテスト。"""

import logging
import sys

from src.cmgraphs.utils.logger import (
    get_default_logger,
    get_logger,
    init_logging,
    setup_logger,
)


class TestLogger:
    """ロガーのテストクラス。"""

    def teardown_method(self) -> None:
        logging.getLogger("cmgraphs").handlers.clear()

    def test_handler_writes_to_stderr(self) -> None:
        """ハンドラーが標準エラー出力に向いていることをテスト。"""
        logger = setup_logger("cmgraphs_test_stderr", level="DEBUG")
        assert logger.handlers[0].stream is sys.stderr
        assert logger.level == logging.DEBUG

    def test_setup_is_idempotent(self) -> None:
        """二度目の設定でハンドラーが増えないことをテスト。"""
        setup_logger("cmgraphs_test_twice")
        logger = setup_logger("cmgraphs_test_twice")
        assert len(logger.handlers) == 1

    def test_package_loggers_propagate_to_root_logger(self) -> None:
        """パッケージ配下のロガーは親にだけハンドラーを持つことをテスト。"""
        logger = get_logger("cmgraphs.census.scan")
        assert logger.handlers == []
        assert get_default_logger().handlers

    def test_init_logging_sets_level(self) -> None:
        """init_logging で親ロガーのレベルが変わることをテスト。"""
        init_logging("ERROR")
        assert logging.getLogger("cmgraphs").level == logging.ERROR
        init_logging("debug")
        assert logging.getLogger("cmgraphs").level == logging.DEBUG
