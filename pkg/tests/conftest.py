"""曲線テスト用の共通フィクスチャ。"""

import pytest

from src.cmgraphs.curves.elliptic import CurveQ


@pytest.fixture
def curve_11a1():
    return CurveQ.parse("0,-1,1,-10,-20", label="11a1")


@pytest.fixture
def curve_37a1():
    return CurveQ.parse("0,0,1,-1,0", label="37a1")


@pytest.fixture
def curve_389a1():
    return CurveQ.parse("0,1,1,-2,0", label="389a1")


@pytest.fixture
def curve_32a():
    return CurveQ.parse("0,0,0,-1,0", conductor=32)


@pytest.fixture
def curve_j0():
    return CurveQ.parse("0,0,0,0,-1", conductor=144)
