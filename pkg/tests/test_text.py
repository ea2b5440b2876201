import pytest

from kbqa.text import (ConstantScorer, LcsScorer, LongestMatchTokenizer, char_overlap, charset,
                       lcs_length, normalize_date)


def test_lcs_length():
    assert lcs_length("", "abc") == 0
    assert lcs_length("abc", "abc") == 3
    assert lcs_length("代表作品", "<e>的代表作是什么") == 3
    assert lcs_length("axbycz", "abc") == 3


@pytest.mark.parametrize("a, b, expected", [
    ("王菲", "王菲的经纪人是谁", 1.0),
    ("代表作品", "<e>的代表作是什么", 0.75),
    ("abc", "xyz", 0.0),
    ("", "", 0.0),
    ("经纪人", "经纪人", 1.0),
])
def test_lcs_scorer_examples(a, b, expected):
    assert LcsScorer().score(a, b) == pytest.approx(expected)


def test_constant_scorer():
    assert ConstantScorer().score("a", "b") == 0.5
    assert ConstantScorer(0.2).score("", "") == 0.2


def test_charset_drops_punctuation_and_space():
    assert charset("王菲（歌手）") == {"王", "菲", "歌", "手"}
    assert charset("a b, c!") == {"a", "b", "c"}


def test_char_overlap_examples():
    assert char_overlap("王菲（歌手）", "王菲的经纪人是谁？") == 0.5
    assert char_overlap("出演导演", "他出演过什么") == pytest.approx(2 / 3)
    assert char_overlap("红豆", "《红豆》是谁唱的") == 1.0
    assert char_overlap("abc", "xyz") == 0.0
    assert char_overlap("（）", "任何") == 0.0


def test_tokenizer_longest_match():
    tok = LongestMatchTokenizer({"王菲", "经纪人", "经纪"})
    assert tok.tokenize("王菲的经纪人是谁？") == ["王菲", "的", "经纪人", "是", "谁"]


def test_tokenizer_ascii_runs_and_short_vocab():
    tok = LongestMatchTokenizer({"a", "Jay"})
    assert tok.tokenize("Jay Chou 2004年") == ["Jay", "Chou", "2004", "年"]
    assert tok.vocab == {"Jay"}


@pytest.mark.parametrize("src, dst", [
    ("1992年3月5日", "1992-03-05"),
    ("1992-03-05", "1992-03-05"),
    ("2000/11/3出生的人", "2000-11-03出生的人"),
    ("1992.3.5", "1992-03-05"),
    ("1992-13-05", "1992-13-05"),
])
def test_normalize_date(src, dst):
    assert normalize_date(src) == dst


def test_chinese_date_followed_by_digit():
    assert normalize_date("1964年9月30日1") == "1964-09-30" + "1"
