import math
import random

import pytest

from kbqa import entity_ranker as er
from kbqa.candidates import LinkedCandidate, TaggedSpan
from kbqa.evaluation import ablate
from kbqa.fixtures import fixture_store
from kbqa.store import DEFAULT_INTERROGATIVES, Entity
from kbqa.text import LcsScorer, LongestMatchTokenizer


def cand(question, mention, entity=None, label="n", start=None):
    start = question.index(mention) if start is None else start
    span = TaggedSpan(start, start + len(mention), mention, label)
    return LinkedCandidate(span, mention, Entity(entity or mention), "lexicon")


def rank(question, cands, store=None, **kw):
    store = store or fixture_store("zh")
    kw.setdefault("weights", (1.0,) * 7)
    return er.rank(cands, question, store, interrogatives=DEFAULT_INTERROGATIVES,
                   tokenizer=LongestMatchTokenizer(store.entity_names()), label_bonus=er.DEFAULT_LABEL_BONUS,
                   scorer=LcsScorer(), **kw)


def test_length_score():
    assert er.score_length(cand("王菲是谁", "王菲")) == 2
    assert er.score_length(cand("莫妮卡·贝鲁奇是谁", "莫妮卡·贝鲁奇")) == 7
    q = "王菲（歌手）是谁"
    assert er.score_length(cand(q, "王菲（歌手）")) > er.score_length(cand(q, "王菲"))


def test_out_degree_score():
    store = fixture_store("zh")
    assert er.score_out_degree(cand("x深圳", "深圳"), store) == 0.0
    singer = er.score_out_degree(cand("王菲", "王菲", "王菲（歌手）"), store)
    actress = er.score_out_degree(cand("王菲", "王菲", "王菲（演员）"), store)
    assert singer == pytest.approx(2.565, abs=1e-3)
    assert actress == pytest.approx(1.386, abs=1e-3)


def test_interrogative_proximity():
    words = DEFAULT_INTERROGATIVES
    assert er.score_interrogative_proximity(cand("王菲是谁", "王菲"), "王菲是谁", words) == -1.0
    assert er.score_interrogative_proximity(cand("谁王菲", "王菲"), "谁王菲", words) == 0.0
    q = "王菲的代表作品"
    assert er.score_interrogative_proximity(cand(q, "王菲"), q, words) == -len(q)
    q = "天堂电影院和西西里的美丽传说谁更早？"
    near = er.score_interrogative_proximity(cand(q, "西西里的美丽传说"), q, words)
    far = er.score_interrogative_proximity(cand(q, "天堂电影院"), q, words)
    assert (near, far) == (0.0, -9.0)


def test_ascii_interrogatives_match_whole_words():
    q = "Whatever happened to Monica Bellucci"
    c = cand(q, "Monica Bellucci")
    assert er.score_interrogative_proximity(c, q, ["what"]) == -len(q)
    q = "what is the work of Monica Bellucci"
    assert er.score_interrogative_proximity(cand(q, "Monica Bellucci"), q, ["What"]) == -16.0


def test_char_overlap_score():
    q = "王菲的经纪人是谁？"
    assert er.score_char_overlap(cand(q, "王菲", "王菲（歌手）"), q) == 0.5
    assert er.score_char_overlap(cand(q, "王菲"), q) == 1.0
    assert er.score_char_overlap(cand(q, "王菲", "周杰伦"), q) == 0.0


def test_word_overlap_score():
    tok = LongestMatchTokenizer({"王菲", "经纪人"})
    q = "王菲的经纪人是谁"
    # {王菲} against {王菲, 的, 经纪人, 是, 谁}
    assert er.score_word_overlap(cand(q, "王菲"), q, tok) == pytest.approx(1 / 5)
    assert er.score_word_overlap(cand("x周杰伦", "周杰伦"), "今天", tok) == 0.0
    assert er.score_word_overlap(cand(q, q), q, tok) == 1.0


def test_label_score():
    q = "王菲是谁"
    assert er.score_label(cand(q, "王菲", label="nr"), er.DEFAULT_LABEL_BONUS) == 1.0
    assert er.score_label(cand(q, "王菲", label="n"), er.DEFAULT_LABEL_BONUS) == 0.3
    assert er.score_label(cand(q, "王菲", label="nr"), {"n": 0.3}) == 0.0


def test_similarity_score():
    q = "王菲的经纪人是谁"
    assert er.score_similarity(cand(q, "王菲"), q, LcsScorer()) == 1.0
    assert er.score_similarity(cand("xyz", "xyz"), "王菲", LcsScorer()) == 0.0


def test_min_max():
    assert er.min_max([3.0]) == [0.5]
    assert er.min_max([2.0, 2.0]) == [0.5, 0.5]
    assert er.min_max([1.0, 3.0, 2.0]) == [0.0, 1.0, 0.5]


def test_single_candidate_wins_with_half_scores():
    q = "王菲的经纪人是谁"
    topic, table = rank(q, [cand(q, "王菲", "王菲（歌手）")])
    assert topic.entity == Entity("王菲（歌手）")
    assert table[0][1].normalized == (0.5,) * 7
    assert table[0][1].total == 3.5


def test_better_known_namesake_wins():
    q = "王菲的经纪人是谁"
    topic, table = rank(q, [cand(q, "王菲", "王菲（演员）"), cand(q, "王菲", "王菲（歌手）")])
    assert topic.entity == Entity("王菲（歌手）")
    vectors = {c.entity.value: v for c, v in table}
    assert vectors["王菲（歌手）"].normalized[1] == 1.0
    assert vectors["王菲（演员）"].normalized[1] == 0.0


def test_scaling_length_keeps_table():
    raws = [[2, 1, -3, 0.5, 0.2, 0.3, 1.0], [7, 0, -1, 1.0, 0.4, 1.0, 0.5]]
    scaled = [[10 * r[0]] + r[1:] for r in raws]
    before, after = er.normalize_table(raws), er.normalize_table(scaled)
    assert [(v.normalized, v.total) for v in before] == [(v.normalized, v.total) for v in after]


def test_total_is_sum_and_range():
    rng = random.Random(9)
    for _ in range(200):
        raws = [[rng.uniform(-5, 5) for _ in range(7)] for _ in range(rng.randint(1, 6))]
        for v in er.normalize_table(raws):
            assert all(0.0 <= n <= 1.0 for n in v.normalized)
            assert v.total == math.fsum(v.normalized)


def test_distinct_raws_hit_both_ends():
    vecs = er.normalize_table([[1.0] * 7, [2.0] * 7, [1.5] * 7])
    assert vecs[0].normalized == (0.0,) * 7
    assert vecs[1].normalized == (1.0,) * 7


def test_ties_broken_by_out_degree_then_name():
    q = "甲乙"
    a, b = cand(q, "甲"), cand(q, "乙")
    vec = er.EntityScoreVector((0,) * 7, (0.5,) * 7, 3.5)
    assert er.select_topic([a, b], [vec, vec], [0, 1]) == 1
    # equal degree: smallest entity name wins, 乙 (U+4E59) before 甲 (U+7532)
    assert er.select_topic([a, b], [vec, vec], [0, 0]) == 1
    assert er.select_topic([b, a], [vec, vec], [0, 0]) == 0


def test_empty_candidates_raise():
    with pytest.raises(er.NoTopicEntityError):
        rank("问题", [])


def test_rank_is_deterministic():
    q = "莫妮卡·贝鲁奇和文森特·卡索一起拍过哪些电影？"
    cands = [cand(q, "莫妮卡·贝鲁奇"), cand(q, "文森特·卡索")]
    first = rank(q, cands)
    for _ in range(3):
        assert rank(q, cands) == first


def test_weights_can_switch_features_off():
    q = "王菲的经纪人是谁"
    cands = [cand(q, "王菲", "王菲（演员）"), cand(q, "王菲", "王菲（歌手）")]
    topic, table = rank(q, cands, weights=(1, 0, 1, 1, 1, 1, 1))
    assert table[0][1].total == table[1][1].total
    # equal totals fall back to out-degree
    assert topic.entity == Entity("王菲（歌手）")


def test_full_features_beat_single_feature(zh_pipeline, zh_questions):
    only_s1 = {"s1 only": ("s2", "s3", "s4", "s5", "s6", "s7"), "full": ()}
    rows = dict(ablate(zh_questions, zh_pipeline, only_s1))
    assert rows["full"] >= rows["s1 only"]
    assert rows["full"] >= 0.9
