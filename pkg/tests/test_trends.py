import math
import random

import pytest

from conftest import make_paper
from bibmetrics.trends import (
    DomainError,
    TopicVector,
    compile_patterns,
    match_topic,
    trend_table,
    trendiness,
)


def paper_with_text(i, year, title="", abstract=None, keywords=()):
    return make_paper(i, year, ["A"], title=title or f"Untitled {i}",
                      abstract=abstract, keywords=keywords)


class TestMatchTopic:
    def test_phrase_in_title(self):
        topic = TopicVector("Digital Twin", ["digital twin"])
        record = paper_with_text(0, 2020, title="A Digital Twin Approach")
        assert match_topic(record, topic)

    def test_wildcard_prefix(self):
        topic = TopicVector("Deep Learning", ["convolution* net*"])
        record = paper_with_text(0, 2020, abstract="We train convolutional networks daily.")
        assert match_topic(record, topic)

    def test_token_boundary_no_match(self):
        topic = TopicVector("5G", ["5G"])
        record = paper_with_text(0, 2020, abstract="The antenna operates at 5 GHz only.")
        assert not match_topic(record, topic)
        assert match_topic(paper_with_text(1, 2020, abstract="Our 5G testbed."), topic)

    def test_phrase_must_be_contiguous(self):
        topic = TopicVector("Digital Twin", ["digital twin"])
        record = paper_with_text(0, 2020, abstract="digital models of a physical twin")
        assert not match_topic(record, topic)

    def test_match_spans_fields_but_not_across_them(self):
        topic = TopicVector("Digital Twin", ["digital twin"])
        record = paper_with_text(0, 2020, title="Digital", abstract="twin systems")
        # Title and abstract concatenate into one token stream; the phrase
        # lands on the field boundary and is accepted there.
        assert match_topic(record, topic)

    def test_keywords_searched(self):
        topic = TopicVector("Blockchain", ["blockchain"])
        record = paper_with_text(0, 2020, keywords=("Blockchain", "ledgers"))
        assert match_topic(record, topic)

    def test_hyphenated_pattern_tokenizes(self):
        topic = TopicVector("Digital Twin", ["Digital-Twin"])
        record = paper_with_text(0, 2020, title="digital twin pilot")
        assert match_topic(record, topic)

    def test_invalid_patterns_rejected(self):
        with pytest.raises(ValueError):
            compile_patterns(["*"])
        with pytest.raises(ValueError):
            compile_patterns(["..."])
        with pytest.raises(ValueError):
            compile_patterns([])


class TestTrendiness:
    def test_hand_worked_example(self):
        assert trendiness(5, 4, 16) == pytest.approx(2.5, abs=0.0)
        assert trendiness(5, 4, 16, mode="literal") == pytest.approx(-2.5, abs=0.0)

    def test_zero_rho(self):
        assert trendiness(0, 3, 10) == 0.0

    def test_emergent_topic_scores_zero(self):
        assert trendiness(3, 0, 10) == 0.0

    def test_saturated_window_is_inf(self):
        assert trendiness(2, 10, 10) == math.inf
        assert trendiness(2, 10, 10, mode="literal") == math.inf

    def test_delta_above_window_rejected(self):
        with pytest.raises(DomainError):
            trendiness(1, 11, 10)
        with pytest.raises(DomainError):
            trendiness(1, 0, 0)

    def test_homogeneity_in_rho(self):
        rng = random.Random(1)
        for _ in range(300):
            n = rng.randint(2, 100)
            delta = rng.randint(1, n - 1)
            rho = rng.randint(1, 50)
            for mode in ("magnitude", "literal"):
                single = trendiness(rho, delta, n, mode=mode)
                double = trendiness(2 * rho, delta, n, mode=mode)
                assert double == pytest.approx(2 * single, rel=1e-12)

    def test_monotone_in_commonness(self):
        rng = random.Random(2)
        for _ in range(300):
            n = rng.randint(3, 100)
            delta = rng.randint(1, n - 2)
            assert trendiness(1, delta + 1, n) > trendiness(1, delta, n)

    def test_literal_is_negated_magnitude(self):
        rng = random.Random(3)
        for _ in range(300):
            n = rng.randint(2, 100)
            delta = rng.randint(1, n - 1)
            rho = rng.randint(0, 20)
            assert trendiness(rho, delta, n, mode="literal") == -trendiness(rho, delta, n)

    def test_smoothing_is_everywhere_finite(self):
        assert math.isfinite(trendiness(2, 10, 10, smoothing=True))
        assert trendiness(3, 0, 10, smoothing=True) > 0.0


class TestTrendTable:
    def topics(self):
        return [TopicVector("T1", ["alpha"]), TopicVector("T2", ["beta"])]

    def two_topic_corpus(self):
        papers = []
        i = 0
        # Window (2018-2020): 16 papers, 4 alpha, 12 beta.
        for k in range(16):
            text = []
            if k < 4:
                text.append("alpha")
            if k < 12:
                text.append("beta")
            papers.append(paper_with_text(i, 2018 + k % 3, abstract=" ".join(text) or "gamma"))
            i += 1
        # Focal year 2021: 10 papers, 5 alpha, 2 beta.
        for k in range(10):
            text = []
            if k < 5:
                text.append("alpha")
            if k < 2:
                text.append("beta")
            papers.append(paper_with_text(i, 2021, abstract=" ".join(text) or "gamma"))
            i += 1
        return papers

    def test_hand_worked_ranking(self):
        table = trend_table(self.two_topic_corpus(), self.topics(), window_years=3, top_k=4)
        observations = table[2021]
        assert [o.topic for o in observations[:2]] == ["T2", "T1"]
        t2, t1 = observations[0], observations[1]
        assert t1.rho == 5 and t1.delta == 4 and t1.n_window == 16
        assert t1.trendiness == pytest.approx(2.5)
        assert t2.rho == 2 and t2.delta == 12
        assert t2.trendiness == pytest.approx(2 / abs(math.log2(12 / 16)), abs=1e-9)
        assert t2.trendiness == pytest.approx(4.8188, abs=5e-4)

    def test_single_year_corpus_has_no_history(self):
        papers = [paper_with_text(i, 2020, abstract="alpha") for i in range(3)]
        table = trend_table(papers, self.topics())
        assert all(o.insufficient_history for o in table[2020])
        assert all(o.trendiness is None for o in table[2020])

    def test_never_matching_topic_scores_zero(self):
        papers = self.two_topic_corpus()
        topics = self.topics() + [TopicVector("T3", ["omega"])]
        table = trend_table(papers, topics, top_k=3)
        t3 = next(o for o in table[2021] if o.topic == "T3")
        assert t3.trendiness == 0.0
        assert [o.topic for o in table[2021][:2]] == ["T2", "T1"]

    def test_emergent_flag(self):
        papers = [paper_with_text(0, 2020, abstract="beta")] + [
            paper_with_text(i + 1, 2021, abstract="alpha") for i in range(2)
        ]
        table = trend_table(papers, self.topics())
        t1 = next(o for o in table[2021] if o.topic == "T1")
        assert t1.emergent and t1.trendiness == 0.0 and t1.delta == 0

    def test_window_excludes_focal_year_by_default(self):
        papers = [paper_with_text(0, 2020, abstract="alpha"),
                  paper_with_text(1, 2021, abstract="alpha")]
        table = trend_table(papers, [TopicVector("T1", ["alpha"])])
        obs = table[2021][0]
        assert obs.n_window == 1 and obs.delta == 1
        inclusive = trend_table(papers, [TopicVector("T1", ["alpha"])], inclusive_window=True)
        obs = inclusive[2021][0]
        assert obs.n_window == 2 and obs.delta == 2

    def test_restrict_window_counts_only_matching_papers(self):
        papers = [
            paper_with_text(0, 2020, abstract="alpha"),
            paper_with_text(1, 2020, abstract="gamma"),
            paper_with_text(2, 2021, abstract="alpha"),
        ]
        default = trend_table(papers, self.topics())[2021][0]
        restricted = trend_table(papers, self.topics(), restrict_window=True)[2021][0]
        assert default.n_window == 2
        assert restricted.n_window == 1

    def test_deterministic_and_permutation_invariant(self):
        rng = random.Random(4)
        papers = self.two_topic_corpus()
        table1 = trend_table(papers, self.topics())
        shuffled = papers[:]
        rng.shuffle(shuffled)
        table2 = trend_table(shuffled, self.topics())
        assert table1 == table2

    def test_duplicate_topic_names_rejected(self):
        with pytest.raises(ValueError):
            trend_table([], [TopicVector("T", ["a"]), TopicVector("T", ["b"])])

    def test_years_descending(self):
        papers = [paper_with_text(i, 2015 + i, abstract="alpha") for i in range(5)]
        table = trend_table(papers, self.topics())
        assert list(table) == sorted(table, reverse=True)
