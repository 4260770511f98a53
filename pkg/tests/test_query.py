import pytest
from hypothesis import given
from hypothesis import strategies as st

from fedsearch.errors import InvalidQueryError
from fedsearch.query import (
    FieldPredicate,
    Query,
    YearRange,
    match_multivariate,
    query_from_payload,
    query_to_payload,
    score_keyword,
    tokenize,
    validate_query,
)
from fedsearch.records import PublicationRecord


def make_record(**over):
    base = dict(
        id=1,
        title="Distributed Search",
        authors=("Ada Byron",),
        abstract="searching partitioned data",
        keywords=("search",),
        venue="IEEE",
        year=2011,
    )
    base.update(over)
    return PublicationRecord(**base)


class TestTokenize:
    def test_splits_on_non_alphanumeric(self):
        assert tokenize("Grid-Based Search") == ["grid", "based", "search"]

    def test_empty(self):
        assert tokenize("") == []

    def test_symbols_dropped(self):
        assert tokenize("C++ 2010!") == ["c", "2010"]

    def test_underscore_splits(self):
        assert tokenize("a_b") == ["a", "b"]

    @given(st.text())
    def test_matches_per_char_reference(self, text):
        ref, cur = [], []
        for ch in text.lower():
            if ch.isalnum():
                cur.append(ch)
            elif cur:
                ref.append("".join(cur))
                cur = []
        if cur:
            ref.append("".join(cur))
        assert tokenize(text) == ref


class TestScoreKeyword:
    def test_double_title_occurrence(self):
        rec = make_record(
            title="grid of grid",
            abstract="nothing here",
            keywords=("other",),
            authors=("Someone Else",),
            venue="venue",
        )
        assert score_keyword(rec, ["grid"]) == 6

    def test_absent_token_scores_zero(self):
        rec = make_record()
        assert score_keyword(rec, ["zzzmissing"]) == 0

    def test_mixed_fields(self):
        rec = make_record(
            title="grid computing",
            abstract="data systems",
            keywords=(),
            authors=("Ada Byron",),
            venue="none",
        )
        assert score_keyword(rec, ["grid", "data"]) == 4

    def test_keyword_and_venue_weights(self):
        rec = make_record(
            title="x",
            abstract="y",
            keywords=("search", "search"),
            authors=("Search Smith",),
            venue="search letters",
        )
        # 2 keyword occurrences * 2 + authors 1 + venue 1
        assert score_keyword(rec, ["search"]) == 6

    def test_duplicate_query_tokens_count_twice(self):
        rec = make_record(title="grid")
        assert score_keyword(rec, ["grid", "grid"]) == 2 * score_keyword(rec, ["grid"])

    def test_empty_tokens_rejected(self):
        with pytest.raises(ValueError):
            score_keyword(make_record(), [])


class TestMatchMultivariate:
    def test_year_in_range(self):
        assert match_multivariate(make_record(year=2011), (YearRange(2010, 2012),))

    def test_conjunction_fails_on_one_predicate(self):
        rec = make_record(year=2011, venue="IEEE")
        constraints = (YearRange(2010, 2012), FieldPredicate("venue", "sigir"))
        assert not match_multivariate(rec, constraints)

    def test_inclusive_bounds(self):
        assert match_multivariate(make_record(year=2010), (YearRange(2010, 2012),))
        assert match_multivariate(make_record(year=2012), (YearRange(2010, 2012),))
        assert not match_multivariate(make_record(year=2013), (YearRange(2010, 2012),))

    def test_text_predicate_tokenizes_field(self):
        rec = make_record(venue="ACM SIGIR Conference")
        assert match_multivariate(rec, (FieldPredicate("venue", "sigir"),))

    def test_empty_constraints_rejected(self):
        with pytest.raises(ValueError):
            match_multivariate(make_record(), ())


class TestValidateQuery:
    def test_keyword_needs_tokens(self):
        with pytest.raises(InvalidQueryError):
            validate_query(Query(kind="keyword", text="!!!"))

    def test_multivariate_needs_constraint(self):
        with pytest.raises(InvalidQueryError):
            validate_query(Query(kind="multivariate"))

    def test_year_range_ordering(self):
        q = Query(kind="multivariate", constraints=(YearRange(2012, 2010),))
        with pytest.raises(InvalidQueryError):
            validate_query(q)

    def test_top_k_positive(self):
        with pytest.raises(InvalidQueryError):
            validate_query(Query(kind="keyword", text="ok", top_k=0))

    def test_valid_queries_pass(self):
        validate_query(Query(kind="keyword", text="grid search"))
        validate_query(
            Query(
                kind="multivariate",
                constraints=(FieldPredicate("venue", "ieee"), YearRange(2000, 2005)),
            )
        )


def test_query_payload_round_trip():
    q = Query(
        kind="multivariate",
        text="",
        constraints=(FieldPredicate("venue", "ieee"), YearRange(1999, 2004)),
        top_k=7,
    )
    assert query_from_payload(query_to_payload(q)) == q
    kq = Query(kind="keyword", text="grid data", top_k=3)
    assert query_from_payload(query_to_payload(kq)) == kq
