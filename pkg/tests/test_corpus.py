import io
from collections import Counter

import pytest

from assocmdl.corpus import (
    CorpusFormatError,
    HeadKey,
    PairSample,
    class_count,
    ingest_triples,
    preprocess_word,
    project_values,
    read_quadruples,
    slice_by_head,
    slices,
)

from conftest import node


def ingest(text, **kw):
    return ingest_triples(io.StringIO(text), **kw)


class TestIngest:
    def test_single_line(self):
        s = ingest("buy\tdobj\tstock\t3\n")
        assert s.head_keys() == [HeadKey("buy", "dobj")]
        assert s.counts[("stock", HeadKey("buy", "dobj"))] == 3
        assert s.total == 3

    def test_empty(self):
        s = ingest("")
        assert s.total == 0 and not s.counts

    def test_merge(self):
        s = ingest("buy\tdobj\tstock\t2\nbuy\tdobj\tstock\t5\n")
        assert s.counts == {("stock", HeadKey("buy", "dobj")): 7}

    def test_default_count_and_comments(self):
        s = ingest("# header\n\nbuy\tdobj\tstock\nbuy\tdobj\tstock\n")
        assert s.total == 2

    @pytest.mark.parametrize("line,msg", [
        ("buy\tdobj\n", "3 or 4"),
        ("buy\tdobj\tstock\tx\n", "non-numeric"),
        ("buy\tdobj\tstock\t-1\n", "negative"),
        ("buy\t\tstock\n", "empty"),
    ])
    def test_errors_carry_line_number(self, line, msg):
        with pytest.raises(CorpusFormatError, match=msg) as err:
            ingest("ok\tdobj\tstock\n" + line)
        assert err.value.lineno == 2

    def test_unknown_flagged(self, animals):
        s = ingest("fly\tsubj\tcrow\nfly\tsubj\tplane\n", taxonomy=animals)
        assert s.unknown == {"plane"}
        assert s.restrict_to(animals).total == 1

    def test_normalize(self):
        s = ingest("rise\tin\t1987\nrise\tby\t5\n", normalize=preprocess_word)
        assert set(w for w, _ in s.counts) == {"year", "number"}


class TestProjection:
    def test_reconstructs_marginal(self):
        s = PairSample({("swallow", HeadKey("fly", "subj")): 4, ("swallow", HeadKey("eat", "subj")): 38})
        assert project_values(s) == Counter(swallow=42)

    def test_empty(self):
        assert project_values(PairSample({})) == Counter()

    def test_one_record(self):
        assert project_values(ingest("a\tb\tc\n")) == Counter(c=1)


class TestSlices:
    def sample(self):
        return ingest(
            "fly\tsubj\tswallow\t4\nfly\tsubj\tcrow\t7\nfly\tsubj\trobin\t1\n"
            "eat\tsubj\tswallow\t38\neat\tsubj\tcrow\t59\neat\tsubj\trobin\t8\n"
        )

    def test_fly_slice(self):
        sl = slice_by_head(self.sample(), ("fly", "subj"))
        assert sl.counts == Counter(swallow=4, crow=7, robin=1)
        assert sl.size == 12

    def test_unknown_head(self):
        assert slice_by_head(self.sample(), ("walk", "subj")).size == 0

    def test_single_head_is_projection(self):
        s = ingest("fly\tsubj\tswallow\t4\nfly\tsubj\tcrow\t7\n")
        assert slice_by_head(s, ("fly", "subj")).counts == project_values(s)

    def test_all_slices(self):
        got = slices(self.sample())
        assert sorted(k.head for k in got) == ["eat", "fly"]
        assert sum(sl.size for sl in got.values()) == 117


class TestClassCount:
    def test_values(self, animals):
        counts = {"swallow": 4, "crow": 7, "robin": 1}
        assert class_count(animals, node(animals, "BIRD"), counts) == 12
        assert class_count(animals, animals.leaf("robin"), counts) == 1
        assert class_count(animals, node(animals, "INSECT"), counts) == 0


class TestPreprocess:
    @pytest.mark.parametrize("raw,want", [
        ("1985", "year"), ("1900", "year"), ("2999", "year"), ("1899", "number"),
        ("3000", "number"), ("42", "number"), ("3.5", "number"), ("1,000", "number"),
        ("stock", "stock"), ("1980s", "1980s"),
    ])
    def test_values(self, raw, want):
        assert preprocess_word(raw) == want

    def test_stemmer_hook(self):
        assert preprocess_word("stocks", stemmer=lambda w: w.rstrip("s")) == "stock"


def test_read_quadruples():
    qs = read_quadruples(io.StringIO("eat\tpizza\twith\tfork\tV\n"))
    assert qs[0].noun2 == "fork" and qs[0].gold == "V"
    with pytest.raises(CorpusFormatError, match="gold"):
        read_quadruples(io.StringIO("eat\tpizza\twith\tfork\tX\n"))
