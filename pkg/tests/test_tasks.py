import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindlens.lexicon import DisorderLabel
from mindlens.tasks import (
    BinaryVerdict,
    PromptTemplate,
    SeverityLevel,
    TherapyCode,
    load_pack,
    mentions_self_harm,
    parse_behavior,
    parse_binary,
    parse_disorders,
    parse_severity,
    parse_therapies,
    render,
)
from mindlens.util import ValidationError
from .conftest import load_fixture, make_post


class TestTemplates:
    def test_default_pack_loads(self):
        pack = load_pack("v1")
        assert pack.version == "v1"
        assert set(pack.templates) == {
            "binary", "disorder", "severity", "recommend_therapy", "recommend_behavior",
        }

    def test_missing_placeholder_fatal(self):
        with pytest.raises(ValidationError):
            PromptTemplate(task="binary", version="x", system="s", user_pattern="no slot")

    def test_duplicate_placeholder_fatal(self):
        with pytest.raises(ValidationError):
            PromptTemplate(
                task="binary", version="x", system="s",
                user_pattern="{post_text} {post_text}",
            )

    def test_render_substitutes(self):
        tpl = PromptTemplate(
            task="binary", version="x", system="sys",
            user_pattern="Post: {post_text}\nAnswer yes or no.",
        )
        rendered = render(tpl, make_post("p", "abc"))
        assert rendered.user == "Post: abc\nAnswer yes or no."
        assert not rendered.truncated

    def test_render_truncates_and_flags(self):
        tpl = PromptTemplate(
            task="binary", version="x", system="sys", user_pattern="{post_text}"
        )
        rendered = render(tpl, make_post("p", "x" * 50), char_budget=10)
        assert rendered.user == "x" * 10
        assert rendered.truncated

    def test_render_pure(self):
        tpl = load_pack("v1").template("disorder")
        post = make_post("p", "hello world")
        assert render(tpl, post) == render(tpl, post)

    def test_unknown_pack_version(self):
        with pytest.raises(ValidationError):
            load_pack("v999")


class TestParseBinary:
    def test_fixture_answer_key(self):
        for row in load_fixture("parser_binary.json"):
            assert parse_binary(row["raw"]) is BinaryVerdict(row["expected"]), row["raw"]

    def test_fixture_size(self):
        assert len(load_fixture("parser_binary.json")) == 30

    def test_idempotent_on_canonical_names(self):
        for verdict in (BinaryVerdict.YES, BinaryVerdict.NO):
            assert parse_binary(verdict.value) is verdict


class TestParseDisorders:
    def test_fixture_answer_key(self):
        for row in load_fixture("parser_disorders.json"):
            got = parse_disorders(row["raw"])
            want = frozenset(DisorderLabel(l) for l in row["labels"])
            assert got == want, row["raw"]
            flagged = got == frozenset({DisorderLabel.NONE}) and mentions_self_harm(row["raw"])
            assert flagged == row["self_harm"], row["raw"]

    def test_fixture_size(self):
        assert len(load_fixture("parser_disorders.json")) == 30

    def test_whitelist_bound(self):
        everything = ", ".join(d.value for d in DisorderLabel) + ", stress, burnout"
        got = parse_disorders(everything)
        assert got <= set(DisorderLabel) - {DisorderLabel.NONE}
        assert len(got) == 9


class TestParseSeverity:
    def test_fixture_answer_key(self):
        for row in load_fixture("parser_severity.json"):
            assert parse_severity(row["raw"]) is SeverityLevel(row["expected"]), row["raw"]

    def test_fixture_size(self):
        assert len(load_fixture("parser_severity.json")) == 20

    def test_idempotent_on_canonical_names(self):
        for level in (SeverityLevel.MILD, SeverityLevel.MODERATE, SeverityLevel.SEVERE):
            assert parse_severity(level.value) is level


class TestParseTherapies:
    def test_fixture_answer_key(self):
        for row in load_fixture("parser_therapies.json"):
            got = parse_therapies(row["raw"])
            expected = row["expected"]
            assert len(got) == len(expected), (row["raw"], got)
            for rec, want in zip(got, expected):
                assert rec.code is TherapyCode(want["code"]), (row["raw"], rec)
                assert rec.confidence_pct == want["confidence_pct"], (row["raw"], rec)
                if "name" in want:
                    assert rec.name_as_written == want["name"], (row["raw"], rec)

    def test_fixture_size(self):
        assert len(load_fixture("parser_therapies.json")) == 20

    def test_confidence_range_enforced(self):
        out = parse_therapies("CBT (250%)")
        assert out[0].code is TherapyCode.CBT
        assert out[0].confidence_pct is None

    def test_lowercase_abbreviation_not_matched(self):
        # "act" as a plain verb must not become a recommendation
        assert parse_therapies("You should act quickly.") == []


class TestParseBehavior:
    def test_fixture_answer_key(self):
        for row in load_fixture("parser_behaviors.json"):
            assert parse_behavior(row["raw"]) == row["expected"], row["raw"]

    def test_fixture_size(self):
        assert len(load_fixture("parser_behaviors.json")) == 10


RANDOM_ALPHABET = (
    string.ascii_letters + string.digits + string.punctuation + " \t\n"
    + "éüßжあ🙂%"
)


def _random_string(rng: random.Random) -> str:
    return "".join(rng.choice(RANDOM_ALPHABET) for _ in range(rng.randint(0, 120)))


class TestTotality:
    def test_fuzz_ten_thousand_random_strings(self):
        rng = random.Random(31337)
        valid_disorders = set(DisorderLabel)
        for _ in range(10_000):
            raw = _random_string(rng)
            assert parse_binary(raw) in set(BinaryVerdict)
            assert parse_severity(raw) in set(SeverityLevel)
            labels = parse_disorders(raw)
            assert labels <= valid_disorders and labels
            if DisorderLabel.NONE in labels:
                assert labels == frozenset({DisorderLabel.NONE})
            for rec in parse_therapies(raw):
                assert rec.code in set(TherapyCode)
                if rec.confidence_pct is not None:
                    assert 0.0 <= rec.confidence_pct <= 100.0
            for item in parse_behavior(raw):
                assert isinstance(item, str) and item.strip()

    @given(raw=st.text(max_size=200))
    @settings(max_examples=250, deadline=None)
    def test_parsers_total_on_arbitrary_unicode(self, raw):
        parse_binary(raw)
        parse_severity(raw)
        labels = parse_disorders(raw)
        assert labels
        parse_therapies(raw)
        parse_behavior(raw)

    @given(raw=st.text(max_size=100))
    @settings(max_examples=100, deadline=None)
    def test_parsers_deterministic(self, raw):
        assert parse_disorders(raw) == parse_disorders(raw)
        assert parse_therapies(raw) == parse_therapies(raw)
        assert parse_behavior(raw) == parse_behavior(raw)
