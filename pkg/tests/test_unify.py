import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cynerkit.corpus import extract_spans, validate_bio2
from cynerkit.errors import ParseError, SchemaMismatch
from cynerkit.unify import (
    UNIFIED_LABELS,
    UnificationMap,
    builtin_map,
    builtin_maps,
    canonical_unified_label,
    parse_mapping_file,
    unify_corpus,
)

from .conftest import make_corpus

TABLE8 = {
    "APTNER": {
        "APT": "Organization",
        "SECTEAM": "Organization",
        "OS": "System",
        "VULNAME": "Vulnerability",
        "MAL": "Malware",
    },
    "DNRTI": {
        "HackOrg": "Organization",
        "SecTeam": "Organization",
        "org": "Organization",
        "Tool": "System",
        "Way": "Vulnerability",
        "exp": "Vulnerability",
        "SamFile": "Malware",
    },
    "ATTACKER": {
        "THREAT_ACTOR": "Organization",
        "GENERAL_IDENTITY": "Organization",
        "INFRASTRUCTURE": "System",
        "GENERAL_TOOL": "System",
        "ATTACK_TOOL": "System",
        "VULNERABILITY": "Vulnerability",
        "MALWARE": "Malware",
    },
    "CYNER": {
        "Organization": "Organization",
        "System": "System",
        "Vulnerability": "Vulnerability",
        "Malware": "Malware",
    },
}


class TestBuiltinMaps:
    def test_reproduces_label_mapping_table_exactly(self):
        maps = {m.dataset: m.entries for m in builtin_maps()}
        assert maps == TABLE8

    def test_apt_maps_to_organization(self):
        assert builtin_map("APTNER").target("APT") == "Organization"

    def test_cyner_indicator_drops_to_o(self):
        assert builtin_map("CYNER").target("Indicator") is None

    def test_aptner_file_drops_to_o(self):
        assert builtin_map("APTNER").target("FILE") is None

    def test_values_restricted_to_unified_labels(self):
        with pytest.raises(ValueError):
            UnificationMap("X", {"A": "Location"})


class TestUnifyCorpus:
    def test_mapped_span(self):
        corpus = make_corpus([["B-SamFile", "I-SamFile"]], name="DNRTI")
        unified = unify_corpus(corpus, builtin_map("DNRTI"))
        assert unified.sentences[0].tags == ["B-Malware", "I-Malware"]

    def test_unmapped_drops_to_o(self):
        corpus = make_corpus([["B-FILE", "I-FILE", "I-FILE"]], name="APTNER")
        unified = unify_corpus(corpus, builtin_map("APTNER"))
        assert unified.sentences[0].tags == ["O", "O", "O"]

    def test_all_two_tag_combinations_stay_valid(self):
        # [DERIVED] brute-force over mapped/unmapped label pairs: the output
        # must always be valid BIO2 and match per-tag expectations.
        mapping = builtin_map("APTNER")
        alphabet = ["O", "B-APT", "I-APT", "B-FILE", "I-FILE"]
        for pair in itertools.product(alphabet, repeat=2):
            corpus = make_corpus([list(pair)], name="APTNER")
            unified = unify_corpus(corpus, mapping)
            assert validate_bio2(unified.sentences[0]) == [], pair
        corpus = make_corpus([["B-APT", "I-FILE"]], name="APTNER")
        assert unify_corpus(corpus, mapping).sentences[0].tags == ["B-Organization", "O"]

    def test_schema_mismatch(self):
        corpus = make_corpus([["O"]], name="DNRTI")
        with pytest.raises(SchemaMismatch):
            unify_corpus(corpus, builtin_map("APTNER"))

    def test_texts_untouched(self):
        corpus = make_corpus([["B-MAL", "I-MAL"]], name="APTNER", texts_lists=[["X-Agent", "runs"]])
        unified = unify_corpus(corpus, builtin_map("APTNER"))
        assert unified.sentences[0].texts == ("X-Agent", "runs")

    def test_output_schema_is_occurring_subset(self):
        corpus = make_corpus([["B-APT", "O", "B-FILE"]], name="APTNER")
        unified = unify_corpus(corpus, builtin_map("APTNER"))
        assert unified.schema == frozenset({"Organization"})

    def test_case_sensitive_matching(self):
        corpus = make_corpus([["B-ORG", "B-org"]], name="DNRTI", schema={"ORG", "org"})
        unified = unify_corpus(corpus, builtin_map("DNRTI"))
        assert unified.sentences[0].tags == ["O", "B-Organization"]

    def test_idempotent_under_cyner_identity(self):
        corpus = make_corpus(
            [["B-Malware", "I-Malware", "O", "B-System"]], name="CYNER"
        )
        once = unify_corpus(corpus, builtin_map("CYNER"))
        twice = unify_corpus(once, builtin_map("CYNER"))
        assert [s.tags for s in once] == [s.tags for s in twice]

    def test_repairs_orphans_from_skipped_tokens(self):
        # parse_attacker may emit orphan I- tags; unification must fix them
        corpus = make_corpus([["O", "I-MALWARE"]], name="ATTACKER")
        unified = unify_corpus(corpus, builtin_map("ATTACKER"))
        assert unified.sentences[0].tags == ["O", "B-Malware"]


fuzz_map = UnificationMap("FUZZ", {"A": "Organization", "B": "System"})
fuzz_tags = st.lists(
    st.sampled_from(["O"] + [f"{p}-{l}" for p in "BI" for l in "ABCD"]),
    min_size=1,
    max_size=10,
)


class TestUnifyProperties:
    @given(st.lists(fuzz_tags, min_size=1, max_size=4))
    def test_never_increases_entity_tokens_and_stays_valid(self, tag_lists):
        corpus = make_corpus(tag_lists, name="FUZZ")
        unified = unify_corpus(corpus, fuzz_map)
        assert unified.n_entity_tokens <= corpus.n_entity_tokens
        for sentence in unified:
            assert validate_bio2(sentence) == []

    @given(fuzz_tags)
    def test_output_spans_contained_in_input_spans(self, tags):
        from cynerkit.corpus import repair_bio2

        corpus = make_corpus([repair_bio2(tags)], name="FUZZ")
        unified = unify_corpus(corpus, fuzz_map)
        input_spans = extract_spans(corpus.sentences[0])
        for out in extract_spans(unified.sentences[0]):
            containers = [
                s for s in input_spans if s.start <= out.start and out.end <= s.end
            ]
            assert len(containers) == 1


class TestMappingFile:
    def test_parse_basic(self):
        text = "# comment line\nDNRTI\tSamFile\tMalware\nDNRTI\tTool\tSystem\n"
        maps = parse_mapping_file(text)
        assert maps["DNRTI"].entries == {"SamFile": "Malware", "Tool": "System"}

    def test_accepts_british_spelling(self):
        maps = parse_mapping_file("X\tACTOR\torganisation\n")
        assert maps["X"].entries == {"ACTOR": "Organization"}

    def test_canonicalizes_case(self):
        assert canonical_unified_label("MALWARE") == "Malware"
        assert canonical_unified_label("organisation") == "Organization"
        assert canonical_unified_label("Location") is None

    def test_rejects_bad_field_count(self):
        with pytest.raises(ParseError) as exc_info:
            parse_mapping_file("DNRTI\tSamFile\n")
        assert exc_info.value.line_number == 1

    def test_rejects_unknown_unified_label(self):
        with pytest.raises(ParseError):
            parse_mapping_file("DNRTI\tSamFile\tLocation\n")

    def test_rejects_conflicting_entries(self):
        text = "X\tA\tMalware\nX\tA\tSystem\n"
        with pytest.raises(ParseError):
            parse_mapping_file(text)

    def test_duplicate_consistent_entries_ok(self):
        text = "X\tA\tMalware\nX\tA\tMalware\n"
        assert parse_mapping_file(text)["X"].entries == {"A": "Malware"}

    def test_unified_label_inventory(self):
        assert UNIFIED_LABELS == ("Organization", "System", "Vulnerability", "Malware")
