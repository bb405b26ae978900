import json

import pytest

from cynerkit.errors import EmptyFile, ParseError
from cynerkit.ingest import (
    AttackerFieldMap,
    builtin_descriptors,
    clean_aptner,
    clean_dnrti,
    parse_attacker,
    parse_conll,
    read_raw_file,
    split_lines,
    write_conll,
)

APTNER_LABELS = builtin_descriptors()["APTNER"].official_labels


def clean_aptner_text(text, **kwargs):
    return clean_aptner(split_lines(text), APTNER_LABELS, **kwargs)


class TestDescriptors:
    def test_declared_sizes(self):
        sizes = {name: d.declared_size for name, d in builtin_descriptors().items()}
        assert sizes == {
            "APTNER": 260_134,
            "CYNER": 106_991,
            "DNRTI": 175_220,
            "ATTACKER": 78_987,
        }

    def test_aptner_has_21_entity_types(self):
        assert len(builtin_descriptors()["APTNER"].official_labels) == 21

    def test_formats(self):
        descriptors = builtin_descriptors()
        assert descriptors["ATTACKER"].format == "json-tokens"
        assert descriptors["APTNER"].format == "conll"


class TestCleanAptner:
    def test_o_only_line_dropped(self):
        corpus = clean_aptner_text("keep O\nO\nalso O\n")
        assert [t.text for t in corpus.sentences[0]] == ["keep", "also"]

    def test_three_field_line_truncated(self):
        corpus = clean_aptner_text("foo bar baz\n")
        token = corpus.sentences[0].tokens[0]
        assert (token.text, token.tag) == ("foo", "O")

    def test_out_of_set_label_replaced(self):
        corpus = clean_aptner_text("Google B-NOTALABEL\n")
        token = corpus.sentences[0].tokens[0]
        assert (token.text, token.tag) == ("Google", "O")

    def test_in_set_label_kept(self):
        corpus = clean_aptner_text("APT28 B-APT\n")
        assert corpus.sentences[0].tokens[0].tag == "B-APT"

    def test_single_token_line_kept_as_o(self):
        corpus = clean_aptner_text("standalone\n")
        token = corpus.sentences[0].tokens[0]
        assert (token.text, token.tag) == ("standalone", "O")

    def test_breaks_after_dot_o_and_keeps_it(self):
        corpus = clean_aptner_text("a O\n. O\nb O\n. O\n")
        assert len(corpus) == 2
        assert [t.text for t in corpus.sentences[0]] == ["a", "."]
        assert corpus.sentences[0].tokens[-1].tag == "O"

    def test_blank_lines_are_not_breaks(self):
        corpus = clean_aptner_text("a O\n\n\nb O\n. O\n")
        assert len(corpus) == 1
        assert [t.text for t in corpus.sentences[0]] == ["a", "b", "."]

    def test_trailing_tokens_form_final_sentence(self):
        corpus = clean_aptner_text("a O\n. O\ntail O\n")
        assert len(corpus) == 2
        assert [t.text for t in corpus.sentences[1]] == ["tail"]

    def test_output_is_bio2_valid(self):
        corpus = clean_aptner_text("x I-MAL\ny I-OS\n")
        assert corpus.sentences[0].tags == ["B-MAL", "B-OS"]

    def test_empty_input(self):
        with pytest.raises(EmptyFile):
            clean_aptner([], APTNER_LABELS)

    def test_golden_file(self, data_dir):
        corpus = clean_aptner(read_raw_file(data_dir / "aptner_train_raw.txt"), APTNER_LABELS)
        golden = (data_dir / "aptner_train_cleaned.golden.conll").read_bytes()
        assert write_conll(corpus).encode("utf-8") == golden

    def test_cleaning_is_deterministic(self, data_dir):
        lines = read_raw_file(data_dir / "aptner_train_raw.txt")
        first = write_conll(clean_aptner(lines, APTNER_LABELS))
        second = write_conll(clean_aptner(lines, APTNER_LABELS))
        assert first == second

    def test_never_invents_tokens(self, data_dir):
        lines = read_raw_file(data_dir / "aptner_train_raw.txt")
        corpus = clean_aptner(lines, APTNER_LABELS)
        input_tokens = [line.fields[0] for line in lines if line.fields]
        output_tokens = [t.text for s in corpus for t in s]
        # output tokens appear in input order (subsequence check)
        it = iter(input_tokens)
        assert all(any(tok == candidate for candidate in it) for tok in output_tokens)


class TestCleanDnrti:
    def test_blank_line_breaks(self):
        corpus = clean_dnrti(split_lines("a O\n\nb O\n"))
        assert len(corpus) == 2

    def test_o_only_dropped(self):
        corpus = clean_dnrti(split_lines("a O\nO\nb O\n"))
        assert [t.text for t in corpus.sentences[0]] == ["a", "b"]

    def test_single_field_kept(self):
        corpus = clean_dnrti(split_lines("sample\n"))
        token = corpus.sentences[0].tokens[0]
        assert (token.text, token.tag) == ("sample", "O")

    def test_three_fields_truncated(self):
        corpus = clean_dnrti(split_lines("a b c\n"))
        token = corpus.sentences[0].tokens[0]
        assert (token.text, token.tag) == ("a", "O")

    def test_empty_input(self):
        with pytest.raises(EmptyFile):
            clean_dnrti([])

    def test_golden_file(self, data_dir):
        corpus = clean_dnrti(read_raw_file(data_dir / "dnrti_train_raw.txt"))
        golden = (data_dir / "dnrti_train_cleaned.golden.conll").read_bytes()
        assert write_conll(corpus).encode("utf-8") == golden


class TestParseAttacker:
    def test_space_tokens_skipped(self):
        data = json.dumps(
            [{"tokens": [" ", "x"], "tags": ["B-MALWARE", "O"]}]
        ).encode("utf-8")
        corpus = parse_attacker(data)
        assert len(corpus.sentences[0]) == 1
        assert corpus.sentences[0].tokens[0].text == "x"

    def test_normal_tokens_kept_verbatim(self):
        data = json.dumps(
            [{"tokens": ["Google"], "tags": ["B-GENERAL_IDENTITY"]}]
        ).encode("utf-8")
        corpus = parse_attacker(data)
        assert corpus.sentences[0].tokens[0].tag == "B-GENERAL_IDENTITY"

    def test_token_count_matches_independent_filter(self, data_dir):
        # [DERIVED] independent count: non-space tokens in the raw JSON.
        raw = (data_dir / "attacker_train_raw.json").read_bytes()
        expected = sum(
            1 for entry in json.loads(raw) for tok in entry["tokens"] if tok != " "
        )
        corpus = parse_attacker(raw)
        assert corpus.n_tokens == expected

    def test_malformed_json_has_byte_offset(self):
        with pytest.raises(ParseError) as exc_info:
            parse_attacker(b'[{"tokens": }]')
        assert exc_info.value.offset is not None

    def test_length_mismatch_rejected(self):
        data = json.dumps([{"tokens": ["a", "b"], "tags": ["O"]}]).encode("utf-8")
        with pytest.raises(ParseError):
            parse_attacker(data)

    def test_custom_field_map(self):
        data = json.dumps(
            {"sentences": [{"words": ["a"], "labels": ["O"]}]}
        ).encode("utf-8")
        corpus = parse_attacker(
            data,
            AttackerFieldMap(tokens_key="words", tags_key="labels", sentence_list_key="sentences"),
        )
        assert corpus.n_tokens == 1

    def test_golden_file(self, data_dir):
        corpus = parse_attacker((data_dir / "attacker_train_raw.json").read_bytes())
        golden = (data_dir / "attacker_train_cleaned.golden.conll").read_bytes()
        assert write_conll(corpus).encode("utf-8") == golden


class TestParseConll:
    def test_single_sentence(self):
        corpus = parse_conll(split_lines("Proofpoint B-Organization\n"))
        assert len(corpus) == 1
        assert corpus.sentences[0].tokens[0].text == "Proofpoint"

    def test_two_sentences(self):
        corpus = parse_conll(split_lines("a O\n\nb O\n"))
        assert len(corpus) == 2

    def test_short_line_rejected(self):
        with pytest.raises(ParseError) as exc_info:
            parse_conll(split_lines("a O\nb\n"))
        assert exc_info.value.line_number == 2

    def test_malformed_tag_rejected(self):
        with pytest.raises(ParseError):
            parse_conll(split_lines("a NOTATAG\n"))

    def test_pos_column(self):
        corpus = parse_conll(split_lines("dog NN O\n"), token_col=0, tag_col=2, pos_col=1)
        assert corpus.sentences[0].tokens[0].pos == "NN"

    def test_round_trip_of_cleaned_aptner(self, data_dir):
        # re-reading the cleaned output must preserve the token count
        corpus = clean_aptner(read_raw_file(data_dir / "aptner_train_raw.txt"), APTNER_LABELS)
        reread = parse_conll(split_lines(write_conll(corpus)), name="APTNER")
        assert reread.n_tokens == corpus.n_tokens
        assert [s.tags for s in reread] == [s.tags for s in corpus]

    def test_writer_parser_round_trip_is_byte_identical(self, data_dir):
        for name in (
            "aptner_train_cleaned.golden.conll",
            "dnrti_train_cleaned.golden.conll",
            "attacker_train_cleaned.golden.conll",
        ):
            text = (data_dir / name).read_text(encoding="utf-8")
            corpus = parse_conll(split_lines(text), name="X")
            assert write_conll(corpus) == text

    def test_invalid_utf8_is_a_hard_error(self, tmp_path):
        bad = tmp_path / "bad.conll"
        bad.write_bytes(b"a O\n\xff\xfe O\n")
        with pytest.raises(ParseError):
            read_raw_file(bad)
