import pytest

from cynerkit.corpus import Corpus, Sentence, Token


def make_sentence(tags, texts=None, pos=None):
    if texts is None:
        texts = [f"w{i}" for i in range(len(tags))]
    if pos is None:
        pos = [None] * len(tags)
    return Sentence(tuple(Token(t, tag, p) for t, tag, p in zip(texts, tags, pos)))


def make_corpus(tag_lists, name="FIX", split="train", schema=None, texts_lists=None):
    sentences = []
    for i, tags in enumerate(tag_lists):
        texts = texts_lists[i] if texts_lists else None
        sentences.append(make_sentence(tags, texts))
    if schema is None:
        schema = {t.label for s in sentences for t in s if t.label is not None}
    return Corpus(name, split, frozenset(schema), tuple(sentences))


@pytest.fixture
def data_dir():
    from pathlib import Path

    return Path(__file__).parent / "data"
