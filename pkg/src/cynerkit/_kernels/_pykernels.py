"""Pure-Python tag-sequence kernels.

These are the per-token inner loops everything else calls (validation,
repair, span decoding). A compiled twin lives in ``_ckernels.pyx``; both
implement exactly the same contracts and are parity-tested.

Violation kind codes: 0 = malformed tag string, 1 = I- tag with no live
span to continue (sentence start or after O), 2 = I- tag whose label part
differs from the live span's label.
"""

MALFORMED = 0
ORPHAN_INSIDE = 1
LABEL_MISMATCH = 2


def tag_label(tag):
    """Label part of a well-formed tag, or None for "O" and malformed tags."""
    if len(tag) > 2 and tag[1] == "-" and (tag[0] == "B" or tag[0] == "I"):
        return tag[2:]
    return None


def is_wellformed(tag):
    return tag == "O" or (len(tag) > 2 and tag[1] == "-" and (tag[0] == "B" or tag[0] == "I"))


def bio2_violations(tags):
    """All (position, kind) pairs where the sequence breaks BIO2.

    A malformed tag clears the live span, so an I- tag right after it is
    reported as an orphan rather than a mismatch.
    """
    out = []
    prev_label = None
    for i, tag in enumerate(tags):
        if tag == "O":
            prev_label = None
            continue
        if len(tag) > 2 and tag[1] == "-":
            head = tag[0]
            if head == "B":
                prev_label = tag[2:]
                continue
            if head == "I":
                label = tag[2:]
                if prev_label is None:
                    out.append((i, ORPHAN_INSIDE))
                elif prev_label != label:
                    out.append((i, LABEL_MISMATCH))
                prev_label = label
                continue
        out.append((i, MALFORMED))
        prev_label = None
    return out


def bio2_repair(tags):
    """Rewrite orphan and mismatched I-X tags to B-X.

    Requires well-formed tags (O / B- / I-). Idempotent; output passes
    bio2_violations with an empty result.
    """
    out = []
    prev_label = None
    for i, tag in enumerate(tags):
        if tag == "O":
            prev_label = None
            out.append(tag)
        elif len(tag) > 2 and tag[1] == "-" and tag[0] == "B":
            prev_label = tag[2:]
            out.append(tag)
        elif len(tag) > 2 and tag[1] == "-" and tag[0] == "I":
            label = tag[2:]
            if prev_label != label:
                out.append("B-" + label)
            else:
                out.append(tag)
            prev_label = label
        else:
            raise ValueError(f"malformed tag {tag!r} at position {i}")
    return out


def decode_spans(tags):
    """Decode a valid BIO2 sequence into (start, end, label) triples.

    Raises ValueError (carrying the offending position as args[1]) on the
    first violation; callers wanting lenient decoding repair first.
    """
    spans = []
    start = -1
    label = None
    for i, tag in enumerate(tags):
        if tag == "O":
            if label is not None:
                spans.append((start, i, label))
                label = None
            continue
        if len(tag) > 2 and tag[1] == "-":
            head = tag[0]
            if head == "B":
                if label is not None:
                    spans.append((start, i, label))
                start = i
                label = tag[2:]
                continue
            if head == "I":
                if label is None:
                    raise ValueError(f"orphan inside tag at position {i}", i)
                if label != tag[2:]:
                    raise ValueError(f"label mismatch at position {i}", i)
                continue
        raise ValueError(f"malformed tag {tag!r} at position {i}", i)
    if label is not None:
        spans.append((start, len(tags), label))
    return spans


def encode_spans(length, spans):
    """Inverse of decode_spans: rebuild the tag sequence from spans.

    Spans must be in-range, sorted by start and non-overlapping.
    """
    tags = ["O"] * length
    prev_end = 0
    for start, end, label in spans:
        if not (0 <= start < end <= length):
            raise ValueError(f"span ({start}, {end}) out of range for length {length}")
        if start < prev_end:
            raise ValueError(f"span ({start}, {end}) overlaps previous span or is unsorted")
        tags[start] = "B-" + label
        for i in range(start + 1, end):
            tags[i] = "I-" + label
        prev_end = end
    return tags
