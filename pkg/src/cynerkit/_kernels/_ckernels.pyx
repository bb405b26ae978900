# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled tag-sequence kernels; contract-identical to _pykernels."""

MALFORMED = 0
ORPHAN_INSIDE = 1
LABEL_MISMATCH = 2


cpdef tag_label(str tag):
    if len(tag) > 2 and tag[1] == "-" and (tag[0] == "B" or tag[0] == "I"):
        return tag[2:]
    return None


cpdef bint is_wellformed(str tag):
    return tag == "O" or (len(tag) > 2 and tag[1] == "-" and (tag[0] == "B" or tag[0] == "I"))


cpdef list bio2_violations(tags):
    cdef list out = []
    cdef Py_ssize_t i, n = len(tags)
    cdef str tag, label
    cdef object prev_label = None
    for i in range(n):
        tag = tags[i]
        if tag == "O":
            prev_label = None
            continue
        if len(tag) > 2 and tag[1] == "-":
            if tag[0] == "B":
                prev_label = tag[2:]
                continue
            if tag[0] == "I":
                label = tag[2:]
                if prev_label is None:
                    out.append((i, ORPHAN_INSIDE))
                elif <str> prev_label != label:
                    out.append((i, LABEL_MISMATCH))
                prev_label = label
                continue
        out.append((i, MALFORMED))
        prev_label = None
    return out


cpdef list bio2_repair(tags):
    cdef list out = []
    cdef Py_ssize_t i, n = len(tags)
    cdef str tag, label
    cdef object prev_label = None
    for i in range(n):
        tag = tags[i]
        if tag == "O":
            prev_label = None
            out.append(tag)
        elif len(tag) > 2 and tag[1] == "-" and tag[0] == "B":
            prev_label = tag[2:]
            out.append(tag)
        elif len(tag) > 2 and tag[1] == "-" and tag[0] == "I":
            label = tag[2:]
            if prev_label is None or <str> prev_label != label:
                out.append("B-" + label)
            else:
                out.append(tag)
            prev_label = label
        else:
            raise ValueError(f"malformed tag {tag!r} at position {i}")
    return out


cpdef list decode_spans(tags):
    cdef list spans = []
    cdef Py_ssize_t i, n = len(tags)
    cdef Py_ssize_t start = -1
    cdef str tag
    cdef object label = None
    for i in range(n):
        tag = tags[i]
        if tag == "O":
            if label is not None:
                spans.append((start, i, label))
                label = None
            continue
        if len(tag) > 2 and tag[1] == "-":
            if tag[0] == "B":
                if label is not None:
                    spans.append((start, i, label))
                start = i
                label = tag[2:]
                continue
            if tag[0] == "I":
                if label is None:
                    raise ValueError(f"orphan inside tag at position {i}", i)
                if <str> label != tag[2:]:
                    raise ValueError(f"label mismatch at position {i}", i)
                continue
        raise ValueError(f"malformed tag {tag!r} at position {i}", i)
    if label is not None:
        spans.append((start, n, label))
    return spans


cpdef list encode_spans(Py_ssize_t length, spans):
    cdef list tags = ["O"] * length
    cdef Py_ssize_t prev_end = 0
    cdef Py_ssize_t start, end, i
    cdef str label
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
