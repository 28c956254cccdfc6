"""Frequency-derived predictors.

* an initial-token lexicon built from paragraph-per-line text (a token that
  opens a paragraph must open a sentence),
* a connective table of attested connective sequences (up to five tokens)
  with the ratio at which each sequence is labeled a connective,
* the sentence-final punctuation splitter and the exclusive-connective
  baseline.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .corpus import B_CONN, I_CONN, OUT

log = logging.getLogger(__name__)

SENT_FINAL = (".", "!", "?", "。", "！", "？")
MAX_CONN_LEN = 5
_STRIP = ".!?。！？,;:\"'()[]“”«»"


def _words(text):
    for raw in text.split():
        w = raw.strip(_STRIP)
        if w:
            yield w


@dataclass
class InitialTokenLexicon:
    entries: dict = field(default_factory=dict)   # form -> (initial, total, ratio)

    def ratio(self, form):
        entry = self.entries.get(form)
        return entry[2] if entry else 0.0

    def __contains__(self, form):
        return form in self.entries

    def __len__(self):
        return len(self.entries)

    def to_text(self):
        return "".join("%s\t%d\t%d\n" % (form, ini, tot)
                       for form, (ini, tot, _) in sorted(self.entries.items()))

    @classmethod
    def from_text(cls, text):
        entries = {}
        for line in text.splitlines():
            if not line:
                continue
            form, ini, tot = line.split("\t")
            entries[form] = (int(ini), int(tot), int(ini) / int(tot))
        return cls(entries)


def build_initial_lexicon(paragraphs, min_freq=10, min_ratio=0.5):
    """Forms opening paragraphs more than ``min_freq`` times and with an
    initial/total ratio above ``min_ratio``."""
    initial, total = Counter(), Counter()
    for para in paragraphs:
        para = para.strip()
        if not para:
            continue
        cut = len(para)
        for mark in SENT_FINAL:
            pos = para.find(mark)
            if pos != -1:
                cut = min(cut, pos)
        first = next(_words(para[:cut]), None)
        if first is not None:
            initial[first] += 1
        total.update(_words(para))
    entries = {}
    for form, ini in initial.items():
        tot = max(total[form], ini)
        ratio = ini / tot
        if ini > min_freq and ratio > min_ratio:
            entries[form] = (ini, tot, ratio)
    return InitialTokenLexicon(entries)


@dataclass
class ConnectiveTable:
    entries: dict = field(default_factory=dict)   # tuple of forms -> (conn, total, ratio)

    @property
    def lengths(self):
        return sorted({len(k) for k in self.entries})

    def to_text(self):
        return "".join("%s\t%d\t%d\n" % (" ".join(seq), c, t)
                       for seq, (c, t, _) in sorted(self.entries.items()))

    @classmethod
    def from_text(cls, text):
        entries = {}
        for line in text.splitlines():
            if not line:
                continue
            seq, c, t = line.split("\t")
            entries[tuple(seq.split(" "))] = (int(c), int(t), int(c) / int(t))
        return cls(entries)


def conn_spans(labels):
    """(start, end_exclusive) of every maximal connective span; an I without a
    preceding B or I opens a span."""
    spans, start = [], None
    for i, lab in enumerate(labels):
        if lab == B_CONN or (lab == I_CONN and start is None):
            if start is not None:
                spans.append((start, i))
            start = i
        elif lab != I_CONN and start is not None:
            spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(labels)))
    return spans


def build_connective_table(train_docs):
    conn = Counter()
    seqs = []
    for doc in train_docs:
        toks = doc.tokens
        forms = [t.form for t in toks]
        seqs.append(forms)
        for s, e in conn_spans([t.conn_label for t in toks]):
            if e - s > MAX_CONN_LEN:
                log.warning("connective span of %d tokens in %s truncated to %d",
                            e - s, doc.name, MAX_CONN_LEN)
                e = s + MAX_CONN_LEN
            conn[tuple(forms[s:e])] += 1
    total = Counter()
    lengths = sorted({len(k) for k in conn})
    for forms in seqs:
        for L in lengths:
            for i in range(len(forms) - L + 1):
                key = tuple(forms[i:i + L])
                if key in conn:
                    total[key] += 1
    return ConnectiveTable({k: (c, total[k], c / total[k]) for k, c in conn.items()})


def freq_conn_predict(doc, table):
    """Per token (ratio, training frequency, span position B/I/O) of the
    longest table sequence covering it; ties prefer the higher ratio."""
    forms = [t.form for t in doc.tokens]
    n = len(forms)
    out = []
    lengths = table.lengths
    for i in range(n):
        best = None
        for L in lengths:
            for s in range(max(0, i - L + 1), min(i, n - L) + 1):
                entry = table.entries.get(tuple(forms[s:s + L]))
                if entry is None:
                    continue
                cand = (L, entry[2], -s, entry[1], "B" if s == i else "I")
                if best is None or cand[:3] > best[:3]:
                    best = cand
        out.append((0.0, 0, "O") if best is None else (best[1], best[3], best[4]))
    return out


def punct_split(tokens):
    """Sentence-start flags: document-initial, or after a token ending in . ! ? (or CJK)."""
    if hasattr(tokens, "tokens"):
        tokens = tokens.tokens
    forms = [t if isinstance(t, str) else t.form for t in tokens]
    return [i == 0 or forms[i - 1].endswith(SENT_FINAL) for i in range(len(forms))]


def exclusive_connectives(train_docs):
    """Forms whose every training occurrence lies inside a connective span."""
    seen, inside = Counter(), Counter()
    for doc in train_docs:
        for tok in doc.tokens:
            seen[tok.form] += 1
            if tok.conn_label != OUT:
                inside[tok.form] += 1
    return frozenset(form for form, c in inside.items() if c == seen[form])


def exclusive_conn_baseline(train_docs, test_doc, _forms=None):
    forms = exclusive_connectives(train_docs) if _forms is None else _forms
    return [B_CONN if t.form in forms else OUT for t in test_doc.tokens]


def exact_ratio(table, seq):
    c, t, _ = table.entries[tuple(seq)]
    return Fraction(c, t)
