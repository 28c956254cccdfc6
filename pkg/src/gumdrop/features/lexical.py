"""Word-level features: character classes, edge characters, casing, lexicons."""

import math
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field

VOWELS = frozenset("aeiouAEIOU"
                   "áéíóúàèìòùâêîôûäëïöüãõåæøœ"
                   "ÁÉÍÓÚÀÈÌÒÙÂÊÎÔÛÄËÏÖÜÃÕÅÆØŒ")


def char_type_counts(form, vowels=VOWELS):
    """Return (digits, consonants, vowels, other) character counts."""
    digits = consonants = nvowels = other = 0
    for ch in form:
        if ch.isdigit():
            digits += 1
        elif ch in vowels:
            nvowels += 1
        elif ch.isalpha():
            consonants += 1
        else:
            other += 1
    return digits, consonants, nvowels, other


def first_last_chars(form, language=None):
    """First and last character; for Chinese the first and last UTF-8 byte."""
    if not form:
        return "", ""
    if language == "zho":
        raw = form.encode("utf-8")
        return "x%02x" % raw[0], "x%02x" % raw[-1]
    return form[0], form[-1]


def orth_case(form):
    if not any(ch.isalpha() for ch in form):
        return "num" if any(ch.isdigit() for ch in form) else "other"
    if form.isupper():
        return "upper"
    if form.islower():
        return "lower"
    if form[0].isupper() and form[1:].islower():
        return "title"
    return "mixed"


@dataclass(frozen=True)
class Lexicon:
    """The ``size`` most frequent forms; anything else backs off to its POS."""
    items: dict = field(default_factory=dict)
    size: int = 0
    backoff: str = "pos_category"

    def lookup(self, form, upos="_"):
        if form in self.items:
            return form
        return upos if self.backoff == "pos_category" else "<unk>"

    def to_text(self):
        lines = ["#lexicon\t%d\t%s" % (self.size, self.backoff)]
        for form, rank in sorted(self.items.items(), key=lambda kv: kv[1]):
            lines.append("%s\t%d" % (form, rank))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        _, size, backoff = lines[0].split("\t")
        items = {}
        for line in lines[1:]:
            form, rank = line.rsplit("\t", 1)
            items[form] = int(rank)
        return cls(items, int(size), backoff)


def _forms(tokens):
    for tok in tokens:
        yield tok if isinstance(tok, str) else tok.form


def build_lexicon(tokens, n, backoff="pos_category"):
    if n <= 0:
        raise ValueError("lexicon size must be positive")
    counts = Counter(_forms(tokens))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    return Lexicon({form: rank for rank, (form, _) in enumerate(ranked, start=1)}, n, backoff)


def build_frequencies(tokens):
    return dict(Counter(_forms(tokens)))


def log_frequency(counts, form):
    return math.log1p(counts.get(form, 0))


def _is_punct(form):
    return bool(form) and all(unicodedata.category(ch).startswith("P") or
                              unicodedata.category(ch).startswith("S") for ch in form)


class UnigramTagger:
    """Most-frequent-tag POS tagger with lowercase, suffix and shape backoff.

    Stands in for an external tagger when running on raw token streams.
    """

    def __init__(self, table=None, lower=None, suffix=None, default="NOUN"):
        self.table = table or {}
        self.lower = lower or {}
        self.suffix = suffix or {}
        self.default = default

    @staticmethod
    def _best(counter):
        return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    @classmethod
    def fit(cls, docs):
        exact, lower, suffix = defaultdict(Counter), defaultdict(Counter), defaultdict(Counter)
        overall = Counter()
        for doc in docs:
            for tok in doc.tokens:
                if tok.upos == "_":
                    continue
                exact[tok.form][tok.upos] += 1
                lower[tok.form.lower()][tok.upos] += 1
                suffix[tok.form.lower()[-3:]][tok.upos] += 1
                overall[tok.upos] += 1
        best = cls._best
        return cls({k: best(v) for k, v in exact.items()},
                   {k: best(v) for k, v in lower.items()},
                   {k: best(v) for k, v in suffix.items()},
                   best(overall) if overall else "NOUN")

    def tag_form(self, form):
        if form in self.table:
            return self.table[form]
        low = form.lower()
        if low in self.lower:
            return self.lower[low]
        if any(ch.isdigit() for ch in form) and not any(ch.isalpha() for ch in form):
            return "NUM"
        if _is_punct(form):
            return "PUNCT"
        return self.suffix.get(low[-3:], self.default)

    def tag(self, forms):
        return [self.tag_form(f) for f in forms]

    def state(self):
        return {"table": self.table, "lower": self.lower, "suffix": self.suffix,
                "default": self.default}

    @classmethod
    def from_state(cls, state):
        return cls(state["table"], state["lower"], state["suffix"], state["default"])
