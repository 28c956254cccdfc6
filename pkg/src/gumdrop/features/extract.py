"""Per-token feature dictionaries for whole documents."""

from .document import QUOTES, quote_paren_state, sent_percentile
from .lexical import (VOWELS, Lexicon, UnigramTagger, build_frequencies, build_lexicon,
                      char_type_counts, first_last_chars, log_frequency, orth_case)
from .syntax import (CLAUSAL_RELATIONS, bin_head_distance, dep_brackets, head_distance,
                     sentence_subtree_features)


def _tok_pos(i, n):
    if i == 1:
        return "first"
    if i == n:
        return "last"
    return "second" if i == 2 else "mid"


class TokenFeaturizer:
    """Fitted lexical state plus the rules turning documents into features.

    ``pos_source`` is ``gold`` (use the UPOS column), ``tagger`` (always
    re-tag with the bundled unigram tagger) or ``auto`` (tagger only where
    the column is empty).
    """

    def __init__(self, language=None, lexicon_sizes=(100, 200), wordlex_size=1000,
                 clausal_relations=CLAUSAL_RELATIONS, pos_source="auto",
                 vowels=VOWELS, quotes=QUOTES):
        self.language = language
        self.lexicon_sizes = tuple(lexicon_sizes)
        self.wordlex_size = wordlex_size
        self.clausal_relations = frozenset(clausal_relations)
        self.pos_source = pos_source
        self.vowels = frozenset(vowels)
        self.quotes = frozenset(quotes)
        self.lexicons = {}
        self.frequencies = {}
        self.tagger = UnigramTagger()

    def fit(self, docs):
        tokens = [t for d in docs for t in d.tokens]
        for n in self.lexicon_sizes + (self.wordlex_size,):
            self.lexicons[n] = build_lexicon(tokens, n)
        self.frequencies = build_frequencies(tokens)
        self.tagger = UnigramTagger.fit(docs)
        return self

    def _pos(self, tokens):
        if self.pos_source == "gold":
            return [t.upos for t in tokens]
        if self.pos_source == "tagger":
            return self.tagger.tag([t.form for t in tokens])
        return [t.upos if t.upos != "_" else self.tagger.tag_form(t.form) for t in tokens]

    def doc_features(self, doc, syntax=True, children=False):
        """One dict per token. ``syntax`` adds dependency features (needs
        heads); ``children`` adds the subtree context set."""
        tokens = doc.tokens
        pos = self._pos(tokens)
        qp = quote_paren_state(doc, self.quotes)
        pct = sent_percentile(doc)
        lex100 = self.lexicons.get(100, Lexicon())
        lex200 = self.lexicons.get(200, Lexicon())
        lexw = self.lexicons.get(self.wordlex_size, Lexicon())
        out = []
        k = 0
        for s_i, sent in enumerate(doc.sentences):
            n = len(sent)
            has_syntax = syntax and sent.has_syntax
            brackets = dep_brackets(sent, self.clausal_relations) if has_syntax else None
            subtree = sentence_subtree_features(sent) if has_syntax and children else None
            for j, tok in enumerate(sent.tokens):
                form = tok.form
                upos = pos[k]
                digits, cons, vowels, other = char_type_counts(form, self.vowels)
                first, last = first_last_chars(form, self.language)
                f = {
                    "word": form,
                    "word100": lex100.lookup(form, upos),
                    "word200": lex200.lookup(form, upos),
                    "wordlex": lexw.lookup(form, upos),
                    "upos": upos,
                    "xpos": tok.xpos,
                    "case": orth_case(form),
                    "first": first,
                    "last": last,
                    "digits": digits,
                    "consonants": cons,
                    "vowels": vowels,
                    "other": other,
                    "tok_len": len(form),
                    "tok_frq": log_frequency(self.frequencies, form),
                    "genre": doc.genre,
                    "quote": int(qp[k][0]),
                    "paren": int(qp[k][1]),
                    "sent_pct": pct[s_i],
                    "sent_len": n,
                    "tok_pos": _tok_pos(tok.index, n),
                }
                if syntax:
                    if has_syntax:
                        d = head_distance(sent, tok.index)
                        f["deprel"] = tok.deprel
                        f["headdist"] = d
                        f["headbin"] = bin_head_distance(d)
                        f["depbracket"] = brackets[j]
                    else:
                        f.update(deprel="_", headdist=0, headbin="zero", depbracket="O")
                if subtree is not None:
                    f.update(subtree[j])
                out.append(f)
                k += 1
        return out

    def state(self):
        return {
            "language": self.language,
            "lexicon_sizes": list(self.lexicon_sizes),
            "wordlex_size": self.wordlex_size,
            "clausal_relations": sorted(self.clausal_relations),
            "pos_source": self.pos_source,
            "vowels": "".join(sorted(self.vowels)),
            "quotes": "".join(sorted(self.quotes)),
            "lexicons": {str(n): lex.to_text() for n, lex in sorted(self.lexicons.items())},
            "frequencies": self.frequencies,
            "tagger": self.tagger.state(),
        }

    @classmethod
    def from_state(cls, state):
        obj = cls(state["language"], state["lexicon_sizes"], state["wordlex_size"],
                  state["clausal_relations"], state["pos_source"], state["vowels"],
                  state["quotes"])
        obj.lexicons = {int(n): Lexicon.from_text(t) for n, t in state["lexicons"].items()}
        obj.frequencies = dict(state["frequencies"])
        obj.tagger = UnigramTagger.from_state(state["tagger"])
        return obj
