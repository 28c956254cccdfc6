"""Reading and writing of 10-column CoNLL-U style discourse corpora.

Labels live in the MISC column: ``BeginSeg=Yes`` marks the first token of a
discourse unit and ``Seg=B-Conn`` / ``Seg=I-Conn`` mark connective spans.
Documents are delimited by ``# newdoc id = X`` comments; a file without any
such comment is a single document.
"""

import dataclasses
import hashlib
from dataclasses import dataclass

from .errors import ParseError

BEGIN_SEG = "BeginSeg"
NO_SEG = "NoSeg"
B_CONN = "B-Conn"
I_CONN = "I-Conn"
OUT = "O"

GOLD = "gold_sentences"
FLAT = "flat"


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int | None = None
    deprel: str = "_"
    deps: str = "_"
    misc: tuple = ()
    seg_label: str = NO_SEG
    conn_label: str = OUT
    sent_initial: bool = False


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    doc_offset: int = 0
    comments: tuple = ()
    # (number of preceding tokens, raw line) for multiword ranges and empty nodes
    extra: tuple = ()

    def __len__(self):
        return len(self.tokens)

    @property
    def has_syntax(self):
        return all(t.head is not None for t in self.tokens)


@dataclass(frozen=True)
class Document:
    name: str
    sentences: tuple
    genre: str = "_"
    newdoc: bool = True

    @property
    def tokens(self):
        return [t for s in self.sentences for t in s.tokens]

    def keys(self):
        """(doc, sentence offset, token index) for every token, in order."""
        return [(self.name, s.doc_offset, t.index)
                for s in self.sentences for t in s.tokens]

    def __len__(self):
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True)
class GenreRules:
    """Ordered (substring, tag) pairs; the first substring found in a name wins."""
    rules: tuple = ()
    default: str = "all"

    @classmethod
    def from_text(cls, text, default="all"):
        rules = []
        for line in text.splitlines():
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("genre rule needs substring<TAB>tag", None)
            if parts[0] == "*":
                default = parts[1]
            else:
                rules.append((parts[0], parts[1]))
        return cls(tuple(rules), default)

    def to_text(self):
        lines = ["%s\t%s" % pair for pair in self.rules]
        lines.append("*\t%s" % self.default)
        return "\n".join(lines) + "\n"


def extract_genre(doc_name, rules=None):
    if rules is None:
        rules = GenreRules()
    elif isinstance(rules, dict):
        default = rules.get("default", "all")
        rules = GenreRules(tuple((k, v) for k, v in rules.items() if k != "default"), default)
    for substring, tag in rules.rules:
        if substring in doc_name:
            return tag
    return rules.default


def _parse_misc(raw):
    seg, conn, rest = NO_SEG, OUT, []
    if raw != "_" and raw != "":
        for entry in raw.split("|"):
            if entry == "BeginSeg=Yes":
                seg = BEGIN_SEG
            elif entry == "Seg=B-Conn":
                conn = B_CONN
            elif entry == "Seg=I-Conn":
                conn = I_CONN
            else:
                rest.append(entry)
    return seg, conn, tuple(rest)


def _format_misc(token):
    entries = []
    if token.seg_label == BEGIN_SEG:
        entries.append("BeginSeg=Yes")
    if token.conn_label == B_CONN:
        entries.append("Seg=B-Conn")
    elif token.conn_label == I_CONN:
        entries.append("Seg=I-Conn")
    entries.extend(token.misc)
    return "|".join(entries) if entries else "_"


class _SentenceBuilder:
    def __init__(self):
        self.comments = []
        self.rows = []      # (Token, line number)
        self.extra = []

    def empty(self):
        return not self.rows and not self.extra

    def add_token(self, fields, lineno):
        raw_id = fields[0]
        if "-" in raw_id or "." in raw_id:
            self.extra.append((len(self.rows), "\t".join(fields)))
            return
        try:
            index = int(raw_id)
        except ValueError:
            raise ParseError("bad token id %r" % raw_id, lineno)
        if any(t.index == index for t, _ in self.rows):
            raise ParseError("duplicate token index %d" % index, lineno)
        if index != len(self.rows) + 1:
            raise ParseError("token index %d out of sequence" % index, lineno)
        head = None
        if fields[6] != "_":
            try:
                head = int(fields[6])
            except ValueError:
                raise ParseError("bad head %r" % fields[6], lineno)
        seg, conn, misc = _parse_misc(fields[9])
        self.rows.append((Token(index=index, form=fields[1], lemma=fields[2],
                                upos=fields[3], xpos=fields[4], feats=fields[5],
                                head=head, deprel=fields[7], deps=fields[8],
                                misc=misc, seg_label=seg, conn_label=conn,
                                sent_initial=index == 1), lineno))

    def build(self, offset):
        n = len(self.rows)
        for tok, lineno in self.rows:
            if tok.head is None:
                continue
            if tok.head < 0 or tok.head > n:
                raise ParseError("head %d out of range for a %d-token sentence"
                                 % (tok.head, n), lineno)
            if tok.head == tok.index:
                raise ParseError("token %d is its own head" % tok.index, lineno)
        if not self.rows:
            return None
        return Sentence(tokens=tuple(t for t, _ in self.rows), doc_offset=offset,
                        comments=tuple(self.comments), extra=tuple(self.extra))


def parse_conllu(text, mode=GOLD, name="doc", genre_rules=None):
    """Parse corpus text into a list of Documents.

    In ``flat`` mode each document becomes a single token sequence; the
    original sentence splits survive only as ``Token.sent_initial``.
    """
    if mode not in (GOLD, FLAT):
        raise ValueError("unknown parse mode %r" % mode)
    docs = []
    doc_name, newdoc = name, False
    sentences = []
    current = _SentenceBuilder()

    def close_sentence():
        nonlocal current
        if not current.empty():
            sent = current.build(len(sentences))
            if sent is not None:
                sentences.append(sent)
        current = _SentenceBuilder()

    def close_doc():
        nonlocal sentences
        if sentences:
            docs.append(Document(name=doc_name, sentences=tuple(sentences),
                                 genre=extract_genre(doc_name, genre_rules),
                                 newdoc=newdoc))
        sentences = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            close_sentence()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("newdoc id"):
                close_sentence()
                close_doc()
                doc_name = body.split("=", 1)[1].strip() if "=" in body else body
                newdoc = True
            else:
                current.comments.append(line)
            continue
        fields = line.split("\t")
        if len(fields) != 10:
            raise ParseError("expected 10 tab-separated columns, found %d" % len(fields), lineno)
        current.add_token(fields, lineno)
    close_sentence()
    close_doc()
    if mode == FLAT:
        docs = [flatten(d) for d in docs]
    return docs


def flatten(doc):
    """Merge all sentences of a document into one; heads are re-indexed."""
    if len(doc.sentences) == 1 and doc.sentences[0].doc_offset == 0 and not doc.sentences[0].comments:
        return doc
    tokens, extra, offset = [], [], 0
    for sent in doc.sentences:
        for pos, line in sent.extra:
            extra.append((offset + pos, _shift_id(line, offset)))
        for tok in sent.tokens:
            head = tok.head
            if head is not None and head > 0:
                head += offset
            tokens.append(dataclasses.replace(tok, index=tok.index + offset, head=head,
                                              sent_initial=tok.index == 1))
        offset += len(sent)
    return Document(name=doc.name, sentences=(Sentence(tuple(tokens), 0, (), tuple(extra)),),
                    genre=doc.genre, newdoc=doc.newdoc)


def _shift_id(line, delta):
    fields = line.split("\t")
    raw = fields[0]
    if "-" in raw:
        a, b = raw.split("-")
        fields[0] = "%d-%d" % (int(a) + delta, int(b) + delta)
    elif "." in raw:
        a, b = raw.split(".", 1)
        fields[0] = "%d.%s" % (int(a) + delta, b)
    return "\t".join(fields)


def resplit(doc, starts=None):
    """Redraw sentence boundaries at tokens flagged ``sent_initial``.

    ``starts`` optionally overrides the flags (one boolean per token). The
    first token always starts a sentence. Heads pointing across the new
    boundaries are dropped (written as ``_``).
    """
    tokens = doc.tokens
    if starts is None:
        starts = [t.sent_initial for t in tokens]
    starts = [bool(s) for s in starts]
    if len(starts) != len(tokens):
        raise ValueError("need one start flag per token")
    if tokens:
        starts[0] = True
    if starts == [t.index == 1 for t in tokens] == [t.sent_initial for t in tokens]:
        return doc
    flat = flatten(doc).sentences[0]
    tokens = flat.tokens
    bounds = [i for i, s in enumerate(starts) if s] + [len(tokens)]
    sentences = []
    for k in range(len(bounds) - 1):
        lo, hi = bounds[k], bounds[k + 1]
        new = []
        for tok in tokens[lo:hi]:
            head = tok.head
            if head is not None and head > 0:
                head = head - lo if lo < head <= hi else None
            new.append(dataclasses.replace(tok, index=tok.index - lo, head=head,
                                           sent_initial=tok.index - lo == 1))
        extra = []
        for pos, line in flat.extra:
            raw = line.split("\t", 1)[0]
            if "-" in raw:
                a, b = (int(x) for x in raw.split("-"))
                keep = lo < a and b <= hi
            else:
                a = int(raw.split(".")[0])
                keep = lo < a <= hi or (a == 0 and lo == 0)
            if keep:
                extra.append((pos - lo, _shift_id(line, -lo)))
        sentences.append(Sentence(tuple(new), k, (), tuple(extra)))
    return Document(name=doc.name, sentences=tuple(sentences), genre=doc.genre, newdoc=doc.newdoc)


def _format_token(tok):
    head = "_" if tok.head is None else str(tok.head)
    return "\t".join([str(tok.index), tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats,
                      head, tok.deprel, tok.deps, _format_misc(tok)])


def write_conllu(docs, task="seg"):
    """Serialize documents; ``task="sent"`` redraws sentence breaks from
    ``Token.sent_initial``. Seg and connective labels go to the MISC column."""
    if task not in ("seg", "conn", "sent"):
        raise ValueError("unknown task %r" % task)
    out = []
    for doc in docs:
        if task == "sent":
            doc = resplit(doc)
        if doc.newdoc:
            out.append("# newdoc id = %s" % doc.name)
        for sent in doc.sentences:
            out.extend(sent.comments)
            extra = list(sent.extra)
            j = 0
            for i, tok in enumerate(sent.tokens):
                while j < len(extra) and extra[j][0] <= i:
                    out.append(extra[j][1])
                    j += 1
                out.append(_format_token(tok))
            out.extend(line for _, line in extra[j:])
            out.append("")
    return "\n".join(out) + ("\n" if out else "")


def read_corpus(path, mode=GOLD, genre_rules=None):
    import os
    with open(path, encoding="utf-8") as f:
        text = f.read()
    base = os.path.basename(path)
    for suffix in (".conllu", ".conll", ".tok"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    return parse_conllu(text, mode=mode, name=base, genre_rules=genre_rules)


def corpus_hash(docs):
    h = hashlib.sha256()
    h.update(write_conllu(docs, "seg").encode("utf-8"))
    return h.hexdigest()


def relabel(doc, task, labels):
    """Return a copy of ``doc`` carrying one predicted label per token."""
    labels = list(labels)
    if len(labels) != len(doc):
        raise ValueError("need %d labels, got %d" % (len(doc), len(labels)))
    it = iter(labels)
    sentences = []
    for sent in doc.sentences:
        toks = []
        for tok in sent.tokens:
            lab = next(it)
            if task == "seg":
                tok = dataclasses.replace(tok, seg_label=lab)
            elif task == "conn":
                tok = dataclasses.replace(tok, conn_label=lab)
            elif task == "sent":
                tok = dataclasses.replace(tok, sent_initial=bool(lab))
            else:
                raise ValueError("unknown task %r" % task)
            toks.append(tok)
        sentences.append(dataclasses.replace(sent, tokens=tuple(toks)))
    return dataclasses.replace(doc, sentences=tuple(sentences))


def subset(doc, offsets):
    """Keep only the sentences whose ``doc_offset`` is in ``offsets``."""
    keep = tuple(s for s in doc.sentences if s.doc_offset in offsets)
    if not keep:
        return None
    return dataclasses.replace(doc, sentences=keep)


def gold_labels(doc, task):
    if task == "seg":
        return [t.seg_label for t in doc.tokens]
    if task == "conn":
        return [t.conn_label for t in doc.tokens]
    if task == "sent":
        return [t.sent_initial for t in doc.tokens]
    raise ValueError("unknown task %r" % task)

