"""Token-level precision/recall/F for sentence, segment and connective labels."""

import math
from dataclasses import dataclass

from .corpus import B_CONN, BEGIN_SEG, I_CONN
from .errors import AlignmentError


@dataclass(frozen=True)
class Score:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self):
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def undefined(self):
        """True when a zero denominator forced a 0 into P, R or F."""
        return self.tp + self.fp == 0 or self.tp + self.fn == 0

    def __add__(self, other):
        return Score(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def _aligned_tokens(gold_docs, pred_docs):
    if len(gold_docs) != len(pred_docs):
        raise AlignmentError("gold has %d documents, prediction %d"
                             % (len(gold_docs), len(pred_docs)))
    offset = 0
    for g, p in zip(gold_docs, pred_docs):
        gt, pt = g.tokens, p.tokens
        for i, (a, b) in enumerate(zip(gt, pt)):
            if a.form != b.form:
                raise AlignmentError("token mismatch at offset %d (%s, token %d): %r vs %r"
                                     % (offset + i, g.name, i + 1, a.form, b.form))
        if len(gt) != len(pt):
            raise AlignmentError("token count differs at offset %d (%s): %d vs %d"
                                 % (offset + min(len(gt), len(pt)), g.name, len(gt), len(pt)))
        offset += len(gt)
        yield gt, pt


def score_binary(gold, pred):
    tp = sum(1 for g, p in zip(gold, pred) if g and p)
    fp = sum(1 for g, p in zip(gold, pred) if p and not g)
    fn = sum(1 for g, p in zip(gold, pred) if g and not p)
    return Score(tp, fp, fn)


def score_boundaries(gold_docs, pred_docs, task="seg"):
    """Sentence starts (``sent``, document-initial tokens excluded) or
    discourse unit starts (``seg``, all tokens)."""
    total = Score()
    for gt, pt in _aligned_tokens(gold_docs, pred_docs):
        if task == "sent":
            gold = [t.sent_initial for t in gt][1:]
            pred = [t.sent_initial for t in pt][1:]
        elif task == "seg":
            gold = [t.seg_label == BEGIN_SEG for t in gt]
            pred = [t.seg_label == BEGIN_SEG for t in pt]
        else:
            raise ValueError("unknown boundary task %r" % task)
        total = total + score_binary(gold, pred)
    return total


def score_conn_labels(gold, pred, merge_bi=False):
    pos = (B_CONN, I_CONN)
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        if merge_bi:
            g = "C" if g in pos else g
            p = "C" if p in pos else p
            pos_set = ("C",)
        else:
            pos_set = pos
        if p in pos_set and g == p:
            tp += 1
        else:
            if p in pos_set:
                fp += 1
            if g in pos_set:
                fn += 1
    return Score(tp, fp, fn)


def score_connectives(gold_docs, pred_docs, merge_bi=False):
    """A positive needs the exact label (B vs I) unless ``merge_bi``."""
    total = Score()
    for gt, pt in _aligned_tokens(gold_docs, pred_docs):
        total = total + score_conn_labels([t.conn_label for t in gt],
                                          [t.conn_label for t in pt], merge_bi)
    return total


def _mean_std(values):
    m = sum(values) / len(values)
    return m, math.sqrt(sum((v - m) ** 2 for v in values) / len(values))


def report(scores):
    """Fixed-width P/R/F table with mean and population std rows, followed by
    ``corpus<TAB>metric<TAB>value`` lines. ``scores``: (name, Score) pairs."""
    scores = list(scores)
    if not scores:
        raise ValueError("report needs at least one score")
    width = max(8, max(len(name) for name, _ in scores) + 2)
    rows = []
    flagged = False
    for name, s in scores:
        mark = "*" if s.undefined else " "
        flagged |= s.undefined
        rows.append((name, (s.precision, s.recall, s.f1), mark))
    cols = list(zip(*[r[1] for r in rows]))
    stats = [_mean_std(list(c)) for c in cols]
    mean = tuple(m for m, _ in stats)
    std = tuple(sd for _, sd in stats)

    def line(name, vals, mark=" "):
        return "%-*s%s" % (width, name, "".join("%7.3f" % v for v in vals)) + mark

    out = ["%-*s%7s%7s%7s" % (width, "corpus", "P", "R", "F"), "-" * (width + 21)]
    out += [line(name, vals, mark).rstrip() for name, vals, mark in rows]
    out.append("-" * (width + 21))
    out.append(line("mean", mean).rstrip())
    out.append(line("std", std).rstrip())
    if flagged:
        out.append("* zero denominator; the affected value is reported as 0")
    out.append("")
    for name, vals, _ in rows + [("mean", mean, ""), ("std", std, "")]:
        for metric, v in zip(("P", "R", "F"), vals):
            out.append("%s\t%s\t%.6f" % (name, metric, v))
    return "\n".join(out) + "\n"
