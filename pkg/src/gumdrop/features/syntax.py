"""Dependency-tree features: clause brackets, head distance and subtree context."""

CLAUSAL_RELATIONS = frozenset({"advcl", "acl", "acl:relcl", "xcomp", "ccomp",
                               "csubj", "parataxis", "conj"})

NONE = "NONE"
WINDOW_SLOTS = ("min2", "min1", "node", "pls1", "pls2", "par", "parpar")


def _children(sentence):
    kids = {t.index: [] for t in sentence.tokens}
    kids[0] = []
    for t in sentence.tokens:
        if t.head is not None:
            kids.setdefault(t.head, []).append(t.index)
    return kids


def _descendants(kids, index):
    out, stack = [], list(kids.get(index, ()))
    seen = set()
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        out.append(i)
        stack.extend(kids.get(i, ()))
    return out


def _is_clausal(deprel, relations):
    return deprel in relations or deprel.split(":")[0] in relations


def clause_spans(sentence, clausal_relations=CLAUSAL_RELATIONS):
    """(start, end, relation) for every clausal dependent, 1-based inclusive.

    A non-projective subtree is widened to its contiguous hull.
    """
    kids = _children(sentence)
    spans = []
    for t in sentence.tokens:
        if t.head is None or t.head == 0 or not _is_clausal(t.deprel, clausal_relations):
            continue
        members = _descendants(kids, t.index) + [t.index]
        spans.append((min(members), max(members), t.deprel))
    return spans


def dep_brackets(sentence, clausal_relations=CLAUSAL_RELATIONS):
    """BIEO clause bracket per token; the smallest covering clause wins."""
    spans = clause_spans(sentence, clausal_relations)
    tags = []
    for t in sentence.tokens:
        i = t.index
        covering = [s for s in spans if s[0] <= i <= s[1]]
        if not covering:
            tags.append("O")
            continue
        start, end, rel = min(covering, key=lambda s: (s[1] - s[0], -s[0]))
        if i == start:
            tags.append("B-" + rel)
        elif i == end:
            tags.append("E-" + rel)
        else:
            tags.append("I-" + rel)
    return tags


def head_distance(sentence, index):
    tok = sentence.tokens[index - 1]
    if not tok.head:
        return 0
    return tok.head - index


def bin_head_distance(d):
    if d == 0:
        return "zero"
    side = "left" if d < 0 else "right"
    if abs(d) == 1:
        return "next-" + side
    if abs(d) <= 3:
        return "close-" + side
    return "far-" + side


def depths(sentence):
    """Edges from each token to the root; -1 when the chain is broken."""
    heads = {t.index: t.head for t in sentence.tokens}
    out = {}
    n = len(sentence.tokens)
    for i in heads:
        d, cur = 0, i
        while True:
            h = heads.get(cur)
            if h is None or d > n:
                d = -1
                break
            if h == 0:
                break
            d += 1
            cur = h
        out[i] = d
    return out


def subtree_features(sentence, index, _cache=None):
    """Children feature set for the window around token ``index``.

    Covers two tokens either side, the parent and the grandparent: their
    relation, depth and whether they share a head with their neighbours,
    plus the node's left/right span sizes and the relations of its nearest
    and farthest descendants on each side.
    """
    if _cache is None:
        _cache = (_children(sentence), depths(sentence))
    kids, depth = _cache
    toks = sentence.tokens
    n = len(toks)

    def tok(i):
        return toks[i - 1] if 1 <= i <= n else None

    node = tok(index)
    par = node.head if node.head else 0
    parpar = (tok(par).head or 0) if par else 0
    slots = dict(zip(WINDOW_SLOTS, (index - 2, index - 1, index, index + 1, index + 2,
                                    par or -1, parpar or -1)))
    feats = {}
    for slot, i in slots.items():
        t = tok(i)
        if t is None:
            feats[slot + "_deprel"] = NONE
            feats[slot + "_depth"] = -1
            feats[slot + "_samepar_l"] = 0
            feats[slot + "_samepar_r"] = 0
            continue
        left, right = tok(i - 1), tok(i + 1)
        feats[slot + "_deprel"] = t.deprel
        feats[slot + "_depth"] = depth[i]
        feats[slot + "_samepar_l"] = int(left is not None and left.head == t.head)
        feats[slot + "_samepar_r"] = int(right is not None and right.head == t.head)

    desc = _descendants(kids, index)
    left = sorted(i for i in desc if i < index)
    right = sorted(i for i in desc if i > index)
    feats["lspan"] = len(left)
    feats["rspan"] = len(right)
    feats["lchild_close"] = toks[left[-1] - 1].deprel if left else NONE
    feats["lchild_far"] = toks[left[0] - 1].deprel if left else NONE
    feats["rchild_close"] = toks[right[0] - 1].deprel if right else NONE
    feats["rchild_far"] = toks[right[-1] - 1].deprel if right else NONE
    return feats


def sentence_subtree_features(sentence):
    cache = (_children(sentence), depths(sentence))
    return [subtree_features(sentence, t.index, cache) for t in sentence.tokens]
