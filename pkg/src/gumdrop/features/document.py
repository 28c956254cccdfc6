"""Document-level token context: quotation/parenthesis state, sentence position."""

QUOTES = frozenset('"“”«»')


def quote_paren_state(doc, quotes=QUOTES):
    """Per token (in_quote, in_paren).

    A token counts as inside when the construct is open both before and
    after it, so the delimiters themselves are outside.
    """
    in_quote = False
    depth = 0
    out = []
    for tok in doc.tokens:
        q_before, d_before = in_quote, depth
        for ch in tok.form:
            if ch in quotes:
                in_quote = not in_quote
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth = max(depth - 1, 0)
        out.append((q_before and in_quote, d_before > 0 and depth > 0))
    return out


def sent_percentile(doc):
    n = len(doc.sentences)
    return [i / max(n - 1, 1) for i in range(n)]
