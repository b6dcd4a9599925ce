"""SUO-KIF surface syntax: s-expression reader and formula renderer.

The reader keeps line/column positions on every atom and list so callers
can report errors against the source file. The renderer produces the
canonical display form used for competency questions: two-space
indentation, closing parentheses on their own lines, and the display
spellings $instance / $attribute for the two typing predicates.
"""

from __future__ import annotations

from .fol import (And, Atom, Const, Exists, ForAll, Formula, Iff, Implies,
                  Not, Or, Term, Var)


class KifError(Exception):
    def __init__(self, message: str, line: int | None = None,
                 col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)


class SAtom(str):
    line: int
    col: int

    def __new__(cls, text: str, line: int, col: int):
        obj = super().__new__(cls, text)
        obj.line = line
        obj.col = col
        return obj


class SList(list):
    line: int
    col: int

    def __init__(self, items, line: int, col: int):
        super().__init__(items)
        self.line = line
        self.col = col


def _location(sexp) -> tuple:
    return getattr(sexp, "line", None), getattr(sexp, "col", None)


def tokenize(text: str):
    """Yield (kind, value, line, col); kinds are '(', ')', 'atom', 'comment'."""
    line, col = 1, 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 0
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch == ";":
            j = text.find("\n", i)
            if j < 0:
                j = n
            yield ("comment", text[i:j], line, col)
            col += j - i
            i = j
            continue
        if ch in "()":
            yield (ch, ch, line, col)
            col += 1
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise KifError("unterminated string", line, col)
                j += 1
            if j >= n:
                raise KifError("unterminated string", line, col)
            yield ("atom", text[i:j + 1], line, col)
            col += j + 1 - i
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in ' \t\r\n();"':
            j += 1
        yield ("atom", text[i:j], line, col)
        col += j - i
        i = j


def read_forms(text: str) -> list:
    """Parse top-level s-expressions, attaching `; :id name` directives.

    Returns a list of (sexp, axiom_id_or_None) pairs.
    """
    forms = []
    stack: list[SList] = []
    pending_id: str | None = None
    for kind, value, line, col in tokenize(text):
        if kind == "comment":
            body = value.lstrip(";").strip()
            if body.startswith(":id "):
                pending_id = body[4:].strip()
            continue
        if kind == "(":
            lst = SList([], line, col)
            stack.append(lst)
            continue
        if kind == ")":
            if not stack:
                raise KifError("unbalanced ')'", line, col)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                forms.append((done, pending_id))
                pending_id = None
            continue
        atom = SAtom(value, line, col)
        if stack:
            stack[-1].append(atom)
        else:
            raise KifError(f"stray atom {value!r} outside any form", line, col)
    if stack:
        raise KifError("unbalanced '('", stack[0].line, stack[0].col)
    return forms


_OPERATORS = {"and", "or", "not", "=>", "<=>", "forall", "exists"}


def parse_term(sexp) -> Term:
    if isinstance(sexp, str):
        if sexp.startswith("?"):
            return Var(sexp[1:])
        if sexp.startswith("@"):
            line, col = _location(sexp)
            raise KifError(f"row variables are not supported: {sexp}", line, col)
        return Const(str(sexp))
    line, col = _location(sexp)
    raise KifError("expected a term, found a list", line, col)


def parse_formula(sexp) -> Formula:
    if isinstance(sexp, str):
        line, col = _location(sexp)
        raise KifError(f"expected a formula, found atom {sexp!r}", line, col)
    line, col = _location(sexp)
    if not sexp:
        raise KifError("empty form", line, col)
    head = sexp[0]
    if isinstance(head, list):
        raise KifError("expected an operator or predicate symbol", line, col)
    head = str(head)
    args = sexp[1:]
    if head == "not":
        if len(args) != 1:
            raise KifError("not takes exactly one argument", line, col)
        return Not(parse_formula(args[0]))
    if head in ("and", "or"):
        if not args:
            raise KifError(f"{head} needs at least one argument", line, col)
        subs = [parse_formula(a) for a in args]
        return And(*subs) if head == "and" else Or(*subs)
    if head in ("=>", "<=>"):
        if len(args) != 2:
            raise KifError(f"{head} takes exactly two arguments", line, col)
        cls = Implies if head == "=>" else Iff
        return cls(parse_formula(args[0]), parse_formula(args[1]))
    if head in ("forall", "exists"):
        if len(args) != 2 or not isinstance(args[0], list):
            raise KifError(f"{head} takes a variable list and a body", line, col)
        vars_ = []
        for v in args[0]:
            if not (isinstance(v, str) and v.startswith("?")):
                vline, vcol = _location(v)
                raise KifError("quantified variables must look like ?X",
                               vline or line, vcol or col)
            vars_.append(Var(v[1:]))
        if not vars_:
            raise KifError(f"{head} needs at least one variable", line, col)
        body = parse_formula(args[1])
        return ForAll(vars_, body) if head == "forall" else Exists(vars_, body)
    # plain atom
    terms = tuple(parse_term(a) for a in args)
    return Atom(head, terms)


# ---------------------------------------------------------------------------
# Rendering

_DISPLAY = {"instance": "$instance", "attribute": "$attribute"}


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if isinstance(t, Const):
        return t.name
    inner = " ".join(_term_text(a) for a in t.args)
    return f"({t.fn} {inner})"


def render(f: Formula, decorate: bool = True) -> str:
    """Render a formula in the canonical multi-line display form."""
    return "\n".join(_render_lines(f, 0, decorate))


def _render_lines(f: Formula, depth: int, decorate: bool) -> list[str]:
    pad = "  " * depth
    if isinstance(f, Atom):
        name = _DISPLAY.get(f.pred, f.pred) if decorate else f.pred
        if f.args:
            return [pad + "(" + name + " "
                    + " ".join(_term_text(t) for t in f.args) + ")"]
        return [pad + "(" + name + ")"]
    if isinstance(f, (ForAll, Exists)):
        word = "forall" if isinstance(f, ForAll) else "exists"
        vars_ = list(f.vars)
        body = f.body
        while isinstance(body, type(f)):
            vars_.extend(body.vars)
            body = body.body
        head = pad + f"({word} (" + " ".join(f"?{v.name}" for v in vars_) + ")"
        return [head] + _render_lines(body, depth + 1, decorate) + [pad + ")"]
    if isinstance(f, (And, Or)):
        word = "and" if isinstance(f, And) else "or"
        lines = [pad + f"({word}"]
        for s in f.subs:
            lines.extend(_render_lines(s, depth + 1, decorate))
        lines.append(pad + ")")
        return lines
    if isinstance(f, Not):
        return ([pad + "(not"] + _render_lines(f.sub, depth + 1, decorate)
                + [pad + ")"])
    if isinstance(f, (Implies, Iff)):
        word = "=>" if isinstance(f, Implies) else "<=>"
        return ([pad + f"({word}"]
                + _render_lines(f.left, depth + 1, decorate)
                + _render_lines(f.right, depth + 1, decorate)
                + [pad + ")"])
    raise TypeError(f"not a formula: {f!r}")
