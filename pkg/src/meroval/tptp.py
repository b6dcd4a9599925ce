"""TPTP FOF serialization and a reader for the subset this package emits.

Constants whose names start with an uppercase letter (ontology classes)
are written with an `s_` prefix, since unquoted uppercase-leading names
are variables in TPTP. Lowercase names (relations, individuals, Skolem
symbols) pass through unchanged. The reader accepts exactly the dialect
the writer produces plus whitespace and `%` comments, which is enough to
feed archived problems back to the bundled prover.
"""

from __future__ import annotations

from .fol import (And, App, Atom, Clause, Const, Exists, ForAll, Formula,
                  Iff, Implies, Not, Or, Term, Var)


class TptpError(Exception):
    pass


def encode_name(name: str) -> str:
    if name[:1].isupper():
        return "s_" + name
    return name


def decode_name(name: str) -> str:
    if name.startswith("s_"):
        return name[2:]
    return name


def _var_name(name: str) -> str:
    if name[:1].isupper():
        return name
    return "V_" + name


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return _var_name(t.name)
    if isinstance(t, Const):
        return encode_name(t.name)
    args = ",".join(_term_text(a) for a in t.args)
    return f"{encode_name(t.fn)}({args})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return encode_name(f.pred)
        return f"{encode_name(f.pred)}({','.join(_term_text(t) for t in f.args)})"
    if isinstance(f, Not):
        return f"~ {_wrap(f.sub)}"
    if isinstance(f, And):
        return " & ".join(_wrap(s) for s in f.subs)
    if isinstance(f, Or):
        return " | ".join(_wrap(s) for s in f.subs)
    if isinstance(f, Implies):
        return f"{_wrap(f.left)} => {_wrap(f.right)}"
    if isinstance(f, Iff):
        return f"{_wrap(f.left)} <=> {_wrap(f.right)}"
    if isinstance(f, (ForAll, Exists)):
        q = "!" if isinstance(f, ForAll) else "?"
        vs = ",".join(_var_name(v.name) for v in f.vars)
        return f"{q} [{vs}] : {_wrap(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula) -> str:
    if isinstance(f, Atom):
        return format_formula(f)
    return f"( {format_formula(f)} )"


def format_fof(name: str, role: str, f: Formula) -> str:
    return f"fof({name},{role},{format_formula(f)})."


def write_problem(axioms, conjecture: Formula | None = None,
                  conjecture_name: str = "goal") -> str:
    """axioms: iterable of (name, formula). Returns the problem text."""
    lines = [format_fof(name, "axiom", f) for name, f in axioms]
    if conjecture is not None:
        lines.append(format_fof(conjecture_name, "conjecture", conjecture))
    return "\n".join(lines) + "\n"


def _cnf_term_text(t) -> str:
    if t[0] == "v":
        return f"X{t[1]}"
    if t[0] == "c":
        return encode_name(t[1])
    args = ",".join(_cnf_term_text(a) for a in t[2])
    return f"{encode_name(t[1])}({args})"


def format_cnf(name: str, clause: Clause) -> str:
    if not clause:
        return f"cnf({name},axiom,$false)."
    parts = []
    for sign, pred, args in sorted(clause):
        atom = encode_name(pred)
        if args:
            atom += "(" + ",".join(_cnf_term_text(a) for a in args) + ")"
        parts.append(atom if sign else "~ " + atom)
    return f"cnf({name},axiom,{' | '.join(parts)})."


# ---------------------------------------------------------------------------
# Reader


class _Lexer:
    _PUNCT = ("<=>", "=>", "(", ")", "[", "]", ",", ":", "~", "&", "|",
              "!", "?", ".")

    def __init__(self, text: str):
        self.tokens: list[str] = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch in " \t\r\n":
                i += 1
                continue
            if ch == "%":
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            for p in self._PUNCT:
                if text.startswith(p, i):
                    self.tokens.append(p)
                    i += len(p)
                    break
            else:
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                if j == i:
                    raise TptpError(f"unexpected character {ch!r}")
                self.tokens.append(text[i:j])
                i = j
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise TptpError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, tok: str):
        got = self.next()
        if got != tok:
            raise TptpError(f"expected {tok!r}, got {got!r}")


def read_problem(text: str) -> list[tuple[str, str, Formula]]:
    """Parse fof(...) lines into (name, role, formula) triples."""
    lex = _Lexer(text)
    out = []
    while lex.peek() is not None:
        lex.expect("fof")
        lex.expect("(")
        name = lex.next()
        lex.expect(",")
        role = lex.next()
        lex.expect(",")
        formula = _parse_formula(lex)
        lex.expect(")")
        lex.expect(".")
        out.append((name, role, formula))
    return out


def _parse_formula(lex: _Lexer) -> Formula:
    left = _parse_unitary(lex)
    tok = lex.peek()
    if tok == "&":
        subs = [left]
        while lex.peek() == "&":
            lex.next()
            subs.append(_parse_unitary(lex))
        return And(*subs)
    if tok == "|":
        subs = [left]
        while lex.peek() == "|":
            lex.next()
            subs.append(_parse_unitary(lex))
        return Or(*subs)
    if tok == "=>":
        lex.next()
        return Implies(left, _parse_unitary(lex))
    if tok == "<=>":
        lex.next()
        return Iff(left, _parse_unitary(lex))
    return left


def _parse_unitary(lex: _Lexer) -> Formula:
    tok = lex.peek()
    if tok == "(":
        lex.next()
        f = _parse_formula(lex)
        lex.expect(")")
        return f
    if tok == "~":
        lex.next()
        return Not(_parse_unitary(lex))
    if tok in ("!", "?"):
        lex.next()
        lex.expect("[")
        names = [lex.next()]
        while lex.peek() == ",":
            lex.next()
            names.append(lex.next())
        lex.expect("]")
        lex.expect(":")
        body = _parse_unitary(lex)
        vars_ = [Var(n) for n in names]
        return ForAll(vars_, body) if tok == "!" else Exists(vars_, body)
    return _parse_atom(lex)


def _parse_atom(lex: _Lexer) -> Atom:
    name = lex.next()
    if not (name[0].isalnum() or name[0] == "_"):
        raise TptpError(f"expected an atom, got {name!r}")
    args: list[Term] = []
    if lex.peek() == "(":
        lex.next()
        args.append(_parse_term(lex))
        while lex.peek() == ",":
            lex.next()
            args.append(_parse_term(lex))
        lex.expect(")")
    return Atom(decode_name(name), tuple(args))


def _parse_term(lex: _Lexer) -> Term:
    name = lex.next()
    if name[0].isupper() and not name.startswith("s_"):
        return Var(name)
    if lex.peek() == "(":
        lex.next()
        args = [_parse_term(lex)]
        while lex.peek() == ",":
            lex.next()
            args.append(_parse_term(lex))
        lex.expect(")")
        return App(decode_name(name), tuple(args))
    return Const(decode_name(name))
