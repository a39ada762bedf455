"""Symbolic term language shared by the KB files, dialogue-model programs and
scenario files.

Terms are atoms (lowercase or quoted), integers, variables (leading uppercase
or ``_``), compounds ``f(a,b)`` and lists ``[a,b]``.  A small fixed set of
binary operators is supported; from loosest to tightest binding:

    ==>   attribute/value pair in situations and variable declarations
    :     expectation/action pair (also the generic pair operator)
    ==    equality test inside expressions
    =>>   conditional-default arrow
    =>    property/relation value arrow
    ->    rewrite arrow (reserved)

Inside an ``arcs ==> [...]`` list only, each element is read as
``Expectation : Action => Next`` with the outermost ``=>`` acting as the arc
arrow (looser than ``:``); everywhere else ``=>`` is the tight value arrow.
The printer parenthesizes according to the table above, so printed terms
re-parse to the same structure without needing the arc context.

``%`` starts a comment running to end of line.  Quoted atoms preserve spaces
and case; there are no escape sequences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    """Syntax error with source position and the tokens that were expected."""

    def __init__(self, message, line, col, expected=()):
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)


# ---------------------------------------------------------------------------
# term representation


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True)
class Num:
    value: int

    def __repr__(self):
        return f"Num({self.value})"


class Var:
    """A logic variable.  Anonymous ``_`` occurrences are distinct for
    unification but compare (and print) alike, so round-tripping holds."""

    __slots__ = ("name", "uid")
    _counter = 0

    def __init__(self, name, uid=None):
        self.name = name
        if name == "_" and uid is None:
            Var._counter += 1
            uid = Var._counter
        self.uid = uid

    @property
    def key(self):
        return ("_", self.uid) if self.name == "_" else self.name

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name

    def __hash__(self):
        return hash(("Var", self.name))

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple

    def __repr__(self):
        return f"Struct({self.functor!r}, {list(self.args)!r})"


@dataclass(frozen=True)
class ListTerm:
    items: tuple

    def __repr__(self):
        return f"ListTerm({list(self.items)!r})"


Term = object  # union of the five shapes above; kept informal on purpose


def atom(name):
    return Atom(name)


def num(value):
    return Num(value)


def var(name):
    return Var(name)


def struct(functor, *args):
    return Struct(functor, tuple(args))


def lst(*items):
    return ListTerm(tuple(items))


def is_ground(t):
    if isinstance(t, Var):
        return False
    if isinstance(t, Struct):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, ListTerm):
        return all(is_ground(x) for x in t.items)
    return True


def walk_subterms(t):
    yield t
    if isinstance(t, Struct):
        for a in t.args:
            yield from walk_subterms(a)
    elif isinstance(t, ListTerm):
        for x in t.items:
            yield from walk_subterms(x)


# ---------------------------------------------------------------------------
# lexer

OPERATORS = ("==>", "=>>", "==", "=>", "->", ":", "=")

# precedence: higher binds tighter; "=" is statement-level only
_PREC = {"==>": 10, ":": 20, "==": 30, "=>>": 40, "=>": 50, "->": 60}

_NAME_RE = re.compile(r"[a-z][A-Za-z0-9_]*")
_VAR_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"\d+")


@dataclass
class _Tok:
    kind: str  # name var num quoted op punct end
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "'":
            j = text.find("'", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted atom", line, col)
            toks.append(_Tok("quoted", text[i + 1 : j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        matched = None
        for op in OPERATORS:
            if text.startswith(op, i):
                matched = op
                break
        if matched:
            toks.append(_Tok("op", matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c in "()[],.":
            toks.append(_Tok("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c == "-" and i + 1 < n and text[i + 1].isdigit():
            m = _NUM_RE.match(text, i + 1)
            toks.append(_Tok("num", "-" + m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        if c.isdigit():
            m = _NUM_RE.match(text, i)
            toks.append(_Tok("num", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _NAME_RE.match(text, i)
        if m:
            toks.append(_Tok("name", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _VAR_RE.match(text, i)
        if m:
            toks.append(_Tok("var", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("end", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        if t.kind != "end":
            self.pos += 1
        return t

    def fail(self, message, expected=()):
        t = self.peek()
        raise ParseError(message, t.line, t.col, expected)

    def expect(self, kind, text=None):
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(f"expected {text or kind}, found {t.text or 'end of input'}",
                      expected=(text or kind,))
        return self.next()

    def at_end(self):
        return self.peek().kind == "end"

    # expression parsing: precedence climbing, right-associative operators.
    # `forbid` suppresses the given operators at the spine of this expression
    # (used for arc components, where the trailing => is the arc arrow).
    def expr(self, min_prec=0, forbid=frozenset()):
        left = self.primary(forbid)
        while True:
            t = self.peek()
            if t.kind != "op" or t.text == "=" or t.text in forbid:
                return left
            prec = _PREC[t.text]
            if prec < min_prec:
                return left
            self.next()
            right = self.expr(prec, forbid)
            left = Struct(t.text, (left, right))

    def primary(self, forbid=frozenset()):
        t = self.peek()
        if t.kind == "quoted":
            self.next()
            return Atom(t.text)
        if t.kind == "num":
            self.next()
            return Num(int(t.text))
        if t.kind == "var":
            self.next()
            return Var(t.text)
        if t.kind == "punct" and t.text == "(":
            self.next()
            inner = self.expr()
            self.expect("punct", ")")
            return inner
        if t.kind == "punct" and t.text == "[":
            return self.list_term()
        if t.kind == "name":
            self.next()
            if self.peek().kind == "punct" and self.peek().text == "(":
                self.next()
                args = [self.expr()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.expr())
                self.expect("punct", ")")
                return Struct(t.text, tuple(args))
            return Atom(t.text)
        self.fail(f"expected a term, found {t.text or 'end of input'}",
                  expected=("term",))

    def list_term(self, arcs=False):
        self.expect("punct", "[")
        items = []
        if not (self.peek().kind == "punct" and self.peek().text == "]"):
            items.append(self.arc() if arcs else self.expr())
            while self.peek().text == ",":
                self.next()
                items.append(self.arc() if arcs else self.expr())
        self.expect("punct", "]")
        return ListTerm(tuple(items))

    def arc(self):
        # Expectation : Action => Next, with => reserved for the arc arrow
        expectation = self.expr(_PREC[":"] + 1, forbid=frozenset(("=>",)))
        self.expect("op", ":")
        action = self.expr(_PREC[":"] + 1, forbid=frozenset(("=>",)))
        self.expect("op", "=>")
        nxt = self.expr(_PREC[":"] + 1)
        return Struct("=>", (Struct(":", (expectation, action)), nxt))

    # attribute lists inside programs need the arc context: after `arcs ==>`
    # a list is read in arc mode.
    def attr_value(self, attr_name):
        if attr_name == "arcs" and self.peek().kind == "punct" and self.peek().text == "[":
            return self.list_term(arcs=True)
        return self.expr(_PREC["==>"] + 1)

    def attr_list(self):
        self.expect("punct", "[")
        items = []
        if not (self.peek().kind == "punct" and self.peek().text == "]"):
            items.append(self.attr_pair())
            while self.peek().text == ",":
                self.next()
                items.append(self.attr_pair())
        self.expect("punct", "]")
        return ListTerm(tuple(items))

    def attr_pair(self):
        if self.peek().kind == "punct" and self.peek().text == "[":
            return self.attr_list()
        name = self.expr(_PREC["==>"] + 1)
        if self.peek().kind == "op" and self.peek().text == "==>":
            self.next()
            attr = name.name if isinstance(name, Atom) else None
            value = self.attr_value(attr)
            return Struct("==>", (name, value))
        return name


def parse_term(text):
    """Parse a single term; trailing input (other than one ``.``) is an error."""
    p = _Parser(text)
    t = p.expr()
    if p.peek().kind == "punct" and p.peek().text == ".":
        p.next()
    if not p.at_end():
        p.fail("trailing input after term")
    return t


def parse_statements(text):
    """Parse a program file: a sequence of clauses, each optionally terminated
    by ``.``.  ``Global_Vars = [...]`` declarations come back as
    ``Struct('=', (Var('Global_Vars'), list))``.  Situation bodies keep their
    attribute structure, with arcs lists read in arc mode."""
    p = _Parser(text)
    out = []
    while not p.at_end():
        if p.peek().kind == "var" and p.peek().text == "Global_Vars":
            p.next()
            p.expect("op", "=")
            value = p.expr()
            out.append(Struct("=", (Var("Global_Vars"), value)))
        elif p.peek().kind == "name" and p.peek().text == "diag_mod":
            out.append(_parse_diag_mod(p))
        else:
            out.append(p.expr())
        if p.peek().kind == "punct" and p.peek().text == ".":
            p.next()
    return out


def _parse_diag_mod(p):
    p.expect("name", "diag_mod")
    p.expect("punct", "(")
    dm_id = p.expr()
    p.expect("punct", ",")
    p.expect("punct", "[")
    sits = [p.attr_list()]
    while p.peek().text == ",":
        p.next()
        sits.append(p.attr_list())
    p.expect("punct", "]")
    p.expect("punct", ",")
    local_vars = p.expr()
    p.expect("punct", ")")
    return Struct("diag_mod", (dm_id, ListTerm(tuple(sits)), local_vars))


# ---------------------------------------------------------------------------
# printer

_UNQUOTED_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _atom_text(name, quoted):
    if not quoted or _UNQUOTED_RE.match(name):
        return name
    return f"'{name}'"


def print_term(t, quoted=True, spaced=True):
    """Canonical text for a term; ``parse_term(print_term(t))`` equals ``t``.

    ``quoted=False`` renders atoms bare (the write style used by traces);
    ``spaced=False`` drops the spaces around ``==>``.
    """
    return _print(t, quoted, spaced, 0)


def _print(t, quoted, spaced, parent_prec):
    if isinstance(t, Atom):
        return _atom_text(t.name, quoted)
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, Var):
        return "_" if t.name == "_" else t.name
    if isinstance(t, ListTerm):
        return "[" + ",".join(_print(x, quoted, spaced, 0) for x in t.items) + "]"
    if isinstance(t, Struct):
        if t.functor in _PREC and len(t.args) == 2:
            prec = _PREC[t.functor]
            lhs = _print(t.args[0], quoted, spaced, prec + 1)
            rhs = _print(t.args[1], quoted, spaced, prec)
            op = f" {t.functor} " if (spaced and t.functor == "==>") else t.functor
            s = f"{lhs}{op}{rhs}"
            return f"({s})" if prec < parent_prec else s
        args = ",".join(_print(a, quoted, spaced, 0) for a in t.args)
        return f"{_atom_text(t.functor, quoted)}({args})"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# unification


def _vkey(v):
    return v.key


def resolve(t, env):
    """Follow variable bindings until a non-variable or unbound variable."""
    while isinstance(t, Var):
        bound = env.get(_vkey(t))
        if bound is None:
            return t
        t = bound
    return t


def substitute(t, env):
    """Apply a binding everywhere; idempotent because values are resolved."""
    t = resolve(t, env)
    if isinstance(t, Struct):
        return Struct(t.functor, tuple(substitute(a, env) for a in t.args))
    if isinstance(t, ListTerm):
        return ListTerm(tuple(substitute(x, env) for x in t.items))
    return t


def _occurs(v, t, env):
    t = resolve(t, env)
    if isinstance(t, Var):
        return _vkey(t) == _vkey(v)
    if isinstance(t, Struct):
        return any(_occurs(v, a, env) for a in t.args)
    if isinstance(t, ListTerm):
        return any(_occurs(v, x, env) for x in t.items)
    return False


def unify(a, b, env=None):
    """Most general unifier extending ``env`` (occurs-check on).

    Returns the extended binding dict, or None on failure; the input dict is
    never mutated.
    """
    env = dict(env) if env else {}
    if _unify_into(a, b, env):
        return env
    return None


def _unify_into(a, b, env):
    a = resolve(a, env)
    b = resolve(b, env)
    if isinstance(a, Var) and isinstance(b, Var) and _vkey(a) == _vkey(b):
        return True
    if isinstance(a, Var):
        if _occurs(a, b, env):
            return False
        env[_vkey(a)] = b
        return True
    if isinstance(b, Var):
        if _occurs(b, a, env):
            return False
        env[_vkey(b)] = a
        return True
    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.name == b.name
    if isinstance(a, Num) and isinstance(b, Num):
        return a.value == b.value
    if isinstance(a, Struct) and isinstance(b, Struct):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return False
        return all(_unify_into(x, y, env) for x, y in zip(a.args, b.args))
    if isinstance(a, ListTerm) and isinstance(b, ListTerm):
        if len(a.items) != len(b.items):
            return False
        return all(_unify_into(x, y, env) for x, y in zip(a.items, b.items))
    return False
