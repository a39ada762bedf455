"""Non-monotonic knowledge base over a strict class hierarchy.

A taxonomy is a tree of classes rooted at ``top``; classes and individuals
carry weighted properties and relations, plus weighted conditional defaults
(``Antecedents =>> Consequent``).  Queries are answered over the inheritance
closure with two resolution rules:

* specificity: a literal asserted at a more specific node shadows a
  conflicting literal from any less specific node;
* weight: among fired defaults for the same attribute, lower weight wins
  (ties go to declaration order).

Strong negation ``not(...)`` makes answers three-valued: yes / no / unknown.
Defaults double as abductive rules: read backwards, the lowest-weight default
whose consequent matches an observation is its preferred explanation.

KB files use the textual format of :mod:`deskbot.terms`: a single list of
``class(Id, Mother, Props, Rels, Individuals)`` terms.  A value ``'-'``
behaves as a variable scoped to one conditional default; the same ``'-'`` in
antecedent and consequent of one default denotes the same variable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .terms import (
    Atom, ListTerm, Num, Struct, Var,
    is_ground, parse_term, print_term, substitute, unify,
)


class KBError(Exception):
    pass


class HierarchyError(KBError):
    pass


class ClauseError(KBError):
    pass


class UnknownSubject(KBError):
    pass


class UnknownClass(UnknownSubject):
    pass


class UnknownIndividual(UnknownSubject):
    pass


class UnknownTarget(KBError):
    pass


class SameLevelConflict(KBError):
    pass


# ---------------------------------------------------------------------------
# clauses

ANON = Var("-")


@dataclass(frozen=True)
class Literal:
    """A possibly negated label (``fly``) or attribute/value pair
    (``loc => shelf_food``); ``value`` is None for bare labels."""

    positive: bool
    attr: str
    value: object = None

    def negated(self):
        return replace(self, positive=not self.positive)

    def to_term(self):
        if self.value is None:
            body = Atom(self.attr)
        else:
            v = Atom("-") if isinstance(self.value, Var) else self.value
            body = Struct("=>", (Atom(self.attr), v))
        return body if self.positive else Struct("not", (body,))

    def __str__(self):
        return print_term(self.to_term())


@dataclass(frozen=True)
class Default:
    """Weighted conditional default; empty antecedents means unconditional."""

    antecedents: tuple
    consequent: Literal
    weight: int

    def to_term(self):
        if not self.antecedents:
            ant = Atom("-")
        elif len(self.antecedents) == 1:
            ant = self.antecedents[0].to_term()
        else:
            ant = ListTerm(tuple(a.to_term() for a in self.antecedents))
        return Struct("=>>", (ant, self.consequent.to_term()))


@dataclass(frozen=True)
class Fact:
    lit: Literal
    weight: int


@dataclass(frozen=True)
class Explanation:
    consequent: Literal
    antecedents: tuple
    weight: int

    def __str__(self):
        ants = ",".join(str(a) for a in self.antecedents) or "-"
        return f"{self.consequent} <== {ants} (weight {self.weight})"


def to_literal(t, positive=True):
    """Convert a term to a Literal; ``'-'`` values become the shared
    default-scoped variable."""
    if isinstance(t, Struct) and t.functor == "not" and len(t.args) == 1:
        return to_literal(t.args[0], not positive)
    if isinstance(t, Atom):
        if t.name == "-":
            raise ClauseError("'-' is not a literal on its own")
        return Literal(positive, t.name)
    if isinstance(t, Struct) and t.functor in ("=>", "=>>") and len(t.args) == 2:
        head, value = t.args
        if not isinstance(head, Atom):
            raise ClauseError(f"attribute must be an atom: {print_term(t)}")
        if isinstance(value, Atom) and value.name == "-":
            value = ANON
        return Literal(positive, head.name, value)
    raise ClauseError(f"not a literal: {print_term(t)}")


def parse_clause(t):
    """Read one element of a props/rels list into a Fact or Default.

    Accepts ``[Body, Weight]`` or bare ``Body`` (weight 0)."""
    weight = 0
    body = t
    if isinstance(t, ListTerm) and len(t.items) == 2 and isinstance(t.items[1], Num):
        body, w = t.items
        weight = w.value
    if weight < 0:
        raise ClauseError(f"negative weight in {print_term(t)}")
    if isinstance(body, Struct) and body.functor == "=>>":
        ant_t, cons_t = body.args
        # right-assoc parse may leave the pair arrow as =>> in the consequent
        while isinstance(cons_t, Struct) and cons_t.functor == "=>>" and \
                isinstance(cons_t.args[0], Atom) and not isinstance(cons_t.args[1], Struct):
            cons_t = Struct("=>", cons_t.args)
        if isinstance(ant_t, Atom) and ant_t.name == "-":
            ants = ()
        elif isinstance(ant_t, ListTerm):
            ants = tuple(to_literal(x) for x in ant_t.items)
        else:
            ants = (to_literal(ant_t),)
        return Default(ants, to_literal(cons_t), weight)
    return Fact(to_literal(body), weight)


def clause_term(c):
    body = c.lit.to_term() if isinstance(c, Fact) else c.to_term()
    w = c.weight
    return ListTerm((body, Num(w)))


# ---------------------------------------------------------------------------
# taxonomy


@dataclass(frozen=True)
class IndividualDef:
    id: str
    props: tuple
    rels: tuple


@dataclass(frozen=True)
class ClassDef:
    id: str
    mother: str | None
    props: tuple
    rels: tuple
    individuals: tuple


class Taxonomy:
    """Immutable view of a class tree; update operations build new values."""

    def __init__(self, classes):
        self.classes = tuple(classes)
        self.class_by_id = {}
        self.owner_of = {}  # individual id -> class id
        seen_none = []
        for c in self.classes:
            if c.id in self.class_by_id:
                raise HierarchyError(f"duplicate class id {c.id}")
            if c.mother is None:
                seen_none.append(c.id)
            elif c.mother not in self.class_by_id:
                raise HierarchyError(
                    f"class {c.id}: mother {c.mother} not declared earlier")
            self.class_by_id[c.id] = c
            for ind in c.individuals:
                if ind.id in self.owner_of or ind.id in self.class_by_id:
                    raise HierarchyError(f"duplicate id {ind.id}")
                self.owner_of[ind.id] = c.id
        if seen_none != ["top"] or "top" not in self.class_by_id:
            raise HierarchyError("taxonomy must declare exactly one root class 'top'")
        for ind in self.owner_of:
            if ind in self.class_by_id:
                raise HierarchyError(f"id {ind} used for both class and individual")

    # -- structure ---------------------------------------------------------

    def is_class(self, name):
        return name in self.class_by_id

    def is_individual(self, name):
        return name in self.owner_of

    def class_chain(self, class_id):
        """Class ids from ``class_id`` up to top."""
        chain = []
        cur = class_id
        while cur is not None:
            chain.append(cur)
            cur = self.class_by_id[cur].mother
        return chain

    def subtree(self, class_id):
        if class_id not in self.class_by_id:
            raise UnknownClass(class_id)
        ids = [class_id]
        for c in self.classes:
            if c.mother in ids:
                ids.append(c.id)
        return ids

    def individuals_of(self, class_id):
        out = []
        for cid in self.subtree(class_id):
            out.extend(ind.id for ind in self.class_by_id[cid].individuals)
        return out

    def individual(self, ind_id):
        if ind_id not in self.owner_of:
            raise UnknownIndividual(ind_id)
        cls = self.class_by_id[self.owner_of[ind_id]]
        for ind in cls.individuals:
            if ind.id == ind_id:
                return ind
        raise UnknownIndividual(ind_id)

    def _nodes(self, subject):
        """(kindtag, props, rels) rows from subject up to top; subject first."""
        rows = []
        if self.is_individual(subject):
            ind = self.individual(subject)
            rows.append((subject, ind.props, ind.rels))
            cls = self.owner_of[subject]
        elif self.is_class(subject):
            cls = subject
        else:
            raise UnknownSubject(subject)
        for cid in self.class_chain(cls):
            c = self.class_by_id[cid]
            rows.append((cid, c.props, c.rels))
        return rows


# ---------------------------------------------------------------------------
# loading and dumping


def _parse_individual(t):
    if not (isinstance(t, ListTerm) and len(t.items) == 3):
        raise ClauseError(f"individual must be [id=>Name, Props, Rels]: {print_term(t)}")
    head, props, rels = t.items
    if not (isinstance(head, Struct) and head.functor == "=>"
            and head.args[0] == Atom("id") and isinstance(head.args[1], Atom)):
        raise ClauseError(f"individual head must be id=>name: {print_term(head)}")
    return IndividualDef(head.args[1].name,
                         tuple(parse_clause(x) for x in props.items),
                         tuple(parse_clause(x) for x in rels.items))


def _parse_class(t):
    if not (isinstance(t, Struct) and t.functor == "class" and len(t.args) == 5):
        raise ClauseError(f"expected class/5: {print_term(t)}")
    cid, mother, props, rels, inds = t.args
    if not isinstance(cid, Atom) or not isinstance(mother, Atom):
        raise ClauseError(f"class id and mother must be atoms: {print_term(t)}")
    return ClassDef(
        cid.name,
        None if mother.name == "none" else mother.name,
        tuple(parse_clause(x) for x in props.items),
        tuple(parse_clause(x) for x in rels.items),
        tuple(_parse_individual(x) for x in inds.items),
    )


def load_kb(text):
    t = parse_term(text)
    if not isinstance(t, ListTerm):
        raise ClauseError("a KB file is a single list of class/5 terms")
    return Taxonomy([_parse_class(x) for x in t.items])


def _individual_term(ind):
    return ListTerm((Struct("=>", (Atom("id"), Atom(ind.id))),
                     ListTerm(tuple(clause_term(c) for c in ind.props)),
                     ListTerm(tuple(clause_term(c) for c in ind.rels))))


def class_term(c):
    return Struct("class", (
        Atom(c.id), Atom(c.mother or "none"),
        ListTerm(tuple(clause_term(x) for x in c.props)),
        ListTerm(tuple(clause_term(x) for x in c.rels)),
        ListTerm(tuple(_individual_term(i) for i in c.individuals))))


def dump_kb(tax):
    lines = [" " + print_term(class_term(c)) for c in tax.classes]
    return "[\n" + ",\n".join(lines) + "\n]\n"


# ---------------------------------------------------------------------------
# resolution


def _conflicts(a, b):
    if a.attr != b.attr:
        return False
    if (a.value is None) != (b.value is None):
        return False
    if a.value is None:
        return a.positive != b.positive
    if a.positive and b.positive:
        return a.value != b.value  # attributes are single-valued
    if a.positive != b.positive:
        return a.value == b.value
    return False  # two negations can coexist


def _plain_rows(tax, subject):
    rows = []
    for level, (_node, props, rels) in enumerate(tax._nodes(subject)):
        for kind, clauses in (("prop", props), ("rel", rels)):
            for decl, c in enumerate(clauses):
                if isinstance(c, Fact):
                    rows.append((level, c.weight, decl, kind, c.lit))
    return rows


def _resolve_plain(tax, subject):
    """Specificity-resolved plain facts as (kind, Literal) rows."""
    rows = _plain_rows(tax, subject)
    groups = {}
    order = []
    for row in rows:
        key = (row[3], row[4].attr)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    admitted = []
    for key in order:
        group = sorted(groups[key], key=lambda r: (r[0], r[1], r[2]))
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if (a[0], a[1]) == (b[0], b[1]) and a[4].positive != b[4].positive \
                        and _conflicts(a[4], b[4]):
                    raise SameLevelConflict(
                        f"{subject}: {a[4]} against {b[4]} at equal weight")
        chosen = []
        for row in group:
            if not any(_conflicts(row[4], c[4]) for c in chosen) \
                    and not any(row[4] == c[4] for c in chosen):
                chosen.append(row)
        admitted.extend(chosen)
    return [(r[3], r[4]) for r in admitted]


def _default_rows(tax, subject):
    """Conditional defaults sorted by (weight, specificity, declaration)."""
    rows = []
    for level, (_node, props, rels) in enumerate(tax._nodes(subject)):
        for kind, clauses in (("prop", props), ("rel", rels)):
            for decl, c in enumerate(clauses):
                if isinstance(c, Default):
                    rows.append(((c.weight, level, decl), kind, c))
    rows.sort(key=lambda r: r[0])
    return rows


@dataclass(frozen=True)
class Fired:
    default: Default
    kind: str
    consequent: Literal
    env: dict


def _subst_literal(lit, env):
    if lit.value is None:
        return lit
    return replace(lit, value=substitute(lit.value, env))


def _match_against(ant, pool, env):
    for lit in pool:
        if lit.positive != ant.positive or lit.attr != ant.attr:
            continue
        if (lit.value is None) != (ant.value is None):
            continue
        if ant.value is None:
            return dict(env)
        e = unify(ant.value, lit.value, env)
        if e is not None:
            return e
    return None


def _satisfy(ants, pool, more_rows):
    env = {}
    tem = None
    for ant in ants:
        e = _match_against(ant, pool, env)
        if e is None:
            # forward analysis: later defaults may supply this antecedent
            if tem is None:
                tem = [f.consequent for f in _fire(pool, more_rows)]
            e = _match_against(ant, tem, env)
        if e is None:
            return None
        env = e
    return env


def _fire(pool, rows):
    """Chained default firing: every default whose antecedents hold (directly,
    via earlier consequents, or via later defaults' consequents) fires in
    order; all fired consequents are kept."""
    prop = list(pool)
    fired = []
    for i, (_key, kind, cd) in enumerate(rows):
        env = _satisfy(cd.antecedents, prop, rows[i + 1:])
        if env is not None:
            cons = _subst_literal(cd.consequent, env)
            prop.append(cons)
            fired.append(Fired(cd, kind, cons, env))
    return fired


def chain_defaults(known, defaults):
    """Public form of the firing procedure: ``known`` literals plus a
    weight-sorted default list; returns known extended with every fired
    consequent, in firing order."""
    rows = [((d.weight, 0, i), "prop", d) for i, d in enumerate(defaults)]
    return list(known) + [f.consequent for f in _fire(known, rows)]


class Closure:
    """Resolved view of one subject: plain facts, fired defaults, and the
    consistent literal set they induce."""

    def __init__(self, tax, subject):
        self.subject = subject
        self.plain = _resolve_plain(tax, subject)
        self.rows = _default_rows(tax, subject)
        self.fired = _fire([lit for _k, lit in self.plain], self.rows)
        self.admitted = list(self.plain)
        for f in self.fired:
            if is_ground(f.consequent.value) or f.consequent.value is None:
                if not any(_conflicts(f.consequent, lit) for _k, lit in self.admitted) \
                        and (f.kind, f.consequent) not in self.admitted:
                    self.admitted.append((f.kind, f.consequent))

    def literals(self, kind=None):
        return [lit for k, lit in self.admitted if kind is None or k == kind]

    def holds(self, query):
        """yes/no/unknown for a query literal (value may be a variable)."""
        for _k, lit in self.admitted:
            if lit.attr != query.attr or (lit.value is None) != (query.value is None):
                continue
            same_value = query.value is None or unify(query.value, lit.value) is not None
            if same_value:
                if lit.positive == query.positive:
                    return "yes"
                return "no"
        return "unknown"

    def explanations(self):
        out = []
        for f in self.fired:
            ants = tuple(_subst_literal(a, f.env) for a in f.default.antecedents)
            out.append(Explanation(f.consequent, ants, f.default.weight))
        return out


def resolve_closure(tax, subject):
    """Consistent literal set for a class or individual (specificity first,
    then weight, then declaration order)."""
    return Closure(tax, subject).literals()


# ---------------------------------------------------------------------------
# query services


def _as_literal(q):
    return q if isinstance(q, Literal) else to_literal(q)


def ask(tax, subject, literal):
    """Three-valued query against the resolved closure of ``subject``.

    Class-level questions ("do birds fly?") consult the class's own closure,
    not any member's.
    """
    return Closure(tax, subject).holds(_as_literal(literal))


def extension_of(tax, kind, key):
    """The individuals selected by a class, property, relation or explanation
    key, computed over the full inheritance closure."""
    if kind == "class":
        if not isinstance(key, str):
            key = key.name
        return sorted(tax.individuals_of(key))
    if kind in ("property", "relation"):
        lit = _as_literal(key)
        want = "prop" if kind == "property" else "rel"
        out = []
        for ind in tax.owner_of:
            cl = Closure(tax, ind)
            for k, cand in cl.admitted:
                if k != want or cand.positive != lit.positive or cand.attr != lit.attr:
                    continue
                if (cand.value is None) != (lit.value is None):
                    continue
                if lit.value is None or unify(lit.value, cand.value) is not None:
                    out.append(ind)
                    break
        return sorted(out)
    if kind == "explanation":
        lit = _as_literal(key)
        out = {}
        for ind in tax.owner_of:
            hits = [e for e in Closure(tax, ind).explanations()
                    if e.consequent.positive == lit.positive
                    and e.consequent.attr == lit.attr
                    and (lit.value is None
                         or (e.consequent.value is not None
                             and unify(lit.value, e.consequent.value) is not None))]
            if hits:
                out[ind] = hits
        return out
    raise KBError(f"unknown extension kind {kind}")


def profile_of_individual(tax, kind, ind_id):
    if not tax.is_individual(ind_id):
        raise UnknownIndividual(ind_id)
    if kind == "classes":
        return tax.class_chain(tax.owner_of[ind_id])
    if kind == "properties":
        return Closure(tax, ind_id).literals("prop")
    if kind == "relations":
        return Closure(tax, ind_id).literals("rel")
    if kind == "explanations":
        return Closure(tax, ind_id).explanations()
    raise KBError(f"unknown profile kind {kind}")


def _blocked_values(plain, attr):
    return [lit.value for _k, lit in plain
            if not lit.positive and lit.attr == attr and lit.value is not None]


def _fired_values(tax, subject, attr, known):
    """Ground values fired for ``attr``, in weight order, plus the blocked
    set from negated plain facts."""
    plain = _resolve_plain(tax, subject)
    pool = [lit for _k, lit in plain] + [_as_literal(k) for k in known]
    rows = _default_rows(tax, subject)
    values = []
    for f in _fire(pool, rows):
        c = f.consequent
        if c.positive and c.attr == attr and c.value is not None and is_ground(c.value):
            values.append(c.value)
    return values, _blocked_values(plain, attr)


def preferred_value(tax, scope, attribute, known=()):
    """Lowest-weight fired value of ``attribute`` at ``scope``: defaults from
    the scope and its ancestors are sorted by weight, fired against the
    scope's facts plus ``known``, duplicates dropped keeping the first."""
    values, blocked = _fired_values(tax, scope, attribute, known)
    for v in values:
        if v not in blocked:
            return v
    return None


def preferred_value_list(tax, subject, attribute, known=()):
    """Every fired value of ``attribute`` in weight order, de-duplicated
    preserving first occurrence; values denied by an asserted exception are
    dropped."""
    values, blocked = _fired_values(tax, subject, attribute, known)
    out = []
    for v in values:
        if v not in blocked and v not in out:
            out.append(v)
    return out


def preferred_value_sequence(tax, subject, attribute, known=()):
    """The raw fired value sequence, duplicates kept: position two is the
    predefined location used by the misplacement check."""
    values, _blocked = _fired_values(tax, subject, attribute, known)
    return values


def abduce(tax, subject, observed):
    """Most preferred explanation for an observed literal: the lowest-weight
    default (from the subject's chain) whose consequent unifies with it."""
    obs = _as_literal(observed)
    for _key, _kind, cd in _default_rows(tax, subject):
        c = cd.consequent
        if c.positive != obs.positive or c.attr != obs.attr:
            continue
        if (c.value is None) != (obs.value is None):
            continue
        env = {} if c.value is None else unify(c.value, obs.value)
        if env is None:
            continue
        ants = tuple(_subst_literal(a, env) for a in cd.antecedents)
        return Explanation(obs, ants, cd.weight)
    return None


# ---------------------------------------------------------------------------
# updates


def _with_classes(classes):
    return Taxonomy(classes)


def _edit_node(tax, target, edit):
    """Apply ``edit(props, rels) -> (props, rels)`` to a class or individual."""
    if tax.is_class(target):
        out = []
        for c in tax.classes:
            if c.id == target:
                props, rels = edit(c.props, c.rels)
                c = replace(c, props=props, rels=rels)
            out.append(c)
        return _with_classes(out)
    if tax.is_individual(target):
        owner = tax.owner_of[target]
        out = []
        for c in tax.classes:
            if c.id == owner:
                inds = []
                for ind in c.individuals:
                    if ind.id == target:
                        props, rels = edit(ind.props, ind.rels)
                        ind = replace(ind, props=props, rels=rels)
                    inds.append(ind)
                c = replace(c, individuals=tuple(inds))
            out.append(c)
        return _with_classes(out)
    raise UnknownTarget(target)


def _clause_from_payload(t):
    return parse_clause(t)


def update_kb(tax, op, payload):
    """Apply one update and return the new taxonomy.

    Payload shapes (terms)::

        add_class          class(Id, Mother, Props, Rels, Individuals)
        remove_class       Id
        add_individual     individual(ClassId, [id=>Name, Props, Rels])
        remove_individual  Id
        assert_clause      clause(Target, Clause [, prop|rel])
        retract_clause     clause(Target, Clause [, prop|rel])
        set_value          value(Target, Attr, Value [, Weight [, prop|rel]])

    ``remove_class`` detaches the whole subtree.
    """
    if isinstance(payload, str):
        payload = parse_term(payload)

    if op == "add_class":
        newc = _parse_class(payload)
        return _with_classes(list(tax.classes) + [newc])

    if op == "remove_class":
        cid = payload.name if isinstance(payload, Atom) else payload
        if cid == "top":
            raise HierarchyError("cannot remove the root class")
        doomed = set(tax.subtree(cid))
        return _with_classes([c for c in tax.classes if c.id not in doomed])

    if op == "add_individual":
        if not (isinstance(payload, Struct) and payload.functor == "individual"):
            raise ClauseError("payload must be individual(Class, Spec)")
        cls_id = payload.args[0].name
        ind = _parse_individual(payload.args[1])
        if not tax.is_class(cls_id):
            raise UnknownTarget(cls_id)
        out = []
        for c in tax.classes:
            if c.id == cls_id:
                c = replace(c, individuals=c.individuals + (ind,))
            out.append(c)
        return _with_classes(out)

    if op == "remove_individual":
        iid = payload.name if isinstance(payload, Atom) else payload
        if not tax.is_individual(iid):
            raise UnknownTarget(iid)
        out = []
        for c in tax.classes:
            if any(i.id == iid for i in c.individuals):
                c = replace(c, individuals=tuple(i for i in c.individuals if i.id != iid))
            out.append(c)
        return _with_classes(out)

    if op in ("assert_clause", "retract_clause"):
        if not (isinstance(payload, Struct) and payload.functor == "clause"
                and len(payload.args) in (2, 3)):
            raise ClauseError("payload must be clause(Target, Clause [, Kind])")
        target = payload.args[0].name
        clause = _clause_from_payload(payload.args[1])
        kind = payload.args[2].name if len(payload.args) == 3 else "prop"

        def do_assert(props, rels):
            # a newly asserted fact displaces directly conflicting facts on
            # the same node, so queries keep seeing a coherent extension
            def scrub(seq):
                if not isinstance(clause, Fact):
                    return seq
                return tuple(c for c in seq
                             if not (isinstance(c, Fact) and _conflicts(c.lit, clause.lit)))
            if kind == "prop":
                return scrub(props) + (clause,), rels
            return props, scrub(rels) + (clause,)

        def do_retract(props, rels):
            hit = [False]

            def drop(seq):
                out = []
                for c in seq:
                    if not hit[0] and c == clause:
                        hit[0] = True
                        continue
                    out.append(c)
                return tuple(out)

            props2 = drop(props) if kind == "prop" else props
            rels2 = drop(rels) if kind == "rel" else rels
            if not hit[0]:
                raise UnknownTarget(f"no such clause on {target}")
            return props2, rels2

        return _edit_node(tax, target,
                          do_assert if op == "assert_clause" else do_retract)

    if op == "set_value":
        if not (isinstance(payload, Struct) and payload.functor == "value"
                and len(payload.args) in (3, 4, 5)):
            raise ClauseError("payload must be value(Target, Attr, Value [, Weight [, Kind]])")
        target = payload.args[0].name
        attr = payload.args[1].name
        value = payload.args[2]
        weight = payload.args[3].value if len(payload.args) >= 4 else 0
        kind = payload.args[4].name if len(payload.args) == 5 else "prop"
        fact = Fact(Literal(True, attr, value), weight)

        def do_set(props, rels):
            def scrub(seq):
                return tuple(c for c in seq
                             if not (isinstance(c, Fact)
                                     and ((c.lit.positive and c.lit.attr == attr)
                                          or _conflicts(c.lit, fact.lit))))
            if kind == "prop":
                return scrub(props) + (fact,), rels
            return props, scrub(rels) + (fact,)

        return _edit_node(tax, target, do_set)

    raise KBError(f"unknown update op {op}")


def believed_value(tax, subject, attribute):
    """The attribute's value in the consistent closure, or None."""
    for lit in Closure(tax, subject).literals():
        if lit.positive and lit.attr == attribute and lit.value is not None:
            return lit.value
    return None
