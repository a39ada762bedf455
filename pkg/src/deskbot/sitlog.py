"""Interpreter for SitLog dialogue-model programs.

A program is a set of ``diag_mod(Id, Situations, LocalVars)`` clauses plus an
optional ``Global_Vars = [...]`` declaration; exactly one model must be named
``main``.  Situations are attribute/value structures with ``id``, ``type``
and ``arcs`` mandatory (``arcs`` except for ``final``); arcs read
``Expectation : Action => Next``.

Interpretation of a situation runs its attributes top to bottom: bind the
input pipe into ``in_arg``, evaluate ``out_arg``, run ``prog``, instantiate
the arc expectations, match the input, evaluate the selected arc's action,
record the transition, and move on (``Next`` may be an ``apply`` expression
computed from the arc's bindings).  Variables bound in ``prog`` or in one arc
are invisible elsewhere; named variables have no scope beyond the situation.

Recursive situations push the embedded model on the stack; its final
situation's id is matched against the recursive situation's arcs on return,
and the pipe threads through (``out_arg`` defaults to ``in_arg`` wherever it
is never assigned).

Arc selection is textual order, first match wins.  One extra deterministic
rule covers arcs whose expectations are internal tests rather than input
patterns: after a transition that loops back into the same situation, any
later-listed arc whose expectation evaluates to a fully ground term through
operator or function calls fires immediately without consuming input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    Atom, ListTerm, Num, Struct, Var,
    is_ground, parse_statements, print_term, substitute, unify, walk_subterms,
)

EMPTY = Atom("empty")

_OPERATOR_FUNCTORS = {"get", "set", "inc", "apply", "==", "unify_with"}


class ProgramError(Exception):
    pass


class ValidationError(ProgramError):
    pass


class SitLogError(Exception):
    pass


class UnknownVariable(SitLogError):
    pass


class UnknownFunction(SitLogError):
    pass


class EvalTypeError(SitLogError):
    pass


class NoMatch(SitLogError):
    """No expectation matched the input: the interpretation ground is lost."""

    def __init__(self, dm, situation, inp, expectations):
        super().__init__(
            f"no expectation of {dm}:{print_term(situation)} matches "
            f"{print_term(inp)}")
        self.dm = dm
        self.situation = situation
        self.input = inp
        self.expectations = expectations


class ScriptExhausted(SitLogError):
    pass


# ---------------------------------------------------------------------------
# program model


@dataclass
class Arc:
    expectation: object
    action: object
    next: object


@dataclass
class SituationDef:
    id: object
    type: str
    in_arg: object = None
    out_arg: object = None
    prog: object = None
    arcs: list = field(default_factory=list)
    embedded_dm: object = None


@dataclass
class DialogueModelDef:
    name: str
    params: tuple
    situations: list
    locals: list  # (name, initial value) pairs


@dataclass
class Program:
    models: dict
    globals: list  # (name, initial value) pairs

    def model(self, name):
        if name not in self.models:
            raise ValidationError(f"unknown dialogue model {name}")
        return self.models[name]


_KNOWN_ATTRS = {"id", "type", "in_arg", "out_arg", "prog", "arcs", "embedded_dm"}


def _decompose_arc(t):
    if isinstance(t, Struct) and t.functor == "=>" and len(t.args) == 2 \
            and isinstance(t.args[0], Struct) and t.args[0].functor == ":":
        head, nxt = t.args
        return Arc(head.args[0], head.args[1], nxt)
    if isinstance(t, Struct) and t.functor == ":" and len(t.args) == 2 \
            and isinstance(t.args[1], Struct) and t.args[1].functor == "=>":
        exp = t.args[0]
        act, nxt = t.args[1].args
        return Arc(exp, act, nxt)
    raise ValidationError(f"malformed arc: {print_term(t)}")


def _decompose_situation(t):
    if not isinstance(t, ListTerm):
        raise ValidationError(f"a situation is an attribute list: {print_term(t)}")
    sit = SituationDef(id=None, type=None)
    for pair in t.items:
        if not (isinstance(pair, Struct) and pair.functor == "==>" and len(pair.args) == 2
                and isinstance(pair.args[0], Atom)):
            raise ValidationError(f"bad situation attribute: {print_term(pair)}")
        attr, value = pair.args[0].name, pair.args[1]
        if attr not in _KNOWN_ATTRS:
            raise ValidationError(f"unknown situation attribute {attr}")
        if attr == "id":
            sit.id = value
        elif attr == "type":
            if not isinstance(value, Atom):
                raise ValidationError("situation type must be an atom")
            sit.type = value.name
        elif attr == "arcs":
            if not isinstance(value, ListTerm):
                raise ValidationError("arcs must be a list")
            sit.arcs = [_decompose_arc(x) for x in value.items]
        elif attr == "embedded_dm":
            sit.embedded_dm = value
        else:
            setattr(sit, attr, value)
    if sit.id is None or sit.type is None:
        raise ValidationError("situation needs id and type")
    if sit.type == "final" and sit.arcs:
        raise ValidationError(f"final situation {print_term(sit.id)} has arcs")
    if sit.type not in ("final",) and not sit.arcs:
        raise ValidationError(f"situation {print_term(sit.id)} has no arcs")
    if sit.type == "recursive" and sit.embedded_dm is None:
        raise ValidationError(f"recursive situation {print_term(sit.id)} "
                              "names no embedded_dm")
    return sit


def _var_pairs(t, what):
    pairs = []
    if t is None:
        return pairs
    if not isinstance(t, ListTerm):
        raise ValidationError(f"{what} must be a list of name ==> value pairs")
    for item in t.items:
        if not (isinstance(item, Struct) and item.functor == "==>"
                and isinstance(item.args[0], Atom)):
            raise ValidationError(f"bad {what} entry: {print_term(item)}")
        pairs.append((item.args[0].name, item.args[1]))
    return pairs


def load_program(text):
    """Parse and validate a program; returns a :class:`Program`."""
    models = {}
    globals_pairs = []
    for stmt in parse_statements(text):
        if isinstance(stmt, Struct) and stmt.functor == "=" \
                and stmt.args[0] == Var("Global_Vars"):
            globals_pairs = _var_pairs(stmt.args[1], "Global_Vars")
            continue
        if not (isinstance(stmt, Struct) and stmt.functor == "diag_mod"):
            raise ValidationError(f"unexpected clause {print_term(stmt)}")
        head, sits, local_vars = stmt.args
        if isinstance(head, Atom):
            name, params = head.name, ()
        elif isinstance(head, Struct):
            name, params = head.functor, head.args
        else:
            raise ValidationError("dialogue model id must be an atom or compound")
        dm = DialogueModelDef(name, params,
                              [_decompose_situation(s) for s in sits.items],
                              _var_pairs(local_vars, "local variables"))
        if name in models:
            raise ValidationError(f"duplicate dialogue model {name}")
        models[name] = dm
    if "main" not in models:
        raise ValidationError("no dialogue model named main")
    for dm in models.values():
        ids = [s.id for s in dm.situations]
        if sum(1 for i in ids if i == Atom("is")) != 1:
            raise ValidationError(f"model {dm.name} needs exactly one situation is")
        if not any(s.type == "final" for s in dm.situations):
            raise ValidationError(f"model {dm.name} has no final situation")
        for s in dm.situations:
            if s.type == "recursive":
                target = s.embedded_dm
                tname = target.name if isinstance(target, Atom) else \
                    target.functor if isinstance(target, Struct) else None
                if tname not in models:
                    raise ValidationError(
                        f"model {dm.name}: embedded_dm {print_term(target)} undefined")
    return Program(models, globals_pairs)


# ---------------------------------------------------------------------------
# input providers


class ScriptInput:
    """Scripted input source shared by every speech-type situation."""

    def __init__(self, terms):
        self.pending = list(terms)
        self.consumed = []

    def next(self, sit_type, expectations):
        if not self.pending:
            raise ScriptExhausted("input script ended before the task finished")
        t = self.pending.pop(0)
        self.consumed.append(t)
        return t


class InteractiveInput:
    """Reads terms from a callable (defaults to stdin prompts)."""

    def __init__(self, readline=None, echo=None):
        self.readline = readline or (lambda prompt: input(prompt))
        self.echo = echo

    def next(self, sit_type, expectations):
        from .terms import parse_term
        shown = " | ".join(print_term(e) for e in expectations)
        while True:
            line = self.readline(f"expecting [{shown}] > ")
            if line is None:
                raise ScriptExhausted("interactive input closed")
            line = line.strip()
            if not line:
                continue
            try:
                return parse_term(line)
            except Exception as err:  # bad input is re-asked, not fatal
                print(f"  ? {err}")


# ---------------------------------------------------------------------------
# runtime


@dataclass
class HistoryEntry:
    dm: str
    situation: object
    expectation: object
    action: object
    depth: int


@dataclass
class _Frame:
    dm: DialogueModelDef
    locals: dict
    pipe: object
    current: object
    resume_final: object = None  # final situation id just popped from an embedded DM
    prev_arc: object = None      # (situation id, arc index) of a same-situation loop


@dataclass
class RunResult:
    out_arg: object
    globals: dict
    history: list


def get_history(engine):
    return list(engine.history)


def get_last_transition(history):
    if not history:
        return Atom("none")
    last = history[-1]
    return Struct(":", (last.expectation, last.action))


def match_expectation(expectations, inp):
    """First arc (top to bottom) whose expectation unifies with the input;
    a bare input also matches a one-element list pattern elementwise.
    Returns (index, binding) or None."""
    for i, exp in enumerate(expectations):
        env = unify(exp, inp)
        if env is None and isinstance(exp, ListTerm) and not isinstance(inp, ListTerm):
            env = unify(exp, ListTerm((inp,)))
        if env is not None:
            return i, env
    return None


def _contains_operator(t):
    for sub in walk_subterms(t):
        if isinstance(sub, Struct) and sub.functor in _OPERATOR_FUNCTORS:
            return True
    return False


class Engine:
    """One program execution; engines are independent of each other."""

    def __init__(self, program, functions=None, input_source=None, services=None,
                 history=None, depth_offset=0):
        self.program = program
        self.functions = {"when": _builtin_when}
        self.functions.update(functions or {})
        self.input_source = input_source or ScriptInput([])
        self.services = services
        self.globals = {name: value for name, value in program.globals}
        self.stack = []
        self.history = history if history is not None else []
        self.depth_offset = depth_offset

    # -- variable store ----------------------------------------------------

    def get_var(self, name):
        if self.stack and name in self.stack[-1].locals:
            return self.stack[-1].locals[name]
        if name in self.globals:
            return self.globals[name]
        raise UnknownVariable(name)

    def set_var(self, name, value):
        if self.stack and name in self.stack[-1].locals:
            self.stack[-1].locals[name] = value
        elif name in self.globals:
            self.globals[name] = value
        else:
            frame = self.stack[-1] if self.stack else None
            if frame is None:
                self.globals[name] = value
            else:
                frame.locals[name] = value

    def register_user_function(self, name, fn):
        self.functions[name] = fn

    # -- expression evaluation ----------------------------------------------

    def eval_expr(self, t, env):
        """Evaluate an expression, accumulating variable bindings in env."""
        if isinstance(t, (Atom, Num)):
            return t
        if isinstance(t, Var):
            return substitute(t, env)
        if isinstance(t, ListTerm):
            return ListTerm(tuple(self.eval_expr(x, env) for x in t.items))
        if isinstance(t, Struct):
            f, args = t.functor, t.args
            if f == "get" and len(args) == 2:
                value = self.get_var(_varname(args[0]))
                _bind(args[1], value, env)
                return value
            if f == "set" and len(args) == 2:
                value = self.eval_expr(args[1], env)
                self.set_var(_varname(args[0]), value)
                return value
            if f == "inc" and len(args) == 2:
                name = _varname(args[0])
                old = self.get_var(name)
                if not isinstance(old, Num):
                    raise EvalTypeError(f"inc on non-integer variable {name}")
                new = Num(old.value + 1)
                self.set_var(name, new)
                _bind(args[1], new, env)
                return new
            if f == "apply" and len(args) == 2:
                return self._apply(args[0], args[1], env)
            if f == "==" and len(args) == 2:
                a = self.eval_expr(args[0], env)
                b = self.eval_expr(args[1], env)
                return Atom("true") if a == b else Atom("false")
            if f == "unify_with" and len(args) == 2:
                a = self.eval_expr(args[0], env)
                b = self.eval_expr(args[1], env)
                got = unify(a, b, env)
                if got is None:
                    return Atom("false")
                env.clear()
                env.update(got)
                return Atom("true")
            grounded = tuple(self.eval_expr(a, env) for a in args)
            return Struct(f, grounded)
        raise EvalTypeError(f"cannot evaluate {t!r}")

    def _apply(self, fn_term, arg_list, env):
        if isinstance(fn_term, Atom):
            name, params = fn_term.name, ()
        elif isinstance(fn_term, Struct):
            name, params = fn_term.functor, fn_term.args
        else:
            raise UnknownFunction(print_term(fn_term))
        if name not in self.functions:
            raise UnknownFunction(name)
        if not isinstance(arg_list, ListTerm):
            raise EvalTypeError("apply arguments must be a list")
        values = [self.eval_expr(a, env) for a in arg_list.items]
        if len(values) != len(params):
            raise EvalTypeError(
                f"apply({name}): {len(params)} parameters, {len(values)} arguments")
        for p, v in zip(params, values):
            got = unify(p, v, env)
            if got is None:
                raise EvalTypeError(f"apply({name}): argument mismatch")
            env.clear()
            env.update(got)
        bound = [substitute(p, env) for p in params]
        result = self.functions[name](self, bound)
        return result if result is not None else Atom("ok")

    # -- situation machinery -------------------------------------------------

    def _situation(self, dm, sit_id, env):
        for s in dm.situations:
            got = unify(s.id, sit_id, env)
            if got is not None:
                env.clear()
                env.update(got)
                return s
        raise ValidationError(
            f"model {dm.name} has no situation {print_term(sit_id)}")

    def instantiate_expectations(self, sit, sit_env):
        """Evaluate each arc's expectation; open variables stay open, and each
        arc keeps its own bindings."""
        out = []
        for arc in sit.arcs:
            env = dict(sit_env)
            out.append((self.eval_expr(arc.expectation, env), env))
        return out

    def run(self, initial_pipe):
        """Interpret from the initial situation of main to its final one."""
        main = self.program.model("main")
        self.stack = [_Frame(main, dict(main.locals), initial_pipe, Atom("is"))]
        out = None
        while True:
            done, out = self.step()
            if done:
                return RunResult(out, dict(self.globals), self.history)

    def step(self):
        frame = self.stack[-1]
        depth = len(self.stack) - 1 + self.depth_offset

        if frame.resume_final is not None:
            # an embedded model just finished: match its final situation id
            # against the recursive situation's exit arcs
            final_id = frame.resume_final
            frame.resume_final = None
            sit_env = {}
            sit = self._situation(frame.dm, frame.current, sit_env)
            instantiated = self.instantiate_expectations(sit, sit_env)
            hit = None
            for i, (exp, env) in enumerate(instantiated):
                got = unify(exp, final_id, env)
                if got is not None:
                    hit = (i, got, exp)
                    break
            if hit is None:
                raise NoMatch(frame.dm.name, sit.id, final_id,
                              [e for e, _ in instantiated])
            return self._take_arc(frame, sit, hit[0], hit[1], hit[2], depth)

        sit_env = {}
        sit = self._situation(frame.dm, frame.current, sit_env)

        if sit.type == "final":
            self.history.append(HistoryEntry(frame.dm.name, substitute(sit.id, sit_env),
                                             EMPTY, EMPTY, depth))
            if sit.in_arg is not None:
                got = unify(sit.in_arg, frame.pipe, sit_env)
                if got is not None:
                    sit_env.update(got)
            pipe = self.eval_expr(sit.out_arg, sit_env) \
                if sit.out_arg is not None else frame.pipe
            self.stack.pop()
            if not self.stack:
                return True, pipe
            parent = self.stack[-1]
            parent.pipe = pipe  # the embedded out_arg returns to the re-entry point
            parent.resume_final = substitute(sit.id, sit_env)
            return False, None

        if sit.in_arg is not None:
            got = unify(sit.in_arg, frame.pipe, sit_env)
            if got is None:
                raise EvalTypeError(
                    f"in_arg of {print_term(sit.id)} does not accept the pipe")
            sit_env.clear()
            sit_env.update(got)

        out_value = None
        if sit.out_arg is not None:
            out_value = self.eval_expr(sit.out_arg, sit_env)

        if sit.prog is not None:
            prog_env = dict(sit_env)  # prog bindings stay local to prog
            self.eval_expr(sit.prog, prog_env)

        if sit.type == "recursive":
            target = self.eval_expr(sit.embedded_dm, dict(sit_env))
            name = target.name if isinstance(target, Atom) else target.functor
            embedded = self.program.model(name)
            env = {}
            if isinstance(target, Struct):
                got = unify(Struct(name, embedded.params), target, env)
                if got is None:
                    raise ValidationError(f"cannot bind arguments of {name}")
                env = got
            locals_ = {k: substitute(v, env) for k, v in embedded.locals}
            pipe = out_value if out_value is not None else frame.pipe
            self.stack.append(_Frame(embedded, locals_, pipe, Atom("is")))
            return False, None

        instantiated = self.instantiate_expectations(sit, sit_env)

        # internal continuation: on a self-loop, later arcs whose expectations
        # evaluated to ground internal tests fire without input
        if frame.prev_arc is not None and frame.prev_arc[0] == frame.current:
            start = frame.prev_arc[1] + 1
            for j in range(start, len(sit.arcs)):
                exp, env = instantiated[j]
                if _contains_operator(sit.arcs[j].expectation) and is_ground(exp):
                    return self._take_arc(frame, sit, j, env, exp, depth,
                                          out_value=out_value)

        inp = self.input_source.next(sit.type, [e for e, _ in instantiated]) \
            if sit.type != "neutral" else EMPTY
        hit = None
        for i, (exp, env) in enumerate(instantiated):
            got = unify(exp, inp, env)
            if got is None and isinstance(exp, ListTerm) and not isinstance(inp, ListTerm):
                got = unify(exp, ListTerm((inp,)), env)
            if got is not None:
                hit = (i, got, exp)
                break
        if hit is None:
            raise NoMatch(frame.dm.name, substitute(sit.id, sit_env), inp,
                          [e for e, _ in instantiated])
        return self._take_arc(frame, sit, hit[0], hit[1], hit[2], depth,
                              out_value=out_value)

    def _take_arc(self, frame, sit, idx, env, instantiated_exp, depth, out_value=None):
        arc = sit.arcs[idx]
        grounded_exp = substitute(instantiated_exp, env)
        action = arc.action
        # a one-element action list holding a single function application is
        # a computed action: the function's value is the action performed
        if isinstance(action, ListTerm) and len(action.items) == 1 \
                and isinstance(action.items[0], Struct) \
                and action.items[0].functor == "apply":
            action = action.items[0]
        grounded_act = self.eval_expr(action, env)
        self.history.append(HistoryEntry(frame.dm.name, substitute(sit.id, env),
                                         grounded_exp, grounded_act, depth))
        nxt = self.eval_expr(arc.next, env)
        if out_value is not None:
            frame.pipe = out_value
        if nxt == frame.current or (
                isinstance(nxt, Atom) and isinstance(frame.current, Atom)
                and nxt.name == frame.current.name):
            frame.prev_arc = (frame.current, idx)
        else:
            frame.prev_arc = None
        frame.current = nxt
        return False, None


def _varname(t):
    if not isinstance(t, Atom):
        raise EvalTypeError(f"variable name must be an atom: {print_term(t)}")
    return t.name


def _bind(target, value, env):
    got = unify(target, value, env)
    if got is None:
        raise EvalTypeError("binding target does not unify with value")
    env.clear()
    env.update(got)


def _builtin_when(engine, args):
    cond, then_v, else_v = args
    return then_v if cond == Atom("true") else else_v


def run(program, initial_pipe, script=None, functions=None, services=None,
        input_source=None):
    """Load-and-go convenience: run main with a scripted input source."""
    source = input_source or ScriptInput(script or [])
    engine = Engine(program, functions=functions, input_source=source,
                    services=services)
    return engine.run(initial_pipe)


# ---------------------------------------------------------------------------
# trace rendering (the line format golden tests compare against)

_WRAP = 40


def _entry_lines(e, prefix):
    sit = print_term(e.situation, quoted=False, spaced=False)
    exp = print_term(e.expectation, quoted=True, spaced=False)
    act_is_pair = isinstance(e.action, Struct) and e.action.functor == ":"
    act = print_term(e.action, quoted=False, spaced=False)
    if act_is_pair:
        act = f"({act})"
    head = f"{e.dm}: ({sit},{exp}:"
    full = prefix + head + act + ")"
    if len(full) <= _WRAP:
        return [full]
    cont = prefix + " " * (len(e.dm) + 2)
    lines = [prefix + head]
    tail = act + ")"
    if act_is_pair and len(cont + tail) > _WRAP:
        lhs = print_term(e.action.args[0], quoted=False, spaced=False)
        rhs = print_term(e.action.args[1], quoted=False, spaced=False)
        lines.append(f"{cont}({lhs}:")
        lines.append(f"{cont}{rhs}))")
    else:
        lines.append(cont + tail)
    return lines


def render_history(history):
    lines = []
    i = 0
    while i < len(history):
        e = history[i]
        if e.depth == 0:
            lines.extend(_entry_lines(e, ""))
            i += 1
            continue
        j = i
        while j < len(history) and history[j].depth > 0:
            j += 1
        block = []
        for k in range(i, j):
            d = history[k].depth
            block.append((k == i, _entry_lines(history[k], " " * (8 * d))))
        first_line_done = False
        rendered = []
        for is_first, entry_lines in block:
            for line in entry_lines:
                if not first_line_done:
                    depth1 = 8
                    line = " " * (depth1 - 1) + "[" + line[depth1:]
                    first_line_done = True
                rendered.append(line)
        rendered[-1] += "]"
        lines.extend(rendered)
        i = j
    return lines


def render_trace(result):
    """The full session report: history, blank line, Out Arg and the final
    global variable values."""
    lines = render_history(result.history)
    lines.append("")
    lines.append("Out Arg: " + print_term(result.out_arg, quoted=False, spaced=False))
    pairs = [f"{name}==>{print_term(v, quoted=False, spaced=False)}"
             for name, v in result.globals.items()]
    if not pairs:
        lines.append("Out Global Vars: []")
    else:
        head = "Out Global Vars: ["
        for n, p in enumerate(pairs):
            sep = "," if n < len(pairs) - 1 else "]"
            lines.append((head if n == 0 else " " * len(head)) + p + sep)
    return "\n".join(lines) + "\n"
