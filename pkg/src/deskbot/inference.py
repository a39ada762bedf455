"""The deliberative inference cycle: diagnosis, decision-making and planning,
plus the general-purpose command dispatcher that invokes it on demand.

A failed ``take`` (the sought object is not where the KB said) triggers the
cycle: the diagnosis assigns every missing object a hypothetical shelf (the
sought one goes to the closest unseen shelf, the rest are spread randomly
over the remaining unseen shelves with a seeded rng) and reconstructs the
single round of move/place actions a human assistant must have performed.
The decision picks, among all subsets of pending obligations that include the
triggering one, the subset of maximal cost not exceeding the budget.  The
plan is found by depth-first search over action multisets with the four
pruning preconditions; a plan's cost is the sum of action costs divided by
the product of their success probabilities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import kb as kbmod
from . import world as worldmod
from .terms import Atom, ListTerm, Struct, parse_term, print_term


class InferenceError(Exception):
    pass


class UnknownCommand(InferenceError):
    pass


class UnknownActionKind(InferenceError):
    pass


class BudgetTooSmall(InferenceError):
    pass


class NoUnseenShelves(InferenceError):
    """Every shelf has been inspected: the sought object is not in the world."""


class NoPlan(InferenceError):
    pass


class GiveUp(InferenceError):
    pass


# ---------------------------------------------------------------------------
# cost model


@dataclass(frozen=True)
class CostModel:
    costs: dict
    probs: dict            # percentages
    move_per_unit: int     # percent lost per distance unit, floor 1
    r_max: float
    kind_order: tuple

    def cost(self, kind):
        if kind not in self.costs:
            raise UnknownActionKind(kind)
        return self.costs[kind]

    def prob(self, kind, distance=None):
        if kind not in self.probs:
            raise UnknownActionKind(kind)
        pct = self.probs[kind]
        if kind == "move" and distance is not None and self.move_per_unit:
            pct = max(1, pct - self.move_per_unit * distance)
        return pct / 100.0


def load_cost_model(text):
    costs, probs, order = {}, {}, []
    per_unit, r_max = 0, float("inf")
    t = parse_term(text)
    for row in t.items:
        if not isinstance(row, Struct):
            raise InferenceError(f"bad cost model row: {print_term(row)}")
        if row.functor == "cost":
            kind = row.args[0].name
            costs[kind] = row.args[1].value
            if kind not in order:
                order.append(kind)
        elif row.functor == "prob":
            probs[row.args[0].name] = row.args[1].value
        elif row.functor == "prob_move_per_unit":
            per_unit = row.args[0].value
        elif row.functor == "r_max":
            r_max = row.args[0].value
        else:
            raise InferenceError(f"unknown cost model row {row.functor}")
    return CostModel(costs, probs, per_unit, r_max, tuple(order))


# ---------------------------------------------------------------------------
# obligations and plans


@dataclass(frozen=True)
class Obligation:
    kind: str        # "client": fetch for the user; "restore": put back on a shelf
    obj: str
    source: str      # shelf holding the object (per the diagnosis)
    target: str      # "client" or the destination shelf
    decl: int = 0

    def template(self):
        nav = PlanAction("search", "client", self.obj) if self.kind == "client" \
            else PlanAction("move", self.target, self.obj)
        return [PlanAction("move", self.source, self.obj),
                PlanAction("take", self.obj, self.obj),
                nav,
                PlanAction("deliver", self.obj, self.obj)]


@dataclass(frozen=True)
class PlanAction:
    kind: str    # move | take | search | deliver
    target: str
    obj: str     # the obligation's object this action serves

    def to_term(self):
        return Struct(self.kind, (Atom(self.target),))


@dataclass
class RouteContext:
    """Geometry for costing: a distance function, the starting location and
    where the client is."""

    distance: object = None
    start: str = None
    user_loc: str = None


def plan_cost(actions, cm, route=None):
    """r(plan) = sum of costs / product of success probabilities; move
    probability degrades with the distance travelled when geometry is given."""
    total = 0
    p = 1.0
    loc = route.start if route else None
    for a in actions:
        kind = a.kind if isinstance(a, PlanAction) else a
        total += cm.cost(kind)
        distance = None
        if isinstance(a, PlanAction) and route and route.distance and loc is not None:
            if kind == "move":
                distance = route.distance(loc, a.target)
                loc = a.target
            elif kind == "search":
                if route.user_loc:
                    distance = route.distance(loc, route.user_loc)
                    loc = route.user_loc
                else:
                    loc = None
        p *= cm.prob(kind, distance)
    if total == 0:
        return 0
    return total / p


def decide(to, pending, cm, r_max=None, route=None, minimize=False):
    """All subsets of {TO} + pending that include TO are costed with their
    templates; the one with maximal cost not exceeding r_max wins (ties:
    fewer obligations, then declaration order).  ``minimize`` flips the
    objective to the cheapest subset within budget."""
    if r_max is None:
        r_max = cm.r_max
    base = plan_cost(to.template(), cm, route)
    if base > r_max:
        raise BudgetTooSmall(f"{base:.2f} > {r_max}")
    pending = list(pending)
    best = None
    for r in range(len(pending) + 1):
        for combo in itertools.combinations(range(len(pending)), r):
            subset = [to] + [pending[i] for i in combo]
            actions = [a for ob in subset for a in ob.template()]
            cost = plan_cost(actions, cm, route)
            if cost > r_max:
                continue
            key = (cost if minimize else -cost, len(subset), combo)
            if best is None or key < best[0]:
                best = (key, subset)
    return best[1]


# ---------------------------------------------------------------------------
# diagnosis


@dataclass
class Diagnosis:
    shelf_states: dict        # shelf -> tuple of objects (known or assumed)
    assistant_actions: list   # move/place terms of the assumed single round
    assignments: dict         # missing object -> hypothesized shelf

    def to_record(self):
        return {
            "shelves": {s: list(v) for s, v in self.shelf_states.items()},
            "assistant": [print_term(a) for a in self.assistant_actions],
            "assignments": dict(self.assignments),
        }


def class_shelf_of(w, kb, obj):
    chain = kb.class_chain(kb.owner_of[obj]) if kb.is_individual(obj) else []
    for shelf, cls in w.shelves.items():
        if cls in chain:
            return shelf
    return None


def diagnose(w, kb, sought, obs, previous_shelves, rng):
    """Hypothesize the state of the unseen shelves after a failed sighting.

    Returns (kb', diagnosis).  The KB receives the double exception for the
    sought object plus a located-at belief for every assigned object; raises
    NoUnseenShelves when nothing remains to inspect.
    """
    current = obs.shelf
    prev_ids = [s for s, _ in previous_shelves]
    unseen = [s for s in w.shelves if s not in prev_ids and s != current]

    home_shelf = class_shelf_of(w, kb, sought)
    for shelf in {current, home_shelf} - {None}:
        exc = kbmod.Literal(False, "loc", Atom(shelf))
        if kbmod.ask(kb, sought, exc) != "yes":
            kb = kbmod.update_kb(kb, "assert_clause",
                                 f"clause({sought}, [not(loc=>{shelf}),0])")

    if not unseen:
        raise NoUnseenShelves(sought)

    missing = list(obs.missing)
    if sought not in missing:
        missing.insert(0, sought)

    closest = min(unseen, key=lambda s: (w.distance(current, s),
                                         list(w.shelves).index(s)))
    assignments = {sought: closest}
    pool = [s for s in unseen if s != closest] or list(unseen)
    for o in sorted(o for o in missing if o != sought):
        assignments[o] = pool[rng.randrange(len(pool))]
    for o, shelf in assignments.items():
        kb = kbmod.update_kb(kb, "set_value", f"value({o}, loc, {shelf})")

    states = {}
    for shelf, contents in previous_shelves:
        states[shelf] = tuple(contents)
    states[current] = tuple(obs.present)
    for shelf in unseen:
        states[shelf] = tuple(worldmod._believed_at(kb, w, shelf))

    actions = []
    for shelf in w.shelves:
        if shelf not in states:
            continue
        actions.append(Struct("move", (Atom(shelf),)))
        actions.extend(Struct("place", (Atom(o),)) for o in states[shelf])
    return kb, Diagnosis(states, actions, assignments)


# ---------------------------------------------------------------------------
# planning


def check_plan(actions):
    """Replay the four pruning preconditions over a finished plan; returns
    the list of (index, rule) violations."""
    violations = []
    held = set()
    taken = set()
    last = None
    for i, a in enumerate(actions):
        nav = a.kind in ("move", "search")
        if nav and last is not None and last.kind in ("move", "search"):
            violations.append((i, "consecutive-navigation"))
        if a.kind == "search" and a.target != "client":
            if (last is not None and last.kind == "search") or len(held) >= 2:
                violations.append((i, "useless-observation"))
        if a.kind == "deliver" and a.target not in taken:
            violations.append((i, "deliver-before-take"))
        if a.kind == "take":
            if len(held) >= 2:
                violations.append((i, "take-with-full-hands"))
            held.add(a.target)
            taken.add(a.target)
        if a.kind == "deliver":
            held.discard(a.target)
        last = a
    return violations


def _legal(a, last, held, taken, loc, by_obj):
    """The four preconditions plus physical feasibility (right shelf for a
    take, right place for a delivery)."""
    nav = a.kind in ("move", "search")
    if nav and last is not None and last.kind in ("move", "search"):
        return False
    if a.kind == "search" and a.target != "client":
        if (last is not None and last.kind == "search") or len(held) >= 2:
            return False
    if a.kind == "deliver":
        if a.target not in taken:
            return False
        ob = by_obj[a.obj]
        goal = "client" if ob.kind == "client" else ob.target
        if loc != goal:
            return False
    if a.kind == "take":
        if len(held) >= 2:
            return False
        if loc != by_obj[a.obj].source:
            return False
    return True


def plan(decisions, cm, route=None):
    """Depth-first search over the obligation templates' action multiset;
    children are ordered by incremental score, ties by the cost model's
    action-kind order.  Returns the first complete plan."""
    decisions = list(decisions)
    by_obj = {ob.obj: ob for ob in decisions}
    bag = []
    for ob in decisions:
        bag.extend(ob.template())
    if not decisions:
        return []
    start = route.start if route else None
    kind_rank = {k: i for i, k in enumerate(cm.kind_order)}

    # node: (loc, held frozenset, R frozenset, remaining ids, plan ids, cost, prob)
    root = (start, frozenset(), frozenset(by_obj), tuple(range(len(bag))), (), 0.0, 1.0)
    stack = [root]
    while stack:
        loc, held, remaining_obs, remaining, chosen, cost, prob = stack.pop()
        if not remaining_obs:
            return [bag[i] for i in chosen]
        last = bag[chosen[-1]] if chosen else None
        taken = {bag[i].target for i in chosen if bag[i].kind == "take"}
        children = []
        seen_sig = set()
        for i in remaining:
            a = bag[i]
            sig = (a.kind, a.target, a.obj)
            if sig in seen_sig:
                continue
            seen_sig.add(sig)
            if not _legal(a, last, held, taken, loc, by_obj):
                continue
            distance = None
            nloc = loc
            if a.kind == "move":
                if route and route.distance and loc is not None:
                    distance = route.distance(loc, a.target)
                nloc = a.target
            elif a.kind == "search":
                if route and route.distance and loc is not None and route.user_loc:
                    distance = route.distance(loc, route.user_loc)
                nloc = "client"
            ncost = cost + cm.cost(a.kind)
            nprob = prob * cm.prob(a.kind, distance)
            incremental = ncost / nprob - (cost / prob if cost else 0.0)
            nheld = held | {a.target} if a.kind == "take" else \
                held - {a.target} if a.kind == "deliver" else held
            nobs = remaining_obs - {a.obj} if a.kind == "deliver" else remaining_obs
            child = (nloc, nheld, nobs,
                     tuple(x for x in remaining if x != i),
                     chosen + (i,), ncost, nprob)
            children.append((incremental, kind_rank.get(a.kind, 99), i, child))
        children.sort(key=lambda c: (c[0], c[1], c[2]))
        for c in reversed(children):  # best child on top of the stack
            stack.append(c[3])
    raise NoPlan("no ordering of the action multiset survives the preconditions")


def plan_to_behaviors(actions, by_obj):
    out = []
    for a in actions:
        if a.kind == "move":
            out.append(Struct("move", (Atom(a.target),)))
        elif a.kind == "take":
            out.append(Struct("take", (Atom(a.target),)))
        elif a.kind == "search":
            out.append(Struct("find", (Atom("user"),)))
        elif a.kind == "deliver":
            ob = by_obj[a.obj]
            dest = "user" if ob.kind == "client" else ob.target
            out.append(Struct("deliver", (Atom(a.target), Atom(dest))))
    return out


# ---------------------------------------------------------------------------
# the general-purpose dispatcher


def gpsr_interpret(utterance):
    """Translate a structured command into the behavior sequence that is its
    meaning; composite commands concatenate."""
    if isinstance(utterance, ListTerm):
        out = []
        for u in utterance.items:
            out.extend(gpsr_interpret(u))
        return out
    if isinstance(utterance, Struct) and utterance.functor == "and":
        return [b for u in utterance.args for b in gpsr_interpret(u)]
    if isinstance(utterance, Struct) and utterance.functor == "bring" \
            and len(utterance.args) == 1:
        obj = utterance.args[0]
        return [Atom("acknowledge"), Struct("grasp", (obj,)),
                parse_term("find(user)"), Struct("deliver", (obj, Atom("user")))]
    if isinstance(utterance, Struct) and utterance.functor == "place" \
            and len(utterance.args) == 2:
        obj, shelf = utterance.args
        return [Atom("acknowledge"), Struct("grasp", (obj,)),
                Struct("move", (shelf,)), Struct("deliver", (obj, shelf))]
    raise UnknownCommand(print_term(utterance))


@dataclass
class CycleState:
    previous_shelves: list = field(default_factory=list)
    objects_placed: set = field(default_factory=set)
    pending: list = field(default_factory=list)
    count: int = 0


class Dispatcher:
    """Executes behavior lists one at a time against the runtime, invoking
    recovery protocols on known failures and the inference cycle when a
    sighting fails."""

    RECOVERIES = {"path_blocked": "recovery_blocked_path.sit",
                  "door_closed": "recovery_closed_door.sit"}

    def __init__(self, runtime):
        self.rt = runtime
        self.cycles = CycleState()
        self.substituted = {}  # failed object -> delivered stand-in

    # -- helpers -------------------------------------------------------------

    def _record(self, behavior, status, **extra):
        self.rt.record.add("behavior", name=behavior, status=status, **extra)

    def _obj_name(self, term):
        return term.name if isinstance(term, Atom) else str(term)

    # -- public --------------------------------------------------------------

    def run_command(self, utterance):
        behaviors = gpsr_interpret(utterance)
        self.rt.record.add("command", term=print_term(utterance),
                           behaviors=[print_term(b) for b in behaviors])
        try:
            self._run_list(behaviors)
            return "done"
        except GiveUp as err:
            self.rt.record.add("give_up", reason=str(err))
            return "gave_up"

    # -- execution -------------------------------------------------------------

    def _run_list(self, behaviors):
        queue = list(behaviors)
        while queue:
            b = queue.pop(0)
            name = b.name if isinstance(b, Atom) else b.functor
            args = [] if isinstance(b, Atom) else list(b.args)
            if name == "acknowledge":
                self.rt.say("Ok.")
                self._record("acknowledge", "ok")
            elif name == "grasp":
                obj = self._obj_name(args[0])
                shelf = kbmod.believed_value(self.rt.kb, obj, "loc")
                if shelf is None:
                    raise GiveUp(f"no believed location for {obj}")
                shelf = shelf.name
                self._record("kb_get_shelf_of_object", "ok", object=obj, shelf=shelf)
                queue[0:0] = [Struct("move", (Atom(shelf),)),
                              Struct("find", (args[0],)),
                              Struct("take", (args[0],))]
            elif name == "move":
                self._move(args[0].name)
            elif name == "find":
                target = self._obj_name(args[0])
                if target == "user":
                    self.rt.world, self.rt.kb, res = worldmod.behavior_find(
                        self.rt.world, self.rt.kb, "user")
                    self._record("find", res.status, target="user")
                else:
                    if target in self.rt.world.delivered or target in self.substituted:
                        self._record("find", "skipped", target=target,
                                     note="already handled")
                        continue
                    self.rt.world, self.rt.kb, res = worldmod.behavior_find(
                        self.rt.world, self.rt.kb, target)
                    self._record("find", res.status, target=target)
                    if res.status == "not_found":
                        here = self.rt.world.robot_at
                        seen = self.rt.world.shelf_contents(here) \
                            if here in self.rt.world.shelves else []
                        listing = " and the ".join(seen) if seen else "nothing"
                        self.rt.say(f"I see the {listing} but I don't see "
                                    f"the {target}."
                                    if seen else
                                    f"I see nothing but I don't see the {target}.")
                        self._enter_cycle(target)
            elif name == "take":
                obj = self._obj_name(args[0])
                if obj in self.rt.world.delivered or obj in self.substituted:
                    self._record("take", "skipped", object=obj,
                                 note="already handled")
                    continue
                self._take(obj, is_goal=True)
            elif name == "deliver":
                obj = self._obj_name(args[0])
                dest = self._obj_name(args[1]) if len(args) > 1 else "user"
                if obj in self.rt.world.delivered or obj in self.substituted:
                    self._record("deliver", "skipped", object=obj,
                                 note="already handled")
                    continue
                self.rt.world, self.rt.kb, res = worldmod.behavior_deliver(
                    self.rt.world, self.rt.kb, obj, dest)
                self._record("deliver", res.status, object=obj, to=dest)
                if not res.ok:
                    raise GiveUp(f"deliver({obj}) failed: {res.status}")
            else:
                raise UnknownCommand(name)

    def _move(self, target):
        for attempt in (1, 2):
            self.rt.world, res = worldmod.behavior_move(self.rt.world, target)
            self._record("move", res.status, target=target)
            if res.ok:
                return
            if res.status in self.RECOVERIES and attempt == 1:
                if not self._recover(res.status):
                    raise GiveUp(f"recovery for {res.status} failed")
                continue
            raise GiveUp(f"move({target}) failed: {res.status}")

    def _recover(self, error_kind):
        outcome = self.rt.run_recovery(self.RECOVERIES[error_kind])
        self.rt.record.add("recovery", error=error_kind, outcome=outcome)
        return outcome == "fs_ok"

    def _take(self, obj, is_goal):
        self.rt.world, self.rt.kb, res, obs = worldmod.behavior_take(
            self.rt.world, self.rt.kb, obj)
        self._record("take", res.status, object=obj,
                     hand=res.payload if res.ok else None)
        if res.ok:
            if res.payload:
                self.rt.say(f"Attempting to grab the {obj} with my "
                            f"{res.payload} arm.")
                self.rt.say(f"I took the {obj}.")
            return True
        if res.status == "not_found" and is_goal:
            self.rt.say(f"The {obj} is not in {self.rt.shelf_name(obs.shelf)}.")
            self._enter_cycle(obj, obs)
            return False
        raise GiveUp(f"take({obj}) failed: {res.status}")

    # -- the daily-life inference cycle ---------------------------------------

    def _enter_cycle(self, sought, obs=None):
        if obs is None:
            obs = worldmod.observe(self.rt.world, self.rt.kb, self.rt.world.robot_at)
        outcome = self._cycle(sought, obs)
        if outcome == "ran_out":
            self._offer_substitute(sought)

    def _cycle(self, sought, obs):
        self.cycles.count += 1
        n = self.cycles.count
        self.rt.record.add("inference_cycle", n=n, goal=sought, shelf=obs.shelf)
        if obs.shelf not in [s for s, _ in self.cycles.previous_shelves]:
            self.cycles.previous_shelves.append((obs.shelf, list(obs.present)))
        try:
            self.rt.kb, diag = diagnose(self.rt.world, self.rt.kb, sought, obs,
                                        self.cycles.previous_shelves, self.rt.rng)
        except NoUnseenShelves:
            self.rt.record.add("diagnosis", n=n, conclusion="ran_out",
                               object=sought)
            return "ran_out"
        self.rt.record.add("diagnosis", n=n, **diag.to_record())
        self.rt.say(f"I believe the {sought} was placed on "
                    f"{self.rt.shelf_name(diag.assignments[sought])}.")
        self.rt.notify_manager(obs)

        pending = self._pending_obligations(obs)
        to = Obligation("client", sought, diag.assignments[sought], "client", 0)
        route = self.rt.route()
        decisions = decide(to, pending, self.rt.cost_model, route=route)
        self.rt.record.add("decision", n=n,
                           chosen=[ob.obj for ob in decisions],
                           pending=[ob.obj for ob in pending])
        actions = plan(decisions, self.rt.cost_model, route)
        by_obj = {ob.obj: ob for ob in decisions}
        self.rt.record.add("plan", n=n,
                           actions=[print_term(t) for t in
                                    plan_to_behaviors(actions, by_obj)])
        return self._execute_plan(actions, by_obj, sought)

    def _pending_obligations(self, obs):
        out = []
        decl = 1
        for o in obs.misplaced:
            if o in self.cycles.objects_placed or o in self.rt.world.holding():
                continue
            home = class_shelf_of(self.rt.world, self.rt.kb, o)
            if home and home != obs.shelf:
                out.append(Obligation("restore", o, obs.shelf, home, decl))
                decl += 1
        out.extend(self.cycles.pending)
        self.cycles.pending = []
        return out

    def _execute_plan(self, actions, by_obj, sought):
        for a in actions:
            if a.kind == "move":
                self._move(a.target)
            elif a.kind == "search":
                self.rt.world, self.rt.kb, res = worldmod.behavior_find(
                    self.rt.world, self.rt.kb, "user")
                self._record("find", res.status, target="user")
            elif a.kind == "take":
                obj = a.target
                self.rt.world, self.rt.kb, res, obs = worldmod.behavior_take(
                    self.rt.world, self.rt.kb, obj)
                self._record("take", res.status, object=obj,
                             hand=res.payload if res.ok else None)
                if res.ok:
                    self.rt.say(f"Attempting to grab the {obj} with my "
                                f"{res.payload} arm.")
                    self.rt.say(f"I took the {obj}.")
                elif res.status == "not_found" and obj == sought:
                    self.rt.say(f"The {obj} is not in "
                                f"{self.rt.shelf_name(obs.shelf)}.")
                    # recur with the current Previous_Shelves and placements
                    return self._cycle(sought, obs)
                elif res.status == "not_found":
                    self.rt.record.add("obligation_dropped", object=obj)
                    self.cycles.pending = [ob for ob in self.cycles.pending
                                           if ob.obj != obj]
                else:
                    raise GiveUp(f"take({obj}) failed: {res.status}")
            elif a.kind == "deliver":
                ob = by_obj[a.obj]
                dest = "user" if ob.kind == "client" else ob.target
                self.rt.world, self.rt.kb, res = worldmod.behavior_deliver(
                    self.rt.world, self.rt.kb, a.target, dest)
                self._record("deliver", res.status, object=a.target, to=dest)
                if not res.ok:
                    if ob.kind == "restore":
                        self.rt.record.add("obligation_dropped", object=a.target)
                        continue
                    raise GiveUp(f"deliver({a.target}) failed: {res.status}")
                if ob.kind == "restore":
                    self.cycles.objects_placed.add(a.target)
                    self.rt.say(f"I put the {a.target} in its right shelf.")
                else:
                    self.rt.say(f"Here is the {a.target}.")
        return "delivered"

    def _offer_substitute(self, sought):
        self.rt.record.add("run_out", object=sought)
        self.rt.say(f"I am sorry, it seems we have run out of {sought}.")
        substitute = self._substitute_for(sought)
        if substitute is None:
            raise GiveUp(f"ran out of {sought}, no substitute available")
        reply = self.rt.ask(f"Would you like a {substitute} instead?",
                            [Atom("yes"), Atom("no")])
        self.rt.record.add("substitute_offer", object=sought,
                           substitute=substitute,
                           accepted=reply == Atom("yes"))
        if reply != Atom("yes"):
            raise GiveUp(f"ran out of {sought}, substitute declined")
        self.substituted[sought] = substitute
        self._run_list([Struct("grasp", (Atom(substitute),)),
                        parse_term("find(user)"),
                        Struct("deliver", (Atom(substitute), Atom("user")))])
        self.rt.say("Here it is. You are welcome.")

    def _substitute_for(self, sought):
        kb = self.rt.kb
        if not kb.is_individual(sought):
            return None
        cls = kb.owner_of[sought]
        for other in kbmod.extension_of(kb, "class", cls):
            if other == sought:
                continue
            loc = kbmod.believed_value(kb, other, "loc")
            if loc is not None and loc.name in self.rt.world.shelves:
                return other
        return None
