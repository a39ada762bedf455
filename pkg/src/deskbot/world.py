"""Simulated rooms, shelves and objects, and the robot behavior library.

The world is a value: every behavior returns a fresh state plus a result
whose status is drawn from the behavior's error catalog (never an
exception).  Seeing a shelf reconciles the KB with the observation: missing
objects get their location exception asserted, misplaced objects get marked,
and every observed object's ``last_seen`` is refreshed; the emitted
notifications report exactly the updates that were new.

Scenario files are a single list of ``key ==> value`` pairs; they carry the
rooms, shelves (with their designated class), the symmetric distance matrix,
the ground-truth placements, the reply script, optional error injections
``inject(Step, Behavior, Kind)`` and the rng seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import kb as kbmod
from .terms import Atom, ListTerm, Num, Struct, parse_term, print_term


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class Result:
    status: str  # "ok" or an error kind
    payload: object = None

    @property
    def ok(self):
        return self.status == "ok"


OK = Result("ok")


@dataclass(frozen=True)
class Observation:
    shelf: str
    present: tuple      # P: objects seen on the shelf
    unseen: tuple       # Q: believed here but not seen
    misplaced: tuple    # M: seen here but of another shelf's class
    missing: tuple      # Q minus the objects already believed misplaced elsewhere


@dataclass(frozen=True)
class WorldState:
    rooms: tuple
    points: tuple               # non-room, non-shelf locations
    shelves: dict               # shelf id -> designated class
    placement: dict             # object -> shelf id
    robot_at: str
    user_at: str
    left_hand: str | None = None
    right_hand: str | None = None
    delivered: dict = field(default_factory=dict)  # object -> recipient
    distances: dict = field(default_factory=dict)
    hand_order: tuple = ("right", "left")
    hand_sequence: tuple = ()   # optional per-take hand preference overrides
    hand_index: int = 0
    injections: tuple = ()      # (step index, behavior, error kind)
    noise: tuple = ()           # (step index, object): see misses the object
    behavior_count: int = 0

    # -- geometry -----------------------------------------------------------

    @property
    def locations(self):
        return set(self.rooms) | set(self.points) | set(self.shelves)

    def distance(self, a, b):
        if a == b:
            return 0
        if (a, b) in self.distances:
            return self.distances[(a, b)]
        if (b, a) in self.distances:
            return self.distances[(b, a)]
        raise ScenarioError(f"no distance between {a} and {b}")

    # -- bookkeeping ---------------------------------------------------------

    def objects(self):
        out = set(self.placement) | set(self.delivered)
        out |= {h for h in (self.left_hand, self.right_hand) if h}
        return out

    def shelf_contents(self, shelf):
        return sorted(o for o, s in self.placement.items() if s == shelf)

    def holding(self):
        return [h for h in (self.right_hand, self.left_hand) if h]

    def check_conservation(self):
        places = []
        for o in self.objects():
            spots = []
            if o in self.placement:
                spots.append("shelf")
            if o == self.left_hand:
                spots.append("left")
            if o == self.right_hand:
                spots.append("right")
            if o in self.delivered:
                spots.append("delivered")
            places.append((o, spots))
            assert len(spots) == 1, f"{o} is in {spots}"
        return places

    def _tick(self, behavior):
        w = replace(self, behavior_count=self.behavior_count + 1)
        for step, name, kind in self.injections:
            if step == w.behavior_count and name == behavior:
                return w, Result(kind)
        return w, None


# ---------------------------------------------------------------------------
# behaviors


def behavior_move(w, target):
    w, injected = w._tick("move")
    if injected:
        return w, injected
    if target not in w.locations:
        return w, Result("unknown_location")
    if target == w.robot_at:
        return w, OK
    return replace(w, robot_at=target), OK


def _class_chain_of(kb, obj):
    if not kb.is_individual(obj):
        return []
    return kb.class_chain(kb.owner_of[obj])


def _believed_at(kb, w, shelf):
    # beliefs range over the KB's individuals, not the ground truth: an
    # object can be believed here while absent from the world entirely
    held = set(w.holding()) | set(w.delivered)
    out = []
    for o in sorted(kb.owner_of):
        if o in held:
            continue  # the robot knows what it holds and what it handed over
        if kbmod.believed_value(kb, o, "loc") == Atom(shelf):
            out.append(o)
    return out


def observe(w, kb, shelf, step=None):
    """Compute the observation sets for a shelf without KB side effects.
    ``step`` applies the scenario's false-negative noise for that tick."""
    present = tuple(w.shelf_contents(shelf))
    if step is not None:
        hidden = {o for s, o in w.noise if s == step}
        present = tuple(o for o in present if o not in hidden)
    believed = _believed_at(kb, w, shelf)
    unseen = tuple(o for o in believed if o not in present)
    cls = w.shelves[shelf]
    misplaced = tuple(o for o in present if cls not in _class_chain_of(kb, o))
    kb_misplaced = [o for o in sorted(kb.owner_of)
                    if cls in _class_chain_of(kb, o)
                    and kbmod.ask(kb, o, kbmod.Literal(True, "misplaced")) == "yes"]
    missing = tuple(o for o in unseen if o not in kb_misplaced)
    return Observation(shelf, present, unseen, misplaced, missing)


def behavior_see(w, kb, shelf=None):
    """Inspect the whole shelf at the robot's location; reconcile the KB
    (location exceptions for missing objects, misplaced marks, last_seen)
    and return the new notifications."""
    w, injected = w._tick("see")
    if injected:
        return w, kb, None, injected, []
    shelf = shelf or w.robot_at
    if shelf not in w.shelves:
        return w, kb, None, Result("not_a_shelf"), []
    obs = observe(w, kb, shelf)
    notifications = []
    for o in obs.missing:
        exc = kbmod.Literal(False, "loc", Atom(shelf))
        if kbmod.ask(kb, o, exc) != "yes":
            kb = kbmod.update_kb(kb, "assert_clause",
                                 f"clause({o}, [not(loc=>{shelf}),0])")
            notifications.append(Struct("missing", (Atom(o), Atom(shelf))))
    for o in obs.misplaced:
        if kbmod.ask(kb, o, kbmod.Literal(True, "misplaced")) != "yes":
            kb = kbmod.update_kb(kb, "assert_clause", f"clause({o}, [misplaced,0])")
            notifications.append(Struct("misplaced", (Atom(o), Atom(shelf))))
    for o in obs.present:
        if kbmod.believed_value(kb, o, "last_seen") != Atom(shelf) \
                and kb.is_individual(o):
            kb = kbmod.update_kb(kb, "set_value", f"value({o}, last_seen, {shelf})")
    return w, kb, obs, OK, notifications


def behavior_take(w, kb, obj):
    """Grasp an object off the shelf at the robot's location.  The embedded
    see reconciles the KB first; a failed sighting is the not_found status
    that triggers the inference cycle."""
    w, injected = w._tick("take")
    if injected:
        return w, kb, injected, None
    if w.robot_at not in w.shelves:
        return w, kb, Result("not_a_shelf"), None
    w, kb, obs, res, _notes = behavior_see(w, kb)
    if not res.ok:
        return w, kb, res, obs
    if obj not in obs.present:
        return w, kb, Result("not_found", obs), obs
    order = list(w.hand_order)
    if w.hand_index < len(w.hand_sequence):
        preferred = w.hand_sequence[w.hand_index]
        order = [preferred] + [h for h in order if h != preferred]
    free = [h for h in order if getattr(w, f"{h}_hand") is None]
    if not free:
        return w, kb, Result("hands_full"), obs
    hand = free[0]
    placement = dict(w.placement)
    placement.pop(obj)
    w = replace(w, placement=placement, hand_index=w.hand_index + 1,
                **{f"{hand}_hand": obj})
    return w, kb, Result("ok", hand), obs


def behavior_deliver(w, kb, obj, recipient):
    """Hand an object over to the user or place it on a shelf; placing also
    squares the KB with the new location."""
    w, injected = w._tick("deliver")
    if injected:
        return w, kb, injected
    hand = "left" if w.left_hand == obj else "right" if w.right_hand == obj else None
    if hand is None:
        return w, kb, Result("not_held")
    if recipient == "user":
        if w.robot_at != w.user_at:
            return w, kb, Result("wrong_location")
        delivered = dict(w.delivered)
        delivered[obj] = "user"
        w = replace(w, delivered=delivered, **{f"{hand}_hand": None})
        if kb.is_individual(obj) and \
                kbmod.ask(kb, obj, kbmod.Literal(True, "misplaced")) == "yes":
            # handed over: it no longer sits misplaced on any shelf
            kb = kbmod.update_kb(kb, "retract_clause",
                                 f"clause({obj}, [misplaced,0])")
        return w, kb, OK
    if recipient in w.shelves:
        if w.robot_at != recipient:
            return w, kb, Result("wrong_location")
        placement = dict(w.placement)
        placement[obj] = recipient
        w = replace(w, placement=placement, **{f"{hand}_hand": None})
        if kb.is_individual(obj):
            exc = kbmod.Literal(False, "loc", Atom(recipient))
            if kbmod.ask(kb, obj, exc) == "yes":
                kb = kbmod.update_kb(kb, "retract_clause",
                                     f"clause({obj}, [not(loc=>{recipient}),0])")
            if kbmod.ask(kb, obj, kbmod.Literal(True, "misplaced")) == "yes":
                kb = kbmod.update_kb(kb, "retract_clause",
                                     f"clause({obj}, [misplaced,0])")
            kb = kbmod.update_kb(kb, "set_value",
                                 f"value({obj}, last_seen, {recipient})")
        return w, kb, OK
    return w, kb, Result("unknown_recipient")


def behavior_find(w, kb, target):
    """Search: for the user, walk to where they are; for an object, check the
    shelf the robot is looking at."""
    w, injected = w._tick("find")
    if injected:
        return w, kb, injected
    if target == "user":
        w2, res = behavior_move(w, w.user_at)
        if not res.ok:
            return w2, kb, res
        return w2, kb, Result("ok", w.user_at)
    if w.robot_at in w.shelves and target in w.shelf_contents(w.robot_at):
        return w, kb, Result("ok", w.robot_at)
    return w, kb, Result("not_found")


# ---------------------------------------------------------------------------
# scenario files


@dataclass
class Scenario:
    name: str
    kb_path: str | None
    program_path: str | None
    cost_model_path: str | None
    seed: int
    world: WorldState | None
    replies: list
    initial_pipe: object
    elicit: list
    user_functions: str | None
    raw: dict


def _pairs(term):
    if not isinstance(term, ListTerm):
        raise ScenarioError("a scenario file is a single list of key ==> value pairs")
    out = {}
    for item in term.items:
        if not (isinstance(item, Struct) and item.functor == "==>"
                and isinstance(item.args[0], Atom)):
            raise ScenarioError(f"bad scenario entry: {print_term(item)}")
        out[item.args[0].name] = item.args[1]
    return out


def _names(t):
    return [x.name for x in t.items] if t is not None else []


def load_scenario(text):
    data = _pairs(parse_term(text))
    shelves = {}
    for s in _names_structs(data.get("shelves")):
        shelves[s.args[0].name] = s.args[1].name
    distances = {}
    for d in _names_structs(data.get("distances")):
        a, b, n = d.args
        distances[(a.name, b.name)] = n.value
    placement = {}
    for at in _names_structs(data.get("objects")):
        placement[at.args[0].name] = at.args[1].name
    injections = tuple(
        (i.args[0].value, i.args[1].name, i.args[2].name)
        for i in _names_structs(data.get("errors")))
    world = None
    if shelves:
        start = data.get("start", Atom("welcome_point")).name
        world = WorldState(
            rooms=tuple(_names(data.get("rooms"))),
            points=tuple(_names(data.get("points"))) or (start,),
            shelves=shelves,
            placement=placement,
            robot_at=start,
            user_at=data["user_at"].name if "user_at" in data else start,
            distances=distances,
            hand_order=tuple(_names(data.get("hand_order"))) or ("right", "left"),
            hand_sequence=tuple(_names(data.get("hand_sequence"))),
            injections=injections,
        )
        for obj, shelf in placement.items():
            if shelf not in shelves:
                raise ScenarioError(f"{obj} placed on unknown shelf {shelf}")
    return Scenario(
        name=data.get("scenario", Atom("unnamed")).name,
        kb_path=data["kb"].name if "kb" in data else None,
        program_path=data["program"].name if "program" in data else None,
        cost_model_path=data["cost_model"].name if "cost_model" in data else None,
        seed=data.get("seed", Num(0)).value,
        world=world,
        replies=list(data.get("replies", ListTerm(())).items),
        initial_pipe=data.get("pipe", Atom("start")),
        elicit=_names(data.get("elicit")),
        user_functions=data["user_functions"].name if "user_functions" in data else None,
        raw=data,
    )


def _names_structs(t):
    if t is None:
        return []
    if not isinstance(t, ListTerm):
        raise ScenarioError(f"expected a list, got {print_term(t)}")
    return list(t.items)
