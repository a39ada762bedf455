"""Preference-driven workflows: pairwise preference elicitation, order
resolution against preferred class members, fetching along preferred
locations with last_seen promotion, and the post-delivery pass that confirms
location preferences, explains misplaced objects and relocates them.

The workflows exist twice at different granularities: as standalone
operations driven by an ask-channel (unit-testable in isolation), and as the
user-function sets behind the shipped dialogue models, which consume the
user's replies through the interpreter's expectations.  Both share the same
decision helpers, so they cannot drift apart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import kb as kbmod
from . import world as worldmod
from .inference import Dispatcher, GiveUp
from .terms import Atom, Struct, print_term


class FlowError(Exception):
    pass


class UnresolvableRequest(FlowError):
    pass


class NotFoundAnywhere(FlowError):
    pass


# ---------------------------------------------------------------------------
# shared decision helpers


def location_names(kb, obj, known=()):
    return [v.name for v in kbmod.preferred_value_list(kb, obj, "loc", known)]


def location_sequence(kb, obj, known=()):
    """Raw fired values of loc, duplicates kept: position one is where the
    object was last seen (when known), position two its predefined place."""
    return [v.name for v in kbmod.preferred_value_sequence(kb, obj, "loc", known)]


def predefined_location(kb, obj):
    seq = location_sequence(kb, obj)
    if len(seq) >= 2:
        return seq[1]
    return seq[0] if seq else None


def class_members(kb, cls):
    return kb.individuals_of(cls)  # declaration order


def pair_schedule(items):
    """Round-robin over unordered pairs in declaration order."""
    return list(itertools.combinations(items, 2))


def preference_weights(items, wins):
    """Weights by win count, ties resolved by declaration order."""
    ranked = sorted(items, key=lambda it: (-wins.get(it, 0), items.index(it)))
    return {it: n + 1 for n, it in enumerate(ranked)}


def commit_preferences(kb, cls, weights):
    for item, w in weights.items():
        kb = kbmod.update_kb(kb, "assert_clause",
                             f"clause({cls}, ['-'=>>to_serve=>{item},{w}])")
    return kb


def resolve_request(kb, requested):
    """Classify one order request: a class resolves to its preferred member,
    an object that is not the preferred member of its class triggers a
    confirmation."""
    if kb.is_class(requested):
        pref = kbmod.preferred_value(kb, requested, "to_serve")
        if pref is None:
            raise UnresolvableRequest(f"no preference recorded for class {requested}")
        return ("class_pref", requested, pref.name)
    if kb.is_individual(requested):
        cls = kb.owner_of[requested]
        pref = kbmod.preferred_value(kb, cls, "to_serve")
        if pref is None or pref.name == requested:
            return ("accept", requested, requested)
        return ("switch", requested, pref.name)
    raise UnresolvableRequest(requested)


def is_comestible(kb, requested):
    chain = kb.class_chain(requested) if kb.is_class(requested) else \
        kb.class_chain(kb.owner_of[requested]) if kb.is_individual(requested) else []
    return "comestible" in chain


@dataclass
class OrderItem:
    requested: str
    resolved: str
    source: str  # direct | preferred | confirmed-switch


@dataclass
class FetchEntry:
    obj: str
    location_order: list
    found_at: str = None


# ---------------------------------------------------------------------------
# standalone operations (ask-channel driven)


def elicit_preferences(kb, agenda, channel):
    """Pairwise elicitation: for each class in the agenda, every unordered
    pair of members is asked once and the answers become weighted to_serve
    defaults on the class."""
    for cls in agenda:
        items = class_members(kb, cls)
        if not items:
            continue
        wins = {it: 0 for it in items}
        for a, b in pair_schedule(items):
            reply = channel.ask(
                f"Please tell me what do you like best: {a} or {b}?",
                [Struct("prefers", (Atom(a),)), Struct("prefers", (Atom(b),))])
            winner = reply.args[0].name
            if winner not in (a, b):
                raise FlowError(f"unexpected preference reply {print_term(reply)}")
            wins[winner] += 1
            channel.say("Great! I will recall your choice!")
        kb = commit_preferences(kb, cls, preference_weights(items, wins))
    return kb


def build_final_list(requests, kb, channel):
    """Resolve each request into the final list of objects to fetch."""
    final = []
    for req in requests:
        kind, requested, pref = resolve_request(kb, req)
        if kind == "class_pref":
            reply = channel.ask(
                f"Ok. I will bring you the {pref}, your favorite {requested}.",
                [Atom("yes"), Atom("no")])
            if reply == Atom("yes"):
                final.append(OrderItem(requested, pref, "preferred"))
        elif kind == "accept":
            final.append(OrderItem(requested, requested, "direct"))
        else:
            reply = channel.ask(
                f"But you like the {pref} better than the {requested}! "
                f"Shall I bring you the {requested}?",
                [Atom("yes"), Atom("no")])
            if reply == Atom("yes"):
                final.append(OrderItem(requested, requested, "direct"))
            else:
                final.append(OrderItem(requested, pref, "confirmed-switch"))
    return final


def _move(rt, target):
    for attempt in (1, 2):
        rt.world, res = worldmod.behavior_move(rt.world, target)
        rt.record.add("behavior", name="move", status=res.status, target=target)
        if res.ok:
            return
        if attempt == 1 and res.status in Dispatcher.RECOVERIES:
            outcome = rt.run_recovery(Dispatcher.RECOVERIES[res.status])
            rt.record.add("recovery", error=res.status, outcome=outcome)
            if outcome == "fs_ok":
                continue
        raise GiveUp(f"move({target}) failed: {res.status}")


def _see_here(rt, sought=None):
    rt.world, rt.kb, obs, res, notes = worldmod.behavior_see(rt.world, rt.kb)
    rt.record.add("observation", shelf=obs.shelf, present=list(obs.present),
                  missing=list(obs.missing), misplaced=list(obs.misplaced),
                  notifications=[print_term(n) for n in notes])
    rt.scratch.setdefault("observed", set()).update(obs.present)
    return obs


def _take_here(rt, obj):
    rt.world, rt.kb, res, _obs = worldmod.behavior_take(rt.world, rt.kb, obj)
    rt.record.add("behavior", name="take", status=res.status, object=obj,
                  hand=res.payload if res.ok else None)
    if not res.ok:
        raise GiveUp(f"take({obj}) failed: {res.status}")
    rt.say(f"Attempting to grab the {obj} with my {res.payload} arm.")
    rt.say(f"I took the {obj}.")
    return res.payload


def fetch_items(l_final, rt, user_id="user"):
    """Fetch every resolved object, walking its preferred locations in their
    current order; deliveries happen where the user is inferred to be."""
    entries = []
    queue = list(l_final)
    delivered = []
    while queue or rt.world.holding():
        free = sum(1 for h in ("left", "right")
                   if getattr(rt.world, f"{h}_hand") is None)
        if queue and free > 0:
            item = queue.pop(0)
            rt.say(f"I will get the {item.resolved}.")
            entry = _seek_and_grab(rt, item.resolved)
            entries.append(entry)
        else:
            delivered.extend(_deliver_holding(rt, entries, user_id))
    return {"entries": entries, "delivered": delivered,
            "observed": sorted(rt.scratch.get("observed", set())),
            "requested": [i.resolved for i in l_final]}


def _seek_and_grab(rt, obj):
    entry = FetchEntry(obj, location_names(rt.kb, obj))
    visited = []
    while True:
        locs = [l for l in location_names(rt.kb, obj) if l not in visited]
        if not locs:
            raise NotFoundAnywhere(obj)
        loc = locs[0]
        visited.append(loc)
        _move(rt, loc)
        obs = _see_here(rt, obj)
        if obj in obs.present:
            rt.record.add("seek", object=obj, location=loc, found=True)
            hand = _take_here(rt, obj)
            entry.found_at = loc
            rt.scratch.setdefault("loc_act", {})[obj] = loc
            rt.scratch.setdefault("hand_of", {})[obj] = hand
            return entry
        rt.record.add("seek", object=obj, location=loc, found=False)
        rt.say(f"The {obj} is not in {rt.shelf_name(loc)}.")


def _deliver_holding(rt, entries, user_id):
    known = ()
    room = kbmod.preferred_value(rt.kb, user_id, "found_in", known)
    room = room.name if room is not None else rt.world.user_at
    rt.record.add("delivery_room", room=room)
    _move(rt, room)
    out = []
    for hand in ("right", "left"):
        obj = getattr(rt.world, f"{hand}_hand")
        if obj is None:
            continue
        rt.say(f"Here is the {obj}.")
        rt.world, rt.kb, res = worldmod.behavior_deliver(rt.world, rt.kb, obj, "user")
        rt.record.add("behavior", name="deliver", status=res.status,
                      object=obj, to="user")
        if not res.ok:
            raise GiveUp(f"deliver({obj}) failed: {res.status}")
        out.append(obj)
    return out


def reconcile_after_delivery(delivery, rt, channel=None):
    """Confirm changed location preferences for the delivered objects, then
    look at every non-requested object seen on the way: one whose last-seen
    place differs from its predefined place is misplaced; the abduced cause
    is reported and, on consent, the object is put back."""
    channel = channel or rt
    updates = []
    loc_act = rt.scratch.get("loc_act", {})
    for obj in delivery["delivered"]:
        actual = loc_act.get(obj)
        pre = predefined_location(rt.kb, obj)
        if actual is None or pre is None or actual == pre:
            continue
        reply = channel.ask(
            f"I found the {obj} in {rt.shelf_name(actual)} but it should be in "
            f"{rt.shelf_name(pre)}; do you want me to change the preferred "
            f"location of {obj} to {rt.shelf_name(actual)}?",
            [Atom("yes"), Atom("no")])
        if reply == Atom("yes"):
            rt.kb = apply_location_preference(rt.kb, obj, actual)
            rt.record.add("kb_preference_updated", object=obj, location=actual)
            rt.say("Ok. I updated my KB with your new preference.")
            updates.append((obj, actual))
    skip = set(delivery["delivered"]) | set(delivery["requested"])
    for obj in delivery["observed"]:
        if obj in skip:
            continue
        problem = misplacement_check(rt.kb, obj)
        if problem is None:
            continue
        loc_last, loc_2 = problem
        if kbmod.ask(rt.kb, obj, kbmod.Literal(True, "misplaced")) != "yes":
            rt.kb = kbmod.update_kb(rt.kb, "assert_clause",
                                    f"clause({obj}, [misplaced,0])")
        rt.record.add("misplacement", object=obj, seen_at=loc_last, belongs=loc_2)
        rt.say(f"I also noticed that the {obj} is not in its right place.")
        cause = kbmod.abduce(rt.kb, obj, kbmod.Literal(True, "misplaced"))
        mover = cause.antecedents[0].value.name if cause and cause.antecedents else None
        rt.record.add("abduced", object=obj, weight=cause.weight if cause else None,
                      cause=[str(a) for a in cause.antecedents] if cause else [])
        if mover:
            rt.say(f"I think that the explanation for this is that the {obj} "
                   f"was misplaced there by your {mover}.")
        reply = channel.ask("Do you want me to take it to its right shelf?",
                            [Atom("yes"), Atom("no")])
        if reply == Atom("yes"):
            relocate(rt, obj, loc_last, loc_2)
            updates.append((obj, loc_2))
        else:
            rt.record.add("relocation_skipped", object=obj)
    return updates


def misplacement_check(kb, obj):
    """loc_last versus the second entry of the raw location sequence; a
    mismatch means the object sits somewhere it does not belong."""
    last = kbmod.believed_value(kb, obj, "last_seen")
    if last is None:
        return None
    seq = location_sequence(kb, obj)
    if len(seq) < 2:
        return None
    if last.name != seq[1]:
        return (last.name, seq[1])
    return None


def apply_location_preference(kb, obj, location):
    return kbmod.update_kb(kb, "assert_clause",
                           f"clause({obj}, ['-'=>>loc=>{location},1])")


def relocate(rt, obj, source, target):
    rt.say(f"Ok. I will take it to {rt.shelf_name(target)}.")
    _move(rt, source)
    _take_here(rt, obj)
    _move(rt, target)
    rt.world, rt.kb, res = worldmod.behavior_deliver(rt.world, rt.kb, obj, target)
    rt.record.add("behavior", name="deliver", status=res.status,
                  object=obj, to=target)
    if not res.ok:
        raise GiveUp(f"relocation of {obj} failed: {res.status}")
    rt.say(f"I put the {obj} in its right shelf.")
    rt.record.add("relocation", object=obj, to=target)
    _move(rt, rt.world.user_at)


# ---------------------------------------------------------------------------
# the home dialogue-model function set


class HomeTask:
    """Step-wise state behind the home dialogue models; each method is a
    registered user function."""

    def __init__(self, rt):
        self.rt = rt
        self.user = rt.scratch.get("user_id", "user")
        self.user_name = rt.scratch.get("user_name", "there")
        agenda = rt.scenario.elicit if rt.scenario else []
        self.pairs = []
        self.klass_of_pair = []
        self.wins = {}
        self.items_of = {}
        for cls in agenda:
            items = class_members(rt.kb, cls)
            self.items_of[cls] = items
            self.wins[cls] = {it: 0 for it in items}
            for pair in pair_schedule(items):
                self.pairs.append((cls, pair))
        self.pair_idx = 0
        self.committed = set()
        self.current_pair = None
        self.requests = []
        self.current_request = None
        self.l_final = []
        self.queue = []
        self.current_obj = None
        self.visited = []
        self.entries = []
        self.delivered = []
        self.pref_queue = None
        self.misplaced_queue = None
        self.current_issue = None

    # -- greeting and mood ---------------------------------------------------

    def greet_user(self, _args):
        self.rt.say(f"Hi {self.user_name}.")

    def welcome_back(self, _args):
        self.rt.record.add("user_returns")
        self.rt.kb = kbmod.update_kb(self.rt.kb, "assert_clause",
                                     f"clause({self.user}, [back_from_work,0])")
        self.rt.pose(f"Hi {self.user_name}, how was your day?")

    def note_mood(self, args):
        mood = args[0].name
        self.rt.scratch["mood"] = mood
        if mood == "bad_day":
            self.rt.kb = kbmod.update_kb(self.rt.kb, "assert_clause",
                                         f"clause({self.user}, [bad_day,0])")

    def offer_help(self, _args):
        prefix = "Sorry to hear that; " if self.rt.scratch.get("mood") == "bad_day" \
            else "Glad to hear that; "
        self.rt.pose(prefix + "do you want me to do something for you?")

    # -- elicitation -----------------------------------------------------------

    def next_pair(self, _args):
        if self.pair_idx < len(self.pairs):
            self.current_pair = self.pairs[self.pair_idx]
            return Atom("pair_q")
        self._commit_remaining()
        return Atom("wrap_up")

    def _commit_remaining(self):
        for cls, items in self.items_of.items():
            if cls in self.committed or not items:
                continue
            self.rt.kb = commit_preferences(
                self.rt.kb, cls, preference_weights(items, self.wins[cls]))
            self.committed.add(cls)
            self.rt.record.add("preferences_committed", cls=cls,
                               weights=preference_weights(items, self.wins[cls]))

    def ask_pair(self, _args):
        cls, (a, b) = self.current_pair
        self.rt.pose(f"Please tell me what do you like best: {a} or {b}?")

    def record_pref(self, args):
        winner = args[0].name
        cls, pair = self.current_pair
        if winner not in pair:
            raise FlowError(f"{winner} is not one of {pair}")
        self.wins[cls][winner] += 1
        self.pair_idx += 1
        self.rt.say("Great! I will recall your choice!")

    def ask_more(self, _args):
        self.rt.pose("Do you have any more preferences?")

    def thank_user(self, _args):
        self.rt.say(f"Thank you {self.user_name}.")

    # -- order resolution ---------------------------------------------------------

    def take_order(self, args):
        items = args[0]
        self.requests = [t.name for t in items.items]
        self.rt.record.add("order", requests=list(self.requests))
        if any(is_comestible(self.rt.kb, r) for r in self.requests):
            self.rt.kb = kbmod.update_kb(self.rt.kb, "assert_clause",
                                         f"clause({self.user}, [asked_comestible,0])")

    def order_next(self, _args):
        if not self.requests:
            return Atom("done")
        req = self.requests.pop(0)
        kind, requested, pref = resolve_request(self.rt.kb, req)
        self.current_request = (kind, requested, pref)
        if kind == "class_pref":
            self.rt.pose(f"Ok. I will bring you the {pref}, "
                         f"your favorite {requested}.")
            return Atom("offer_pref")
        if kind == "switch":
            self.rt.pose(f"But you like the {pref} better than the {requested}! "
                         f"Shall I bring you the {requested}?")
            return Atom("switch_q")
        return Atom("accept")

    def _add_item(self, item):
        self.l_final.append(item)
        self.rt.record.add("order_resolved", requested=item.requested,
                           resolved=item.resolved, source=item.source)

    def order_confirm(self, _args):
        _kind, requested, pref = self.current_request
        self._add_item(OrderItem(requested, pref, "preferred"))

    def order_decline(self, _args):
        _kind, requested, _pref = self.current_request
        self.rt.record.add("order_declined", requested=requested)

    def order_keep_requested(self, _args):
        _kind, requested, _pref = self.current_request
        self._add_item(OrderItem(requested, requested, "direct"))

    def order_take_preferred(self, _args):
        _kind, requested, pref = self.current_request
        self._add_item(OrderItem(requested, pref, "confirmed-switch"))

    def order_accept(self, _args):
        _kind, requested, _pref = self.current_request
        self._add_item(OrderItem(requested, requested, "direct"))

    def confirm_order(self, _args):
        names = [i.resolved for i in self.l_final]
        listing = " and the ".join(names)
        self.rt.say(f"Ok. I will bring you the {listing}.")
        self.queue = list(self.l_final)

    # -- fetching --------------------------------------------------------------------

    def fetch_next(self, _args):
        free = sum(1 for h in ("left", "right")
                   if getattr(self.rt.world, f"{h}_hand") is None)
        if self.queue and free > 0:
            item = self.queue.pop(0)
            self.current_obj = item.resolved
            self.visited = []
            self.entries.append(FetchEntry(self.current_obj,
                                           location_names(self.rt.kb,
                                                          self.current_obj)))
            self.rt.say(f"I will get the {self.current_obj}.")
            return Atom("seek")
        if self.rt.world.holding():
            return Atom("hand_over")
        return Atom("fs")

    def seek_step(self, _args):
        obj = self.current_obj
        locs = [l for l in location_names(self.rt.kb, obj)
                if l not in self.visited]
        if not locs:
            return Atom("not_anywhere")
        loc = locs[0]
        self.visited.append(loc)
        _move(self.rt, loc)
        obs = _see_here(self.rt, obj)
        if obj in obs.present:
            self.rt.record.add("seek", object=obj, location=loc, found=True)
            return Atom("grab")
        self.rt.record.add("seek", object=obj, location=loc, found=False)
        self.rt.say(f"The {obj} is not in {self.rt.shelf_name(loc)}.")
        return Atom("seek")

    def grab_object(self, _args):
        obj = self.current_obj
        hand = _take_here(self.rt, obj)
        self.entries[-1].found_at = self.rt.world.robot_at
        self.rt.scratch.setdefault("loc_act", {})[obj] = self.rt.world.robot_at
        self.rt.scratch.setdefault("hand_of", {})[obj] = hand

    def report_unfindable(self, _args):
        self.rt.say(f"I could not find the {self.current_obj} anywhere.")
        self.rt.record.add("not_found_anywhere", object=self.current_obj)

    def deliver_order(self, _args):
        self.delivered.extend(_deliver_holding(self.rt, self.entries, self.user))

    # -- tidy up -----------------------------------------------------------------------

    def _delivery_record(self):
        return {"entries": self.entries, "delivered": self.delivered,
                "observed": sorted(self.rt.scratch.get("observed", set())),
                "requested": [i.resolved for i in self.l_final]}

    def tidy_next(self, _args):
        rt = self.rt
        if self.pref_queue is None:
            self.pref_queue = []
            loc_act = rt.scratch.get("loc_act", {})
            for obj in self.delivered:
                actual = loc_act.get(obj)
                pre = predefined_location(rt.kb, obj)
                if actual and pre and actual != pre:
                    self.pref_queue.append((obj, actual, pre))
        if self.pref_queue:
            obj, actual, pre = self.pref_queue[0]
            self.current_issue = ("pref", obj, actual, pre)
            rt.pose(f"I found the {obj} in {rt.shelf_name(actual)} but it "
                    f"should be in {rt.shelf_name(pre)}; do you want me to "
                    f"change the preferred location of {obj} to "
                    f"{rt.shelf_name(actual)}?")
            return Atom("loc_pref_q")
        if self.misplaced_queue is None:
            self.misplaced_queue = []
            skip = set(self.delivered) | {i.resolved for i in self.l_final}
            for obj in sorted(rt.scratch.get("observed", set())):
                if obj in skip:
                    continue
                problem = misplacement_check(rt.kb, obj)
                if problem is not None:
                    self.misplaced_queue.append((obj,) + problem)
        if self.misplaced_queue:
            obj, loc_last, loc_2 = self.misplaced_queue[0]
            self.current_issue = ("misplaced", obj, loc_last, loc_2)
            if kbmod.ask(rt.kb, obj, kbmod.Literal(True, "misplaced")) != "yes":
                rt.kb = kbmod.update_kb(rt.kb, "assert_clause",
                                        f"clause({obj}, [misplaced,0])")
            rt.record.add("misplacement", object=obj, seen_at=loc_last,
                          belongs=loc_2)
            rt.say(f"I also noticed that the {obj} is not in its right place.")
            cause = kbmod.abduce(rt.kb, obj, kbmod.Literal(True, "misplaced"))
            mover = cause.antecedents[0].value.name \
                if cause and cause.antecedents else None
            rt.record.add("abduced", object=obj,
                          weight=cause.weight if cause else None,
                          cause=[str(a) for a in cause.antecedents] if cause else [])
            if mover:
                rt.say(f"I think that the explanation for this is that the "
                       f"{obj} was misplaced there by your {mover}.")
            rt.pose("Do you want me to take it to its right shelf?")
            return Atom("misplaced_q")
        return Atom("fs")

    def update_loc_pref(self, _args):
        _kind, obj, actual, _pre = self.current_issue
        self.rt.kb = apply_location_preference(self.rt.kb, obj, actual)
        self.rt.record.add("kb_preference_updated", object=obj, location=actual)
        self.rt.say("Ok. I updated my KB with your new preference.")
        self.pref_queue.pop(0)

    def keep_loc_pref(self, _args):
        _kind, obj, _actual, _pre = self.current_issue
        self.rt.record.add("preference_kept", object=obj)
        self.pref_queue.pop(0)

    def relocate_object(self, _args):
        _kind, obj, loc_last, loc_2 = self.current_issue
        relocate(self.rt, obj, loc_last, loc_2)
        self.misplaced_queue.pop(0)

    def skip_relocation(self, _args):
        _kind, obj, _a, _b = self.current_issue
        self.rt.record.add("relocation_skipped", object=obj)
        self.misplaced_queue.pop(0)

    def finish_task(self, _args):
        rt = self.rt
        still_misplaced = [o for o in sorted(rt.kb.owner_of)
                           if kbmod.ask(rt.kb, o,
                                        kbmod.Literal(True, "misplaced")) == "yes"]
        if still_misplaced:
            rt.say("Some objects are still out of place.")
        else:
            rt.say("All the objects are placed in their right shelves.")
        rt.say("The task is finished.")
        rt.say("Good bye.")
        rt.outcome = "done"


def home_functions(rt):
    task = HomeTask(rt)
    rt.scratch["home_task"] = task
    names = ["greet_user", "welcome_back", "note_mood", "offer_help",
             "next_pair", "ask_pair", "record_pref", "ask_more", "thank_user",
             "take_order", "order_next", "order_confirm", "order_decline",
             "order_keep_requested", "order_take_preferred", "order_accept",
             "confirm_order", "fetch_next", "seek_step", "grab_object",
             "report_unfindable", "deliver_order", "tidy_next",
             "update_loc_pref", "keep_loc_pref", "relocate_object",
             "skip_relocation", "finish_task"]
    return {name: (lambda eng, args, m=getattr(task, name): m(args))
            for name in names}


# ---------------------------------------------------------------------------
# the supermarket dialogue-model function set


def market_functions(rt):
    dispatcher = Dispatcher(rt)
    rt.scratch["dispatcher"] = dispatcher

    def greet_customer(eng, args):
        rt.pose("Hello! How can I help you?")

    def note_order(eng, args):
        rt.scratch["order"] = args[0]

    def route_order(eng, args):
        obj = rt.scratch["order"].args[0].name
        restricted = kbmod.ask(rt.kb, obj,
                               kbmod.Literal(True, "alcoholic", Atom("yes"))) == "yes"
        return Atom("age_check") if restricted else Atom("serve")

    def ask_age(eng, args):
        rt.pose("May I ask, are you over eighteen?")

    def accept_age(eng, args):
        rt.say("Thank you.")

    def refuse_order(eng, args):
        rt.say("I am sorry, I cannot serve alcoholic drinks to minors.")
        rt.outcome = "refused"

    def execute_order(eng, args):
        rt.outcome = dispatcher.run_command(rt.scratch["order"])

    def route_outcome(eng, args):
        return Atom("done") if rt.outcome == "done" else Atom("failed")

    def close_task(eng, args):
        rt.say("The task is finished. Good bye.")

    def report_failure(eng, args):
        rt.say("I could not complete the task. I am sorry.")

    return {fn.__name__: fn for fn in
            [greet_customer, note_order, route_order, ask_age, accept_age,
             refuse_order, execute_order, route_outcome, close_task,
             report_failure]}


FUNCTION_SETS = {"home": home_functions, "market": market_functions}
