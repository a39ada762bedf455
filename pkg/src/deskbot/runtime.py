"""Shared scenario runtime: the run record, the speech transcript, and the
user-function sets wired into the dialogue-model engine."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources

from .inference import RouteContext
from .sitlog import Engine, get_last_transition, load_program
from .terms import Atom, print_term


def asset_text(name):
    return resources.files("deskbot").joinpath("assets").joinpath(name).read_text()


@dataclass
class RunRecord:
    """Ordered event log of one scenario run, dumped as JSON lines."""

    events: list = field(default_factory=list)

    def add(self, event, **fields):
        row = {"event": event}
        row.update(fields)
        self.events.append(row)
        return row

    def say(self, text):
        return self.add("say", text=text)

    def reply(self, term):
        return self.add("reply", term=print_term(term))

    def of(self, event):
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self):
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.events) + "\n"

    def transcript(self):
        out = []
        for e in self.events:
            if e["event"] == "say":
                out.append(("robot", e["text"]))
            elif e["event"] == "reply":
                out.append(("user", e["term"]))
        return out


class RecordingInput:
    """Wraps an input source so every consumed reply lands in the record."""

    def __init__(self, inner, record):
        self.inner = inner
        self.record = record

    def next(self, sit_type, expectations):
        term = self.inner.next(sit_type, expectations)
        self.record.reply(term)
        return term


@dataclass
class ScenarioRuntime:
    """Mutable holder threading the world, the KB and the record through
    dialogue models, behaviors and the inference cycle."""

    scenario: object
    world: object
    kb: object
    cost_model: object = None
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    replies: object = None
    record: RunRecord = field(default_factory=RunRecord)
    engine: object = None
    scratch: dict = field(default_factory=dict)
    outcome: str = None

    def say(self, text):
        self.record.say(text)

    def pose(self, text):
        """A robot turn that requires an answer (for transaction balance)."""
        self.record.add("question", text=text)
        self.record.say(text)

    def ask(self, text, expected):
        self.pose(text)
        return self.replies.next("speech", expected)

    def shelf_name(self, shelf):
        from .kb import believed_value
        name = believed_value(self.kb, shelf, "name") \
            if self.kb.is_individual(shelf) else None
        return name.name if name is not None else f"the {shelf}"

    def route(self):
        w = self.world
        return RouteContext(distance=w.distance, start=w.robot_at,
                            user_loc=w.user_at)

    def notify_manager(self, obs):
        self.record.add("notify", to="manager", shelf=obs.shelf,
                        missing=list(obs.missing), misplaced=list(obs.misplaced))

    def run_recovery(self, asset_name):
        program = load_program(asset_text(asset_name))
        depth = len(self.engine.stack) if self.engine else 1
        history = self.engine.history if self.engine else []
        sub = Engine(program,
                     functions={"pose_line": lambda eng, args: self.pose(args[0].name)},
                     input_source=self.replies,
                     history=history, depth_offset=depth)
        result = sub.run(Atom("start"))
        return result.history[-1].situation.name


def demo_functions():
    """User functions of the bundled demo program: f tests the pipe against
    the local day variable, g reports the last grounded transition, h picks
    the next situation."""

    def f(engine, args):
        x = args[0]
        return Atom("ok") if x == engine.get_var("day") else Atom("not ok")

    def g(engine, args):
        return get_last_transition(engine.history)

    def h(engine, args):
        x, y = args
        return Atom("is") if x == y else Atom("rs")

    return {"f": f, "g": g, "h": h}


def run_scenario(text, base_dir=None, seed=None, interactive=False,
                 overrides=None):
    """Load a scenario file and run its program end to end; returns the
    runtime (record, final world and KB) and the engine's run result."""
    from pathlib import Path

    from .flows import FUNCTION_SETS
    from .inference import load_cost_model
    from .kb import load_kb
    from .sitlog import InteractiveInput, ScriptInput
    from .world import load_scenario

    overrides = overrides or {}

    def read(name, kind=None):
        if kind in overrides:
            return overrides[kind]
        if base_dir is not None:
            p = Path(base_dir) / name
            if p.exists():
                return p.read_text()
        return asset_text(name)

    scn = load_scenario(text)
    record = RunRecord()
    inner = InteractiveInput() if interactive else ScriptInput(scn.replies)
    replies = RecordingInput(inner, record)
    rt = ScenarioRuntime(
        scenario=scn,
        world=scn.world,
        kb=load_kb(read(scn.kb_path, "kb")) if scn.kb_path else None,
        cost_model=load_cost_model(read(scn.cost_model_path, "cost_model"))
        if scn.cost_model_path else None,
        rng=random.Random(scn.seed if seed is None else seed),
        replies=replies,
        record=record,
    )
    if "user_name" in scn.raw:
        rt.scratch["user_name"] = scn.raw["user_name"].name
    if scn.program_path is None:
        raise ValueError("scenario names no program")
    program = load_program(read(scn.program_path, "program"))
    if scn.user_functions == "demo" or scn.user_functions is None:
        functions = demo_functions()
    else:
        functions = FUNCTION_SETS[scn.user_functions](rt)
    engine = Engine(program, functions=functions, input_source=replies,
                    services=rt)
    rt.engine = engine
    result = engine.run(scn.initial_pipe)
    if rt.outcome is None:
        rt.outcome = "done"
    return rt, result
