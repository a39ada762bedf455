import random
from pathlib import Path

import pytest

from deskbot.kb import Literal, ask, believed_value, load_kb
from deskbot.terms import Atom, print_term
from deskbot.world import (
    ScenarioError, behavior_deliver, behavior_find, behavior_move,
    behavior_see, behavior_take, load_scenario, observe,
)

ASSETS = Path(__file__).resolve().parents[1] / "src" / "deskbot" / "assets"


@pytest.fixture
def home():
    scn = load_scenario((ASSETS / "scenario_home.scn").read_text())
    kb = load_kb((ASSETS / "kb_home.kb").read_text())
    return scn.world, kb


@pytest.fixture
def market():
    scn = load_scenario((ASSETS / "scenario_market.scn").read_text())
    kb = load_kb((ASSETS / "kb_market.kb").read_text())
    return scn.world, kb


def test_scenario_loading(home):
    w, _kb = home
    assert w.robot_at == "welcome_point"
    assert w.shelves["shelf_snacks"] == "snack"
    assert w.distance("shelf_food", "shelf_snacks") == 1
    assert w.distance("shelf_snacks", "shelf_food") == 1
    assert w.distance("shelf_food", "shelf_food") == 0
    with pytest.raises(ScenarioError):
        w.distance("shelf_food", "mars")


def test_move(home):
    w, _kb = home
    w2, res = behavior_move(w, "shelf_drinks")
    assert res.ok and w2.robot_at == "shelf_drinks"
    w3, res = behavior_move(w2, "shelf_drinks")
    assert res.ok and w3.robot_at == "shelf_drinks"
    _w4, res = behavior_move(w, "mars")
    assert res.status == "unknown_location"


def test_move_error_injection(home):
    w, _kb = home
    w = w.__class__(**{**w.__dict__, "injections": ((1, "move", "path_blocked"),)})
    w2, res = behavior_move(w, "shelf_drinks")
    assert res.status == "path_blocked"
    assert w2.robot_at == "welcome_point"
    w3, res = behavior_move(w2, "shelf_drinks")  # injection applies once
    assert res.ok and w3.robot_at == "shelf_drinks"


def test_see_everything_in_place(market):
    w, kb = market
    w, _ = behavior_move(w, "shelf_food")
    w, kb, obs, res, notes = behavior_see(w, kb)
    assert res.ok
    assert obs.present == ("crisps", "noodles")
    assert obs.unseen == () and obs.misplaced == () and obs.missing == ()
    assert notes == []


def test_see_missing_object(market):
    w, kb = market
    w, _ = behavior_move(w, "shelf_drinks")
    w, kb, obs, res, notes = behavior_see(w, kb)
    assert obs.missing == ("heineken",)
    assert [print_term(n) for n in notes] == ["missing(heineken,shelf_drinks)"]
    assert ask(kb, "heineken", Literal(False, "loc", Atom("shelf_drinks"))) == "yes"
    # repeating the observation on an unchanged shelf is quiet
    w, kb, obs2, _res, notes2 = behavior_see(w, kb)
    assert notes2 == []
    assert obs2.missing == ()  # the exception moved heineken out of "believed here"


def test_see_misplaced_object(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_snacks")
    w, kb, obs, res, notes = behavior_see(w, kb)
    assert set(obs.misplaced) == {"coke", "noodles"}
    assert ask(kb, "coke", Literal(True, "misplaced")) == "yes"
    assert believed_value(kb, "coke", "last_seen") == Atom("shelf_snacks")
    # idempotent on repeat
    w, kb, _obs, _res, notes2 = behavior_see(w, kb)
    assert notes2 == []


def test_take_ok_and_hand_order(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_drinks")
    w, kb, res, _obs = behavior_take(w, kb, "malz")
    assert res.ok and res.payload == "left"  # home scenario prefers the left hand
    assert w.left_hand == "malz" and "malz" not in w.placement
    w.check_conservation()


def test_take_not_found(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_food")
    w, kb, res, obs = behavior_take(w, kb, "noodles")
    assert res.status == "not_found"
    assert obs.missing == ("noodles",)


def test_take_hands_full(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_snacks")
    w, kb, r1, _ = behavior_take(w, kb, "noodles")
    w, kb, r2, _ = behavior_take(w, kb, "coke")
    assert r1.ok and r2.ok
    assert {r1.payload, r2.payload} == {"left", "right"}
    w, kb, r3, _ = behavior_take(w, kb, "bisquits")  # not here anyway
    assert r3.status == "not_found"
    w, _ = behavior_move(w, "shelf_food")
    w, kb, r4, _ = behavior_take(w, kb, "bisquits")
    assert r4.status == "hands_full"


def test_deliver_to_user_and_shelf(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_drinks")
    w, kb, res, _ = behavior_take(w, kb, "malz")
    _w, _kb, res = behavior_deliver(w, kb, "malz", "user")
    assert res.status == "wrong_location"
    w, _ = behavior_move(w, w.user_at)
    w, kb, res = behavior_deliver(w, kb, "malz", "user")
    assert res.ok and w.delivered["malz"] == "user"
    w.check_conservation()

    _w, _kb, res = behavior_deliver(w, kb, "malz", "user")
    assert res.status == "not_held"


def test_deliver_to_shelf_squares_kb(home):
    w, kb = home
    w, _ = behavior_move(w, "shelf_snacks")
    w, kb, _obs, _res, _n = behavior_see(w, kb)     # marks coke misplaced
    w, kb, res, _ = behavior_take(w, kb, "coke")
    assert res.ok
    w, _ = behavior_move(w, "shelf_drinks")
    w, kb, _obs, _res, _n = behavior_see(w, kb)     # coke goes missing here first
    w, kb, res = behavior_deliver(w, kb, "coke", "shelf_drinks")
    assert res.ok
    assert w.placement["coke"] == "shelf_drinks"
    assert ask(kb, "coke", Literal(True, "misplaced")) != "yes"
    assert believed_value(kb, "coke", "loc") == Atom("shelf_drinks")


def test_find(home):
    w, kb = home
    w, kb, res = behavior_find(w, kb, "user")
    assert res.ok and w.robot_at == "living_room"
    w, _ = behavior_move(w, "shelf_drinks")
    w, kb, res = behavior_find(w, kb, "malz")
    assert res.ok
    w, kb, res = behavior_find(w, kb, "noodles")
    assert res.status == "not_found"


def test_object_conservation_random_walk(home):
    rng = random.Random(5)
    w, kb = home
    objects = sorted(w.objects())
    for _ in range(300):
        roll = rng.random()
        if roll < 0.4:
            w, _ = behavior_move(w, rng.choice(sorted(w.locations)))
        elif roll < 0.7:
            w, kb, _res, _obs = behavior_take(w, kb, rng.choice(objects))
        else:
            w, kb, _res = behavior_deliver(
                w, kb, rng.choice(objects),
                rng.choice(["user", "shelf_food", "shelf_drinks", "shelf_snacks"]))
        w.check_conservation()
    assert set(w.objects()) == set(objects)


def test_observation_soundness_random(home):
    rng = random.Random(9)
    w, kb = home
    for _ in range(40):
        w, _ = behavior_move(w, rng.choice(sorted(w.shelves)))
        obs = observe(w, kb, w.robot_at)
        assert list(obs.present) == w.shelf_contents(w.robot_at)
        assert set(obs.misplaced) <= set(obs.present)
        assert set(obs.missing) <= set(obs.unseen)
