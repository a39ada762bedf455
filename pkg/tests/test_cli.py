import io
import json
from pathlib import Path

from deskbot.cli import _repl_loop, main
from deskbot.kb import load_kb, resolve_closure
from deskbot.runtime import asset_text

ASSETS = Path(__file__).resolve().parents[1] / "src" / "deskbot" / "assets"


def test_run_demo_golden(tmp_path):
    trace = tmp_path / "trace.txt"
    code = main(["run", "--scenario", "demo", "--trace-out", str(trace),
                 "--golden", str(ASSETS / "golden_demo_trace.txt")])
    assert code == 0
    assert trace.read_text().startswith("main: (is,[day(tuesday)]:")


def test_run_missing_scenario(capsys):
    code = main(["run", "--scenario", "/no/such/file.scn"])
    assert code == 1
    assert "/no/such/file.scn" in capsys.readouterr().err


def test_run_missing_kb(tmp_path, capsys):
    scn = tmp_path / "s.scn"
    scn.write_text("[scenario ==> s, kb ==> 'missing.kb', program ==> 'home.sit',"
                   " replies ==> []]")
    code = main(["run", "--scenario", str(scn)])
    assert code == 1
    assert "missing.kb" in capsys.readouterr().err


def test_run_market_records(tmp_path):
    record = tmp_path / "run.jsonl"
    trace = tmp_path / "trace.txt"
    code = main(["run", "--scenario", "market", "--record-out", str(record),
                 "--trace-out", str(trace)])
    assert code == 0
    events = [json.loads(line) for line in record.read_text().splitlines()]
    assert sum(1 for e in events if e["event"] == "inference_cycle") == 2
    assert any(e["event"] == "substitute_offer" for e in events)


def test_run_home_exit_zero(tmp_path):
    code = main(["run", "--scenario", "home",
                 "--trace-out", str(tmp_path / "t.txt")])
    assert code == 0


def test_runs_are_bit_reproducible(tmp_path):
    outs = []
    for n in (1, 2):
        trace = tmp_path / f"t{n}.txt"
        record = tmp_path / f"r{n}.jsonl"
        assert main(["run", "--scenario", "market", "--trace-out", str(trace),
                     "--record-out", str(record)]) == 0
        outs.append((trace.read_bytes(), record.read_bytes()))
    assert outs[0] == outs[1]


def test_trace_check(tmp_path, capsys):
    golden = ASSETS / "golden_demo_trace.txt"
    assert main(["trace-check", str(golden), str(golden)]) == 0
    mangled = tmp_path / "mangled.txt"
    lines = golden.read_text().splitlines()
    lines[3] = lines[3] + "x"
    mangled.write_text("\n".join(lines) + "\n")
    assert main(["trace-check", str(mangled), str(golden)]) == 1
    assert "line 4" in capsys.readouterr().err
    # trailing whitespace is normalized away
    padded = tmp_path / "padded.txt"
    padded.write_text("".join(line + "   \n"
                              for line in golden.read_text().splitlines()))
    assert main(["trace-check", str(padded), str(golden)]) == 0


def repl(kb_text, commands):
    kb = load_kb(kb_text)
    out = io.StringIO()
    kb2 = _repl_loop(kb, io.StringIO(commands), out)
    return kb2, out.getvalue().splitlines()


def test_kb_repl_queries():
    _kb, lines = repl(asset_text("kb_birds.kb"), "\n".join([
        "ask birds fly",
        "ask fish swim",
        "explain pete live",
        "preferred pete live",
        "extension class top",
        "classes pete",
        "nonsense query here",
        "ask missing_subject fly",
        "quit",
    ]))
    assert lines[0] == "yes"
    assert lines[1] == "unknown"
    assert "work=>mexico" in lines[2] and "weight 3" in lines[2]
    assert lines[3] == "mexico"
    assert lines[4] == "{arthur, pete}"
    assert lines[5] == "[eagles, birds, animals, top]"
    assert lines[6].startswith("unknown command")
    assert lines[7].startswith("error:")  # the session survives bad queries


def test_kb_repl_dump_round_trip():
    kb, lines = repl(asset_text("kb_home.kb"), "dump\nquit\n")
    dumped = "\n".join(lines)
    again = load_kb(dumped)
    for subject in list(kb.class_by_id) + list(kb.owner_of):
        assert resolve_closure(again, subject) == resolve_closure(kb, subject)


def test_kb_repl_updates():
    _kb, lines = repl(asset_text("kb_home.kb"), "\n".join([
        "set noodles last_seen shelf_snacks",
        "preferred-list noodles loc",
        "assert user [bad_day,0]",
        "ask user bad_day",
        "quit",
    ]))
    assert lines[0] == "ok"
    assert lines[1] == "[shelf_snacks, shelf_food, shelf_drinks]"
    assert lines[3] == "yes"


def test_kb_cli_missing_file(capsys):
    assert main(["kb", "--kb", "/no/such.kb"]) == 1
    assert "/no/such.kb" in capsys.readouterr().err
