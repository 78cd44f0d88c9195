import json
import os
import sys
from pathlib import Path

import pytest

import royalgame

HERE = Path(__file__).parent
GOLDEN = "h1:K, a2:P, g2:P, h3:P, b4:p, g4:R, f5:r, a6:R, f6:p, b7:r, f7:k"


def test_perft_from_start():
    assert [royalgame.perft(royalgame.INITIAL_FEN, d) for d in (1, 2, 3)] == [20, 400, 8902]


def test_golden_board_and_rook_move():
    fen = royalgame.board_from_square_list(GOLDEN)
    assert royalgame.square_list(fen) == GOLDEN
    assert "Rg3" in royalgame.legal_moves(fen)
    assert royalgame.san_to_uci(fen, "Rg3") == "g4g3"


def test_push_san_and_errors():
    fen = royalgame.push_san(royalgame.INITIAL_FEN, "e4")
    assert fen.split()[1] == "b"
    with pytest.raises(royalgame.RoyalgameError, match="^no-matching-legal-move"):
        royalgame.push_san(fen, "e4")


def test_instruction_goal_prefix():
    goal = royalgame.make_instruction(GOLDEN, True)
    plain = royalgame.make_instruction(GOLDEN, False)
    assert goal.endswith(plain)
    assert goal != plain


def test_extract_pairs_white_only():
    pgn = '[Event "x"]\n[Result "*"]\n\n1. e4 e5 2. Nf3 Nc6 3. Bb5 *\n'
    lines, diagnostics = royalgame.extract_pairs(pgn, True)
    assert diagnostics == []
    assert [json.loads(l)["move"] for l in lines] == ["e4", "Nf3", "Bb5"]


def test_generated_puzzles_agree_with_solver():
    for line in royalgame.generate_puzzles(3, 20):
        p = json.loads(line)
        assert 3 <= p["pieces"] <= 32
        solved = royalgame.solve_one_ply(p["fen"])
        assert solved["mate"] or solved["check"]
        move = (solved["mate"] or solved["check"])[0]
        label, _ = royalgame.classify(p["fen"], move)
        assert label in ("legal-and-check", "legal-and-mate")


def write_dataset(tmp_path, count, require_mate=False):
    path = tmp_path / "puzzles.ndjson"
    path.write_text("\n".join(royalgame.generate_puzzles(9, count, require_mate=require_mate)) + "\n")
    return str(path)


def test_evaluate_random_baseline(tmp_path):
    report = json.loads(royalgame.evaluate(write_dataset(tmp_path, 30), "baseline:random:1"))
    assert report["legal_pct"] == 100.0


def test_stdio_endpoint_written_in_python(tmp_path):
    dataset = write_dataset(tmp_path, 15, require_mate=True)
    stub = HERE / "stub_endpoint.py"
    endpoint = f"cmd:{sys.executable} {stub}"
    report = json.loads(royalgame.evaluate(dataset, endpoint))
    assert report["legal_check_mate_pct"] == 100.0
