"""Chess rules, board/move datasets, check/mate-in-1 problems and an evaluation harness."""

from ._core import (
    INITIAL_FEN,
    PROTOCOL_VERSION,
    RoyalgameError,
    __version__,
    board_from_square_list,
    classify,
    evaluate,
    extract_move,
    extract_pairs,
    generate_puzzles,
    greedy_solver_policy,
    legal_moves,
    make_instruction,
    normalize_fen,
    perft,
    push_san,
    random_legal_policy,
    render_prompt,
    run_pipeline,
    san_to_uci,
    solve_one_ply,
    square_list,
    status,
)

__all__ = [
    "INITIAL_FEN",
    "PROTOCOL_VERSION",
    "RoyalgameError",
    "__version__",
    "board_from_square_list",
    "classify",
    "evaluate",
    "extract_move",
    "extract_pairs",
    "generate_puzzles",
    "greedy_solver_policy",
    "legal_moves",
    "make_instruction",
    "normalize_fen",
    "perft",
    "push_san",
    "random_legal_policy",
    "render_prompt",
    "run_pipeline",
    "san_to_uci",
    "solve_one_ply",
    "square_list",
    "status",
]
