"""Minimal stdio endpoint speaking the NDJSON wire protocol.

Answers every request with the greedy move for the board in the prompt.
"""

import json
import re
import sys

import royalgame

SQUARE_LIST = re.compile(r"(?:[a-h][1-8]:[KQRBNPkqrbnp](?:, )?)+")


def main() -> None:
    for line in sys.stdin:
        msg = json.loads(line)
        if "hello" in msg:
            reply = {"hello": {"name": "stub", "version": royalgame.PROTOCOL_VERSION}}
        else:
            board = SQUARE_LIST.search(msg["prompt"]).group(0).rstrip(", ")
            fen = royalgame.board_from_square_list(board)
            reply = {"id": msg["id"], "text": royalgame.greedy_solver_policy(fen)}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
