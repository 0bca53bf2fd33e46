"""Line-JSON denoiser child process used by the external-denoiser tests.

Reads one request per line from stdin and answers with one JSON line.
Modes, chosen by argv[1]:
  echo      one-hot on the current graph categories (default)
  garbage   reply with a non-JSON line
  badrow    node probability rows that do not sum to one
"""

from __future__ import annotations

import json
import sys

N_EDGE_CATEGORIES = 5


def _respond(request: dict, mode: str, n_atom_types: int) -> str:
    nodes = request["nodes"]
    if mode == "garbage":
        return "not json at all"
    if mode == "badrow":
        node_probs = [[0.7] * n_atom_types for _ in nodes]
        return json.dumps({"node_probs": node_probs, "edge_probs": []})
    node_probs = []
    for category in nodes:
        row = [0.0] * n_atom_types
        row[category] = 1.0
        node_probs.append(row)
    edge_probs = []
    for i, j, category in request["edges"]:
        row = [0.0] * N_EDGE_CATEGORIES
        row[category] = 1.0
        edge_probs.append([i, j, row])
    return json.dumps({"node_probs": node_probs, "edge_probs": edge_probs})


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "echo"
    n_atom_types = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        sys.stdout.write(_respond(request, mode, n_atom_types) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
