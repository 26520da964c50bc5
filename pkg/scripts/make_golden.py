"""Regenerate the pinned n=4 example files.

``src/todaq/data/example_n4.json`` holds the printed example (transcribed in
``tests/example_n4.py``) in canonical serialization; the CLI ``golden`` suite
compares the built matrices with it. ``tests/golden/example_n4_built.json``
pins the built matrices themselves for regression.
"""

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from example_n4 import printed_L, printed_R, printed_Rstar  # noqa: E402

from todaq.cli import canonical_matrix  # noqa: E402
from todaq.lax import bound_twisted_a, build_R, build_Rstar  # noqa: E402


def main() -> None:
    printed = {"L": printed_L(), "R": printed_R(), "R*": printed_Rstar()}
    out = {"version": 1, "couplings": "unit"}
    out.update({k: canonical_matrix(m) for k, m in printed.items()})
    (ROOT / "src/todaq/data/example_n4.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    g = {i: 1 for i in range(1, 6)}
    Lx, _ = bound_twisted_a(4, g)
    built = {"L": Lx, "R": build_R(4, g).m, "R*": build_Rstar(4, g).m}
    out = {"version": 1, "couplings": "unit"}
    out.update({k: canonical_matrix(m) for k, m in built.items()})
    (ROOT / "tests/golden/example_n4_built.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
