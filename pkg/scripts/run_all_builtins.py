"""Run every built-in worked example and collect the outputs under out/.

Usage: python scripts/run_all_builtins.py [OUT_DIR]

Exit code is the worst exit code over the builtins, so a failing bound in
any worked example fails the whole sweep.
"""

import sys
from pathlib import Path

from nearrep.cli import BUILTINS, main


def run(out_root: Path) -> int:
    worst = 0
    for name in sorted(BUILTINS):
        out = out_root / name
        print(f"=== builtin {name} -> {out}")
        code = main(["builtin", name, "--out", str(out)])
        print(f"=== exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    sys.exit(run(root))
