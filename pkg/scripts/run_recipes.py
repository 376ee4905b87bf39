"""Run the reproduction recipes and report pass/fail per target.

Each recipe in recipes/repro.json names one reported result, the command
sequence that reproduces it, and the checks its outputs must satisfy. This
driver executes them in order inside a shared work directory (later recipes
may read artifacts produced by earlier ones) and exits nonzero if any check
fails.

    python3 scripts/run_recipes.py                # full suite
    python3 scripts/run_recipes.py --select er-disentanglement
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from graphdis.repro import verify_recipes  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--recipes", default=str(REPO / "recipes" / "repro.json"))
    ap.add_argument("--workdir", default=str(REPO / "recipe_runs"))
    ap.add_argument("--select", nargs="*", default=None,
                    help="run only these recipe names")
    args = ap.parse_args()
    return verify_recipes(args.recipes, workdir=args.workdir, repo_root=REPO,
                          select=args.select)


if __name__ == "__main__":
    raise SystemExit(main())
