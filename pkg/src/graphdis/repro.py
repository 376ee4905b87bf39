"""Executable reproduction recipes.

A recipe file is JSON: {"recipes": [{name, target, commands, checks, expect}]}.
Commands are argv lists; `graphdis ...` runs in-process inside the working
directory, `pytest ...` runs as a subprocess from the repository root. The
placeholders {repo} and {work} expand to those directories. Checks are small
declarative assertions over the JSON/CSV artifacts the commands produced.

`verify_recipes` prints one [PASS]/[FAIL] line per recipe and returns a
nonzero exit code if anything failed.
"""

from __future__ import annotations

import contextlib
import io
import json
import os
import re
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError

CHECK_KINDS = ("exists", "value", "count_ge", "accepted_vector_band",
               "accepted_distinct", "not_in", "median_ge", "files_equal")
_OPS = {"ge": lambda a, b: a >= b, "gt": lambda a, b: a > b,
        "le": lambda a, b: a <= b, "lt": lambda a, b: a < b,
        "eq": lambda a, b: a == b, "ne": lambda a, b: a != b}


@dataclass
class ReproRecipe:
    name: str
    target: str
    commands: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    expect: str = ""


def load_recipes(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "recipes" not in doc:
        raise ValidationError(f"{path}: expected an object with a 'recipes' list")
    recipes = []
    for i, entry in enumerate(doc["recipes"]):
        try:
            recipe = ReproRecipe(name=entry["name"], target=entry["target"],
                                 commands=[list(c) for c in entry.get("commands", [])],
                                 checks=list(entry.get("checks", [])),
                                 expect=entry.get("expect", ""))
        except (KeyError, TypeError) as err:
            raise ValidationError(f"{path}: recipe #{i} malformed: {err}") from err
        for check in recipe.checks:
            kind = check.get("kind")
            if kind not in CHECK_KINDS:
                raise ValidationError(
                    f"{path}: recipe {recipe.name!r} has unknown check kind {kind!r}")
            op = check.get("op")
            if op is not None and op not in _OPS:
                raise ValidationError(
                    f"{path}: recipe {recipe.name!r} has unknown op {op!r}")
        for cmd in recipe.commands:
            if not cmd or cmd[0] not in ("graphdis", "pytest"):
                raise ValidationError(
                    f"{path}: recipe {recipe.name!r} commands must start with "
                    f"'graphdis' or 'pytest', got {cmd!r}")
        recipes.append(recipe)
    return recipes


def static_check(recipes) -> list:
    """Verify graphdis commands only reference flags the CLI actually has."""
    from .cli import build_parser

    problems = []
    for recipe in recipes:
        for cmd in recipe.commands:
            if cmd[0] != "graphdis":
                continue
            argv = [a.replace("{repo}", "/tmp/r").replace("{work}", "/tmp/w")
                    for a in cmd[1:]]
            parser = build_parser()
            buf = io.StringIO()
            try:
                with contextlib.redirect_stderr(buf):
                    parser.parse_args(argv)
            except SystemExit as err:
                if err.code != 0:
                    problems.append(f"{recipe.name}: {' '.join(cmd)}: "
                                    f"{buf.getvalue().strip().splitlines()[-1]}")
    return problems


# -- JSON path access -----------------------------------------------------------


_PATH_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def resolve_path(doc, path: str):
    """Walk `a.b[0].c` style paths through parsed JSON."""
    pos = 0
    cur = doc
    for m in _PATH_TOKEN.finditer(path):
        if m.start() != pos and path[pos] != ".":
            raise ValidationError(f"bad path syntax {path!r}")
        key, idx = m.group(1), m.group(2)
        try:
            cur = cur[key] if key is not None else cur[int(idx)]
        except (KeyError, IndexError, TypeError) as err:
            raise ValidationError(f"path {path!r} not found: {err}") from err
        pos = m.end()
        if pos < len(path) and path[pos] == ".":
            pos += 1
    if pos != len(path):
        raise ValidationError(f"bad path syntax {path!r}")
    return cur


def _load_json(workdir: Path, rel: str):
    with open(workdir / rel, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- checks ------------------------------------------------------------------------


def run_check(check: dict, workdir: Path) -> str | None:
    """Returns None on pass, a failure description otherwise."""
    kind = check["kind"]
    if kind == "exists":
        return None if (workdir / check["path"]).exists() else \
            f"missing artifact {check['path']}"

    if kind == "value":
        val = resolve_path(_load_json(workdir, check["file"]), check["path"])
        if _OPS[check["op"]](val, check["value"]):
            return None
        return (f"{check['file']}:{check['path']} = {val!r}, wanted "
                f"{check['op']} {check['value']!r}")

    if kind == "count_ge":
        vals = [resolve_path(_load_json(workdir, f), check["path"])
                for f in check["files"]]
        hits = sum(1 for v in vals if _OPS[check["op"]](v, check["value"]))
        if hits >= check["min_count"]:
            return None
        return (f"{check['path']} {check['op']} {check['value']} held in "
                f"{hits}/{len(vals)} runs, needed {check['min_count']} "
                f"(values {vals})")

    if kind == "accepted_vector_band":
        failures = []
        accepted = 0
        for sf, vf in zip(check["score_files"], check["vector_files"]):
            score = resolve_path(_load_json(workdir, sf), check["score_path"])
            if score < check["score_threshold"]:
                continue
            accepted += 1
            vec = resolve_path(_load_json(workdir, vf), check["vector_path"])
            n_high = sum(1 for v in vec if v > check["high"])
            n_low = sum(1 for v in vec if v < check["low"])
            if n_high != check["expect_high"] or n_high + n_low != len(vec):
                failures.append(f"{vf}: {vec}")
        if accepted == 0:
            return "no run cleared the acceptance threshold"
        return None if not failures else \
            f"KL band violated in accepted runs: {'; '.join(failures)}"

    if kind == "accepted_distinct":
        failures = []
        accepted = 0
        for sf, f in zip(check["score_files"], check["files"]):
            score = resolve_path(_load_json(workdir, sf), check["score_path"])
            if score < check["score_threshold"]:
                continue
            accepted += 1
            doc = _load_json(workdir, f)
            vals = [resolve_path(doc, p) for p in check["paths"]]
            if len(set(vals)) != len(vals):
                failures.append(f"{f}: {vals}")
        if accepted == 0:
            return "no run cleared the acceptance threshold"
        return None if not failures else \
            f"values collide in accepted runs: {'; '.join(failures)}"

    if kind == "not_in":
        val = resolve_path(_load_json(workdir, check["file"]), check["path"])
        exclude_doc = _load_json(workdir, check["exclude_file"])
        excluded = [resolve_path(exclude_doc, p) for p in check["exclude_paths"]]
        if val not in excluded:
            return None
        return f"{check['file']}:{check['path']} = {val!r} collides with {excluded}"

    if kind == "median_ge":
        import statistics

        a = statistics.median(resolve_path(_load_json(workdir, f), check["path"])
                              for f in check["files_a"])
        b = statistics.median(resolve_path(_load_json(workdir, f), check["path"])
                              for f in check["files_b"])
        if a >= b:
            return None
        return f"median {check['path']}: {a} < {b}"

    if kind == "files_equal":
        paths = [workdir / p for p in check["paths"]]
        blobs = [p.read_bytes() for p in paths]
        if all(b == blobs[0] for b in blobs):
            return None
        return f"files differ: {[str(p) for p in check['paths']]}"

    raise ValidationError(f"unknown check kind {kind!r}")


# -- execution ---------------------------------------------------------------------


def _expand(arg: str, repo: Path, work: Path) -> str:
    return arg.replace("{repo}", str(repo)).replace("{work}", str(work))


def run_recipe(recipe: ReproRecipe, workdir: Path, repo_root: Path,
               echo=print) -> list:
    """Execute one recipe; returns a list of failure strings (empty = pass)."""
    from .cli import main as cli_main

    failures = []
    for cmd in recipe.commands:
        argv = [_expand(a, repo_root, workdir) for a in cmd]
        echo(f"  $ {' '.join(argv)}")
        if argv[0] == "graphdis":
            prev = os.getcwd()
            os.chdir(workdir)
            try:
                code = cli_main(argv[1:])
            finally:
                os.chdir(prev)
        else:
            code = subprocess.run([sys.executable, "-m", "pytest"] + argv[1:],
                                  cwd=repo_root).returncode
        if code != 0:
            failures.append(f"command exited {code}: {' '.join(argv)}")
            return failures
    for check in recipe.checks:
        try:
            problem = run_check(check, workdir)
        except (OSError, ValidationError, json.JSONDecodeError) as err:
            problem = f"check {check.get('kind')}: {err}"
        if problem:
            failures.append(problem)
    return failures


def verify_recipes(recipe_file, workdir=None, repo_root=None, select=None,
                   echo=print) -> int:
    """Run every (selected) recipe; print PASS/FAIL lines; 0 iff all passed."""
    recipe_file = Path(recipe_file)
    repo_root = Path(repo_root) if repo_root else recipe_file.resolve().parent.parent
    workdir = Path(workdir) if workdir else repo_root / "recipe_runs"
    workdir.mkdir(parents=True, exist_ok=True)

    recipes = load_recipes(recipe_file)
    problems = static_check(recipes)
    if problems:
        for p in problems:
            echo(f"[FAIL] static: {p}")
        return 1
    if select:
        wanted = set(select)
        unknown = wanted - {r.name for r in recipes}
        if unknown:
            raise ValidationError(f"unknown recipe names: {sorted(unknown)}")
        recipes = [r for r in recipes if r.name in wanted]

    failed = 0
    for recipe in recipes:
        echo(f"== {recipe.name}: {recipe.target}")
        failures = run_recipe(recipe, workdir, repo_root, echo=echo)
        if failures:
            failed += 1
            for f in failures:
                echo(f"[FAIL] {recipe.name}: {f}")
        else:
            echo(f"[PASS] {recipe.name}")
    echo(f"{len(recipes) - failed}/{len(recipes)} recipes passed")
    return 0 if failed == 0 else 1
