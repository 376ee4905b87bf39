"""Command-line interface.

Subcommands: gen, train, traverse, encode, mig, randomize, sample, stats.
Every command writes its outputs plus a RunManifest (resolved configuration,
seeds, input/output paths, tool version, duration). With fixed seeds and flags
all outputs are byte-identical across reruns except the manifest's duration
field. GD_SEED overrides the default --seed value.

Range flags take `lo:hi` (or a single value); grids take `a,b,c` or
`lo:hi:count`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GraphDisError, ValidationError
from .experiments import (TraversalSpec, encode_sweep, randomization_sweep,
                          render_contact_sheet, sample_vs_population,
                          traverse, traverse_grid)
from .graphs import (FAMILIES, FAMILY_PARAMS, Dataset, gen_dataset,
                     load_dataset, save_dataset)
from .metrics import graph_stats
from .model import ModelConfig
from .training import (TrainConfig, load_checkpoint, save_checkpoint, train)
from .walks import WalkConfig, load_edge_list, sample_dataset


def _default_seed() -> int:
    try:
        return int(os.environ.get("GD_SEED", "0"))
    except ValueError:
        return 0


def parse_range(text: str, integer: bool = False) -> tuple:
    """`lo:hi` or a single value; returns (lo, hi) inclusive."""
    cast = int if integer else float
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = cast(parts[0])
            return v, v
        if len(parts) == 2:
            return cast(parts[0]), cast(parts[1])
    except ValueError:
        pass
    raise ValidationError(f"expected 'lo:hi' or a single value, got {text!r}")


def parse_grid(text: str) -> list:
    """`a,b,c` enumerates levels; `lo:hi:count` spaces them evenly."""
    try:
        if "," in text or ":" not in text:
            return [float(v) for v in text.split(",")]
        lo, hi, count = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(count))]
    except ValueError:
        raise ValidationError(f"expected 'a,b,c' or 'lo:hi:count', got {text!r}") from None


def parse_widths(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"expected comma-separated widths, got {text!r}") from None


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(path, command: str, config: dict, seeds: dict,
                   inputs: list, outputs: list, started: float) -> None:
    """Atomically write the run manifest next to the outputs."""
    doc = {
        "command": command,
        "config": {k: v for k, v in sorted(config.items())},
        "seeds": seeds,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "duration_seconds": round(time.monotonic() - started, 3),
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _config_of(args, skip=("func", "command")) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in vars(args).items() if k not in skip}


def _resolve_checkpoint(path) -> Path:
    p = Path(path)
    return p / "checkpoint" if p.is_dir() else p


def _ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


# -- subcommand handlers ---------------------------------------------------------


def _cmd_gen(args) -> int:
    started = time.monotonic()
    family = args.family.upper()
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {args.family!r}; expected one of {FAMILIES}")
    flag_of = {"n": args.n, "p": args.p, "m": args.m, "k": args.k,
               "p_rewire": args.p_rewire, "depth": args.depth}
    integer = {"n", "m", "k", "depth"}
    ranges = {name: parse_range(flag_of[name], integer=name in integer)
              for name in FAMILY_PARAMS[family]}
    ds = gen_dataset(family, ranges, args.count, attributes=args.attributes,
                     seed=args.seed, threads=args.threads)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out)
    write_manifest(out.with_name(out.name + ".manifest.json"), "gen",
                   _config_of(args), {"seed": args.seed}, [], [out], started)
    return 0


def _resolve_use_attributes(mode: str, ds: Dataset) -> bool:
    have = [g.attributes is not None for g in ds.graphs()]
    if mode == "on":
        if not all(have):
            raise ValidationError("--use-attributes on, but some records lack attrs")
        return True
    if mode == "off":
        return False
    if all(have):
        return True
    if not any(have):
        return False
    raise ValidationError("dataset mixes attributed and bare records; "
                          "pass --use-attributes on|off")


def _cmd_train(args) -> int:
    started = time.monotonic()
    ds = load_dataset(args.data)
    use_attrs = _resolve_use_attributes(args.use_attributes, ds)
    model_cfg = ModelConfig(j_latent=args.latent, n_max=args.n_max,
                            gcn_layers=parse_widths(args.gcn),
                            encoder_dense_layers=parse_widths(args.enc_dense),
                            decoder_dense_layers=parse_widths(args.dec_dense),
                            param_dim=len(ds.factor_names()),
                            use_attributes=use_attrs)
    cfg = TrainConfig(beta=args.beta, lambda_param=args.lambda_param,
                      epochs=args.epochs, batch_size=args.batch_size,
                      learning_rate=args.lr, seed=args.seed, n_max=args.n_max,
                      model=model_cfg)

    progress = None
    if args.log_every > 0:
        def progress(stats, _model):
            if stats.epoch % args.log_every == 0 or stats.epoch == cfg.epochs - 1:
                print(f"epoch {stats.epoch:4d}  recon {stats.recon:10.4f}  "
                      f"kl {stats.kl:8.4f}  param {stats.param_loss:8.5f}  "
                      f"total {stats.total:10.4f}", flush=True)

    model, history = train(ds, cfg, progress=progress)
    out = _ensure_dir(args.out)
    save_checkpoint(model, cfg, out / "checkpoint")
    history.save_csv(out / "history.csv")
    write_manifest(out / "manifest.json", "train", _config_of(args),
                   {"seed": args.seed}, [args.data],
                   [out / "checkpoint", out / "history.csv"], started)
    return 0


def _parse_base_z(text, j_latent: int):
    if not text:
        return None
    try:
        base = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated floats, got {text!r}") from None
    if len(base) != j_latent:
        raise ValidationError(f"base-z has {len(base)} coordinates, model has {j_latent}")
    return base


def _cmd_traverse(args) -> int:
    started = time.monotonic()
    model, _ = load_checkpoint(_resolve_checkpoint(args.ckpt))
    j = model.config.j_latent
    lo, hi = parse_range(args.range)
    base = _parse_base_z(args.base_z, j)
    spec = TraversalSpec(axis=args.axis, lo=lo, hi=hi, steps=args.steps,
                         base_z=base, threshold=args.threshold)
    out = _ensure_dir(args.out)
    outputs = []
    if args.axis2 is None:
        cells = [traverse(model, spec)]
        for i, cell in enumerate(cells[0]):
            p = out / f"cell_{i:03d}.json"
            _write_json(p, cell.to_dict())
            outputs.append(p)
    else:
        lo2, hi2 = parse_range(args.range2)
        spec2 = TraversalSpec(axis=args.axis2, lo=lo2, hi=hi2, steps=args.steps2,
                              base_z=base, threshold=args.threshold)
        cells = traverse_grid(model, spec, spec2)
        for r, row in enumerate(cells):
            for c, cell in enumerate(row):
                p = out / f"cell_r{r:03d}_c{c:03d}.json"
                _write_json(p, cell.to_dict())
                outputs.append(p)
    sheet = out / "sheet.svg"
    render_contact_sheet(cells, sheet)
    outputs.append(sheet)
    write_manifest(out / "manifest.json", "traverse", _config_of(args),
                   {}, [args.ckpt], outputs, started)
    return 0


def _cmd_encode(args) -> int:
    started = time.monotonic()
    model, _ = load_checkpoint(_resolve_checkpoint(args.ckpt))
    ds = load_dataset(args.data)
    result = encode_sweep(model, ds, bins=args.bins)
    out = _ensure_dir(args.out)
    result.save_csv(out / "sweep.csv")
    doc = result.mig.to_dict()
    doc["kl_per_dim"] = [float(v) for v in result.kl_per_dim]
    doc["n_samples"] = int(result.z_matrix.shape[0])
    _write_json(out / "mig.json", doc)
    result.mig.save_mi_csv(out / "mi_matrix.csv")
    write_manifest(out / "manifest.json", "encode", _config_of(args), {},
                   [args.ckpt, args.data],
                   [out / "sweep.csv", out / "mig.json", out / "mi_matrix.csv"],
                   started)
    return 0


def _cmd_mig(args) -> int:
    started = time.monotonic()
    model, _ = load_checkpoint(_resolve_checkpoint(args.ckpt))
    ds = load_dataset(args.data)
    result = encode_sweep(model, ds, bins=args.bins)
    doc = result.mig.to_dict()
    doc["kl_per_dim"] = [float(v) for v in result.kl_per_dim]
    doc["n_samples"] = int(result.z_matrix.shape[0])
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    _write_json(out, doc)
    write_manifest(out.with_name(out.name + ".manifest.json"), "mig",
                   _config_of(args), {}, [args.ckpt, args.data], [out], started)
    return 0


def _cmd_randomize(args) -> int:
    started = time.monotonic()
    model, _ = load_checkpoint(_resolve_checkpoint(args.ckpt))
    ds = load_dataset(args.data)
    result = randomization_sweep(model, ds, parse_grid(args.grid),
                                 repeats=args.repeats, seed=args.seed,
                                 bins=args.bins)
    out = _ensure_dir(args.out)
    result.save_rows_csv(out / "rows.csv")
    _write_json(out / "result.json", result.to_dict())
    write_manifest(out / "manifest.json", "randomize", _config_of(args),
                   {"seed": args.seed}, [args.ckpt, args.data],
                   [out / "rows.csv", out / "result.json"], started)
    return 0


def _cmd_sample(args) -> int:
    started = time.monotonic()
    host = load_edge_list(args.edge_list)
    cfg = WalkConfig(walk_length=args.walk_length, max_nodes=args.max_nodes,
                     p_return=args.p_return, q_inout=args.q_inout)
    ds = sample_dataset(host, args.count, cfg, seed=args.seed)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out)
    write_manifest(out.with_name(out.name + ".manifest.json"), "sample",
                   _config_of(args), {"seed": args.seed}, [args.edge_list],
                   [out], started)
    return 0


def _cmd_stats(args) -> int:
    started = time.monotonic()
    if (args.data is None) == (args.edge_list is None):
        raise ValidationError("pass exactly one of --data or --edge-list")
    if args.samples is not None and args.edge_list is None:
        raise ValidationError("--samples needs --edge-list (the host graph)")
    out = _ensure_dir(args.out)
    outputs = []
    inputs = []
    if args.data is not None:
        inputs.append(args.data)
        ds = load_dataset(args.data)
        rows = [graph_stats(g) for g in ds.graphs()]
        path = out / "stats.csv"
        with open(path, "w", newline="") as fh:
            fh.write("n,edge_count,avg_degree,clustering,assortativity\n")
            for s in rows:
                fh.write(f"{s.n},{s.edge_count},{repr(s.avg_degree)},"
                         f"{repr(s.clustering)},{repr(s.assortativity)}\n")
        summary = {
            "count": len(rows),
            "avg_degree_mean": float(np.mean([s.avg_degree for s in rows])),
            "clustering_mean": float(np.mean([s.clustering for s in rows])),
            "assortativity_mean": float(np.mean([s.assortativity for s in rows])),
        }
        _write_json(out / "summary.json", summary)
        outputs += [path, out / "summary.json"]
    else:
        inputs.append(args.edge_list)
        host = load_edge_list(args.edge_list)
        if args.samples is not None:
            inputs.append(args.samples)
            samples = load_dataset(args.samples).graphs()
            report = sample_vs_population(host, samples)
            _write_json(out / "comparison.json", report.to_dict())
            outputs.append(out / "comparison.json")
        else:
            _write_json(out / "summary.json", graph_stats(host).to_dict())
            outputs.append(out / "summary.json")
    write_manifest(out / "manifest.json", "stats", _config_of(args), {},
                   inputs, outputs, started)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdis",
        description="Graph beta-VAE toolkit: generate graph datasets, train, "
                    "traverse latents, and score disentanglement.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = _default_seed()

    p = sub.add_parser("gen", help="sample a random-graph dataset to JSONL")
    p.add_argument("--family", required=True,
                   help="ER | BA | SW | TREE (case-insensitive)")
    p.add_argument("--n", default="1:24", help="node-count range lo:hi (default 1:24)")
    p.add_argument("--p", default="0:1", help="ER edge probability range (default 0:1)")
    p.add_argument("--m", default="1:4", help="BA attachment-count range (default 1:4)")
    p.add_argument("--k", default="2:6", help="SW even ring degree range (default 2:6)")
    p.add_argument("--p-rewire", default="0:1", dest="p_rewire",
                   help="SW rewiring probability range (default 0:1)")
    p.add_argument("--depth", default="2:4", help="TREE depth range (default 2:4)")
    p.add_argument("--count", type=int, default=100, help="records to sample (default 100)")
    p.add_argument("--attributes", action="store_true",
                   help="attach one uniform attribute per graph, shared by its nodes")
    p.add_argument("--seed", type=int, default=seed_default,
                   help="root seed (default 0, GD_SEED overrides)")
    p.add_argument("--threads", type=int, default=1,
                   help="generator threads; output is seed-deterministic either way")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="fit the graph VAE; writes a checkpoint directory")
    p.add_argument("--data", required=True, help="training dataset JSONL")
    p.add_argument("--beta", type=float, default=5.0, help="KL weight (default 5.0)")
    p.add_argument("--lambda-param", type=float, default=1.0, dest="lambda_param",
                   help="weight of the parameter-regression loss (default 1.0)")
    p.add_argument("--latent", type=int, default=4, help="latent dimensions J (default 4)")
    p.add_argument("--n-max", type=int, default=24, dest="n_max",
                   help="padded node capacity (default 24)")
    p.add_argument("--epochs", type=int, default=200, help="training epochs (default 200)")
    p.add_argument("--batch-size", type=int, default=64, dest="batch_size",
                   help="minibatch size (default 64)")
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate (default 1e-3)")
    p.add_argument("--seed", type=int, default=seed_default,
                   help="root seed for init/shuffle/eps (default 0, GD_SEED overrides)")
    p.add_argument("--use-attributes", choices=("auto", "on", "off"), default="auto",
                   dest="use_attributes",
                   help="feed node attributes to the model (default auto: on iff present)")
    p.add_argument("--gcn", default="16,16", help="GCN layer widths (default 16,16)")
    p.add_argument("--enc-dense", default="64", dest="enc_dense",
                   help="encoder dense widths after flatten (default 64)")
    p.add_argument("--dec-dense", default="64,256", dest="dec_dense",
                   help="decoder dense widths (default 64,256)")
    p.add_argument("--log-every", type=int, default=0, dest="log_every",
                   help="print loss every N epochs; 0 = silent (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("traverse", help="decode graphs along latent axes")
    p.add_argument("--ckpt", required=True, help="checkpoint file or train output dir")
    p.add_argument("--axis", type=int, default=0, help="latent axis (default 0)")
    p.add_argument("--range", default="-2:2", help="axis range lo:hi (default -2:2)")
    p.add_argument("--steps", type=int, default=9, help="points on the axis (default 9)")
    p.add_argument("--axis2", type=int, default=None,
                   help="optional second axis for a 2D grid (default none)")
    p.add_argument("--range2", default="-2:2", help="second-axis range (default -2:2)")
    p.add_argument("--steps2", type=int, default=9, help="second-axis points (default 9)")
    p.add_argument("--base-z", default="", dest="base_z",
                   help="comma-separated anchor point (default zeros)")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="decode threshold in (0,1) (default 0.5)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_traverse)

    p = sub.add_parser("encode", help="encode a dataset; write latents, MI matrix, score")
    p.add_argument("--ckpt", required=True, help="checkpoint file or train output dir")
    p.add_argument("--data", required=True, help="dataset JSONL with generative params")
    p.add_argument("--bins", type=int, default=20, help="histogram bins (default 20)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("mig", help="score a checkpoint against a labeled dataset")
    p.add_argument("--ckpt", required=True, help="checkpoint file or train output dir")
    p.add_argument("--data", required=True, help="dataset JSONL with generative params")
    p.add_argument("--bins", type=int, default=20, help="histogram bins (default 20)")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_mig)

    p = sub.add_parser("randomize", help="attribute randomization sweep on a checkpoint")
    p.add_argument("--ckpt", required=True, help="checkpoint file or train output dir")
    p.add_argument("--data", required=True, help="attributed dataset JSONL")
    p.add_argument("--grid", default="0:1:11",
                   help="levels as a,b,c or lo:hi:count (default 0:1:11)")
    p.add_argument("--repeats", type=int, default=5,
                   help="randomizations per graph and level (default 5)")
    p.add_argument("--bins", type=int, default=20, help="histogram bins (default 20)")
    p.add_argument("--seed", type=int, default=seed_default,
                   help="root seed (default 0, GD_SEED overrides)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_randomize)

    p = sub.add_parser("sample", help="random-walk subgraph samples from an edge list")
    p.add_argument("--edge-list", required=True, dest="edge_list",
                   help="host graph as 'u v' lines")
    p.add_argument("--count", type=int, default=100, help="subgraphs to sample (default 100)")
    p.add_argument("--walk-length", type=int, default=40, dest="walk_length",
                   help="steps per walk (default 40)")
    p.add_argument("--max-nodes", type=int, default=24, dest="max_nodes",
                   help="distinct nodes kept per sample (default 24)")
    p.add_argument("--p-return", type=float, default=1.0, dest="p_return",
                   help="return parameter; smaller = more backtracking (default 1.0)")
    p.add_argument("--q-inout", type=float, default=1.0, dest="q_inout",
                   help="in-out parameter; smaller = more exploration (default 1.0)")
    p.add_argument("--seed", type=int, default=seed_default,
                   help="root seed (default 0, GD_SEED overrides)")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("stats", help="topology statistics of datasets or host graphs")
    p.add_argument("--data", default=None, help="dataset JSONL to summarize per record")
    p.add_argument("--edge-list", default=None, dest="edge_list",
                   help="host graph edge list to summarize")
    p.add_argument("--samples", default=None,
                   help="sampled-subgraph JSONL to compare against --edge-list")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphDisError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}),
              file=sys.stderr)
        return 1
    except OSError as err:
        print(json.dumps({"error": "OSError", "message": str(err)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
