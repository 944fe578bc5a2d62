"""Command line entry point: ``nnvqa gen-instance | run | summarize | plot | presets | schema``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness.batch import run_batch
from .harness.config import ConfigError, list_presets, load_config, validate_config, config_schema
from .harness.output import (RECORDS_FILE, STATS_FILE, all_stats, emit_outputs, read_records,
                             stats_csv, write_plots)
from .problems import InstanceFormatError, gen_fully_connected, gen_k_regular_bimodal, save_instance


class CliError(Exception):
    def __init__(self, kind: str, message: str, details=None):
        super().__init__(message)
        self.kind = kind
        self.details = details


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", f"{self.prog}: {message}")
        sys.exit(2)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nnvqa", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-instance", help="generate a seeded Max-Cut instance file")
    g.add_argument("--family", choices=["fully_connected", "k_regular_bimodal"], default="fully_connected")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--degree", type=int, help="vertex degree for k_regular_bimodal")
    g.add_argument("--mean", type=float, default=None, help="weight mean (0 fully connected, 1 bimodal)")
    g.add_argument("--variance", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output JSON path")

    r = sub.add_parser("run", help="run a batch experiment and write all outputs")
    r.add_argument("--config", required=True, help="config JSON path or preset:<name>")
    r.add_argument("--seed", type=int, help="override base_seed")
    r.add_argument("--out", help="override the output directory")
    r.add_argument("--algorithm", choices=["standard", "escape", "guide"])
    r.add_argument("--mode", help="exact or shots:N")
    r.add_argument("--noise-p", type=float, help="bit-flip probability per qubit per layer")
    r.add_argument("--trajectories", type=int, help="noise trajectories per evaluation")
    r.add_argument("--inits", type=int, help="override the number of initializations")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.add_argument("--quiet", action="store_true")

    s = sub.add_parser("summarize", help="recompute stats.csv from a records file")
    s.add_argument("--records", required=True, help=f"{RECORDS_FILE} or the directory holding it")
    s.add_argument("--out", help="output CSV path (default: stdout)")
    s.add_argument("--threshold", type=float, default=None)
    s.add_argument("--deterioration-threshold", type=float, default=None)

    p = sub.add_parser("plot", help="redraw the SVG plots from a records file")
    p.add_argument("--records", required=True)
    p.add_argument("--out", help="output directory (default: next to the records)")

    sub.add_parser("presets", help="list packaged preset configs")
    sub.add_parser("schema", help="print the config JSON schema")
    return ap


def _gen_instance(args) -> dict:
    if args.family == "fully_connected":
        inst = gen_fully_connected(args.nodes, 0.0 if args.mean is None else args.mean, args.variance, args.seed)
    else:
        if args.degree is None:
            raise CliError("usage", "--degree is required for k_regular_bimodal")
        inst = gen_k_regular_bimodal(args.nodes, args.degree, 1.0 if args.mean is None else args.mean,
                                     args.variance, args.seed)
    save_instance(inst, args.out)
    return {"instance": args.out, "num_nodes": inst.num_nodes, "num_edges": inst.num_edges}


def _apply_overrides(cfg, args):
    doc = cfg.model_dump(mode="json")
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.out is not None:
        doc["output"]["dir"] = args.out
    if args.algorithm is not None:
        doc["algorithm"] = args.algorithm
    if args.mode is not None:
        doc["mode"] = args.mode
    if args.inits is not None:
        doc["inits"] = args.inits
    if args.noise_p is not None or args.trajectories is not None:
        noise = doc.get("noise") or {"bit_flip_prob": 0.0}
        if args.noise_p is not None:
            noise["bit_flip_prob"] = args.noise_p
        if args.trajectories is not None:
            noise["trajectories"] = args.trajectories
        doc["noise"] = noise
    return validate_config(doc)


def _run(args) -> dict:
    if args.jobs < 1:
        raise CliError("usage", "--jobs must be >= 1")
    cfg = _apply_overrides(load_config(args.config), args)

    def progress(done, total):
        if not args.quiet:
            print(f"\r{done}/{total} runs", end="" if done < total else "\n", file=sys.stderr, flush=True)

    instance = cfg.instance.build()
    records = run_batch(cfg, instance, jobs=args.jobs, progress=progress)
    paths = emit_outputs(records, instance, cfg.output.dir, cfg.name, cfg.model_dump(mode="json"),
                         cfg.improvement_threshold, cfg.deterioration_threshold)
    failed = sum(r.error is not None for r in records)
    return {"out": cfg.output.dir, "runs": len(records), "failed": failed,
            "files": sorted(str(p) for p in paths.values())}


def _records_path(arg: str) -> Path:
    path = Path(arg)
    return path / RECORDS_FILE if path.is_dir() else path


def _thresholds(doc, args):
    cfg = doc.get("config") or {}
    t = args.threshold if args.threshold is not None else cfg.get("escape", {}).get("improvement_threshold", 0.1)
    d = args.deterioration_threshold
    return t, (d if d is not None else cfg.get("deterioration_threshold", 0.1))


def _summarize(args) -> dict | None:
    records, _, doc = read_records(_records_path(args.records))
    text = stats_csv(all_stats(records, *_thresholds(doc, args)))
    if args.out is None:
        sys.stdout.write(text)
        return None
    Path(args.out).write_text(text)
    return {"stats": args.out}


def _plot(args) -> dict:
    path = _records_path(args.records)
    records, _, doc = read_records(path)
    args.threshold = args.deterioration_threshold = None
    out = Path(args.out) if args.out else path.parent
    out.mkdir(parents=True, exist_ok=True)
    name = (doc.get("config") or {}).get("name", "experiment")
    paths = write_plots(all_stats(records, *_thresholds(doc, args)), records, out, name, doc.get("ground_energy"))
    return {"files": [str(p) for p in paths]}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "gen-instance":
            result = _gen_instance(args)
        elif args.command == "run":
            result = _run(args)
        elif args.command == "summarize":
            result = _summarize(args)
        elif args.command == "plot":
            result = _plot(args)
        elif args.command == "presets":
            result = {"presets": list_presets()}
        else:
            result = config_schema()
    except ConfigError as exc:
        return _fail("config", str(exc), exc.errors)
    except InstanceFormatError as exc:
        return _fail("instance", str(exc), [{"field": exc.field, "message": exc.message}])
    except CliError as exc:
        return _fail(exc.kind, str(exc), exc.details)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(type(exc).__name__, str(exc))
    if result is not None:
        print(json.dumps(result, indent=1))
    return 0


def _fail(kind: str, message: str, details=None) -> int:
    print(json.dumps({"error": kind, "message": message, "details": details}), file=sys.stderr)
    return 2 if kind in ("config", "usage") else 1


if __name__ == "__main__":
    sys.exit(main())
