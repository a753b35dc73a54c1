"""Command-line driver: train-supernet, search, compare, transfer, eval-arch.

Each command takes one or more config files and an optional ``--seed`` that
replaces ``run.seeds``. Artifacts go to ``<run.output_dir>/<command>-<hash>``
where the hash covers the canonical config text, so two different configs
never share a directory.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
errors; errors print one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from pathnas import supernet as sn
from pathnas.config import ConfigError, ExperimentConfig, load_config
from pathnas.oracle import brute_force_optimum, from_document, make_landscape, to_document
from pathnas.sampler import PermutationScheduler
from pathnas.search import (
    SearchBudget,
    SearchResult,
    ea_search,
    path_priority_search,
    random_search,
)
from pathnas.searchspace import format_arch, parse_arch, space_size, validate

REPORT_FORMAT = "pathnas-report/1"
LOG_HEADER = ("method", "cycle", "draw", "architecture", "fitness")

log = logging.getLogger("pathnas")


# ---------------------------------------------------------------------------
# persistence


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(path: Path, report: dict) -> None:
    path.write_text(dump_report(report))


def read_report(path) -> dict:
    report = json.loads(Path(path).read_text())
    if report.get("format") != REPORT_FORMAT:
        raise ValueError(f"{path}: not a run report")
    return report


def format_log(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for r in records:
        writer.writerow([r.method, r.cycle, r.draw, format_arch(r.architecture), repr(r.fitness)])
    return buf.getvalue()


def run_dir(cfg: ExperimentConfig, command: str, salt: str = "") -> Path:
    digest = hashlib.sha256((cfg.to_text() + salt).encode()).hexdigest()[:12]
    path = Path(cfg.run.output_dir) / f"{command}-{digest}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _new_report(command: str, cfg: ExperimentConfig) -> dict:
    return {
        "format": REPORT_FORMAT,
        "command": command,
        "config": cfg.to_items(),
        "evaluator": cfg.evaluator_signature(),
        "runs": [],
    }


# ---------------------------------------------------------------------------
# evaluators


def build_landscape(cfg: ExperimentConfig, seed: int):
    oc = cfg.oracle
    if oc.path:
        land = from_document(Path(oc.path).read_text())
        if land.space.choice_counts != cfg.space.choice_counts:
            raise ValueError(f"landscape {oc.path} does not match the configured space")
        return land
    land_seed = seed if oc.seed is None else oc.seed
    return make_landscape(
        cfg.space, oc.kind, land_seed,
        interaction_count=oc.interaction_count,
        interaction_scale=oc.interaction_scale,
        noise_sigma=oc.noise_sigma,
        noise_seed=oc.noise_seed,
    )


def _hyper(cfg: ExperimentConfig) -> sn.Hyper:
    s = cfg.supernet
    return sn.Hyper(learning_rate=s.learning_rate, momentum=s.momentum,
                    weight_decay=s.weight_decay, hidden_dim=s.hidden_dim)


def _task(cfg: ExperimentConfig) -> sn.ToyTask:
    t = cfg.task
    return sn.make_toy_task(t.input_dim, t.num_classes, t.clusters_per_class,
                            t.n_train, t.n_val, t.spread, seed=t.seed)


def build_evaluator(cfg: ExperimentConfig, seed: int):
    """Return ``(evaluator, landscape_or_None)`` for one run seed."""
    if cfg.evaluator == "oracle":
        land = build_landscape(cfg, seed)
        return land, land
    path = cfg.supernet.checkpoint
    if not path:
        raise FileNotFoundError("supernet.checkpoint is not set")
    state, _ = sn.load_checkpoint(path)
    if state.space.choice_counts != cfg.space.choice_counts:
        raise ValueError(f"checkpoint {path} does not match the configured space")
    task = _task(cfg)

    def evaluate(arch):
        return sn.estimate_fitness(state, arch, task.x_val, task.y_val)

    return evaluate, None


def _optimum(cfg: ExperimentConfig, land):
    if land is None or space_size(cfg.space) > cfg.run.enumeration_cap:
        return None
    return brute_force_optimum(land, cfg.run.enumeration_cap)


def run_method(cfg: ExperimentConfig, evaluator, seed: int) -> SearchResult:
    par = cfg.run.parallelism
    if cfg.method == "path-priority":
        pp = cfg.path_priority
        return path_priority_search(cfg.space, evaluator, cfg.budget, seed, K=pp.K,
                                    reseed_per_cycle=pp.reseed_per_cycle, parallelism=par)
    if cfg.method == "ea":
        return ea_search(cfg.space, evaluator, cfg.ea, seed, parallelism=par)
    return random_search(cfg.space, evaluator, cfg.random.n, seed, parallelism=par)


# ---------------------------------------------------------------------------
# commands


def cmd_train_supernet(cfg: ExperimentConfig, resume: str | None = None) -> list[Path]:
    """Fair supernet training per seed; returns the checkpoint paths."""
    if cfg.evaluator != "supernet":
        raise ConfigError("train-supernet needs evaluator.kind = supernet")
    start = time.perf_counter()
    salt = ""
    if resume:
        salt = "resume:" + hashlib.sha256(Path(resume).read_bytes()).hexdigest()
    out = run_dir(cfg, "train-supernet", salt)
    report = _new_report("train-supernet", cfg)
    task = _task(cfg)
    paths = []
    for seed in cfg.run.seeds:
        if resume:
            state, sampler = sn.load_checkpoint(resume)
            if state.space != cfg.space:
                raise ValueError(f"checkpoint {resume} does not match the configured space")
            sampler = sampler or PermutationScheduler(state.space, state.seed)
        else:
            state = sn.SupernetState(cfg.space, task.input_dim, task.num_classes, _hyper(cfg), seed)
            sampler = PermutationScheduler(cfg.space, seed)
        losses = sn.train(state, task, cfg.supernet.macro_steps, cfg.supernet.batch_size, sampler)
        seed_dir = out / f"seed-{seed}"
        seed_dir.mkdir(exist_ok=True)
        ckpt = seed_dir / "supernet.ckpt"
        sn.save_checkpoint(state, ckpt, sampler)
        paths.append(ckpt)
        fairness = {
            "update_counts": [c.tolist() for c in state.update_counts],
            "activation_counts": sampler.fairness_report(),
            "strictly_fair": all(len(set(c.tolist())) == 1 for c in state.update_counts),
        }
        (seed_dir / "fairness.json").write_text(json.dumps(fairness, indent=2, sort_keys=True) + "\n")
        window = state.hyper.accumulation_window
        report["runs"].append({
            "seed": seed,
            "checkpoint": str(ckpt),
            "macro_steps": state.macro_steps,
            "fairness": fairness,
            "first_window_loss": float(np.mean(losses[:window])) if losses else None,
            "last_window_loss": float(np.mean(losses[-window:])) if losses else None,
        })
    report["wall_clock_seconds"] = time.perf_counter() - start
    write_report(out / "report.json", report)
    return paths


def cmd_search(cfg: ExperimentConfig) -> dict:
    start = time.perf_counter()
    out = run_dir(cfg, "search")
    report = _new_report("search", cfg)
    report["method"] = cfg.method
    report["declared_evaluations"] = cfg.declared_evaluations()
    for seed in cfg.run.seeds:
        evaluator, land = build_evaluator(cfg, seed)
        result = run_method(cfg, evaluator, seed)
        seed_dir = out / f"seed-{seed}"
        seed_dir.mkdir(exist_ok=True)
        (seed_dir / "evaluations.csv").write_text(format_log(result.log))
        if land is not None:
            (seed_dir / "landscape.json").write_text(to_document(land))
        opt = _optimum(cfg, land)
        run = {
            "seed": seed,
            "best_architecture": format_arch(result.best),
            "best_fitness": result.best_fitness,
            "evaluations": result.evaluations,
            "optimum_architecture": format_arch(opt[0]) if opt else None,
            "optimum_fitness": opt[1] if opt else None,
        }
        if result.leaderboard is not None:
            board = result.leaderboard
            (seed_dir / "leaderboard.txt").write_text(board.dump())
            run["leaderboard"] = board.to_dict()
            run["tied_layers"] = board.tied_layers()
            fair = PermutationScheduler(cfg.space, seed)
            if not cfg.path_priority.reseed_per_cycle:
                fair.draw(cfg.budget.total)
                run["fairness"] = fair.fairness_report()
        report["runs"].append(run)
    report["wall_clock_seconds"] = time.perf_counter() - start
    write_report(out / "report.json", report)
    report["run_dir"] = str(out)
    return report


def compare_reports(reports: list[dict]) -> list[dict]:
    """One row per report: method, budget, mean/std best fitness, win rate."""
    if len(reports) < 2:
        raise ValueError("need at least two runs")
    if any(r["evaluator"] != reports[0]["evaluator"] for r in reports):
        raise ValueError("evaluator mismatch")
    seeds = [[run["seed"] for run in r["runs"]] for r in reports]
    if any(s != seeds[0] for s in seeds):
        raise ValueError("seed mismatch")
    rows = []
    for r in reports:
        fits = np.array([run["best_fitness"] for run in r["runs"]])
        opts = [run.get("optimum_fitness") for run in r["runs"]]
        win = None
        if all(o is not None for o in opts):
            win = float(np.mean([f >= o for f, o in zip(fits, opts)]))
        rows.append({
            "method": r["method"],
            "budget": r["declared_evaluations"],
            "mean_best_fitness": float(fits.mean()),
            "std_best_fitness": float(fits.std()),
            "win_rate": win,
        })
    return rows


def format_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = ("method", "budget", "mean_best_fitness", "std_best_fitness", "win_rate")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow(["" if row[c] is None else row[c] for c in cols])
    return buf.getvalue()


def cmd_compare(cfgs: list[ExperimentConfig]) -> str:
    if len(cfgs) < 2:
        raise ValueError("need at least two runs")
    sigs = [c.evaluator_signature() for c in cfgs]
    if any(s != sigs[0] for s in sigs):
        raise ValueError("evaluator mismatch")
    reports = [cmd_search(c) for c in cfgs]
    table = format_table(compare_reports(reports))
    out = run_dir(cfgs[0], "compare", "".join(c.digest() for c in cfgs[1:]))
    (out / "comparison.csv").write_text(table)
    return table


def cmd_transfer(source: ExperimentConfig, target: ExperimentConfig) -> dict:
    """Search on the source landscape, score the result on the target, and
    compare against a search run natively on the target."""
    if source.space.choice_counts != target.space.choice_counts:
        raise ValueError("space mismatch")
    if source.evaluator != "oracle" or target.evaluator != "oracle":
        raise ConfigError("transfer needs oracle evaluators on both sides")
    start = time.perf_counter()
    out = run_dir(source, "transfer", target.to_text())
    report = _new_report("transfer", source)
    report["target_config"] = target.to_items()
    report["target_evaluator"] = target.evaluator_signature()
    for seed in source.run.seeds:
        src_land = build_landscape(source, seed)
        tgt_land = build_landscape(target, seed)
        src = path_priority_search(source.space, src_land, source.budget, seed)
        native = path_priority_search(target.space, tgt_land, target.budget, seed)
        transfer_fit = tgt_land(src.best)
        opt = _optimum(target, tgt_land)
        report["runs"].append({
            "seed": seed,
            "source_architecture": format_arch(src.best),
            "transfer_fitness": transfer_fit,
            "native_architecture": format_arch(native.best),
            "native_fitness": native.best_fitness,
            "gap": native.best_fitness - transfer_fit,
            "target_optimum_fitness": opt[1] if opt else None,
        })
    gaps = [r["gap"] for r in report["runs"]]
    report["mean_gap"] = float(np.mean(gaps))
    report["wall_clock_seconds"] = time.perf_counter() - start
    write_report(out / "report.json", report)
    report["run_dir"] = str(out)
    return report


def cmd_eval_arch(cfg: ExperimentConfig, arch_text: str) -> dict:
    try:
        arch = parse_arch(arch_text)
    except ValueError as exc:
        raise ConfigError(f"--arch: {exc}") from None
    if not validate(cfg.space, arch):
        raise ConfigError(f"--arch {arch_text!r} does not fit the configured space")
    start = time.perf_counter()
    out = run_dir(cfg, "eval-arch", arch_text)
    report = _new_report("eval-arch", cfg)
    for seed in cfg.run.seeds:
        evaluator, _ = build_evaluator(cfg, seed)
        report["runs"].append({"seed": seed, "architecture": format_arch(arch),
                               "fitness": float(evaluator(arch))})
    report["wall_clock_seconds"] = time.perf_counter() - start
    write_report(out / "report.json", report)
    report["run_dir"] = str(out)
    return report


# ---------------------------------------------------------------------------
# entry point


def _load(path: str, seed: int | None) -> ExperimentConfig:
    cfg = load_config(path)
    return cfg if seed is None else cfg.with_seeds([seed])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathnas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, nargs=None):
        p = sub.add_parser(name, help=help)
        p.add_argument("config", nargs=nargs)
        p.add_argument("--seed", type=int, default=None, help="override run.seeds")
        return p

    p = add("train-supernet", "fair supernet training")
    p.add_argument("--resume", default=None, help="continue from this checkpoint")
    add("search", "run the configured search method")
    add("compare", "run several searches on one evaluator and tabulate them", nargs="+")
    add("transfer", "search on a source landscape, evaluate on a target", nargs=2)
    p = add("eval-arch", "evaluate one architecture")
    p.add_argument("--arch", required=True, help="comma-separated choice indices")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train-supernet":
            for path in cmd_train_supernet(_load(args.config, args.seed), args.resume):
                print(path)
        elif args.command == "search":
            report = cmd_search(_load(args.config, args.seed))
            for run in report["runs"]:
                print(f"seed={run['seed']} best={run['best_architecture']} "
                      f"fitness={run['best_fitness']!r} evaluations={run['evaluations']}")
            print(report["run_dir"])
        elif args.command == "compare":
            print(cmd_compare([_load(p, args.seed) for p in args.config]), end="")
        elif args.command == "transfer":
            src, tgt = (_load(p, args.seed) for p in args.config)
            report = cmd_transfer(src, tgt)
            for run in report["runs"]:
                print(f"seed={run['seed']} transfer={run['transfer_fitness']!r} "
                      f"native={run['native_fitness']!r} gap={run['gap']!r}")
            print(report["run_dir"])
        else:
            report = cmd_eval_arch(_load(args.config, args.seed), args.arch)
            for run in report["runs"]:
                print(f"seed={run['seed']} fitness={run['fitness']!r}")
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 1
    except Exception as exc:
        print(json.dumps({"error": "runtime", "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
