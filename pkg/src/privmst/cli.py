"""Command-line harness: ``privmst {generate,cluster,sweep,bounds,replay}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible parameters.
All randomness flows from ``--seed``.  ``PRIVMST_THREADS`` caps the number of
worker processes used by ``sweep``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import VARIANTS, partition_agreement, topology_bound
from .datagen import (GeneratorError, PlantedInstance, generate_circles, generate_moons,
                      generate_planted_partition)
from .dbmstclu import run_dbmstclu
from .graph import GraphError, NodePartition, WeightedGraph, minimum_spanning_tree
from .io import read_edge_list, read_partition, write_partition, write_table
from .mechanisms import split_seed
from .pipeline import InfeasibleParameters, PtclustConfig, ptclust

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4

RECORD_FORMAT = "privmst.runrecord"
RECORD_VERSION = 1


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Run records
# --------------------------------------------------------------------------

@dataclass
class RunRecord:
    command: list
    config: dict
    seed: int
    outputs: dict
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"format": RECORD_FORMAT, "version": RECORD_VERSION}
        d.update(asdict(self))
        return d

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        if d.get("format") != RECORD_FORMAT or d.get("version") != RECORD_VERSION:
            raise GraphError("not a version-1 privmst run record")
        return cls(d["command"], d["config"], d["seed"], d["outputs"], d.get("timing", {}))

    @classmethod
    def read(cls, path) -> "RunRecord":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


#: outputs that must match exactly when a record is replayed
REPLAYED_KEYS = ("K", "dbcvi", "cut_edges", "assignment", "clamp_count", "sanitized_weights",
                 "ari", "ari_excluding_singletons")


def run_cluster(g: WeightedGraph, mode: str, seed: int, epsilon: float | None = None,
                mu: float | None = None, tau: float | None = None, p: float | None = None,
                planted: NodePartition | None = None) -> dict:
    """One clustering run; returns a JSON-ready dict of outputs."""
    if mode == "dbmstclu":
        result = run_dbmstclu(minimum_spanning_tree(g))
        clamp, sanitized = 0, None
    elif mode == "ptclust":
        if epsilon is None or mu is None:
            raise UsageError("ptclust needs --epsilon and --mu")
        res = ptclust(g, PtclustConfig(epsilon, mu, tau, p, seed=seed))
        result = res.clustering
        clamp, sanitized = res.provenance.clamp_count, res.provenance.sanitized_weights
    else:
        raise UsageError(f"unknown mode {mode!r}")
    st = result.state
    out = {
        "K": int(st.K),
        "dbcvi": float(st.dbcvi),
        "cut_edges": [int(e) for e in st.cut_edges],
        "cut_endpoints": [list(g.edges[e]) for e in st.cut_edges],
        "assignment": (st.cluster_of + 1).tolist(),
        "clamp_count": int(clamp),
        "sanitized_weights": sanitized,
        "ari": None,
        "ari_excluding_singletons": None,
    }
    if planted is not None:
        part = result.partition
        out["ari"] = partition_agreement(planted, part).adjusted_rand_index
        out["ari_excluding_singletons"] = partition_agreement(
            planted, part, exclude_singletons=True).adjusted_rand_index
    return out


def replay_record(record: RunRecord) -> dict:
    """Re-run ``record`` from its config and seed; return the fresh outputs."""
    cfg = record.config
    g = read_edge_list(cfg["edges"], mu=cfg.get("mu"))
    planted = read_partition(cfg["planted"]) if cfg.get("planted") else None
    return run_cluster(g, cfg["mode"], record.seed, cfg.get("epsilon"), cfg.get("mu"),
                       cfg.get("tau"), cfg.get("p"), planted)


def replays_identically(record: RunRecord) -> bool:
    fresh = replay_record(record)
    return all(fresh[k] == record.outputs[k] for k in REPLAYED_KEYS)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _split_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + (i < extra) for i in range(k)]


def cmd_generate(args) -> int:
    if args.shape == "circles":
        inst = generate_circles(args.seed, args.n, args.wmin, args.wmax, mu=args.mu)
    elif args.shape == "moons":
        inst = generate_moons(args.seed, args.n, args.wmin, args.wmax, mu=args.mu)
    else:
        if args.k < 1 or args.n < 3 * args.k:
            raise GeneratorError("planted shape needs n >= 3k")
        inst = generate_planted_partition(args.seed, _split_sizes(args.n, args.k),
                                          intra_degree=args.intra_degree,
                                          inter_edges_per_pair=args.inter_edges,
                                          w_min=args.wmin, w_max=args.wmax, mu=args.mu)
    for path in inst.write(args.out):
        print(path)
    return EXIT_OK


def _load(args):
    g = read_edge_list(args.edges, mu=getattr(args, "mu", None))
    planted = read_partition(args.planted) if args.planted else None
    if planted is not None and planted.node_count != g.node_count:
        raise GraphError("planted partition and graph disagree on the node count")
    return g, planted


def cmd_cluster(args, argv) -> int:
    if args.mode == "ptclust" and (args.epsilon is None or args.mu is None):
        raise UsageError("mode ptclust requires --epsilon and --mu")
    g, planted = _load(args)
    t0 = time.perf_counter()
    out = run_cluster(g, args.mode, args.seed, args.epsilon, args.mu, args.tau, args.p, planted)
    elapsed = time.perf_counter() - t0
    part_path = args.out + ".partition"
    write_partition(part_path, NodePartition(np.asarray(out["assignment"])))
    out["partition_path"] = part_path
    config = {"mode": args.mode, "edges": os.path.abspath(args.edges),
              "planted": os.path.abspath(args.planted) if args.planted else None,
              "epsilon": args.epsilon, "mu": args.mu, "tau": args.tau, "p": args.p}
    record = RunRecord(list(argv), config, int(args.seed), out, {"seconds": elapsed})
    record.write(args.out + ".record.json")
    line = f"K={out['K']}\tDBCVI={out['dbcvi']:.6f}"
    if out["ari"] is not None:
        line += f"\tARI={out['ari']:.6f}"
    print(line)
    return EXIT_OK


def _sweep_cell(job):
    g, planted, eps, mu, tau, p, seed = job
    try:
        out = run_cluster(g, "ptclust", seed, eps, mu, tau, p, planted)
    except InfeasibleParameters:
        return None
    return out


SWEEP_COLUMNS = ("epsilon", "seed", "K", "dbcvi", "ari", "ari_excluding_singletons", "clamp_count")


def sweep_rows(g, planted, epsilons, seeds: int, master_seed: int, mu: float,
               tau=None, p=None, threads: int = 1) -> list[tuple]:
    """One row per (epsilon, seed) in sorted order; trial j uses ``split_seed(master, j)``."""
    jobs = [(g, planted, float(eps), mu, tau, p, split_seed(master_seed, j))
            for eps in sorted(epsilons) for j in range(seeds)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_sweep_cell, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        outs = [_sweep_cell(j) for j in jobs]
    rows = []
    for job, out in zip(jobs, outs):
        eps, seed = job[2], job[6]
        if out is None:
            rows.append((eps, seed, "NA", "NA", "NA", "NA", "NA"))
        else:
            rows.append((eps, seed, out["K"], out["dbcvi"],
                         "NA" if out["ari"] is None else out["ari"],
                         "NA" if out["ari_excluding_singletons"] is None
                         else out["ari_excluding_singletons"],
                         out["clamp_count"]))
    return rows


def _threads() -> int:
    raw = os.environ.get("PRIVMST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"PRIVMST_THREADS must be an integer, got {raw!r}") from None


def cmd_sweep(args, argv) -> int:
    if not args.epsilons:
        raise UsageError("--epsilons needs at least one value")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    g, planted = _load(args)
    rows = sweep_rows(g, planted, args.epsilons, args.seeds, args.seed, args.mu,
                      args.tau, args.p, _threads())
    meta = {"command": " ".join(argv), "edges": args.edges, "planted": args.planted or "",
            "mu": args.mu, "master_seed": args.seed, "seeds_per_epsilon": args.seeds}
    write_table(args.out, SWEEP_COLUMNS, rows, meta)
    print(args.out)
    return EXIT_OK


BOUND_COLUMNS = ("variant", "epsilon", "delta_u", "bound", "vacuous", "node_count",
                 "edge_count", "alpha_source", "alpha_bar")


def cmd_bounds(args, argv) -> int:
    g, planted = _load(args)
    if planted is None:
        raise UsageError("bounds needs --planted")
    inst = PlantedInstance(g, planted, tuple(float(g.w[e]) for e in range(g.topology.edge_count)
                                             if planted.assignment[g.edges[e][0]]
                                             != planted.assignment[g.edges[e][1]]))
    variants = VARIANTS if args.variant == "both" else (args.variant,)
    rows = []
    for eps in args.epsilons:
        for variant in variants:
            rep = topology_bound(inst, eps, variant=variant)
            rows.append((rep.variant, rep.epsilon, rep.delta_u, rep.bound_value, rep.vacuous,
                         rep.node_count, rep.edge_count, rep.alpha_source,
                         ",".join(repr(a) for a in rep.alpha_bar)))
            print(f"{rep.variant}\teps={rep.epsilon:g}\tbound={rep.bound_value:.6g}"
                  f"\tvacuous={'true' if rep.vacuous else 'false'}")
    write_table(args.out, BOUND_COLUMNS, rows, {"command": " ".join(argv), "edges": args.edges,
                                                 "mu": g.weights.mu})
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    record = RunRecord.read(args.record)
    if replays_identically(record):
        print("identical")
        return EXIT_OK
    print("MISMATCH")
    return EXIT_DATA


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _nonneg(text: str) -> float:
    x = float(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return x


def _eps_list(text: str) -> list[float]:
    return [_positive(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="privmst", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a planted-partition instance")
    gen.add_argument("--shape", choices=("circles", "moons", "planted"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--wmin", type=_positive, default=0.1)
    gen.add_argument("--wmax", type=_positive, default=0.3)
    gen.add_argument("--mu", type=_positive, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--k", type=int, default=2, help="clusters (planted shape)")
    gen.add_argument("--intra-degree", type=int, default=3)
    gen.add_argument("--inter-edges", type=int, default=1)
    gen.add_argument("--out", required=True, help="output prefix")

    def graph_args(p):
        p.add_argument("--edges", required=True)
        p.add_argument("--planted", help="planted partition file (enables ARI)")

    def privacy_args(p):
        p.add_argument("--mu", type=_positive)
        p.add_argument("--tau", type=_nonneg)
        p.add_argument("--p", type=_positive)
        p.add_argument("--seed", type=int, default=0)

    cl = sub.add_parser("cluster", help="run DBMSTClu or PTClust")
    graph_args(cl)
    cl.add_argument("--mode", choices=("dbmstclu", "ptclust"), required=True)
    cl.add_argument("--epsilon", type=_positive)
    privacy_args(cl)
    cl.add_argument("--out", required=True, help="output prefix")

    sw = sub.add_parser("sweep", help="PTClust over an epsilon list and many seeds")
    graph_args(sw)
    sw.add_argument("--epsilons", type=_eps_list, required=True)
    sw.add_argument("--seeds", type=int, default=10)
    privacy_args(sw)
    sw.add_argument("--out", required=True, help="output table")

    bd = sub.add_parser("bounds", help="partitioning-topology lower bounds")
    graph_args(bd)
    bd.add_argument("--epsilons", type=_eps_list, required=True)
    bd.add_argument("--mu", type=_positive)
    bd.add_argument("--variant", choices=VARIANTS + ("both",), default="both")
    bd.add_argument("--out", required=True, help="output table")

    rp = sub.add_parser("replay", help="re-run a run record and compare outputs")
    rp.add_argument("record")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sweep" and args.mu is None:
        parser.print_usage(sys.stderr)
        print("privmst: error: sweep requires --mu", file=sys.stderr)
        return EXIT_USAGE
    handlers = {"generate": lambda a: cmd_generate(a), "cluster": lambda a: cmd_cluster(a, argv),
                "sweep": lambda a: cmd_sweep(a, argv), "bounds": lambda a: cmd_bounds(a, argv),
                "replay": lambda a: cmd_replay(a, argv)}
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"privmst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleParameters, GeneratorError) as exc:
        print(f"privmst: infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GraphError, OSError, ValueError) as exc:
        print(f"privmst: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
