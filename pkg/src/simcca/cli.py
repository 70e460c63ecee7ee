"""Command-line pipeline: simulate, match, scan, evaluate."""

import argparse
import logging
import sys
from dataclasses import replace

from .constrained import OptimizerConfig
from .data import (
    DEFAULT_MAX_DISTANCE_BP,
    atomic_write,
    expand_regions,
    load_view,
    match_probes,
    preprocess_pair,
    read_id_list,
    read_regions,
    write_view,
)
from .errors import SimccaError
from .evaluation import roc_auc, top_k_enrichment
from .pcca import EmConfig
from .scan import CORRELATION_METHODS, PROBABILISTIC_METHODS, MethodChoice, ScanConfig, read_profile, scan
from .synth import generate, planted_probe_ids, planted_spec, truth_json


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _region(text):
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"region must be START:END, got {text!r}")
    return a, b


def cmd_simulate(args):
    spec = planted_spec(args.n, args.p, args.planted or [], args.seed,
                        args.loading, args.noise)
    paired, _, _ = generate(spec)
    write_view(paired.x, args.out_x)
    write_view(paired.y, args.out_y)
    if args.out_truth:
        atomic_write(args.out_truth, truth_json(spec))
    if args.out_positives:
        ids = planted_probe_ids(spec)
        atomic_write(args.out_positives, "# planted probes\n" + "".join(i + "\n" for i in ids))
    return 0


def cmd_match(args):
    paired = match_probes(load_view(args.x), load_view(args.y), args.max_distance_bp)
    lines = ["x_probe_id\ty_probe_id\tchromosome\tx_position\ty_position\tdistance"]
    for i, j, dist in paired.pairs:
        fx, fy = paired.x.features[i], paired.y.features[j]
        lines.append(f"{fx.probe_id}\t{fy.probe_id}\t{fx.chromosome}\t"
                     f"{fx.position}\t{fy.position}\t{dist}")
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_scan(args):
    method = MethodChoice(args.method, args.sigma_t)
    opt = OptimizerConfig(seed=args.seed)
    em = EmConfig(seed=args.seed)
    if args.max_iterations is not None:
        opt = replace(opt, max_iterations=args.max_iterations)
        em = replace(em, max_iterations=args.max_iterations)
    if args.tolerance is not None:
        opt = replace(opt, tolerance=args.tolerance)
        em = replace(em, tolerance=args.tolerance)
    config = ScanConfig(args.epsilon, args.seed, args.workers, args.d, opt, em)

    paired = match_probes(load_view(args.x), load_view(args.y), args.max_distance_bp)
    paired = preprocess_pair(paired, args.log2)
    profile = scan(paired, method, args.window, config)
    profile.write(args.out)
    return 0


def cmd_evaluate(args):
    profile = read_profile(args.profile)
    positives = set()
    listed = read_id_list(args.positives) if args.positives else None
    if args.regions:
        features = [e.feature for e in profile.entries]
        positives.update(expand_regions(read_regions(args.regions), features, listed))
    elif listed is not None:
        positives.update(listed)
    else:
        raise SimccaError("give --positives and/or --regions")
    roc = roc_auc(profile, positives)
    if args.out:
        roc.write(args.out)
    print(f"auc={roc.auc:.6f}")
    if args.top_k:
        top, base = top_k_enrichment(profile, positives, args.top_k)
        print(f"top_{args.top_k}={top:.6f}\tbaseline={base:.6f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simcca", description="Similarity-constrained CCA genome scans."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic planted-signal dataset")
    p.add_argument("--n", type=_positive_int, default=51, help="samples")
    p.add_argument("--p", type=_positive_int, default=100, help="features per view")
    p.add_argument("--planted", type=_region, action="append",
                   help="planted region START:END (end exclusive); repeatable")
    p.add_argument("--loading", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.add_argument("--out-truth")
    p.add_argument("--out-positives")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("match", help="emit the probe pairing table")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--max-distance-bp", type=int, default=DEFAULT_MAX_DISTANCE_BP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("scan", help="sliding-window dependency scan")
    p.add_argument("--x", required=True, help="driver view (e.g. copy number)")
    p.add_argument("--y", required=True)
    p.add_argument("--method", required=True,
                   choices=CORRELATION_METHODS + PROBABILISTIC_METHODS)
    p.add_argument("--window", type=int, default=15)
    p.add_argument("--sigma-t", type=float)
    p.add_argument("--max-distance-bp", type=int, default=DEFAULT_MAX_DISTANCE_BP)
    p.add_argument("--log2", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--d", type=_positive_int, default=1, help="latent dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--max-iterations", type=_positive_int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("evaluate", help="ROC/AUC against known genes")
    p.add_argument("--profile", required=True)
    p.add_argument("--positives", help="probe ids (or region labels with --regions)")
    p.add_argument("--regions", help="label/chromosome/start_bp/end_bp table")
    p.add_argument("--out", help="ROC TSV")
    p.add_argument("--top-k", type=_positive_int)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SimccaError, OSError, ValueError) as err:
        print(f"simcca {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
