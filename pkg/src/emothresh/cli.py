"""``emothresh`` command line: segment, oracle, noise, compare, export-suite.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .campaign import (
    CampaignConfig,
    metric_sample,
    read_report,
    run_campaign,
    run_oracle,
    dumps_report,
    write_report,
)
from .emo import EmoParams
from .image_io import (
    ImageFormatError,
    add_gaussian_noise,
    add_salt_pepper,
    load_image,
    save_histogram_file,
    save_image,
)
from .stats import rank_sum_test
from .suite import generate_suite

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3
ALPHA = 0.05


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(report, path):
    if path:
        write_report(report, path)
    else:
        sys.stdout.write(dumps_report(report))


def _fmt_psnr(value):
    return "inf" if value is not None and math.isinf(value) else f"{value:.4f}"


def _summary(report):
    for res in report["results"]:
        for ch in res["channels"]:
            agg = ch["aggregate"]
            print(
                f"k={res['k']} {ch['channel']}: thresholds={tuple(agg['best_thresholds'])} "
                f"fitness={agg['best_fitness']:.6f} psnr={_fmt_psnr(agg['best_psnr'])}"
            )


# campaign flags that map one-to-one onto config fields
_CAMPAIGN_FLAGS = ("method", "k", "runs", "base_seed", "report", "segmented", "jobs")
_EMO_FLAGS = ("iter_max", "iter_local", "delta", "pop_size", "stall_fraction")


def _campaign_config(args) -> CampaignConfig:
    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
    for name in _CAMPAIGN_FLAGS:
        value = getattr(args, name)
        if value is not None:
            doc[name] = value
    emo = dict(doc.get("emo") or {})
    for name in _EMO_FLAGS:
        value = getattr(args, name)
        if value is not None:
            emo[name] = value
    doc["emo"] = emo
    if args.input is not None:
        doc["input"] = args.input
    if "input" not in doc:
        raise UsageError("segment: an input path is required (argument or config)")
    return CampaignConfig.from_dict(doc)


def cmd_segment(args) -> int:
    config = _campaign_config(args)
    report = run_campaign(config)
    _emit(report, config.report)
    if config.report:
        _summary(report)
    return EXIT_OK


def cmd_oracle(args) -> int:
    report = run_oracle(args.input, args.method, args.k)
    _emit(report, args.report)
    if args.report:
        _summary(report)
    return EXIT_OK


def cmd_noise(args) -> int:
    image = load_image(args.input)
    if args.model == "gaussian":
        noisy = add_gaussian_noise(image, mean=args.mean, variance=args.variance, seed=args.seed)
    else:
        noisy = add_salt_pepper(image, fraction=args.fraction, seed=args.seed)
    save_image(noisy, args.output)
    return EXIT_OK


def _sample(path, metric, k, channel):
    values, dropped = metric_sample(read_report(path), metric, k, channel)
    if dropped:
        print(f"warning: {path}: excluded {dropped} run(s) with infinite PSNR", file=sys.stderr)
    if not values:
        raise ValueError(f"{path}: no '{metric}' values to compare")
    return values


def cmd_compare(args) -> int:
    a = _sample(args.report_a, args.metric, args.k, args.channel)
    b = _sample(args.report_b, args.metric, args.k, args.channel)
    res = rank_sum_test(a, b)
    verdict = "significant at 5%" if res.p_value < ALPHA else "not significant at 5%"
    print(f"metric: {args.metric}")
    print(f"samples: {len(a)} vs {len(b)}")
    print(f"rank sum: {res.statistic:g}")
    print(f"method: {res.method}")
    print(f"p-value: {res.p_value:.6g}")
    print(f"verdict: {verdict}")
    return EXIT_OK


def cmd_export_suite(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, hist in generate_suite().items():
        save_histogram_file(hist, out / f"{name}.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    defaults = EmoParams()
    parser = _Parser(prog="emothresh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seg = sub.add_parser("segment", help="run a seeded EMO campaign")
    seg.add_argument("input", nargs="?", help="image (PGM/PPM, or any Pillow format) or histogram file")
    seg.add_argument("--config", help="JSON document with the same fields as the flags")
    seg.add_argument("--method", choices=["otsu", "kapur"])
    seg.add_argument("--k", type=int, nargs="+", help="threshold counts (default 2 3 4 5)")
    seg.add_argument("--runs", type=int, help="runs per k and channel (default 35)")
    seg.add_argument("--base-seed", type=int, help="run r uses seed base_seed + r (default 0)")
    seg.add_argument("--iter-max", type=int, help=f"default {defaults.iter_max}")
    seg.add_argument("--iter-local", type=int, help=f"default {defaults.iter_local}")
    seg.add_argument("--delta", type=float, help=f"default {defaults.delta}")
    seg.add_argument("--pop-size", type=int, help=f"default {defaults.pop_size}")
    seg.add_argument("--stall-fraction", type=float, help=f"default {defaults.stall_fraction}")
    seg.add_argument("--report", help="report path (default: stdout)")
    seg.add_argument("--segmented", help="segmented image path; _k<k> is appended per k")
    seg.add_argument("--jobs", type=int, help="worker processes (default 1)")
    seg.set_defaults(func=cmd_segment)

    ora = sub.add_parser("oracle", help="exhaustive search for k <= 3")
    ora.add_argument("input")
    ora.add_argument("--method", choices=["otsu", "kapur"], default="otsu")
    ora.add_argument("--k", type=int, default=2)
    ora.add_argument("--report", help="report path (default: stdout)")
    ora.set_defaults(func=cmd_oracle)

    noise = sub.add_parser("noise", help="corrupt an image with synthetic noise")
    noise.add_argument("input")
    noise.add_argument("output")
    noise.add_argument("--model", choices=["gaussian", "salt-pepper"], default="gaussian")
    noise.add_argument("--mean", type=float, default=0.0)
    noise.add_argument("--variance", type=float, default=0.1)
    noise.add_argument("--fraction", type=float, default=0.02)
    noise.add_argument("--seed", type=int, default=0)
    noise.set_defaults(func=cmd_noise)

    cmp_ = sub.add_parser("compare", help="two-sided rank-sum test between two reports")
    cmp_.add_argument("report_a")
    cmp_.add_argument("report_b")
    cmp_.add_argument("--metric", choices=["psnr", "fitness", "iterations"], default="psnr")
    cmp_.add_argument("--k", type=int, help="restrict to one threshold count")
    cmp_.add_argument("--channel", help="restrict to one channel (gray, R, G, B)")
    cmp_.set_defaults(func=cmd_compare)

    exp = sub.add_parser("export-suite", help="write the synthetic histogram suite as JSON files")
    exp.add_argument("directory")
    exp.set_defaults(func=cmd_export_suite)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageFormatError) as exc:
        print(f"emothresh: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"emothresh: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
