"""Segmentation campaigns, oracle runs and the JSON report format.

A report is a JSON document::

    {"schema_version": 1, "method": "emo" | "oracle", "objective": "otsu",
     "config": {...}, "input": {...}, "backend": "cython",
     "results": [{"k": 2, "pooled_psnr": ..., "channels": [
         {"channel": "gray", "runs": [...], "aggregate": {...}}]}]}

Infinite PSNR values are written as ``null`` with a companion
``<key>_infinite: true`` flag, never as a number.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .emo import EmoParams, optimize
from .image_io import (
    CHANNEL_NAMES,
    Histogram,
    ProbDist,
    RasterImage,
    build_histogram,
    load_histogram_file,
    load_image,
    normalize,
    save_image,
    split_channels,
)
from .objectives import ObjectiveKind
from .oracle import MAX_ORACLE_K, exhaustive_search
from .segmentation import (
    histogram_psnr,
    pooled_psnr,
    segment_image,
    squared_error_from_histogram,
)
from .stats import aggregate_runs

SCHEMA_VERSION = 1
MAX_CAMPAIGN_K = 5
PSNR_KEYS = ("psnr", "psnr_mean", "best_psnr", "pooled_psnr")
HISTOGRAM_SUFFIXES = (".json", ".txt", ".hist")


@dataclass
class CampaignConfig:
    input: str
    method: str = "otsu"
    k: tuple = (2, 3, 4, 5)
    runs: int = 35
    base_seed: int = 0
    emo: EmoParams = field(default_factory=EmoParams)
    report: str | None = None
    segmented: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.method = ObjectiveKind.parse(self.method).value
        ks = (self.k,) if isinstance(self.k, int) else tuple(self.k)
        if not ks:
            raise ValueError("need at least one k")
        for k in ks:
            if int(k) != k or not 1 <= k <= MAX_CAMPAIGN_K:
                raise ValueError(f"k must be an integer in [1, {MAX_CAMPAIGN_K}], got {k!r}")
        self.k = tuple(int(k) for k in ks)
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        doc = dict(doc)
        emo = doc.pop("emo", None) or {}
        known = {"input", "method", "k", "runs", "base_seed", "report", "segmented", "jobs"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(emo=EmoParams(**emo), **doc)

    def seed(self, run_index: int) -> int:
        return self.base_seed + run_index

    def echo(self) -> dict:
        # scheduling (jobs) and output paths are excluded so reports compare equal
        return {
            "method": self.method,
            "k": list(self.k),
            "runs": self.runs,
            "base_seed": self.base_seed,
            "emo": self.emo.to_dict(),
        }


@dataclass
class CampaignInput:
    kind: str  # "image" | "histogram"
    name: str
    sha256: str
    channels: list  # [(name, Histogram | ProbDist)]
    image: RasterImage | None = None

    def describe(self) -> dict:
        out = {"name": self.name, "sha256": self.sha256, "type": self.kind,
               "channels": len(self.channels)}
        if self.image is not None:
            out.update(width=self.image.width, height=self.image.height)
        return out


def _is_histogram_path(path: Path, head: bytes) -> bool:
    return path.suffix.lower() in HISTOGRAM_SUFFIXES or head.lstrip()[:1] in (b"[", b"{")


def load_input(path) -> CampaignInput:
    path = Path(path)
    raw = path.read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if _is_histogram_path(path, raw[:64]):
        hist = load_histogram_file(path)
        return CampaignInput("histogram", path.name, digest, [("gray", hist)])
    image = load_image(path)
    names = CHANNEL_NAMES[image.channels]
    chans = [(n, build_histogram(ch)) for n, ch in zip(names, split_channels(image))]
    return CampaignInput("image", path.name, digest, chans, image)


def _as_dist(hist) -> ProbDist:
    return hist if isinstance(hist, ProbDist) else normalize(hist)


def _hist_payload(hist):
    if isinstance(hist, Histogram):
        return ("counts", hist.counts)
    return ("p", hist.p)


def _hist_from_payload(payload):
    tag, arr = payload
    return Histogram(arr) if tag == "counts" else ProbDist(arr)


def _run_one(task):
    """One seeded optimization; a module-level function so it pickles."""
    method, payload, k, emo_kwargs, seed = task
    hist = _hist_from_payload(payload)
    res = optimize(method, _as_dist(hist), k, EmoParams(**emo_kwargs), seed)
    return {
        "seed": seed,
        "thresholds": list(res.best_thresholds),
        "fitness": res.best_fitness,
        "iterations": res.iterations_run,
        "stop_reason": res.stop_reason,
        "evaluations": res.evaluations,
        "psnr": histogram_psnr(hist, res.best_thresholds),
        "history": res.history,
    }


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _emo_kwargs(params: EmoParams) -> dict:
    return dict(params.to_dict(), lower=params.lower, upper=params.upper)


def _pooled(channels_hist, thresholds):
    parts = [squared_error_from_histogram(h, th) for h, th in zip(channels_hist, thresholds)]
    return pooled_psnr(parts)


def _k_output_path(base: str, k: int, n_k: int) -> Path:
    p = Path(base)
    return p if n_k == 1 else p.with_name(f"{p.stem}_k{k}{p.suffix}")


def run_campaign(config: CampaignConfig, source: CampaignInput | None = None) -> dict:
    """Run ``config.runs`` seeded optimizations per channel and per k."""
    source = source or load_input(config.input)
    emo_kwargs = _emo_kwargs(config.emo)
    tasks = [
        (config.method, _hist_payload(hist), k, emo_kwargs, config.seed(r))
        for k in config.k
        for _, hist in source.channels
        for r in range(config.runs)
    ]
    records = iter(_map(_run_one, tasks, config.jobs))

    results = []
    for k in config.k:
        channels = []
        for name, _ in source.channels:
            runs = [next(records) for _ in range(config.runs)]
            channels.append({"channel": name, "runs": runs, "aggregate": aggregate_runs(runs)})
        best = [tuple(c["aggregate"]["best_thresholds"]) for c in channels]
        results.append({
            "k": k,
            "pooled_psnr": _pooled([h for _, h in source.channels], best),
            "channels": channels,
        })

    if config.segmented and source.image is not None:
        for res in results:
            best = [tuple(c["aggregate"]["best_thresholds"]) for c in res["channels"]]
            out = _k_output_path(config.segmented, res["k"], len(results))
            save_image(segment_image(source.image, best), out)

    return _report("emo", config.method, config.echo(), source, results)


def run_oracle(input_path, method, k, source: CampaignInput | None = None) -> dict:
    method = ObjectiveKind.parse(method).value
    if not 1 <= k <= MAX_ORACLE_K:
        raise ValueError(f"oracle supports 1 <= k <= {MAX_ORACLE_K}, got {k}")
    source = source or load_input(input_path)
    channels = []
    for name, hist in source.channels:
        res = exhaustive_search(method, _as_dist(hist), k)
        run = {
            "seed": None,
            "thresholds": list(res.best_thresholds),
            "fitness": res.best_fitness,
            "iterations": None,
            "stop_reason": "exhaustive",
            "evaluations": res.evaluations,
            "optima_count": res.optima_count,
            "psnr": histogram_psnr(hist, res.best_thresholds),
        }
        channels.append({"channel": name, "runs": [run], "aggregate": aggregate_runs([run])})
    best = [tuple(c["aggregate"]["best_thresholds"]) for c in channels]
    results = [{
        "k": k,
        "pooled_psnr": _pooled([h for _, h in source.channels], best),
        "channels": channels,
    }]
    return _report("oracle", method, {"method": method, "k": [k]}, source, results)


def _report(method_tag, objective, config_echo, source, results) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": f"emothresh {__version__}",
        "method": method_tag,
        "objective": objective,
        "backend": BACKEND,
        "config": config_echo,
        "input": source.describe(),
        "results": results,
    }


# --------------------------------------------------------------------------
# serialization


def _encode(obj):
    if isinstance(obj, dict):
        out = {}
        for key, value in obj.items():
            if key in PSNR_KEYS:
                inf = value is not None and math.isinf(value)
                out[key] = None if inf else value
                out[f"{key}_infinite"] = inf
            else:
                out[key] = _encode(value)
        return out
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        out = {}
        for key, value in obj.items():
            if key.endswith("_infinite") and key[: -len("_infinite")] in PSNR_KEYS:
                continue
            if key in PSNR_KEYS and obj.get(f"{key}_infinite"):
                out[key] = math.inf
            else:
                out[key] = _decode(value)
        return out
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_encode(report), indent=2, allow_nan=False) + "\n"


def loads_report(text: str) -> dict:
    doc = _decode(json.loads(text))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {doc.get('schema_version')!r}")
    return doc


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report))


def read_report(path) -> dict:
    return loads_report(Path(path).read_text())


def metric_sample(report: dict, metric: str, k=None, channel=None):
    """Per-run values of ``metric`` from a report, plus the count of excluded runs.

    Infinite PSNR runs are dropped and counted in the second return value.
    """
    key = {"psnr": "psnr", "fitness": "fitness", "iterations": "iterations"}.get(metric)
    if key is None:
        raise ValueError(f"unknown metric {metric!r}")
    values, dropped = [], 0
    for res in report["results"]:
        if k is not None and res["k"] != k:
            continue
        for ch in res["channels"]:
            if channel is not None and ch["channel"] != channel:
                continue
            for run in ch["runs"]:
                v = run.get(key)
                if v is None:
                    continue
                if key == "psnr" and math.isinf(v):
                    dropped += 1
                    continue
                values.append(v)
    return values, dropped
