"""Command-line workflows: simulate, fit, diagnose, experiment, rerun.

Artifact conventions
--------------------
Data files are headerless CSV (UTF-8, '\\n' line ends, '.' decimal, shortest
round-trip float formatting).  Reports are JSON with sorted keys.  Chains are
JSONL: a metadata object on line one, then one state record per line.  Every
command writes a manifest recording the command, the fully resolved options,
the seed, SHA-256 hashes of the inputs, and the package version; `rerun
<manifest>` repeats the run and reproduces the outputs byte for byte.

Randomness
----------
Each command takes one --seed.  Philox streams are derived from it: data
simulation uses stream 0, chain c draws iteration t from stream
(c + 1) * 2**40 + t, the experiment harness uses streams 900000 + i (data)
and 950000 + i (metric sampling) for axis position i, and diagnostics use
stream 0 of the diagnose seed.

Exit codes: 0 success, 2 configuration or constraint problem, 3 data or
support problem, 4 corrupt artifact.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .angular import AngularBP, validate_bp
from .core import ModelSpec
from .errors import (
    CapabilityError,
    ConfigError,
    ConstraintError,
    CorruptArtifactError,
    DomainError,
    StructuralError,
)
from .inference import (
    SamplerConfig,
    chain_from_records,
    parse_chain_line,
    posterior_mean_model,
    posterior_summary,
    run_mcmc,
    state_record,
)
from .metrics import (
    experiment_config_from_dict,
    hellinger_mc,
    ks_angular2,
    l1_angular,
)
from .metrics import run_experiment as _run_experiment_cells
from .priors import prior_config_from_dict
from .simulate import (
    EXAMPLE_NAMES,
    SeededRng,
    block_maxima,
    gen_example,
    sample_maxstable,
)

__all__ = [
    "RunManifest",
    "cmd_simulate",
    "cmd_fit",
    "cmd_diagnose",
    "cmd_experiment",
    "cmd_rerun",
    "main",
]

_CHAIN_FORMAT = "maxstable-chain"


# --------------------------------------------------------------------------
# file primitives
# --------------------------------------------------------------------------

def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str, doc) -> None:
    _write_text(path, _json_text(doc))


def _load_json(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CorruptArtifactError(
            f"{what} {path!r} is not valid JSON: {exc}", line=exc.lineno
        ) from None


def write_csv(path: str, rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [",".join(repr(float(v)) for v in row) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def read_csv(path: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path!r}: {exc}") from None
    except ValueError as exc:
        raise CorruptArtifactError(f"data file {path!r} is not numeric CSV: {exc}") from None


# --------------------------------------------------------------------------
# SVG line charts (static, dependency-free)
# --------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _svg_chart(path: str, series, title: str, x_label: str, y_label: str) -> None:
    """Write a line chart; series is a list of (label, xs, ys) triples."""
    width, height = 640, 400
    left, right, top, bottom = 64, 24, 40, 48
    pts = [
        (float(x), float(y))
        for _, xs, ys in series
        for x, y in zip(xs, ys)
        if math.isfinite(float(x)) and math.isfinite(float(y))
    ]
    if pts:
        xmin = min(p[0] for p in pts)
        xmax = max(p[0] for p in pts)
        ymin = min(p[1] for p in pts)
        ymax = max(p[1] for p in pts)
    else:
        xmin, xmax, ymin, ymax = 0.0, 1.0, 0.0, 1.0
    if xmax <= xmin:
        xmax = xmin + 1.0
    if ymax <= ymin:
        ymax = ymin + 1.0
    pad = 0.04 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def sx(v: float) -> float:
        return left + (v - xmin) / (xmax - xmin) * (width - left - right)

    def sy(v: float) -> float:
        return height - bottom - (v - ymin) / (ymax - ymin) * (height - top - bottom)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
        f'y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="16" y="{(top + height - bottom) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(top + height - bottom) / 2:.1f})">{y_label}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = xmin + frac * (xmax - xmin)
        yv = ymin + frac * (ymax - ymin)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - bottom + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{left - 6}" y="{sy(yv) + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{yv:.4g}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(
            f"{sx(float(x)):.2f},{sy(float(y)):.2f}"
            for x, y in zip(xs, ys)
            if math.isfinite(float(x)) and math.isfinite(float(y))
        )
        if coords:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{width - right - 6}" y="{top + 14 + 14 * idx}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    _write_text(path, "\n".join(parts) + "\n")


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------

class RunManifest:
    """Reproduction record: command, resolved options, seed, input hashes."""

    def __init__(self, command: str, options: dict, seed: int, inputs: dict, outputs: list):
        self.command = command
        self.options = options
        self.seed = seed
        self.inputs = inputs
        self.outputs = outputs

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "options": self.options,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": __version__,
            "rng": {
                "bit_generator": "Philox",
                "keying": "64-bit key pair (seed, stream)",
                "streams": {
                    "simulate": "stream 0",
                    "fit": "chain c, iteration t: stream (c + 1) * 2**40 + t",
                    "diagnose": "stream 0 of the diagnose seed",
                    "experiment": "axis position i: data 900000 + i, metrics 950000 + i",
                },
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunManifest":
        try:
            return cls(
                command=doc["command"],
                options=doc["options"],
                seed=doc["seed"],
                inputs=doc["inputs"],
                outputs=doc["outputs"],
            )
        except (KeyError, TypeError) as exc:
            raise CorruptArtifactError(f"manifest is missing {exc}") from None


def _write_manifest(path: str, command: str, options: dict, seed: int,
                    input_paths: list, outputs: list) -> None:
    inputs = {p: _sha256(p) for p in input_paths}
    manifest = RunManifest(command, options, seed, inputs, outputs + [path])
    write_json(path, manifest.to_dict())


# --------------------------------------------------------------------------
# model documents
# --------------------------------------------------------------------------

def _model_from_document(doc: dict) -> ModelSpec:
    """Accept either a full model document or a bare angular-measure one."""
    if isinstance(doc, dict) and "angular" in doc:
        spec = ModelSpec.from_dict(doc)
    else:
        spec = ModelSpec(AngularBP.from_dict(doc))
    report = validate_bp(spec.angular)
    if not report.ok:
        detail = "; ".join(f"{name} (residual {res:.3e})" for name, res in report.violations)
        raise ConstraintError(f"invalid angular model: {detail}")
    return spec


def _load_model(path: str) -> ModelSpec:
    return _model_from_document(_load_json(path, "model file"))


# --------------------------------------------------------------------------
# chain files
# --------------------------------------------------------------------------

def _chain_meta(d: int, family: str, chain_index: int, opts: dict) -> dict:
    return {
        "format": _CHAIN_FORMAT,
        "d": d,
        "family": family,
        "chain": chain_index,
        "seed": opts["seed"],
        "burnin": opts["burnin"],
        "thinning": opts["thin"],
        "iterations": opts["iterations"],
    }


def _record_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


def _read_chain_file(path: str):
    """Return (meta, records) from a chain JSONL file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read chain file {path!r}: {exc}") from None
    if not lines:
        raise CorruptArtifactError(f"chain file {path!r} is empty", line=1)
    try:
        meta = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptArtifactError(
            f"chain line 1 is not valid JSON: {exc}", line=1
        ) from None
    if not isinstance(meta, dict) or meta.get("format") != _CHAIN_FORMAT:
        raise CorruptArtifactError(
            f"chain file {path!r} does not start with a {_CHAIN_FORMAT} header", line=1
        )
    records = [
        parse_chain_line(line, number)
        for number, line in enumerate(lines[1:], start=2)
        if line.strip()
    ]
    return meta, records


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(opts: dict) -> list:
    out = opts["out"]
    seed = opts["seed"]
    n = opts["n"]
    inputs = []
    if opts.get("model"):
        spec = _load_model(opts["model"])
        inputs.append(opts["model"])
        rows = sample_maxstable(spec, SeededRng(seed), n=n)
    elif opts.get("example"):
        rows = gen_example(
            opts["example"],
            n,
            SeededRng(seed),
            rho=tuple(opts.get("rho") or (1.0, 2.0)),
            theta=opts.get("theta", 3.0),
        )
    else:
        raise ConfigError("simulate needs either --model or --example")
    if opts.get("block"):
        rows = block_maxima(rows, int(opts["block"]))
    write_csv(out, rows)
    _write_manifest(out + ".manifest.json", "simulate", opts, seed, inputs, [out])
    return [out, out + ".manifest.json"]


# --------------------------------------------------------------------------
# fit
# --------------------------------------------------------------------------

def _chain_path(out: str, index: int, chains: int) -> str:
    if chains == 1:
        return out
    stem, ext = os.path.splitext(out)
    return f"{stem}.c{index}{ext or '.jsonl'}"


def _fit_priors(opts: dict, d: int):
    family = opts["family"]
    doc = {
        "degree": {
            "q": opts["degree_q"],
            "k_min": opts.get("k_min"),
            "k_cap": opts.get("k_cap"),
        }
    }
    if family != "simple":
        doc["margins"] = {
            "family": family,
            "shape_bounds": opts.get("shape_bounds"),
        }
        doc["eb"] = {"estimator": opts.get("eb_estimator"), "m": opts.get("eb_m")}
    return prior_config_from_dict(doc, d)


def _sanitize_rates(rates: dict) -> dict:
    return {
        move: (None if math.isnan(rate) else rate) for move, rate in rates.items()
    }


def cmd_fit(opts: dict) -> list:
    raw = read_csv(opts["data"])
    family = opts["family"]
    if opts.get("eb_m"):
        data = block_maxima(raw, int(opts["eb_m"]))
        raw_data = raw
    else:
        data = raw
        raw_data = None
    d = data.shape[1]
    priors = _fit_priors(opts, d)
    chains = opts["chains"]
    sampler = SamplerConfig(
        iterations=opts["iterations"],
        burnin=opts["burnin"],
        thinning=opts["thin"],
        weight_step=opts["weight_step"],
        margin_step=opts["margin_step"],
        transdim_prob=opts["transdim_prob"],
        transdim_conc=opts["transdim_conc"],
        seed=opts["seed"],
        chains=chains,
    )

    paths = [_chain_path(opts["out"], i, chains) for i in range(chains)]
    outputs = []

    if opts.get("resume"):
        if chains != 1:
            raise ConfigError("--resume is supported for single-chain runs only")
        meta, records = _read_chain_file(paths[0])
        for key, want in (("d", d), ("family", family), ("seed", opts["seed"]),
                          ("burnin", opts["burnin"]), ("thinning", opts["thin"])):
            if meta.get(key) != want:
                raise ConfigError(
                    f"chain file {paths[0]!r} was written with {key}={meta.get(key)!r}, "
                    f"resume requested {key}={want!r}"
                )
        if not records:
            raise ConfigError("chain file has no states to resume from")
        if records[-1]["iter"] >= opts["iterations"]:
            raise ConfigError(
                f"chain already has {records[-1]['iter']} iterations, "
                f"nothing to add up to {opts['iterations']}"
            )
        fresh: list = []
        chain = run_mcmc(
            data, family, priors, sampler,
            raw_data=raw_data, chain_index=0, sink=fresh.append,
            resume=records[-1],
        )
        lines = [_record_line(_chain_meta(d, family, 0, opts))]
        lines += [_record_line(r) for r in records]
        lines += [_record_line(r) for r in fresh]
        _write_text(paths[0], "\n".join(lines) + "\n")
        chains_out = [chain_from_records(records + fresh, d, family)]
        rates = [_sanitize_rates(chain.acceptance_rates())]
    else:
        def one(index: int):
            sink: list = []
            chain = run_mcmc(
                data, family, priors, sampler,
                raw_data=raw_data, chain_index=index, sink=sink.append,
            )
            return chain, sink

        cap = int(os.environ.get("MAXSTABLE_THREADS", str(chains)))
        workers = max(1, min(chains, cap))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(chains)))
        else:
            results = [one(i) for i in range(chains)]
        chains_out = []
        rates = []
        for index, (chain, sink) in enumerate(results):
            lines = [_record_line(_chain_meta(d, family, index, opts))]
            lines += [_record_line(r) for r in sink]
            _write_text(paths[index], "\n".join(lines) + "\n")
            chains_out.append(chain)
            rates.append(_sanitize_rates(chain.acceptance_rates()))
    outputs += paths

    summary_path = opts.get("summary") or opts["out"] + ".summary.json"
    write_json(
        summary_path,
        {
            "family": family,
            "d": d,
            "acceptance": rates,
            "chains": [posterior_summary(chain) for chain in chains_out],
        },
    )
    outputs.append(summary_path)
    manifest_path = opts["out"] + ".manifest.json"
    _write_manifest(manifest_path, "fit", opts, opts["seed"], [opts["data"]], outputs)
    return outputs + [manifest_path]


# --------------------------------------------------------------------------
# diagnose
# --------------------------------------------------------------------------

def cmd_diagnose(opts: dict) -> list:
    meta, records = _read_chain_file(opts["chain"])
    if not records:
        raise CorruptArtifactError(f"chain file {opts['chain']!r} has no states", line=1)
    chain = chain_from_records(records, int(meta["d"]), meta["family"])
    doc: dict = {"chain": opts["chain"], "states": len(records)}
    doc["summary"] = posterior_summary(chain)
    inputs = [opts["chain"]]

    if opts.get("truth"):
        spec = _load_model(opts["truth"])
        inputs.append(opts["truth"])
        if spec.angular.d != chain.d:
            raise StructuralError(
                f"truth model has d={spec.angular.d}, chain has d={chain.d}"
            )
        metrics: dict = {}
        if chain.d == 2:
            mean_model = posterior_mean_model(chain)
            metrics["ks_angular2"] = ks_angular2(mean_model, spec.angular)
            metrics["l1_angular"] = l1_angular(mean_model, spec.angular)
        hel = hellinger_mc(
            chain, spec, opts["hellinger_samples"], SeededRng(opts["seed"])
        )
        metrics["hellinger"] = {
            "value": hel.value,
            "squared": hel.squared,
            "se": hel.se,
            "support_flag": hel.support_flag,
        }
        doc["metrics"] = metrics

    write_json(opts["out"], doc)
    outputs = [opts["out"]]

    if opts.get("svg_dir"):
        os.makedirs(opts["svg_dir"], exist_ok=True)
        iters = [r["iter"] for r in records]
        logpost_path = os.path.join(opts["svg_dir"], "logpost-trace.svg")
        _svg_chart(
            logpost_path,
            [("log posterior", iters, [r["logpost"] for r in records])],
            "Log-posterior trace", "iteration", "log posterior",
        )
        degree_path = os.path.join(opts["svg_dir"], "degree-trace.svg")
        _svg_chart(
            degree_path,
            [("degree", iters, [r["k"] for r in records])],
            "Polynomial degree trace", "iteration", "degree",
        )
        outputs += [logpost_path, degree_path]

    manifest_path = opts["out"] + ".manifest.json"
    _write_manifest(manifest_path, "diagnose", opts, opts["seed"], inputs, outputs)
    return outputs + [manifest_path]


# --------------------------------------------------------------------------
# experiment
# --------------------------------------------------------------------------

def cmd_experiment(opts: dict) -> list:
    doc = _load_json(opts["config"], "experiment config")
    cfg = experiment_config_from_dict(doc)
    report = _run_experiment_cells(cfg, workers=opts.get("workers"))

    out_dir = opts["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    write_json(report_path, report.to_dict())

    csv_path = os.path.join(out_dir, "report.csv")
    lines = [
        f"{metric},{axis},{repr(float(median))}"
        for metric in report.metrics
        for axis, median in sorted(report.medians[metric].items())
    ]
    _write_text(csv_path, "\n".join(lines) + ("\n" if lines else ""))

    outputs = [report_path, csv_path]
    for metric in report.metrics:
        by_axis = sorted(report.medians[metric].items())
        svg_path = os.path.join(out_dir, f"trajectory-{metric}.svg")
        _svg_chart(
            svg_path,
            [(metric, [a for a, _ in by_axis], [v for _, v in by_axis])],
            f"Median {metric} vs {report.axis_name}",
            report.axis_name,
            metric,
        )
        outputs.append(svg_path)

    manifest_path = os.path.join(out_dir, "manifest.json")
    _write_manifest(manifest_path, "experiment", opts, 0, [opts["config"]], outputs)
    return outputs + [manifest_path]


# --------------------------------------------------------------------------
# rerun
# --------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "experiment": cmd_experiment,
}


def cmd_rerun(manifest_path: str) -> list:
    manifest = RunManifest.from_dict(_load_json(manifest_path, "manifest"))
    if manifest.command not in _COMMANDS:
        raise CorruptArtifactError(
            f"manifest names unknown command {manifest.command!r}"
        )
    for path, recorded in manifest.inputs.items():
        try:
            current = _sha256(path)
        except OSError as exc:
            raise CorruptArtifactError(
                f"manifest input {path!r} is unreadable: {exc}"
            ) from None
        if current != recorded:
            raise CorruptArtifactError(
                f"manifest input {path!r} changed since the recorded run"
            )
    return _COMMANDS[manifest.command](manifest.options)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _pair(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxstable",
        description="Simulation and semiparametric Bayesian inference "
        "for multivariate max-stable distributions.",
    )
    parser.add_argument("--version", action="version", version=f"maxstable {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw data from a model or a named example")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model JSON file (angular measure, optional margins)")
    src.add_argument("--example", choices=EXAMPLE_NAMES, help="named data-generating process")
    sim.add_argument("--rho", type=_pair, default=None, help="Pareto margin indices, e.g. 1,2")
    sim.add_argument("--theta", type=float, default=3.0, help="copula parameter (Joe/B5 example)")
    sim.add_argument("--block", type=int, default=None, help="emit block maxima of this block size")
    sim.add_argument("--n", type=int, required=True, help="number of rows")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output CSV path")

    fit = sub.add_parser("fit", help="run the trans-dimensional posterior sampler")
    fit.add_argument("--data", required=True, help="input CSV (raw rows when --eb is used)")
    fit.add_argument("--family", default="simple",
                     choices=("simple", "frechet", "gumbel", "weibull"))
    fit.add_argument("--iterations", type=int, required=True)
    fit.add_argument("--burnin", type=int, default=0)
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--chains", type=int, default=1)
    fit.add_argument("--eb", dest="eb_m", type=int, default=None,
                     help="block size m: data are blocked and margin priors EB-centered")
    fit.add_argument("--eb-estimator", dest="eb_estimator", default=None,
                     choices=("frechet-scale", "gumbel", "weibull"))
    fit.add_argument("--shape-bounds", dest="shape_bounds", type=_pair, default=None,
                     help="compact Weibull shape-prior support, e.g. 1.5,6")
    fit.add_argument("--degree-q", dest="degree_q", type=float, default=1.0)
    fit.add_argument("--k-min", dest="k_min", type=int, default=None)
    fit.add_argument("--k-cap", dest="k_cap", type=int, default=None)
    fit.add_argument("--weight-step", dest="weight_step", type=float, default=0.6)
    fit.add_argument("--margin-step", dest="margin_step", type=float, default=0.04)
    fit.add_argument("--transdim-prob", dest="transdim_prob", type=float, default=0.15)
    fit.add_argument("--transdim-conc", dest="transdim_conc", type=float, default=50.0)
    fit.add_argument("--resume", action="store_true",
                     help="continue an interrupted chain file up to --iterations")
    fit.add_argument("--out", required=True, help="chain JSONL path")
    fit.add_argument("--summary", default=None, help="summary JSON path")

    diag = sub.add_parser("diagnose", help="summarize a chain, optionally against a truth model")
    diag.add_argument("--chain", required=True, help="chain JSONL from fit")
    diag.add_argument("--truth", default=None, help="reference model JSON")
    diag.add_argument("--hellinger-samples", dest="hellinger_samples", type=int, default=4000)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--svg-dir", dest="svg_dir", default=None,
                      help="directory for trace charts")
    diag.add_argument("--out", required=True, help="metrics JSON path")

    exp = sub.add_parser("experiment", help="run a consistency experiment from a config file")
    exp.add_argument("--config", required=True, help="experiment config JSON")
    exp.add_argument("--out-dir", dest="out_dir", required=True)
    exp.add_argument("--workers", type=int, default=None,
                     help="cell parallelism (default: MAXSTABLE_THREADS or serial)")

    rerun = sub.add_parser("rerun", help="repeat a recorded run from its manifest")
    rerun.add_argument("manifest", help="manifest JSON written by a previous command")

    return parser


_OPTION_KEYS = {
    "simulate": ("model", "example", "rho", "theta", "block", "n", "seed", "out"),
    "fit": (
        "data", "family", "iterations", "burnin", "thin", "seed", "chains",
        "eb_m", "eb_estimator", "shape_bounds", "degree_q", "k_min", "k_cap",
        "weight_step", "margin_step", "transdim_prob", "transdim_conc",
        "resume", "out", "summary",
    ),
    "diagnose": ("chain", "truth", "hellinger_samples", "seed", "svg_dir", "out"),
    "experiment": ("config", "out_dir", "workers"),
}


def _options(args: argparse.Namespace) -> dict:
    opts = {}
    for key in _OPTION_KEYS[args.command]:
        value = getattr(args, key)
        opts[key] = list(value) if isinstance(value, tuple) else value
    return opts


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            outputs = cmd_rerun(args.manifest)
        else:
            outputs = _COMMANDS[args.command](_options(args))
    except CorruptArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, StructuralError, ConstraintError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
