"""Command-line driver: data, train, sample, eval and plot.

Every subcommand accepts ``--config FILE`` holding a flat JSON object whose
keys are the subcommand's option names (dashes or underscores). Values given
on the command line win over the file, and the fully resolved options are
written to ``<out>.config.json`` next to the main output.

Exit codes: 0 success, 1 usage error, 2 runtime error (bad input files,
sampler divergence). Set COMS_LOG_LEVEL (e.g. DEBUG) for more logging.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import svg
from .data import PriorSpec, SpiralSpec, dataset_from_json, ground_truth_reward, read_dataset, \
    spiral_generate, write_dataset
from .errors import ComsError, ConfigError, InputError
from .evaluation import evaluate
from .nnet import field_from_dict, field_to_dict
from .sampling import GeometricSchedule, SamplerSpec, sample_batch
from .training import TrainConfig, train_com, train_oracle

log = logging.getLogger("comsebm")

LOG_ENV = "COMS_LOG_LEVEL"

VARIANTS = {"original": "original", "stochastic": "stochastic", "oracle": "oracle_only"}
SAMPLERS = {"ascent": "gradient_ascent", "langevin": "langevin", "tilted": "tilted_langevin"}


class UsageError(ComsError):
    pass


# option name -> (type, default, help); None default means "unset"
DATA_OPTS = {
    "n": (int, 1000, "number of points"),
    "seed": (int, 0, "RNG seed"),
    "t_min": (float, 2.0, "smallest spiral angle"),
    "t_max": (float, 12.0, "largest spiral angle"),
    "radius_coef": (float, 0.15, "r = radius_coef * t"),
    "noise_std": (float, 0.025, "isotropic Gaussian noise"),
    "out": (str, None, "dataset JSON to write"),
    "plot": (str, None, "optional SVG of the data over the reward"),
}

TRAIN_OPTS = {
    "data": (str, None, "dataset JSON"),
    "variant": (str, "stochastic", "original | stochastic | oracle"),
    "alpha": (float, None, "regulariser weight (default 0)"),
    "epochs": (int, 500, "passes over the data"),
    "batch_size": (int, 64, "minibatch size"),
    "hidden_dim": (int, 256, "hidden units"),
    "cd_steps": (int, 100, "sampler steps per negative"),
    "neg_schedule_start": (float, 0.02, "first Langevin step size for negatives"),
    "neg_schedule_end": (float, 0.001, "last Langevin step size for negatives"),
    "neg_eps": (float, 0.01, "gradient-ascent step for the original variant"),
    "learning_rate": (float, 1e-3, "Adam step size"),
    "clip_norm": (float, 100.0, "gradient norm cap (<= 0 disables)"),
    "seed": (int, 0, "init / shuffle / negatives seed"),
    "out": (str, None, "checkpoint JSON to write"),
    "metrics": (str, None, "per-epoch JSON-lines log (default <out>.metrics.jsonl)"),
}

SAMPLE_OPTS = {
    "ckpt": (str, None, "energy model checkpoint"),
    "sampler": (str, "langevin", "ascent | langevin | tilted"),
    "n": (int, 256, "number of chains / samples"),
    "seed": (int, 0, "sampling seed"),
    "steps": (int, 50_000, "steps per chain"),
    "eps_start": (float, 0.1, "first Langevin step size"),
    "eps_end": (float, 1e-5, "last Langevin step size"),
    "eps": (float, 0.01, "gradient-ascent step size"),
    "oracle": (str, None, "reward oracle checkpoint (tilted)"),
    "w": (float, None, "tilt weight (tilted)"),
    "prior_low": (float, -1.5, "lower edge of the uniform start box"),
    "prior_high": (float, 2.0, "upper edge of the uniform start box"),
    "init_data": (str, None, "start chains at points of this dataset instead of the box"),
    "workers": (int, 1, "threads"),
    "out": (str, None, "samples JSON to write"),
}

EVAL_OPTS = {
    "samples": (str, None, "samples JSON (or a dataset JSON)"),
    "tau": (float, 0.1, "validity threshold on the distance to the spiral"),
    "t_min": (float, 2.0, "spiral angle range used for validity"),
    "t_max": (float, 12.0, ""),
    "radius_coef": (float, 0.15, ""),
    "out": (str, None, "report JSON to write"),
}

SCATTER_OPTS = {
    "data": (str, None, "dataset JSON (orange dots)"),
    "samples": (str, None, "samples JSON (black crosses)"),
    "ckpt": (str, None, "shade by this model's f instead of the true reward"),
    "low": (float, -2.0, "lower plot bound"),
    "high": (float, 2.5, "upper plot bound"),
    "out": (str, None, "SVG to write"),
}

QUIVER_OPTS = {
    "ckpt": (str, None, "model checkpoint"),
    "low": (float, -1.5, "lower grid bound"),
    "high": (float, 2.0, "upper grid bound"),
    "grid": (int, 25, "arrows per side"),
    "out": (str, None, "SVG to write"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_opts(p, opts):
    p.add_argument("--config", help="JSON file with option values")
    for name, (typ, default, help_) in opts.items():
        extra = f" (default {default})" if default is not None else ""
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None,
                       help=help_ + extra)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coms", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    for name, opts, help_ in (("data", DATA_OPTS, "generate the spiral dataset"),
                              ("train", TRAIN_OPTS, "train an energy model or reward oracle"),
                              ("sample", SAMPLE_OPTS, "draw samples from a trained model"),
                              ("eval", EVAL_OPTS, "score a sample file")):
        _add_opts(sub.add_parser(name, help=help_), opts)
    plot = sub.add_parser("plot", help="write an SVG figure")
    kinds = plot.add_subparsers(dest="kind", parser_class=_Parser)
    kinds.required = True
    _add_opts(kinds.add_parser("scatter", help="data and samples over a heatmap"), SCATTER_OPTS)
    _add_opts(kinds.add_parser("quiver", help="gradient field of a model"), QUIVER_OPTS)
    return p


def _json_type_ok(val, typ) -> bool:
    if isinstance(val, bool):
        return False
    if typ is float:
        return isinstance(val, (int, float))
    return isinstance(val, typ)


def resolve(args: argparse.Namespace, opts: dict) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = {k: v[1] for k, v in opts.items()}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in raw.items():
            k = key.replace("-", "_")
            if k not in opts:
                raise UsageError(f"unknown config key {key!r}")
            typ = opts[k][0]
            if val is not None and not _json_type_ok(val, typ):
                raise UsageError(f"config key {key!r} should be of type {typ.__name__}")
            cfg[k] = float(val) if typ is float and val is not None else val
    for k in opts:
        v = getattr(args, k)
        if v is not None:
            cfg[k] = v
    return cfg


def _require(cfg: dict, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def _write(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _write_config(cfg: dict, command: str):
    _write(cfg["out"] + ".config.json", _dump(cfg))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_checkpoint(path):
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise InputError(f"{path}: checkpoint must be a JSON object")
    return field_from_dict(raw), raw.get("meta", {})


def load_samples(path) -> np.ndarray:
    """Points from a samples file, or the inputs of a dataset file."""
    raw = _read_json(path)
    if isinstance(raw, dict) and "samples" in raw:
        pts = np.asarray(raw["samples"], dtype=np.float64)
        if pts.size == 0:
            return np.empty((0, 2))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InputError(f"{path}: samples must be a list of [x1, x2] pairs")
        return pts
    return dataset_from_json(json.dumps(raw)).x


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_data(cfg: dict):
    _require(cfg, "out")
    spec = SpiralSpec(n=cfg["n"], t_min=cfg["t_min"], t_max=cfg["t_max"],
                      radius_coef=cfg["radius_coef"], noise_std=cfg["noise_std"], seed=cfg["seed"])
    ds = spiral_generate(spec)
    Path(cfg["out"]).parent.mkdir(parents=True, exist_ok=True)
    write_dataset(ds, cfg["out"])
    _write_config(cfg, "data")
    if cfg["plot"]:
        _write(cfg["plot"], svg.scatter_svg(ground_truth_reward, data=ds.x))
    log.info("wrote %d points to %s", len(ds), cfg["out"])


def cmd_train(cfg: dict):
    _require(cfg, "data", "out")
    if cfg["variant"] not in VARIANTS:
        raise UsageError(f"--variant must be one of {sorted(VARIANTS)}")
    variant = VARIANTS[cfg["variant"]]
    alpha = cfg["alpha"]
    if variant == "oracle_only" and alpha not in (None, 0.0):
        raise UsageError("--variant oracle trains plain regression; --alpha must be 0")
    cfg["alpha"] = alpha = 0.0 if alpha is None else alpha
    clip = cfg["clip_norm"]
    tc = TrainConfig(variant=variant, alpha=alpha, cd_steps=cfg["cd_steps"],
                     neg_schedule_start=cfg["neg_schedule_start"],
                     neg_schedule_end=cfg["neg_schedule_end"], neg_eps=cfg["neg_eps"],
                     epochs=cfg["epochs"], batch_size=cfg["batch_size"],
                     hidden_dim=cfg["hidden_dim"], learning_rate=cfg["learning_rate"],
                     clip_norm=clip if clip and clip > 0 else None, seed=cfg["seed"])
    ds = read_dataset(cfg["data"])
    metrics = cfg["metrics"] or cfg["out"] + ".metrics.jsonl"
    cfg["metrics"] = metrics
    lines = []

    def record(epoch, loss):
        lines.append(json.dumps({"epoch": epoch, **loss.to_dict()}))

    ck = (train_oracle if variant == "oracle_only" else train_com)(tc, ds, record)
    out = field_to_dict(ck.field)
    out["meta"] = {"variant": tc.variant, "alpha": tc.alpha, "seed": tc.seed,
                   "steps_trained": ck.steps_trained}
    _write(cfg["out"], _dump(out))
    _write(metrics, "".join(line + "\n" for line in lines))
    _write_config(cfg, "train")
    if ck.history:
        last = ck.history[-1]
        print(f"final loss {last.total:.6g} (mse {last.mse_term:.6g}, reg {last.reg_term:.6g})")


def cmd_sample(cfg: dict):
    _require(cfg, "ckpt", "out")
    if cfg["sampler"] not in SAMPLERS:
        raise UsageError(f"--sampler must be one of {sorted(SAMPLERS)}")
    kind = SAMPLERS[cfg["sampler"]]
    if kind == "tilted_langevin":
        _require(cfg, "oracle", "w")
    if cfg["n"] < 0:
        raise UsageError("--n must be non-negative")
    steps = cfg["steps"]
    prior = "init_from_data" if cfg["init_data"] else PriorSpec(cfg["prior_low"], cfg["prior_high"])
    schedule = None
    if kind != "gradient_ascent" and steps > 0:
        schedule = GeometricSchedule(cfg["eps_start"], cfg["eps_end"], steps)
    spec = SamplerSpec(kind=kind, steps=steps, schedule=schedule, fixed_eps=cfg["eps"],
                       tilt_weight=cfg["w"] or 0.0, prior=prior, seed=cfg["seed"])
    energy_field, _ = load_checkpoint(cfg["ckpt"])
    oracle = load_checkpoint(cfg["oracle"])[0] if kind == "tilted_langevin" else None
    init = read_dataset(cfg["init_data"]).x if cfg["init_data"] else None
    pts = sample_batch(spec, energy_field, cfg["n"], oracle_field=oracle, init_points=init,
                       workers=cfg["workers"])
    header = {"spec": spec.to_dict(), "seed": cfg["seed"], "n": int(cfg["n"]),
              "checkpoint_sha256": _sha256(cfg["ckpt"])}
    if oracle is not None:
        header["oracle_sha256"] = _sha256(cfg["oracle"])
    body = ",\n".join(json.dumps([float(a), float(b)]) for a, b in pts)
    text = '{\n"header": ' + json.dumps(header) + ',\n"samples": [\n' + body + "\n]\n}\n"
    _write(cfg["out"], text)
    _write_config(cfg, "sample")
    log.info("wrote %d samples to %s", len(pts), cfg["out"])


def cmd_eval(cfg: dict):
    _require(cfg, "samples")
    pts = load_samples(cfg["samples"])
    if len(pts) == 0:
        raise UsageError(f"{cfg['samples']} holds no samples")
    spec = SpiralSpec(t_min=cfg["t_min"], t_max=cfg["t_max"], radius_coef=cfg["radius_coef"])
    report = evaluate(pts, spec, threshold=cfg["tau"]).to_dict()
    text = _dump(report)
    print(text, end="")
    if cfg["out"]:
        _write(cfg["out"], text)
        _write_config(cfg, "eval")


def cmd_plot(kind: str, cfg: dict):
    _require(cfg, "out")
    if kind == "quiver":
        _require(cfg, "ckpt")
        field, _ = load_checkpoint(cfg["ckpt"])
        text = svg.quiver_svg(field.grad_input, cfg["low"], cfg["high"], cfg["grid"])
    else:
        heat = ground_truth_reward
        if cfg["ckpt"]:
            heat = load_checkpoint(cfg["ckpt"])[0]
        data = read_dataset(cfg["data"]).x if cfg["data"] else None
        samples = load_samples(cfg["samples"]) if cfg["samples"] else None
        text = svg.scatter_svg(heat, data=data, samples=samples, low=cfg["low"], high=cfg["high"])
    _write(cfg["out"], text)
    _write_config(cfg, f"plot {kind}")


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "plot":
            opts = SCATTER_OPTS if args.kind == "scatter" else QUIVER_OPTS
            cmd_plot(args.kind, resolve(args, opts))
        else:
            opts = {"data": DATA_OPTS, "train": TRAIN_OPTS, "sample": SAMPLE_OPTS,
                    "eval": EVAL_OPTS}[args.command]
            cfg = resolve(args, opts)
            {"data": cmd_data, "train": cmd_train, "sample": cmd_sample,
             "eval": cmd_eval}[args.command](cfg)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ComsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
