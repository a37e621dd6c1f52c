"""Batch command line front end.

Subcommands: ``simulate``, ``fit``, ``krige``, ``validate`` and
``summarize``. Exit codes: 0 ok, 2 configuration error, 3 numerical or
model error, 4 inconsistent inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, load_config
from .errors import ConfigurationError, InputConsistencyError, SingularCovarianceError, WrapGPError
from .inference import fit_independent, fit_spatial, summarize
from .prediction import (
    average_prediction_error,
    krige,
    loo_validate,
    nonspatial_loo,
    nonspatial_predict_error,
)
from .sim import regular_grid, simulate

log = logging.getLogger("wrapgp")

STAND_IN = "synthetic stand-in data (not an observed field)"


def _out_dir(args, config: RunConfig) -> Path:
    out = Path(args.out or config.paths.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _data_path(args, config, key="data"):
    p = getattr(args, key, None) or config.paths.get(key)
    if not p:
        raise ConfigurationError(f"no {key} file given (--{key} or paths.{key})")
    return p


def cmd_simulate(args, config: RunConfig) -> int:
    res = simulate(config.sim)
    out = _out_dir(args, config)
    unit = config.angle_unit
    from .circular import CircularSample, wrap

    full = CircularSample(wrap(res.unwrapped), res.locations)
    io.write_sample(out / "sample.csv", full, unit, comment=STAND_IN)
    io.write_sample(out / "estimation.csv", res.estimation, unit, comment=STAND_IN)
    io.write_sample(out / "validation.csv", res.validation, unit, comment=STAND_IN)
    truth = {
        "note": STAND_IN,
        "mu": res.truth.mu,
        "sigma2": res.truth.sigma2,
        "phi": res.truth.phi,
        "concentration": res.truth.concentration,
        "practical_range_km": res.truth.practical_range,
        "seed": config.sim.seed,
        "estimation_idx": res.estimation_idx.tolist(),
        "validation_idx": res.validation_idx.tolist(),
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2))
    print(f"wrote {len(full)} sites ({len(res.estimation)} estimation, "
          f"{len(res.validation)} validation) to {out}")
    return 0


def _fit(config: RunConfig, sample):
    if config.model == "independent":
        return fit_independent(sample, config.priors, config.mcmc)
    return fit_spatial(sample, config.kernel, config.priors, config.mcmc)


def _summary_dict(s):
    d = dataclasses.asdict(s)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def cmd_fit(args, config: RunConfig) -> int:
    sample = io.read_sample(_data_path(args, config), config.angle_unit)
    draws = _fit(config, sample)
    out = _out_dir(args, config)
    io.write_chain(out / "chain.csv", draws, config_hash=config.hash(), data_hash=io.data_hash(sample))
    s = summarize(draws, config.level)
    (out / "summary.json").write_text(json.dumps(_summary_dict(s), indent=2))
    (out / "summary.txt").write_text(s.table() + "\n")
    print(s.table())
    print(f"retained draws: {len(draws)}")
    return 0


def _grid(args, config):
    path = args.grid or config.grid.path or config.paths.get("grid")
    if path:
        return io.read_grid(path)
    return regular_grid(config.grid.region, config.grid.resolution_km)


def cmd_krige(args, config: RunConfig) -> int:
    sample = io.read_sample(_data_path(args, config), config.angle_unit)
    draws, _ = io.read_chain(_data_path(args, config, "chain"), sample)
    targets = _grid(args, config)
    results = krige(draws, sample, targets, threads=args.threads)
    out = Path(args.output) if args.output else _out_dir(args, config) / "krige.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    convention = "incoming" if args.incoming else config.direction_convention
    io.write_krige(out, results, convention)
    print(f"wrote {len(results)} kriged cells to {out} ({convention} directions)")
    return 0


def cmd_validate(args, config: RunConfig) -> int:
    sample = io.read_sample(_data_path(args, config), config.angle_unit)
    fast = True if args.fast_loo else config.fast_loo
    val_path = args.validation or config.paths.get("validation")
    spatial_cfg = dataclasses.replace(config, model="spatial")
    if val_path:
        val = io.read_sample(val_path, config.angle_unit)
        ds = fit_spatial(sample, config.kernel, config.priors, config.mcmc)
        kr = krige(ds, sample, val.locations, threads=args.threads)
        spatial = average_prediction_error([r.mean_direction for r in kr], val.angles)
        di = fit_independent(sample, config.priors, config.mcmc)
        nonspatial = nonspatial_predict_error(sample, val, di)
        scheme = "holdout"
    else:
        loo = loo_validate(sample, config.kernel, spatial_cfg.priors, config.mcmc, fast=fast)
        nl = nonspatial_loo(sample, config.priors, config.mcmc, fast=fast)
        spatial, nonspatial = loo.average_prediction_error, nl.average_prediction_error
        scheme = f"leave-one-out ({loo.mode})"
    ratio = spatial / nonspatial if nonspatial > 0 else float("nan")
    report = {
        "scheme": scheme,
        "spatial_error": spatial,
        "nonspatial_error": nonspatial,
        "ratio": ratio,
        "percent_reduction": 100.0 * (1.0 - ratio),
    }
    out = _out_dir(args, config)
    (out / "validate.json").write_text(json.dumps(report, indent=2))
    print(f"validation scheme      {scheme}")
    print(f"spatial error          {spatial:.4f}")
    print(f"nonspatial error       {nonspatial:.4f}")
    print(f"ratio                  {ratio:.3f}")
    print(f"reduction              {report['percent_reduction']:.0f}%")
    return 0


def cmd_summarize(args, config: RunConfig) -> int:
    draws, meta = io.read_chain(_data_path(args, config, "chain"))
    s = summarize(draws, args.level or config.level)
    print(f"model {meta.get('model')}  draws {len(draws)}")
    print(s.table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument(
        "--threads", type=int, default=os.cpu_count() or 1, help="worker threads for kriging"
    )
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wrapgp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="simulate a wrapped GP sample")

    f = sub.add_parser("fit", parents=[common], help="run MCMC on a sample")
    f.add_argument("--data")

    k = sub.add_parser("krige", parents=[common], help="krige a fitted chain onto a grid")
    k.add_argument("--data")
    k.add_argument("--chain")
    k.add_argument("--grid", help="CSV with x_km,y_km columns")
    k.add_argument("--output", help="output CSV path")
    k.add_argument("--incoming", action="store_true", help="report incoming directions")

    v = sub.add_parser("validate", parents=[common], help="compare spatial and nonspatial errors")
    v.add_argument("--data")
    v.add_argument("--validation", help="held-out sample; leave-one-out if omitted")
    v.add_argument("--fast-loo", action="store_true", help="reuse full-data draws for LOO")

    s = sub.add_parser("summarize", parents=[common], help="summarise a chain file")
    s.add_argument("--chain")
    s.add_argument("--level", type=float)
    return p


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "krige": cmd_krige,
    "validate": cmd_validate,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config).with_seed(args.seed)
        return COMMANDS[args.command](args, config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InputConsistencyError as exc:
        print(f"input mismatch: {exc}", file=sys.stderr)
        return 4
    except SingularCovarianceError as exc:
        print(f"singular covariance: {exc} (min site separation "
              f"{exc.min_separation} km)", file=sys.stderr)
        return 3
    except WrapGPError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
