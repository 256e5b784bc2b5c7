"""Command line interface.

Subcommands: sample, spectrum, concentrate, heavy, singular, lemmas,
conditions, tail. Experiments are described by a flat key=value config
file with an [experiment] section; --seed overrides the config seed, and
the SPECMETER_SEED environment variable is the fallback when neither is
given. Exit codes: 0 on success, 1 when a checked property is violated,
2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import csv
import io
import os
import sys

import numpy as np

from . import backend, harness
from .conditions import diagnostics_to_csv, heavy_tail_diagnostics, lindeberg_stat
from .ensembles import EnsembleSpec, dependency_d, parse_ensemble, sample_matrix
from .entries import RngStream, parse_entry_law
from .harness import (
    ExperimentConfig,
    MetricSpec,
    parse_metric,
    run_concentration,
    run_heavy_tail,
    run_lemma_sweeps,
    run_singular,
    tail_profile,
    write_lemma_csv,
    write_result_csv,
    write_tail_csv,
)
from .measures import (
    DIRAC,
    MARCHENKO_PASTUR,
    MARCHENKO_PASTUR_SINGULAR,
    SEMICIRCLE,
    ReferenceLaw,
)
from .spectra import eigenvalues


class ConfigError(Exception):
    pass


def parse_reference(text: str) -> ReferenceLaw | None:
    head, _, rest = text.strip().lower().partition(":")
    if head in ("", "none"):
        return None
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError("malformed reference parameter %r" % item)
            params[key.strip()] = float(value)
    if head == "semicircle":
        return ReferenceLaw(SEMICIRCLE)
    if head in ("mp", "marchenko_pastur"):
        return ReferenceLaw(MARCHENKO_PASTUR, c=params.get("c", 1.0))
    if head in ("mp_singular", "marchenko_pastur_singular"):
        return ReferenceLaw(MARCHENKO_PASTUR_SINGULAR, c=params.get("c", 1.0))
    if head == "dirac":
        return ReferenceLaw(DIRAC, a=params.get("a", 0.0))
    raise ValueError("unknown reference law %r" % text)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError("config parse error in %s: %s" % (path, exc)) from exc
    if not read:
        raise ConfigError("config file not found: %s" % path)
    if "experiment" not in parser:
        raise ConfigError("config %s lacks an [experiment] section" % path)
    return dict(parser["experiment"])


def _get(cfg: dict, key: str, default=None, required: bool = False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError("config is missing the required field %r" % key)
    return default


def _resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in cfg:
        try:
            return int(cfg["seed"])
        except ValueError as exc:
            raise ConfigError("config field 'seed': %s" % exc) from exc
    env = os.environ.get("SPECMETER_SEED")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError("SPECMETER_SEED: %s" % exc) from exc
    return 0


def _field(cfg: dict, key: str, parse, default=None, required: bool = False):
    raw = _get(cfg, key, required=required)
    if raw is None:
        return default
    try:
        return parse(raw)
    except ValueError as exc:
        raise ConfigError("config field %r: %s" % (key, exc)) from exc


def _parse_sizes(raw: str):
    return tuple(int(s) for s in raw.replace(";", ",").split(",") if s.strip())


def _experiment_config(args, cfg, need_reference=True) -> ExperimentConfig:
    ensemble = _field(cfg, "ensemble", parse_ensemble, required=True)
    sizes = _field(cfg, "sizes", _parse_sizes, required=True)
    replicas = _field(cfg, "replicas", int, default=16)
    metric = _field(cfg, "metric", parse_metric, default=MetricSpec())
    scale = _get(cfg, "scale")
    reference = _field(cfg, "reference", parse_reference) if need_reference else None
    aspect = _field(cfg, "aspect", float, default=2.0)
    try:
        return ExperimentConfig(
            ensemble=ensemble, sizes=sizes, replicas=replicas, metric=metric,
            seed=_resolve_seed(args, cfg), scale_rule=scale, reference=reference,
            aspect=aspect,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _cmd_sample(args, cfg) -> int:
    spec = _field(cfg, "ensemble", parse_ensemble, required=True)
    n = _field(cfg, "n", int, required=True)
    seed = _resolve_seed(args, cfg)
    h = sample_matrix(spec, n, RngStream(seed).child(n).child(0))
    d = dependency_d(spec, n)
    print("kind=%s n=%d d=%d backend=%s" % (spec.kind, n, d, backend.BACKEND))
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        real = bool(np.all(h.entries.imag == 0.0))
        for row in h.entries:
            if real:
                writer.writerow([repr(float(v.real)) for v in row])
            else:
                writer.writerow([repr(complex(v)) for v in row])
    return 0


def _cmd_spectrum(args, cfg) -> int:
    spec = _field(cfg, "ensemble", parse_ensemble, required=True)
    n = _field(cfg, "n", int, required=True)
    seed = _resolve_seed(args, cfg)
    h = sample_matrix(spec, n, RngStream(seed).child(n).child(0))
    with _open_out(args.out) as fh:
        eigenvalues(h).to_csv(fh)
    return 0


def _cmd_concentrate(args, cfg) -> int:
    config = _experiment_config(args, cfg)
    rows = run_concentration(config, jobs=args.jobs)
    with _open_out(args.out) as fh:
        write_result_csv(rows, fh, timing=args.timing)
    return 0


def _cmd_heavy(args, cfg) -> int:
    config = _experiment_config(args, cfg)
    try:
        rows = run_heavy_tail(config, jobs=args.jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(args.out) as fh:
        write_result_csv(rows, fh, timing=args.timing)
    return 0


def _cmd_singular(args, cfg) -> int:
    config = _experiment_config(args, cfg)
    try:
        rows = run_singular(config, jobs=args.jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(args.out) as fh:
        write_result_csv(rows, fh, timing=args.timing)
    return 0


def _cmd_lemmas(args, cfg) -> int:
    seed = _resolve_seed(args, cfg)
    samples = _field(cfg, "samples", int, default=500)
    results = run_lemma_sweeps(seed=seed, samples=samples)
    with _open_out(args.out) as fh:
        write_lemma_csv(results, fh)
    bad = [r for r in results if not r.ok]
    if bad:
        worst = min(bad, key=lambda r: r.margin - r.floor)
        print("lemma margin violated: %s trial %d margin %r floor %r"
              % (worst.lemma, worst.trial, worst.margin, worst.floor),
              file=sys.stderr)
        return 1
    return 0


def _cmd_conditions(args, cfg) -> int:
    law = _field(cfg, "law", parse_entry_law, required=True)
    n_list = _field(cfg, "n_list", _parse_sizes, default=(100, 10_000, 1_000_000))
    try:
        rows = heavy_tail_diagnostics(law, n_list)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(args.out) as fh:
        diagnostics_to_csv(rows, fh)
    ens = _get(cfg, "ensemble")
    if ens is not None:
        spec = _field(cfg, "ensemble", parse_ensemble)
        n = _field(cfg, "n", int, default=int(n_list[0]))
        m = _field(cfg, "lindeberg_m", float, default=1.0)
        seed = _resolve_seed(args, cfg)
        h = sample_matrix(spec, n, RngStream(seed).child(n).child(0))
        rep = lindeberg_stat(h, m)
        print("lindeberg n=%d M=%r statistic=%r exceed=%d"
              % (rep.n, rep.threshold, rep.statistic, rep.exceed_count))
    return 0


def _cmd_tail(args, cfg) -> int:
    spec = _field(cfg, "ensemble", parse_ensemble, required=True)
    n = _field(cfg, "n", int, required=True)
    replicas = _field(cfg, "replicas", int, default=400)
    clip = _field(cfg, "clip", float, default=3.0)
    t_max = _field(cfg, "t_max", float)
    points = _field(cfg, "t_points", int, default=21)
    seed = _resolve_seed(args, cfg)
    grid = None if t_max is None else np.linspace(0.0, t_max, points)

    def f(x):
        return np.minimum(np.abs(x), clip)

    try:
        profile = tail_profile(spec, n, replicas, f, t_grid=grid, seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(args.out) as fh:
        write_tail_csv(profile, fh)
    print("slope=%r r_squared=%r ccp_reference=(C=%r, c=%r*rho^2)"
          % (profile.slope, profile.r_squared, profile.ccp_reference[0],
             profile.ccp_reference[1]))
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "spectrum": _cmd_spectrum,
    "concentrate": _cmd_concentrate,
    "heavy": _cmd_heavy,
    "singular": _cmd_singular,
    "lemmas": _cmd_lemmas,
    "conditions": _cmd_conditions,
    "tail": _cmd_tail,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmeter",
        description="Spectral concentration experiments for random matrices "
                    "with block-dependent entries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("sample", "emit one matrix and its partition summary"),
        ("spectrum", "emit the eigenvalue CSV of one sampled matrix"),
        ("concentrate", "leave-one-out concentration experiment"),
        ("heavy", "concentration experiment under b_n scaling"),
        ("singular", "singular-value concentration for rectangular ensembles"),
        ("lemmas", "random sweeps of the spectral inequalities"),
        ("conditions", "heavy-tail scaling diagnostics"),
        ("tail", "tail profile of a Lipschitz spectral statistic"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="FILE", help="experiment config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", metavar="FILE", default="-",
                       help="output CSV path (default stdout)")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes (results are ordered "
                            "by (n, replica), so output does not depend on this)")
        p.add_argument("--timing", action="store_true",
                       help="emit measured wall times in the ms column "
                            "(breaks byte-level reproducibility)")
    return parser


def cli(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
