"""Config-driven batch runner.

Reads a line-oriented ``key = value`` experiment file, dispatches to the
estimation/risk/diagnostic modules and writes one CSV per command plus a
JSON manifest.  Identical configs produce byte-identical CSV bodies; the
``--threads`` flag is recorded but the runner is serial, so it can never
change results.

Exit codes: 0 success, 2 config error, 3 numeric or module error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import EstimatorConfig, sigma_n_limit_check
from .holder import WeakHolderParams, check_weak_holder
from .lowerbound import bayes_bound, build_kernel
from .martingale import normal_approx_check, truncation_split
from .model import (ScaleSpec, constant_fn, function_catalog, get_noise,
                    noise_catalog, derive_seed, scale_eval)
from .risk import (FAMILY_BUMP_NU, RiskConfig, default_family,
                   family_candidates, sup_risk)


class ConfigError(Exception):
    """Invalid experiment configuration (maps to exit code 2)."""


COMMANDS = ("risk-table", "lower-bound", "clt-check", "holder-check", "convergence")

DEFAULT_SEED = 42


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    n_list: tuple[int, ...] = (1000, 10000)
    beta: float = 2.0
    z0: float = 0.5
    delta_list: tuple[float, ...] = (0.1,)
    reps: int = 4000
    seed: int = DEFAULT_SEED
    alpha0: float = 1.0
    alpha1: float = 0.5
    alpha2: float = 0.5
    alpha3: float = 0.5
    noise_list: tuple[str, ...] = ("gaussian",)
    function_list: tuple[str, ...] = ("default",)
    nu_list: tuple[float, ...] = (0.2, 0.1, 0.05, 0.01)
    b_list: tuple[float, ...] = (4.0, 16.0, 100.0, 10000.0)
    out: str = "results"
    seed_source: str = "config"


_KEYS = {
    "command", "n_list", "beta", "z0", "delta_list", "reps", "seed",
    "alpha0", "alpha1", "alpha2", "alpha3", "noise_list", "function_list",
    "nu_list", "b_list", "out",
}


def _parse_int(lineno: int, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects an integer, got {value!r}")


def _parse_float(lineno: int, key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {value!r}")


def _parse_str(lineno: int, key: str, value: str) -> str:
    return value


def _parse_list(lineno: int, key: str, value: str, conv) -> tuple:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"line {lineno}: {key} expects a nonempty list")
    return tuple(conv(lineno, key, v) for v in items)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a line-oriented experiment file."""
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        raw[key] = (lineno, value)

    if "command" not in raw:
        raise ConfigError("missing required key 'command'")

    fields: dict = {}
    lineno, value = raw.pop("command")
    if value not in COMMANDS:
        raise ConfigError(
            f"line {lineno}: unknown command {value!r}; choose from {COMMANDS}")
    fields["command"] = value

    for key, (lineno, value) in raw.items():
        if key == "n_list":
            ns = _parse_list(lineno, key, value, _parse_int)
            if any(n < 1 for n in ns):
                raise ConfigError(f"line {lineno}: n_list entries must be >= 1")
            fields[key] = ns
        elif key == "beta":
            beta = _parse_float(lineno, key, value)
            if not (1.0 < beta <= 2.0):
                raise ConfigError(f"line {lineno}: beta must lie in (1, 2], got {beta}")
            fields[key] = beta
        elif key == "z0":
            z0 = _parse_float(lineno, key, value)
            if not (0.0 < z0 < 1.0):
                raise ConfigError(f"line {lineno}: z0 must lie in (0, 1), got {z0}")
            fields[key] = z0
        elif key == "delta_list":
            ds = _parse_list(lineno, key, value, _parse_float)
            if any(not (0.0 < d < 1.0) for d in ds):
                raise ConfigError(f"line {lineno}: delta values must lie in (0, 1)")
            fields[key] = ds
        elif key == "reps":
            reps = _parse_int(lineno, key, value)
            if reps < 2:
                raise ConfigError(f"line {lineno}: reps must be >= 2")
            fields[key] = reps
        elif key == "seed":
            fields[key] = _parse_int(lineno, key, value)
        elif key in ("alpha0", "alpha1", "alpha2", "alpha3"):
            a = _parse_float(lineno, key, value)
            if key == "alpha0" and a <= 0:
                raise ConfigError(f"line {lineno}: alpha0 must be positive")
            if key != "alpha0" and a < 0:
                raise ConfigError(f"line {lineno}: {key} must be non-negative")
            fields[key] = a
        elif key == "noise_list":
            labels = _parse_list(lineno, key, value, _parse_str)
            known = set(noise_catalog()) | {"zero"}
            bad = [l for l in labels if l not in known]
            if bad:
                raise ConfigError(
                    f"line {lineno}: unknown noise labels {bad}; "
                    f"choose from {sorted(known)}")
            fields[key] = labels
        elif key == "function_list":
            fields[key] = _parse_list(lineno, key, value, _parse_str)
        elif key == "nu_list":
            nus = _parse_list(lineno, key, value, _parse_float)
            if any(not (0.0 < v < 0.25) for v in nus):
                raise ConfigError(f"line {lineno}: nu values must lie in (0, 1/4)")
            fields[key] = nus
        elif key == "b_list":
            bs = _parse_list(lineno, key, value, _parse_float)
            if any(v <= 1.0 for v in bs):
                raise ConfigError(f"line {lineno}: b values must exceed 1")
            fields[key] = bs
        elif key == "out":
            fields[key] = value

    if "seed" not in fields:
        fields["seed_source"] = "default"
    return ExperimentConfig(**fields)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def _scale_from(config: ExperimentConfig) -> ScaleSpec:
    return ScaleSpec(config.alpha0, config.alpha1, config.alpha2,
                     config.alpha3, label="config")


def _function_lookup(config: ExperimentConfig, n: int | None, delta: float, kernel):
    lookup = dict(function_catalog(config.z0))
    for S in family_candidates(config.z0, delta, config.beta, n, kernel):
        lookup[S.label] = S
    return lookup


def _resolve_functions(config: ExperimentConfig, n: int | None, delta: float,
                       kernel, default: list) -> list:
    if tuple(config.function_list) == ("default",):
        return default
    lookup = _function_lookup(config, n, delta, kernel)
    out = []
    for label in config.function_list:
        if label not in lookup:
            raise ConfigError(
                f"unknown function label {label!r}; known: {sorted(lookup)}")
        out.append(lookup[label])
    return out


def _risk_table(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    scale = _scale_from(config)
    kernel = build_kernel(FAMILY_BUMP_NU)
    noises = [get_noise(l) for l in sorted(config.noise_list)]
    rows: list[list] = []
    for n in sorted(config.n_list):
        cfg = EstimatorConfig(n=n, beta=config.beta, z0=config.z0)
        for delta in sorted(config.delta_list):
            family = _resolve_functions(
                config, n, delta, kernel,
                default=default_family(config.z0, delta, config.beta, n, kernel))
            params = WeakHolderParams(z0=config.z0, delta=delta, beta=config.beta)
            bad = [S.label for S in family
                   if not check_weak_holder(S, params).certified]
            if bad:
                raise ConfigError(
                    f"functions not certified at delta={delta}: {bad}")
            rc = RiskConfig(cfg=cfg, delta=delta, reps=config.reps,
                            seed=config.seed, family=tuple(family),
                            scale=scale, noise=noises[0])
            report = sup_risk(rc, noises=noises)
            for row in sorted(report.rows, key=lambda r: (r.function, r.noise)):
                rows.append([n, config.beta, config.z0, delta, row.function,
                             row.noise, cfg.q_n, cfg.phi_n, row.risk_mc,
                             row.stderr, row.risk_oracle, row.phin_bn])
    columns = ["n", "beta", "z0", "delta", "function", "noise", "qn", "phin",
               "risk_mc", "stderr", "risk_oracle", "bias_phin_Bn"]
    return columns, rows


def _lower_bound(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    scale = _scale_from(config)
    g_z0 = scale_eval(scale, config.z0, constant_fn(0.0))
    rows: list[list] = []
    for nu in sorted(config.nu_list, reverse=True):
        kernel = build_kernel(nu)
        sigma_nu_sq = kernel.sq_integral / g_z0 ** 2
        for b in sorted(config.b_list):
            rows.append([nu, b, sigma_nu_sq,
                         bayes_bound(nu, b, g_z0, kernel=kernel)])
    return ["nu", "b", "sigma_nu_sq", "bayes_bound"], rows


def _clt_check(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    scale = _scale_from(config)
    functions = _resolve_functions(
        config, None, config.delta_list[0], None,
        default=[function_catalog(config.z0)["const02"]])
    S = functions[0]
    rows: list[list] = []
    idx = 0
    for label in sorted(config.noise_list):
        noise = get_noise(label)
        for n in sorted(config.n_list):
            cfg = EstimatorConfig(n=n, beta=config.beta, z0=config.z0)
            report, _ = truncation_split(S, scale, noise, cfg,
                                         derive_seed(config.seed, 1_000_000 + idx))
            ks = normal_approx_check(S, scale, noise, cfg, config.reps,
                                     derive_seed(config.seed, idx))
            rows.append([label, n, report.a_n, report.k_p, report.r_n, ks])
            idx += 1
    return ["noise", "n", "a_n", "K_p", "r_n", "ks_distance"], rows


def _holder_check(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    kernel = build_kernel(FAMILY_BUMP_NU)
    n = max(config.n_list)
    rows: list[list] = []
    for delta in sorted(config.delta_list):
        functions = _resolve_functions(
            config, n, delta, kernel,
            default=family_candidates(config.z0, delta, config.beta, n, kernel))
        params = WeakHolderParams(z0=config.z0, delta=delta, beta=config.beta)
        for S in sorted(functions, key=lambda s: s.label):
            rep = check_weak_holder(S, params)
            rows.append([S.label, config.z0, config.beta, delta,
                         rep.sup_deriv, rep.max_defect, rep.certified])
    return ["function", "z0", "beta", "delta", "sup_deriv", "max_defect",
            "certified"], rows


def _convergence(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    scale = _scale_from(config)
    functions = _resolve_functions(
        config, None, config.delta_list[0], None,
        default=[function_catalog(config.z0)["sine"]])
    rows: list[list] = []
    for S in sorted(functions, key=lambda s: s.label):
        g0_sq = scale_eval(scale, config.z0, S) ** 2
        for row in sigma_n_limit_check(S, scale, config.z0, config.beta,
                                       sorted(config.n_list)):
            rows.append([row.n, config.beta, config.z0, S.label,
                         row.sigma_n_sq, g0_sq, row.abs_gap])
    return ["n", "beta", "z0", "function", "sigma_n_sq", "g_sq_z0",
            "abs_gap"], rows


_DISPATCH = {
    "risk-table": _risk_table,
    "lower-bound": _lower_bound,
    "clt-check": _clt_check,
    "holder-check": _holder_check,
    "convergence": _convergence,
}


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run(config: ExperimentConfig, out_dir: str | None = None,
        quiet: bool = False, threads: int = 1) -> int:
    """Execute one experiment; writes <command>.csv plus manifest.json.

    Any failure removes files written so far, so output directories never
    hold partial tables.
    """
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}")

    written: list[Path] = []
    try:
        columns, rows = _DISPATCH[config.command](config)
        stem = config.command.replace("-", "_")
        csv_path = out / f"{stem}.csv"
        written.append(csv_path)
        _write_csv(csv_path, columns, rows)

        manifest = {
            "command": config.command,
            "config": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in dataclasses.asdict(config).items()},
            "seed": config.seed,
            "seed_source": config.seed_source,
            "threads": threads,
            "version": __version__,
            "wall_clock_s": round(time.perf_counter() - start, 3),
            "outputs": [csv_path.name],
        }
        man_path = out / "manifest.json"
        written.append(man_path)
        with open(man_path, "w", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise

    if not quiet:
        print(f"wrote {csv_path}")
        print(f"wrote {man_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="minimaxkern",
        description="Batch experiments for the pointwise kernel estimator "
                    "under heteroscedastic noise.")
    parser.add_argument("--config", required=True, help="experiment file")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--threads", type=int, default=1,
                        help="scheduling hint; never affects results")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        config = parse_config(text)
        env_seed = os.environ.get("MINIMAXKERN_SEED")
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise ConfigError(
                    f"MINIMAXKERN_SEED must be an integer, got {env_seed!r}")
            config = dataclasses.replace(config, seed=seed, seed_source="env")
        return run(config, out_dir=args.out, quiet=args.quiet,
                   threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
