"""Command-line interface: channel analysis, ensemble sampling, dynamics simulation.

Subcommands
-----------
check-channel   spectral + irreducibility + strict-positivity report as JSON
sample          eigenvalue CSV for the asymptotic or induced ensemble
simulate        trajectory CSV for the fixed / random-env / iid-unitary schemes
selftest        run the embedded acceptance checks

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 numerical failure, 4 drift abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channels import (
    DensityMatrix,
    KrausChannel,
    StinespringChannel,
    channel_from_json_text,
    choi_rank,
    kraus_from_stinespring,
)
from .config import TOL_PROFILES, ToleranceConfig
from .dynamics import run_fixed, run_iid_unitary, run_random_env
from .errors import ConfigError, DriftError, NumericalError, RepintError
from .fixtures import CHANNEL_FIXTURES, channel_fixture, initial_state_preset
from .io import manifest_path, write_eigenvalue_csv, write_manifest, write_trajectory_csv
from .sampling import (
    DiracAt,
    EnsembleSpec,
    FixedSpectrumHaarBasis,
    InducedPure,
    RngStream,
    asymptotic_eigenvalue_rows,
    env_mean,
    haar_unitary,
    induced_eigenvalue_rows,
    random_channel,
)
from .spectral import channel_spectrum, invariant_state, irreducibility_check, strict_positivity_probe

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DRIFT = 4


@dataclass
class RunConfig:
    """Resolved parameters of one CLI invocation (flags override config-file values)."""

    command: str = ""
    seed: int = 0
    out: str | None = None
    jobs: int = 1
    tol_profile: str = "default"
    fixture: str | None = None
    channel_file: str | None = None
    d: int | None = None
    d_prime: int | None = None
    b: list | None = None
    ensemble: str | None = None
    n_samples: int = 1000
    scheme: str | None = None
    n_steps: int = 1000
    rho0: str = "mixed"
    rho0_file: str | None = None
    env_law: str = "fixed-spectrum"
    env_b: list | None = None
    env_ancilla: int | None = None
    only: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


def parse_prob_vector(text) -> list:
    """Comma-separated probabilities; plain floats and simple fractions like 3/4."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        values = [float(Fraction(tok.strip())) for tok in str(text).split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse probability vector {text!r}: {exc}") from exc
    if not values:
        raise ConfigError("probability vector is empty")
    return values


def _validated_spectrum(values, what: str = "b") -> tuple:
    arr = np.asarray(values, dtype=float)
    if (arr < 0).any():
        raise ConfigError(f"{what} entries must be non-negative, got {values}")
    if (np.diff(arr) > 1e-12).any():
        raise ConfigError(f"{what} must be sorted non-increasing, got {values}")
    total = arr.sum()
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"{what} must sum to 1 (got {total!r})")
    return tuple(float(x) for x in arr / total)


def build_config(command: str, args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if getattr(args, "config", None):
        try:
            obj = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config file must contain a JSON object")
        file_values = dict(obj)
    file_values.pop("command", None)
    flag_values = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "config", "func") and v is not None
    }
    merged = {**file_values, **flag_values}
    for key in ("b", "env_b"):
        if merged.get(key) is not None:
            merged[key] = parse_prob_vector(merged[key])
    cfg = RunConfig.from_json({"command": command, **merged})
    if cfg.tol_profile not in TOL_PROFILES:
        raise ConfigError(f"unknown tolerance profile {cfg.tol_profile!r}")
    if cfg.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return cfg


# ---------------------------------------------------------------------------
# check-channel
# ---------------------------------------------------------------------------


def _load_channel(cfg: RunConfig, tol: ToleranceConfig) -> tuple[KrausChannel, dict]:
    if cfg.fixture:
        try:
            ch = channel_fixture(cfg.fixture)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        return ch, {"fixture": cfg.fixture}
    if cfg.channel_file:
        try:
            text = Path(cfg.channel_file).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read channel file: {exc}") from exc
        ch = channel_from_json_text(text, tol)
        if isinstance(ch, StinespringChannel):
            return kraus_from_stinespring(ch, tol), {"file": cfg.channel_file}
        return ch, {"file": cfg.channel_file}
    if cfg.d is not None and cfg.b is not None:
        spec = EnsembleSpec(cfg.d, _validated_spectrum(cfg.b))
        if cfg.d_prime is not None and cfg.d_prime != spec.d_prime:
            raise ConfigError(f"--d-prime {cfg.d_prime} contradicts len(b) = {spec.d_prime}")
        ch = kraus_from_stinespring(random_channel(spec, RngStream(cfg.seed).generator(), tol), tol)
        return ch, {"d": spec.d, "b": list(spec.b), "seed": cfg.seed}
    raise ConfigError("check-channel needs --fixture, --channel-file, or --d with --b")


def cmd_check_channel(cfg: RunConfig) -> int:
    tol = TOL_PROFILES[cfg.tol_profile]
    ch, source = _load_channel(cfg, tol)
    rng = RngStream(cfg.seed, 1).generator()
    verdict, min_eig = strict_positivity_probe(ch, 512, rng, tol.probe)
    report = {
        "source": source,
        "spectral": channel_spectrum(ch, tol).to_json(),
        "irreducibility": irreducibility_check(ch, tol.kernel_relative).to_json(),
        "strict_positivity": {"verdict": verdict, "min_output_eigenvalue": float(min_eig)},
        "choi_rank": choi_rank(ch),
    }
    text = json.dumps(report, indent=2)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n", encoding="ascii", newline="")
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def _sample_chunk(payload: tuple):
    kind, params, seed, start, count, tol_profile = payload
    tol = TOL_PROFILES[tol_profile]
    if kind == "asymptotic":
        spec = EnsembleSpec(params["d"], tuple(params["b"]))
        return asymptotic_eigenvalue_rows(spec, seed, start, count, tol=tol)
    return induced_eigenvalue_rows(params["d"], params["d_prime"], seed, start, count, tol=tol)


def cmd_sample(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ConfigError("sample needs --out for the CSV file")
    if cfg.n_samples < 1:
        raise ConfigError("--n-samples must be >= 1")
    if cfg.ensemble == "asymptotic":
        if cfg.d is None or cfg.b is None:
            raise ConfigError("asymptotic sampling needs --d and --b")
        spec_b = _validated_spectrum(cfg.b)
        if cfg.d_prime is not None and cfg.d_prime != len(spec_b):
            raise ConfigError(f"--d-prime {cfg.d_prime} contradicts len(b) = {len(spec_b)}")
        params = {"d": cfg.d, "b": list(spec_b)}
        spec_json = {"ensemble": "asymptotic", "d": cfg.d, "b": list(spec_b)}
        kind = "asymptotic"
    elif cfg.ensemble == "induced":
        if cfg.d is None or cfg.d_prime is None:
            raise ConfigError("induced sampling needs --d and --d-prime")
        params = {"d": cfg.d, "d_prime": cfg.d_prime}
        spec_json = {"ensemble": "induced", "d": cfg.d, "d_prime": cfg.d_prime}
        kind = "induced"
    else:
        raise ConfigError("--ensemble must be 'asymptotic' or 'induced'")

    n = cfg.n_samples
    jobs = min(cfg.jobs, n)
    bounds = [(n * j) // jobs for j in range(jobs + 1)]
    chunks = [
        (kind, params, cfg.seed, bounds[j], bounds[j + 1] - bounds[j], cfg.tol_profile)
        for j in range(jobs)
        if bounds[j + 1] > bounds[j]
    ]
    if jobs == 1:
        results = [_sample_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sample_chunk, chunks))
    rows = [row for chunk_rows, _ in results for row in chunk_rows]
    retry_count = sum(r for _, r in results)

    write_eigenvalue_csv(cfg.out, rows)
    write_manifest(manifest_path(cfg.out), {
        "spec": spec_json,
        "seed": cfg.seed,
        "count": n,
        "retry_count": retry_count,
    })
    print(f"wrote {n} eigenvalue rows to {cfg.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _initial_state(cfg: RunConfig, d: int, tol: ToleranceConfig) -> DensityMatrix:
    if cfg.rho0_file:
        try:
            obj = json.loads(Path(cfg.rho0_file).read_text())
            arr = np.asarray(obj["matrix"], dtype=float)
            m = (arr[:, 0] + 1j * arr[:, 1]).reshape(int(obj["d"]), int(obj["d"]))
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read initial state: {exc}") from exc
        return DensityMatrix.from_matrix(m, tol)
    try:
        return initial_state_preset(cfg.rho0, d)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def _env_law(cfg: RunConfig, d_prime: int, tol: ToleranceConfig):
    if cfg.env_b and len(cfg.env_b) != d_prime:
        raise ConfigError(f"--env-b has {len(cfg.env_b)} entries but d_prime is {d_prime}")
    if cfg.env_law == "fixed-spectrum":
        spectrum = _validated_spectrum(cfg.env_b, "env_b") if cfg.env_b else (1.0,) + (0.0,) * (d_prime - 1)
        return FixedSpectrumHaarBasis(spectrum)
    if cfg.env_law == "dirac":
        if cfg.env_b:
            beta = DensityMatrix(np.diag(np.asarray(_validated_spectrum(cfg.env_b, "env_b"), dtype=complex)))
        else:
            beta = DensityMatrix.maximally_mixed(d_prime)
        return DiracAt(beta)
    if cfg.env_law == "induced-pure":
        return InducedPure(d_prime, cfg.env_ancilla or d_prime)
    raise ConfigError(f"unknown env law {cfg.env_law!r}")


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ConfigError("simulate needs --out for the CSV file")
    if cfg.n_steps < 1:
        raise ConfigError("--n-steps must be >= 1")
    tol = TOL_PROFILES[cfg.tol_profile]
    d_prime = cfg.d_prime or (len(cfg.env_b) if cfg.env_b else None)

    if cfg.scheme == "fixed":
        ch, _ = _load_channel(cfg, tol)
        rho0 = _initial_state(cfg, ch.d, tol)
        target, _ = invariant_state(ch, tol=tol)
        traj = run_fixed(ch, rho0, cfg.n_steps, target=target, tol=tol)
        d = ch.d
        d_prime = d_prime or (len(cfg.b) if cfg.b else None)
    elif cfg.scheme == "random-env":
        if cfg.d is None or d_prime is None:
            raise ConfigError("random-env needs --d and --d-prime (or --env-b)")
        d = cfg.d
        law = _env_law(cfg, d_prime, tol)
        U = haar_unitary(d * d_prime, RngStream(cfg.seed).generator())
        mean = env_mean(law)
        mean_channel = kraus_from_stinespring(
            StinespringChannel.build(U, DensityMatrix.from_matrix(mean, tol), d, tol), tol
        )
        target, _ = invariant_state(mean_channel, tol=tol)
        rho0 = _initial_state(cfg, d, tol)
        traj = run_random_env(U, law, rho0, cfg.n_steps,
                              RngStream(cfg.seed, 1).generator(), target=target, tol=tol)
    elif cfg.scheme == "iid-unitary":
        if cfg.d is None or d_prime is None:
            raise ConfigError("iid-unitary needs --d and --d-prime (or --env-b)")
        d = cfg.d
        law = _env_law(cfg, d_prime, tol)
        rho0 = _initial_state(cfg, d, tol)
        target = DensityMatrix.maximally_mixed(d)
        traj = run_iid_unitary(law, rho0, cfg.n_steps,
                               RngStream(cfg.seed, 1).generator(), target=target, tol=tol)
    else:
        raise ConfigError("--scheme must be 'fixed', 'random-env' or 'iid-unitary'")

    rows = [
        (step, dist, ces)
        for step, dist, ces in zip(traj.steps, traj.distances, traj.cesaro_distances)
        if step >= 1
    ]
    write_trajectory_csv(cfg.out, rows)
    write_manifest(manifest_path(cfg.out), {
        "scheme": cfg.scheme,
        "d": d,
        "d_prime": d_prime,
        "seed": cfg.seed,
        "n_steps": cfg.n_steps,
        "config": cfg.to_json(),
    })
    print(f"wrote {len(rows)} trajectory checkpoints to {cfg.out}")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    from .selftest import run_selftest

    return run_selftest(only=cfg.only, seed=cfg.seed, tol_profile=cfg.tol_profile)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base RNG seed (64-bit)")
    p.add_argument("--config", type=str, default=None, help="JSON config file; flags override it")
    p.add_argument("--out", type=str, default=None, help="output path")
    p.add_argument("--jobs", type=int, default=None, help="parallel sampling workers")
    p.add_argument("--tol-profile", choices=sorted(TOL_PROFILES), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repint",
        description="Repeated quantum interactions: channel analysis, ensembles, dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-channel", help="spectral/irreducibility report for a channel")
    _add_common(p)
    p.add_argument("--fixture", choices=sorted(CHANNEL_FIXTURES), default=None)
    p.add_argument("--channel-file", type=str, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-prime", type=int, default=None)
    p.add_argument("--b", type=str, default=None, help="environment spectrum, e.g. 1,0 or 3/4,1/4")
    p.set_defaults(func=cmd_check_channel)

    p = sub.add_parser("sample", help="draw ensemble samples, write eigenvalue CSV + manifest")
    _add_common(p)
    p.add_argument("--ensemble", choices=["asymptotic", "induced"], default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-prime", type=int, default=None)
    p.add_argument("--b", type=str, default=None)
    p.add_argument("--n-samples", type=int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="run a repeated-interaction trajectory, write CSV + manifest")
    _add_common(p)
    p.add_argument("--scheme", choices=["fixed", "random-env", "iid-unitary"], default=None)
    p.add_argument("--fixture", choices=sorted(CHANNEL_FIXTURES), default=None)
    p.add_argument("--channel-file", type=str, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-prime", type=int, default=None)
    p.add_argument("--b", type=str, default=None)
    p.add_argument("--n-steps", type=int, default=None)
    p.add_argument("--rho0", type=str, default=None, help="initial state preset: mixed, pure0, plus-y")
    p.add_argument("--rho0-file", type=str, default=None)
    p.add_argument("--env-law", choices=["fixed-spectrum", "dirac", "induced-pure"], default=None)
    p.add_argument("--env-b", type=str, default=None, help="environment spectrum for the env law")
    p.add_argument("--env-ancilla", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", help="run the embedded acceptance checks")
    _add_common(p)
    p.add_argument("--only", type=str, default=None, help="comma-separated check-name filters")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args.command, args)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DriftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DRIFT
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RepintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
