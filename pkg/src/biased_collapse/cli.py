"""Command-line front end.

    biased-collapse <run|verify|twirl> [--config PATH] [--seed U64]
                    [--out PATH] [--format csv|json]

Exit statuses: 0 all checks pass, 1 invariant failure, 2 bad input,
3 runtime scenario error.

Config files are JSON objects. Accepted top-level keys: ``scenario``,
``seed``, ``tolerances``, ``dim``, ``n_samples``. Unknown keys are rejected.

Scenario objects:

    {"type": "feeling_future" | "avoidance" | "priming",
     "weight": 2.0, "n_trials": 10000, "rt_gap": 40.0, "deterministic": false}

    {"type": "two_lab", "policy": {"kind": "orthodox"},
     "settings": ["Q", "Q1", "None"], "n_trials": 10000}

Policies: ``{"kind": "orthodox"}``, ``{"kind": "biased", "weight_yes": w,
"weight_no": 1}``, ``{"kind": "deterministic", "outcome": "yes"}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import linalg, verify
from .errors import BiasedCollapseError
from .kernel import Outcome, born_probability, validate_density, validate_projector
from .policy import Biased, Deterministic, Orthodox, make_rng, twirl_estimate, unknown_reason_expectation
from .scenarios import (
    BemTrialSpec,
    Experiment,
    ReportRow,
    build_correlated_state,
    local_qubit_projector,
    run_bem,
    simulate_two_lab,
    standard_two_lab,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3
SEED_ENV = "BIASED_COLLAPSE_SEED"
COLUMNS = ("label", "analytic", "empirical", "stderr", "n")

_TOP_KEYS = {"scenario", "seed", "tolerances", "dim", "n_samples"}
_BEM_KEYS = {"type", "weight", "n_trials", "rt_gap", "deterministic"}
_TWO_LAB_KEYS = {"type", "policy", "settings", "n_trials"}
_TWO_LAB_SETTINGS = ("Q", "Q1", "None")


class ConfigError(ValueError):
    """Bad configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = 0
    scenario: Optional[dict] = None
    output_path: Optional[Path] = None
    format: str = "csv"
    tolerances: verify.Tolerances = field(default_factory=verify.Tolerances)
    dim: int = 2
    n_samples: int = 20_000


@dataclass(frozen=True)
class ReportFile:
    metadata: dict
    rows: tuple

    def body(self, fmt: str) -> str:
        """Serialized rows only; deterministic for a fixed config and seed."""
        if fmt == "json":
            return json.dumps([_row_dict(r) for r in self.rows], indent=2) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in self.rows:
            d = _row_dict(r)
            writer.writerow([d[c] for c in COLUMNS])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"metadata": self.metadata, "rows": [_row_dict(r) for r in self.rows]}
            return json.dumps(doc, indent=2) + "\n"
        return self.body("csv")


def _row_dict(r: ReportRow) -> dict:
    return {
        "label": r.label,
        "analytic": _num(r.analytic),
        "empirical": _num(r.empirical),
        "stderr": _num(r.stderr),
        "n": int(r.n),
    }


def _num(x: float) -> float | str:
    x = float(x)
    return x if math.isfinite(x) else str(x)


# -- config parsing -----------------------------------------------------------


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _number(d: dict, key: str, where: str, *, integer: bool = False, positive: bool = False):
    value = d[key]
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    _expect(ok and not isinstance(value, bool), f"{where}.{key}: expected a {'integer' if integer else 'number'}")
    _expect(math.isfinite(value), f"{where}.{key}: must be finite")
    if positive:
        _expect(value > 0, f"{where}.{key}: must be positive")
    return value


def _check_keys(d, allowed: set, where: str) -> None:
    _expect(isinstance(d, dict), f"{where}: expected an object")
    unknown = sorted(set(d) - allowed)
    _expect(not unknown, f"{where}: unknown key(s) {', '.join(unknown)}")


def parse_seed(value, where: str = "seed") -> int:
    try:
        seed = int(str(value), 10)
    except ValueError:
        raise ConfigError(f"{where}: not an integer: {value!r}") from None
    _expect(0 <= seed < 2**64, f"{where}: must be an unsigned 64-bit integer")
    return seed


def parse_policy(d) -> object:
    _expect(isinstance(d, dict) and "kind" in d, "scenario.policy: expected an object with 'kind'")
    kind = d["kind"]
    if kind == "orthodox":
        _check_keys(d, {"kind"}, "scenario.policy")
        return Orthodox()
    if kind == "biased":
        _check_keys(d, {"kind", "weight_yes", "weight_no"}, "scenario.policy")
        _expect("weight_yes" in d, "scenario.policy.weight_yes: required")
        w_yes = _number(d, "weight_yes", "scenario.policy", positive=True)
        w_no = _number(d, "weight_no", "scenario.policy", positive=True) if "weight_no" in d else 1.0
        return Biased(float(w_yes), float(w_no))
    if kind == "deterministic":
        _check_keys(d, {"kind", "outcome"}, "scenario.policy")
        outcome = d.get("outcome", "yes")
        _expect(outcome in ("yes", "no"), "scenario.policy.outcome: must be 'yes' or 'no'")
        return Deterministic(Outcome(outcome))
    raise ConfigError(f"scenario.policy.kind: unknown policy {kind!r}")


def validate_scenario(d) -> dict:
    _expect(isinstance(d, dict) and "type" in d, "scenario: expected an object with 'type'")
    kind = d["type"]
    if kind == "two_lab":
        _check_keys(d, _TWO_LAB_KEYS, "scenario")
        parse_policy(d.get("policy", {"kind": "orthodox"}))
        settings = d.get("settings", list(_TWO_LAB_SETTINGS))
        _expect(
            isinstance(settings, list) and len(settings) >= 1 and all(s in _TWO_LAB_SETTINGS for s in settings),
            f"scenario.settings: expected a list drawn from {list(_TWO_LAB_SETTINGS)}",
        )
        _expect(len(set(settings)) == len(settings), "scenario.settings: duplicate labels")
    else:
        _expect(kind in {e.value for e in Experiment}, f"scenario.type: unknown scenario {kind!r}")
        _check_keys(d, _BEM_KEYS, "scenario")
        if "weight" in d:
            _number(d, "weight", "scenario", positive=True)
        if "rt_gap" in d:
            _number(d, "rt_gap", "scenario")
            _expect(d["rt_gap"] >= 0, "scenario.rt_gap: must be >= 0")
        if "deterministic" in d:
            _expect(isinstance(d["deterministic"], bool), "scenario.deterministic: expected true or false")
    if "n_trials" in d:
        _number(d, "n_trials", "scenario", integer=True, positive=True)
    return d


def load_config(
    command: str,
    path: Optional[str],
    seed: Optional[str] = None,
    out: Optional[str] = None,
    fmt: Optional[str] = None,
    tolerance: Optional[float] = None,
    dim: Optional[int] = None,
    n_samples: Optional[int] = None,
) -> RunConfig:
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
        _check_keys(raw, _TOP_KEYS, "config")

    if seed is not None:
        seed_value = parse_seed(seed, "--seed")
    elif "seed" in raw:
        seed_value = parse_seed(raw["seed"], "config.seed")
    elif os.environ.get(SEED_ENV):
        seed_value = parse_seed(os.environ[SEED_ENV], SEED_ENV)
    else:
        seed_value = 0

    scenario = None
    if command == "run":
        _expect("scenario" in raw, "scenario: required for the run command")
    if "scenario" in raw:
        scenario = validate_scenario(raw["scenario"])

    tols = verify.Tolerances()
    if "tolerances" in raw:
        t = raw["tolerances"]
        _check_keys(t, {"exact", "monte_carlo", "sigmas"}, "tolerances")
        for key in t:
            _number(t, key, "tolerances")
            _expect(t[key] >= 0, f"tolerances.{key}: must be >= 0")
        tols = verify.Tolerances(**{**asdict(tols), **{k: float(v) for k, v in t.items()}})
    if tolerance is not None:
        _expect(math.isfinite(tolerance) and tolerance >= 0, "--tolerance: must be >= 0")
        tols = verify.Tolerances(**{**asdict(tols), **asdict(verify.Tolerances.uniform(tolerance))})

    if dim is not None:
        raw["dim"] = dim
    if n_samples is not None:
        raw["n_samples"] = n_samples
    if "dim" in raw:
        _number(raw, "dim", "config", integer=True)
    if "n_samples" in raw:
        _number(raw, "n_samples", "config", integer=True, positive=True)
    dim = raw.get("dim", 2)
    n_samples = raw.get("n_samples", 20_000)
    if command == "twirl":
        _expect(2 <= dim <= linalg.MAX_DIM, f"config.dim: must be between 2 and {linalg.MAX_DIM}")

    fmt = fmt or "csv"
    _expect(fmt in ("csv", "json"), "--format: must be csv or json")
    return RunConfig(
        command=command,
        seed=seed_value,
        scenario=scenario,
        output_path=Path(out) if out else None,
        format=fmt,
        tolerances=tols,
        dim=dim,
        n_samples=n_samples,
    )


# -- commands -----------------------------------------------------------------


def _metadata(config: RunConfig, **extra) -> dict:
    return {
        "command": config.command,
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tolerances": asdict(config.tolerances),
        **extra,
    }


def run_scenario(config: RunConfig) -> ReportFile:
    sc = config.scenario
    if sc["type"] == "two_lab":
        policy = parse_policy(sc.get("policy", {"kind": "orthodox"}))
        full = standard_two_lab(policy)
        wanted = sc.get("settings", list(_TWO_LAB_SETTINGS))
        chosen = tuple((label, q) for label, q in full.remote_settings if label in wanted)
        chosen = tuple(sorted(chosen, key=lambda item: wanted.index(item[0])))
        scenario = type(full)(full.state, full.local_p, chosen, policy)
        report = simulate_two_lab(scenario, int(sc.get("n_trials", 10_000)), config.seed)
    else:
        spec = BemTrialSpec(
            Experiment(sc["type"]),
            weight=float(sc.get("weight", 1.0)),
            n_trials=int(sc.get("n_trials", 10_000)),
            rt_gap=float(sc.get("rt_gap", 0.0)),
            seed=config.seed,
            deterministic=bool(sc.get("deterministic", False)),
        )
        report = run_bem(spec)
    return ReportFile(_metadata(config, scenario=sc), report.rows)


def verify_suite(config: RunConfig) -> tuple[int, ReportFile]:
    results = verify.run_all(config.tolerances, config.seed)
    rows = tuple(ReportRow(r.name, r.bound, r.residual, r.stderr, r.n, is_probability=False) for r in results)
    checks = {r.name: "pass" if r.passed else "fail" for r in results}
    status = EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
    return status, ReportFile(_metadata(config, checks=checks), rows)


def twirl_command(config: RunConfig) -> ReportFile:
    """Twirl a rank-1 projector and estimate the unknown-reason expectation on
    a correlated state; rows report errors, nothing is asserted."""
    dim, n = config.dim, config.n_samples
    rng = make_rng(config.seed)
    q = validate_projector(linalg.basis_projector(0, dim))
    twirled = twirl_estimate(q, n, rng)
    target = np.eye(dim) * q.rank / dim
    err = linalg.frobenius_distance(twirled, target)

    # test state: two qubits when dim == 4, otherwise the record question on
    # a single system prepared in the maximally mixed state
    if dim == 4:
        p = local_qubit_projector(linalg.basis_projector(0), 0)
        rho = build_correlated_state(p, local_qubit_projector(linalg.basis_projector(0), 1))
        favoured = local_qubit_projector(linalg.basis_projector(0), 1)
    else:
        rho = validate_density(np.eye(dim) / dim)
        p = validate_projector(linalg.basis_projector(0, dim))
        favoured = validate_projector(linalg.basis_projector(dim - 1, dim))
    orthodox = born_probability(rho, p)
    est = unknown_reason_expectation(rho, p, favoured, n, rng)
    rows = (
        ReportRow("twirl_frobenius_error", 0.0, err, 0.0, n, is_probability=False),
        ReportRow("unknown_reason_expectation", orthodox, est, 0.0, n),
        ReportRow("expectation_error", 0.0, abs(est - orthodox), 0.0, n, is_probability=False),
    )
    return ReportFile(_metadata(config, dim=dim), rows)


def write_report(report: ReportFile, config: RunConfig) -> None:
    text = report.render(config.format)
    if config.output_path is None:
        sys.stdout.write(text)
        return
    config.output_path.write_text(text, encoding="utf-8")
    if config.format == "csv":
        meta_path = config.output_path.with_name(config.output_path.name + ".meta.json")
        meta_path.write_text(json.dumps(report.metadata, indent=2) + "\n", encoding="utf-8")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="biased-collapse", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=("run", "verify", "twirl"))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", help=f"unsigned 64-bit seed (fallback: ${SEED_ENV})")
    parser.add_argument("--out", help="report path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--tolerance", type=float, help="verify: override every tolerance")
    parser.add_argument("--dim", type=int, help="twirl: Hilbert-space dimension")
    parser.add_argument("--n-samples", type=int, help="twirl: number of Haar samples")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.command, args.config, args.seed, args.out, args.format, args.tolerance,
                             args.dim, args.n_samples)
    except ConfigError as exc:
        print(f"biased-collapse: config error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    status = EXIT_OK
    try:
        if config.command == "run":
            report = run_scenario(config)
        elif config.command == "twirl":
            report = twirl_command(config)
        else:
            status, report = verify_suite(config)
            for name, verdict in report.metadata["checks"].items():
                print(f"{verdict.upper():4}  {name}", file=sys.stderr)
        write_report(report, config)
    except (BiasedCollapseError, ValueError) as exc:
        print(f"biased-collapse: scenario error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return status


if __name__ == "__main__":
    sys.exit(main())
