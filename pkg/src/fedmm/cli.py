"""Experiment harness: config-driven runs, comparisons, and data export.

Config files are INI-style text with three kinds of sections::

    [problem]                     [algo]  (or [algo:<label>])   [output]
    kind = quadratic              name = FedGDAGT               trace = out.csv
    m = 20                        K = 20                        emit_plot_data = false
    d = 50                        rounds = 600                  timing = false
    n = 500                       eta = 1e-4   (FedGDAGT may    robust_loss = true
    seed = 7                                    omit it: auto)
    alpha = 5.0   (rlr only)
    radius_y = 1.0 (rlr only)

Unknown sections or keys are rejected loudly, naming the offender. The
environment variable ``FEDMM_SEED`` overrides the config seed when set.

Trace CSV schema (stable):
``round,algorithm,K,eta_x,eta_y,gap_sq,grad_norm,robust_loss,elapsed_ns``;
absent metrics emit empty fields and rows are ordered by (algorithm, round).
``elapsed_ns`` is left empty unless ``timing = true``, so that identical
config + seed reruns produce byte-identical files.

Exit codes: 0 success, 2 config error, 3 divergence abort.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

import numpy as np

from .algorithms import (
    ALGORITHMS,
    FEDGDA_GT,
    AlgoConfig,
    DivergenceError,
    RunTrace,
    auto_eta_fedgda,
    run_algorithm,
)
from .analysis import (
    UnstableStepsizeError,
    fixed_point_report,
    robust_loss,
)
from .core import Iterate
from .datagen import QuadraticGenSpec, RlrGenSpec, gen_quadratic, gen_rlr, save_dataset
from .genbounds import BoundInputs, bound_terms, vc_rademacher_bound
from .problems import (
    MinimaxProblem,
    RobustLinearRegression,
    ScalarTwoAgent,
    UnsupportedProblemError,
    closed_form_minimax,
)

PROBLEM_KINDS = ("scalar2", "quadratic", "rlr")

_PROBLEM_KEYS = {
    "scalar2": {"kind"},
    "quadratic": {"kind", "m", "d", "n", "seed"},
    "rlr": {"kind", "m", "d", "n", "alpha", "seed", "radius_y"},
}
_ALGO_KEYS = {"name", "K", "rounds", "eta", "eta_x", "eta_y"}
_OUTPUT_KEYS = {"trace", "emit_plot_data", "timing", "robust_loss"}
_BOUNDS_KEYS = {"m", "n", "M_i", "cover_size", "delta", "epsilon", "L_y",
                "rademacher", "vc_dim"}

CSV_HEADER = "round,algorithm,K,eta_x,eta_y,gap_sq,grad_norm,robust_loss,elapsed_ns"


class ConfigError(ValueError):
    """The config file is invalid; the message names the offending item."""


def _read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, default_section="")
    parser.optionxform = str  # keys are case-sensitive
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parser


def _check_keys(section: str, present, allowed) -> None:
    for key in present:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")


def _get(section, key, conv, what, *, required=True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {key!r} in [{what}]")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{what}]: cannot parse {raw!r}") from exc


def _to_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw}")


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------

def _build_problem(section) -> tuple[MinimaxProblem, dict]:
    kind = _get(section, "kind", str, "problem")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"unknown problem kind {kind!r}; choose from {PROBLEM_KINDS}")
    _check_keys("problem", section.keys(), _PROBLEM_KEYS[kind])

    info = {"kind": kind}
    if kind == "scalar2":
        return ScalarTwoAgent(), info

    m = _get(section, "m", int, "problem")
    d = _get(section, "d", int, "problem")
    n = _get(section, "n", int, "problem")
    seed = _get(section, "seed", int, "problem")
    env_seed = os.environ.get("FEDMM_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"FEDMM_SEED must be an integer, got {env_seed!r}") from exc
    info.update(m=m, d=d, n=n, seed=seed)

    try:
        if kind == "quadratic":
            spec = QuadraticGenSpec(m=m, d=d, n_i=n, seed=seed)
            return gen_quadratic(spec), {**info, "spec": spec}
        alpha = _get(section, "alpha", float, "problem")
        radius_y = _get(section, "radius_y", float, "problem",
                        required=False, default=1.0)
        spec = RlrGenSpec(m=m, d=d, n_i=n, alpha=alpha, seed=seed)
        problem = gen_rlr(spec)
        if radius_y != 1.0:
            problem = RobustLinearRegression(
                [a.A for a in problem.agents], [a.b for a in problem.agents],
                y_radius=radius_y,
            )
        return problem, {**info, "alpha": alpha, "spec": spec}
    except ValueError as exc:
        raise ConfigError(f"problem generation failed: {exc}") from exc


def _algo_sections(parser) -> list[tuple[str, str | None]]:
    """(section name, label) for every algo section, in file order."""
    found = []
    for name in parser.sections():
        if name == "algo":
            found.append((name, None))
        elif name.startswith("algo:"):
            label = name[len("algo:"):]
            if not label:
                raise ConfigError(f"empty label in section [{name}]")
            found.append((name, label))
        elif name not in ("problem", "output"):
            raise ConfigError(f"unknown section [{name}]")
    return found


def _build_algo(section, section_name: str, problem: MinimaxProblem,
                label: str | None) -> tuple[str, AlgoConfig]:
    _check_keys(section_name, section.keys(), _ALGO_KEYS)
    name = _get(section, "name", str, section_name)
    if name not in ALGORITHMS:
        raise ConfigError(
            f"unknown algorithm {name!r} in [{section_name}]; choose from {ALGORITHMS}"
        )
    K = _get(section, "K", int, section_name, required=False, default=1)
    rounds = _get(section, "rounds", int, section_name)
    eta = _get(section, "eta", float, section_name, required=False)
    eta_x = _get(section, "eta_x", float, section_name, required=False)
    eta_y = _get(section, "eta_y", float, section_name, required=False)

    if eta is not None and (eta_x is not None or eta_y is not None):
        raise ConfigError(f"[{section_name}]: give either eta or eta_x/eta_y, not both")
    if (eta_x is None) != (eta_y is None):
        raise ConfigError(f"[{section_name}]: eta_x and eta_y must be given together")
    if eta is not None:
        eta_x = eta_y = eta
    if eta_x is None:
        if name != FEDGDA_GT:
            raise ConfigError(f"[{section_name}]: {name} requires an explicit stepsize")
        try:
            eta_x = eta_y = auto_eta_fedgda(problem, K).eta
        except (UnsupportedProblemError, ValueError) as exc:
            raise ConfigError(
                f"[{section_name}]: cannot auto-select a stepsize for this problem "
                f"({exc}); give eta explicitly"
            ) from exc

    init = Iterate.zeros(problem.p, problem.q)
    try:
        config = AlgoConfig(algo=name, eta_x=eta_x, eta_y=eta_y, K=K,
                            rounds=rounds, init=init)
    except ValueError as exc:
        raise ConfigError(f"[{section_name}]: {exc}") from exc
    return (label if label is not None else name), config


def _build_output(parser, problem: MinimaxProblem) -> dict:
    if "output" not in parser:
        raise ConfigError("missing required section [output]")
    section = parser["output"]
    _check_keys("output", section.keys(), _OUTPUT_KEYS)
    is_rlr = isinstance(problem, RobustLinearRegression)
    out = {
        "trace": _get(section, "trace", str, "output"),
        "emit_plot_data": _get(section, "emit_plot_data", _to_bool, "output",
                               required=False, default=False),
        "timing": _get(section, "timing", _to_bool, "output",
                       required=False, default=False),
        "robust_loss": _get(section, "robust_loss", _to_bool, "output",
                            required=False, default=is_rlr),
    }
    if out["robust_loss"] and not is_rlr:
        raise ConfigError("robust_loss tracking is only available for rlr problems")
    return out


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_trace_csv(path, runs: list[tuple[str, RunTrace]], *, timing: bool) -> None:
    lines = [CSV_HEADER]
    for label, trace in sorted(runs, key=lambda item: item[0]):
        cfg = trace.config
        for rec in trace.records:
            lines.append(",".join([
                str(rec.round),
                label,
                str(cfg.K),
                _fmt(cfg.eta_x),
                _fmt(cfg.eta_y),
                _fmt(rec.gap_sq),
                _fmt(rec.grad_norm),
                _fmt(rec.robust_loss),
                str(rec.elapsed_ns) if timing else "",
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_plot_csv(path, runs: list[tuple[str, RunTrace]]) -> None:
    """Long-format (round, algorithm, metric, value) file for plotting tools."""
    lines = ["round,algorithm,metric,value"]
    for label, trace in sorted(runs, key=lambda item: item[0]):
        for rec in trace.records:
            if rec.gap_sq is not None:
                metric, value = "gap_sq", rec.gap_sq
            elif rec.robust_loss is not None:
                metric, value = "robust_loss", rec.robust_loss
            else:
                metric, value = "grad_norm", rec.grad_norm
            lines.append(f"{rec.round},{label},{metric},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _execute(config_path, *, expect_compare: bool) -> int:
    parser = _read_ini(config_path)
    if "problem" not in parser:
        raise ConfigError("missing required section [problem]")
    problem, _info = _build_problem(parser["problem"])
    algo_sections = _algo_sections(parser)
    if expect_compare and len(algo_sections) < 2:
        raise ConfigError("compare needs at least two [algo] sections")
    if not expect_compare and len(algo_sections) != 1:
        raise ConfigError("run needs exactly one [algo] section")
    output = _build_output(parser, problem)

    try:
        z_star = closed_form_minimax(problem)
    except UnsupportedProblemError:
        z_star = None
    loss_fn = None
    if output["robust_loss"]:
        loss_fn = lambda z: robust_loss(problem, z.x).value  # noqa: E731

    runs = []
    labels = set()
    for section_name, label in algo_sections:
        label, config = _build_algo(parser[section_name], section_name, problem, label)
        if label in labels:
            raise ConfigError(f"duplicate algorithm label {label!r}")
        labels.add(label)
        trace = run_algorithm(problem, config, z_star=z_star, robust_loss_fn=loss_fn)
        runs.append((label, trace))

    write_trace_csv(output["trace"], runs, timing=output["timing"])
    if output["emit_plot_data"]:
        write_plot_csv(Path(output["trace"]).with_suffix(".plot.csv"), runs)
    return 0


def cmd_run(config_path) -> int:
    return _execute(config_path, expect_compare=False)


def cmd_compare(config_path) -> int:
    return _execute(config_path, expect_compare=True)


def cmd_fixed_point(K: int, eta: float) -> int:
    report = fixed_point_report(K, eta, eta)
    star = report.z_star
    fixed = report.z_fixed
    sim = report.z_simulated
    print(f"K = {report.K}, eta_x = {report.eta_x!r}, eta_y = {report.eta_y!r}")
    print(f"closed-form fixed point:    x = {float(fixed.x[0])!r}, y = {float(fixed.y[0])!r}")
    print(f"simulated limit:            x = {float(sim.x[0])!r}, y = {float(sim.y[0])!r}")
    print(f"closed-form vs simulated:   {report.sim_agreement:.6e}")
    print(f"minimax point:              x = {float(star.x[0])!r}, y = {float(star.y[0])!r}")
    print(f"squared gap to minimax:     {report.gap:.6e}")
    print(f"fixed-point residual norm:  {report.residual_norm:.6e}")
    return 0


def cmd_bounds(inputs_path) -> int:
    parser = _read_ini(inputs_path)
    if "bounds" not in parser:
        raise ConfigError("missing required section [bounds]")
    for name in parser.sections():
        if name != "bounds":
            raise ConfigError(f"unknown section [{name}]")
    section = parser["bounds"]
    _check_keys("bounds", section.keys(), _BOUNDS_KEYS)

    def parse_list(raw: str):
        return [float(tok) for tok in raw.replace(",", " ").split()]

    m = _get(section, "m", int, "bounds")
    vc_dim = _get(section, "vc_dim", int, "bounds", required=False)
    try:
        inputs = BoundInputs(
            m=m,
            n=_get(section, "n", int, "bounds"),
            M_i=parse_list(_get(section, "M_i", str, "bounds")),
            cover_size=_get(section, "cover_size", int, "bounds"),
            delta=_get(section, "delta", float, "bounds"),
            epsilon=_get(section, "epsilon", float, "bounds"),
            L_y=_get(section, "L_y", float, "bounds"),
            rademacher=_get(section, "rademacher", float, "bounds"),
            vc_dim=vc_dim,
        )
    except ValueError as exc:
        raise ConfigError(f"[bounds]: {exc}") from exc

    terms = bound_terms(inputs)
    slack = sum(terms.values())
    print(f"rademacher_term     = {terms['rademacher_term']!r}")
    print(f"concentration_term  = {terms['concentration_term']!r}")
    print(f"lipschitz_term      = {terms['lipschitz_term']!r}")
    print(f"population-risk bound = empirical risk f(x,y) + {slack!r}")
    print(f"worst-case-risk bound = worst-case empirical risk g(x) + {slack!r}")
    if vc_dim is not None:
        max_sum = float(np.dot(inputs.M_i, inputs.M_i))
        value = vc_rademacher_bound(inputs.m, inputs.n, vc_dim, max_sum)
        print(f"vc_rademacher_bound = {value!r}")
    return 0


def cmd_gen_data(config_path, out_path) -> int:
    parser = _read_ini(config_path)
    if "problem" not in parser:
        raise ConfigError("missing required section [problem]")
    for name in parser.sections():
        if name != "problem":
            raise ConfigError(f"unknown section [{name}] (gen-data reads only [problem])")
    problem, info = _build_problem(parser["problem"])
    if "spec" not in info:
        raise ConfigError("gen-data needs a generated problem kind (quadratic or rlr)")
    save_dataset(out_path, problem, info["spec"])
    print(f"wrote {info['kind']} dataset (m={info['m']}, d={info['d']}, "
          f"n={info['n']}, seed={info['seed']}) to {out_path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fedmm",
        description="Deterministic federated minimax optimization harness",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one algorithm from a config file")
    p_run.add_argument("config")

    p_cmp = sub.add_parser("compare", help="run several algorithms on one problem")
    p_cmp.add_argument("config")

    p_fp = sub.add_parser("fixed-point",
                          help="fixed-point study on the two-agent scalar problem")
    p_fp.add_argument("--K", type=int, required=True)
    p_fp.add_argument("--eta", type=float, required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate generalization bounds")
    p_bounds.add_argument("inputs")

    p_gen = sub.add_parser("gen-data", help="generate and dump a dataset container")
    p_gen.add_argument("config")
    p_gen.add_argument("--out", required=True)
    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "compare":
            return cmd_compare(args.config)
        if args.command == "fixed-point":
            return cmd_fixed_point(args.K, args.eta)
        if args.command == "bounds":
            return cmd_bounds(args.inputs)
        if args.command == "gen-data":
            return cmd_gen_data(args.config, args.out)
        raise ConfigError(f"unknown command {args.command!r}")
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, UnstableStepsizeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
