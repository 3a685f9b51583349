import functools
import warnings
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click

from syncgain.errors import (
    ConfigError,
    InputError,
    NoGuaranteeError,
    NumericalError,
    PreconditionError,
)

STARTERS = [
    "oscillators",
    "consensus",
    "double_integrator",
    "counterexample_g",
]

EXIT_USAGE = 2
EXIT_NO_GUARANTEE = 3
EXIT_NUMERICAL = 4

DEMO_T_END = 50.0

# flags that override the top level of a run configuration
RUN_FLAGS = [
    "pair",
    "graph",
    "gain",
    "delta",
    "t_end",
    "steps",
    "out",
    "seed",
]


@click.group()
@click.version_option(package_name="syncgain")
def main() -> None:
    """
    syncgain: Synthesize and verify synchronizing gains for coupled arrays.
    """
    pass


# ------------------------------------------------------------------
# Shared plumbing
# ------------------------------------------------------------------


def _fail(message: str, code: int) -> None:
    click.echo(f"[x] {message}", err=True)
    raise click.exceptions.Exit(code)


@contextmanager
def _guard():
    """Map library errors to exit codes and echo captured warnings."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            yield
        except NoGuaranteeError as e:
            hint = (
                f" See `syncgain verify {e.counterexample}`."
                if e.counterexample
                else ""
            )
            _fail(f"No guarantee: {e}{hint}", EXIT_NO_GUARANTEE)
        except NumericalError as e:
            _fail(f"Numerical failure: {e}", EXIT_NUMERICAL)
        except (InputError, ConfigError, PreconditionError) as e:
            _fail(str(e), EXIT_USAGE)
        finally:
            for w in caught:
                click.echo(f"  [!] {w.message}", err=True)


def run_options(f):
    """Options every computing command accepts; flags override --config."""
    options = [
        click.option(
            "--config",
            "config_file",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            default=None,
            help="Run configuration (.toml or .json).",
        ),
        click.option("--pair", default=None, help="Pair file or inline JSON."),
        click.option(
            "--graph",
            default=None,
            help="Graph file, inline JSON or a generator such as ring:5.",
        ),
        click.option("--gain", default=None, help="Gain file to use."),
        click.option("--delta", type=float, default=None),
        click.option("--t-end", "t_end", type=float, default=None),
        click.option("--steps", type=int, default=None),
        click.option(
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            default=None,
            help="Directory for report.json and artifacts.",
        ),
        click.option("--seed", type=int, default=None),
        click.option("--tol-eig", "tol_eig", type=float, default=None),
        click.option("--tol-gram", "tol_gram", type=float, default=None),
        click.option("--tol-care", "tol_care", type=float, default=None),
        click.option("--tol-int", "tol_int", type=float, default=None),
        click.option("--margin", type=float, default=None),
    ]
    for option in reversed(options):
        f = option(f)

    @functools.wraps(f)
    def wrapper(**kwargs: Any):
        with _guard():
            kwargs["config"] = _resolve_config(kwargs)
            return f(**kwargs)

    return wrapper


def _resolve_config(kwargs: dict[str, Any]):
    from pydantic import ValidationError

    from syncgain.io import load_run_config
    from syncgain.models import RunConfig

    config_file = kwargs.pop("config_file")
    config = (
        load_run_config(config_file) if config_file is not None else None
    )
    data = (
        config.model_dump(by_alias=True, exclude_unset=True)
        if config is not None
        else {}
    )
    if config is not None:
        data["base_dir"] = config.base_dir
    for key in RUN_FLAGS:
        value = kwargs.pop(key)
        if value is not None:
            data[key] = value
    tolerances = dict(data.get("tolerances", {}))
    for key, name in (
        ("tol_eig", "eig"),
        ("tol_gram", "gram"),
        ("tol_care", "care"),
        ("tol_int", "int"),
        ("margin", "margin"),
    ):
        value = kwargs.pop(key)
        if value is not None:
            tolerances[name] = value
    data["tolerances"] = tolerances
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(
            "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
                for err in e.errors()
            )
        ) from e


def _require_pair(config):
    from syncgain.io import load_pair

    if config.pair is None:
        raise ConfigError("No pair given; use --pair or set 'pair'.")
    return load_pair(config.pair, config.base_dir)


def _require_graph(config):
    from syncgain.io import load_graph

    if config.graph is None:
        raise ConfigError("No graph given; use --graph or set 'graph'.")
    return load_graph(config.graph, config.base_dir)


def _gain_for(config, pair):
    """The configured gain file, or a freshly synthesized gain."""
    from syncgain.io import load_gain
    from syncgain.synthesis import synth_auto

    if config.gain is not None:
        gain = load_gain(config.gain, config.base_dir)
        if gain.L.shape != (pair.n, pair.m):
            raise ConfigError(
                f"Gain is {gain.L.shape[0]}×{gain.L.shape[1]}, the pair "
                f"needs {pair.n}×{pair.m}."
            )
        return gain
    tol = config.tolerances
    return synth_auto(
        pair,
        config.delta,
        eps_eig=tol.eig,
        eps_gram=tol.gram,
        eps_care=tol.care,
    )


def _initial_state(config, size: int):
    import numpy as np

    if config.x0 is not None:
        if len(config.x0) != size:
            raise ConfigError(
                f"x0 has {len(config.x0)} entries, expected {size}."
            )
        return np.array(config.x0, dtype=float)
    return np.random.default_rng(config.seed).normal(size=size)


def _finish(config, command: str, results: dict, files: list) -> None:
    from syncgain.io import write_report

    if config.out is None:
        return
    path = write_report(config.out, command, results, files)
    click.echo(f"\n[✓] Done. Report written to {path}")


# ------------------------------------------------------------------
# init / validate
# ------------------------------------------------------------------


@main.command(name="init")
@click.argument("directory", default=".", type=click.Path(path_type=Path))
@click.option(
    "--starter",
    required=True,
    type=click.Choice(["blank"] + STARTERS),
    help="Starter run ('blank' copies the documented default config).",
)
def init_cmd(directory: Path, starter: str) -> None:
    """Create a run directory from a starter configuration."""
    import shutil
    from importlib.resources import files

    templates_path = files("syncgain") / "templates"
    config_path = directory / "config.toml"
    if config_path.exists():
        _fail(f"'{config_path}' already exists.", EXIT_USAGE)

    directory.mkdir(parents=True, exist_ok=True)
    if starter == "blank":
        shutil.copy(
            str(templates_path / "default_config.toml"), str(config_path)
        )
    else:
        source = templates_path / "starters" / starter
        shutil.copytree(str(source), str(directory), dirs_exist_ok=True)

    click.echo(f"\n[✓] Run created at '{directory}'.")
    click.echo(f"    Edit {config_path} and run `syncgain simulate "
               f"--config {config_path}`.")


@main.command(name="validate")
@click.argument(
    "config_file", type=click.Path(exists=True, path_type=Path)
)
def validate_cmd(config_file: Path) -> None:
    """Validate a run configuration and the pair, graph and gain it names."""
    from syncgain.errors import SyncGainError
    from syncgain.io import load_gain, load_graph, load_pair, load_run_config

    click.echo(f"Validating: {config_file}")
    try:
        config = load_run_config(config_file)
    except ConfigError as e:
        click.echo(f"  [x] config: {e}", err=True)
        raise click.exceptions.Exit(EXIT_USAGE)
    click.echo("  [✓] config")

    failed = False
    checks = [
        ("pair", config.pair, load_pair),
        ("graph", config.graph, load_graph),
        ("gain", config.gain, load_gain),
    ]
    for name, source, loader in checks:
        if source is None:
            continue
        try:
            loaded = loader(source, config.base_dir)
        except SyncGainError as e:
            click.echo(f"  [x] {name}: {e}", err=True)
            failed = True
            continue
        detail = ""
        if name == "pair":
            detail = f" (n={loaded.n}, m={loaded.m})"
        elif name == "graph":
            detail = f" (p={loaded.p})"
        click.echo(f"  [✓] {name}{detail}")

    if failed:
        raise click.exceptions.Exit(EXIT_USAGE)
    click.echo("\nAll files valid.")


# ------------------------------------------------------------------
# classify / synthesize / simulate
# ------------------------------------------------------------------


@main.command(name="classify")
@run_options
def classify_cmd(config, **_: Any) -> None:
    """Report the classes (C, A) belongs to, with numerical evidence."""
    from syncgain.io import write_json
    from syncgain.models import ClassRecord
    from syncgain.report import render_class_report
    from syncgain.sysclass import classify

    pair = _require_pair(config)
    report = classify(pair, config.tolerances.eig)
    click.echo(render_class_report(report))

    record = ClassRecord.from_report(report).model_dump(mode="json")
    files = []
    if config.out is not None:
        files.append(
            write_json(config.out / "classification.json", record, config.out)
        )
    _finish(config, "classify", {"classification": record}, files)


@main.command(name="synthesize")
@run_options
def synthesize_cmd(config, **_: Any) -> None:
    """Synthesize a gain from the strongest branch that applies."""
    from syncgain.io import write_json
    from syncgain.models import ClassRecord, GainModel
    from syncgain.report import render_gain
    from syncgain.sysclass import classify

    pair = _require_pair(config)
    record = ClassRecord.from_report(classify(pair, config.tolerances.eig))
    gain = _gain_for(config.model_copy(update={"gain": None}), pair)
    click.echo(render_gain(gain))

    model = GainModel.from_gain(gain)
    files = []
    if config.out is not None:
        files.append(write_json(config.out / "gain.json", model, config.out))
    _finish(
        config,
        "synthesize",
        {
            "classification": record.model_dump(mode="json"),
            "branch": gain.branch,
            "guarantee": gain.guarantee,
            "gain": model.model_dump(mode="json"),
        },
        files,
    )
    click.echo(f"[✓] {gain.branch}: guarantee {gain.guarantee}")


def _simulate(config, pair, gain, gamma):
    from syncgain.simulate import (
        default_horizon,
        output_coupled_array,
        simulate_array,
        sync_metrics,
    )

    tol = config.tolerances
    x0 = _initial_state(config, gamma.p * pair.n)
    spec = output_coupled_array(pair, gain.L, gamma, x0)
    t_end = config.t_end or default_horizon(gamma, tol.zero)
    traj = simulate_array(
        spec, t_end, config.steps, eps_int=tol.int_, eps_zero=tol.zero
    )
    return spec, traj, sync_metrics(traj)


@main.command(name="simulate")
@run_options
def simulate_cmd(config, **_: Any) -> None:
    """Simulate the output-coupled array and summarize synchronization."""
    from syncgain.io import write_json, write_trajectory_csv
    from syncgain.models import GainModel, SummaryRecord
    from syncgain.report import render_summary

    pair = _require_pair(config)
    gamma = _require_graph(config)
    gain = _gain_for(config, pair)
    _, traj, summary = _simulate(config, pair, gain, gamma)
    click.echo(render_summary(summary))

    record = SummaryRecord.from_summary(summary, traj)
    files = []
    if config.out is not None:
        files.append(
            write_trajectory_csv(
                config.out / "trajectory.csv", traj, config.out
            )
        )
        files.append(
            write_json(config.out / "summary.json", record, config.out)
        )
    _finish(
        config,
        "simulate",
        {
            "gain": GainModel.from_gain(gain).model_dump(mode="json"),
            "summary": record.model_dump(mode="json"),
        },
        files,
    )


# ------------------------------------------------------------------
# verify / demo
# ------------------------------------------------------------------


VERIFY_TARGETS = ["e", "f", "g", "h", "spectral", "claim1", "ensemble"]


@main.command(name="verify")
@click.argument("target", type=click.Choice(VERIFY_TARGETS))
@click.option("--cases", type=int, default=20, show_default=True)
@click.option("--p-max", "p_max", type=int, default=200, show_default=True)
@run_options
def verify_cmd(
    target: str, cases: int, p_max: int, config, **_: Any
) -> None:
    """Run a counterexample (e, f, g, h) or a spectral check.

    \b
    spectral  spectral test of the configured pair, gain and graph
    claim1    Riccati gain sampling for σ ≥ 1 on the configured pair
    ensemble  criterion vs simulation on a seeded random ensemble
    """
    from syncgain.io import write_json, write_trajectory_csv
    from syncgain.models import CounterexampleRecord, VerdictRecord
    from syncgain.report import (
        render_claim1,
        render_counterexample,
        render_ensemble,
        render_verdict,
    )

    tol = config.tolerances
    files = []
    out = config.out

    if target in ("e", "f", "g", "h"):
        from syncgain.verify import demo_statement

        L = None
        if config.gain is not None and target in ("f", "g"):
            L = _gain_for(config, _statement_pair(target)).L
        report = demo_statement(target, L, p_max=p_max, eps_int=tol.int_)
        click.echo(render_counterexample(report))
        record = CounterexampleRecord.from_report(report)
        if out is not None:
            files.append(
                write_json(out / f"statement_{target}.json", record, out)
            )
            files.append(
                write_trajectory_csv(
                    out / "trajectory.csv", report.trajectory, out
                )
            )
        results = {"counterexample": record.model_dump(mode="json")}
        mark = "✓" if report.confirmed else "x"
        click.echo(f"[{mark}] Statement ({target}) confirmed: "
                   f"{report.confirmed}")

    elif target == "spectral":
        from syncgain.verify import spectral_sync_test

        pair = _require_pair(config)
        gamma = _require_graph(config)
        gain = _gain_for(config, pair)
        verdict = spectral_sync_test(
            pair.A, gain.L @ pair.C, gamma, tol.margin, tol.zero
        )
        click.echo(render_verdict(verdict))
        record = VerdictRecord.from_verdict(verdict)
        if out is not None:
            files.append(write_json(out / "verdict.json", record, out))
        results = {
            "branch": gain.branch,
            "guarantee": gain.guarantee,
            "verdict": record.model_dump(mode="json"),
        }

    elif target == "claim1":
        from syncgain.verify import claim1_check

        pair = _require_pair(config)
        result = claim1_check(pair.C, pair.A, eps_care=tol.care)
        click.echo(render_claim1(result))
        results = {
            "claim1": {
                "holds": result.holds,
                "worst_abscissa": result.worst_abscissa,
                "samples": result.samples,
            }
        }

    else:
        import numpy as np

        from syncgain.verify import criterion_agreement

        margin = tol.margin or 0.05
        result = criterion_agreement(
            np.random.default_rng(config.seed), cases, margin
        )
        click.echo(render_ensemble(result))
        results = {
            "ensemble": {
                "seed": config.seed,
                "margin": margin,
                "agreements": result.agreements,
                "cases": len(result.cases),
                "rejected": result.rejected,
            }
        }

    _finish(config, f"verify {target}", results, files)


def _statement_pair(target: str):
    from syncgain.sysclass import SystemPair

    if target == "f":
        return SystemPair(C=[[1.0, 0.0]], A=[[0.0, 1.0], [0.0, 0.0]])
    return SystemPair(C=[[1.0]], A=[[1.0]])


@main.command(name="demo")
@run_options
def demo_cmd(config, **_: Any) -> None:
    """Coupled harmonic oscillators end to end (default graph ring:3)."""
    from syncgain.interconnect import ring
    from syncgain.io import write_json, write_trajectory_csv
    from syncgain.models import GainModel, SummaryRecord, VerdictRecord
    from syncgain.report import render_gain, render_summary, render_verdict
    from syncgain.simulate import OSCILLATOR
    from syncgain.sysclass import SystemPair
    from syncgain.verify import spectral_sync_test

    pair = SystemPair(C=[[0.0, 1.0]], A=OSCILLATOR)
    gamma = _require_graph(config) if config.graph is not None else ring(3)
    if config.t_end is None:
        config = config.model_copy(update={"t_end": DEMO_T_END})

    gain = _gain_for(config.model_copy(update={"gain": None}), pair)
    click.echo(render_gain(gain))
    verdict = spectral_sync_test(
        pair.A, gain.L @ pair.C, gamma, config.tolerances.margin
    )
    click.echo(render_verdict(verdict))
    _, traj, summary = _simulate(config, pair, gain, gamma)
    click.echo(render_summary(summary))

    record = SummaryRecord.from_summary(summary, traj)
    files = []
    if config.out is not None:
        files.append(
            write_trajectory_csv(
                config.out / "trajectory.csv", traj, config.out
            )
        )
        files.append(
            write_json(config.out / "summary.json", record, config.out)
        )
    _finish(
        config,
        "demo",
        {
            "gain": GainModel.from_gain(gain).model_dump(mode="json"),
            "verdict": VerdictRecord.from_verdict(verdict).model_dump(
                mode="json"
            ),
            "summary": record.model_dump(mode="json"),
        },
        files,
    )
    mark = "✓" if summary.decayed else "x"
    click.echo(f"[{mark}] Oscillators synchronized: {summary.decayed}")
