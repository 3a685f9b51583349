import csv
import hashlib
import io
import json
import tomllib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from syncgain.errors import ConfigError
from syncgain.interconnect import Interconnection
from syncgain.models import (
    GainModel,
    GraphModel,
    ManifestEntry,
    PairModel,
    RunConfig,
    RunReport,
)
from syncgain.simulate import ArrayTrajectory
from syncgain.synthesis import FeedbackGain
from syncgain.sysclass import SystemPair


def _describe(e: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in e.errors()
    )


def _read_source(source: str | Path, base_dir: Path) -> tuple[Any, str]:
    """Parse inline JSON or a JSON/TOML file; return (data, label)."""
    text = str(source).strip()
    if text.startswith("{"):
        try:
            return json.loads(text), "inline JSON"
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid inline JSON: {e}") from e
    path = Path(text)
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        raise ConfigError(f"File not found: {path}")
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f), str(path)
        return json.loads(path.read_text(encoding="utf-8")), str(path)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from e


def _validate(model: type[BaseModel], data: Any, label: str) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{label}: {_describe(e)}") from e


def load_pair(
    source: str | Path | PairModel, base_dir: Path = Path(".")
) -> SystemPair:
    """Load a (C, A) pair from a file, inline JSON or a parsed model.

    Raises:
        ConfigError: If the source cannot be read or does not validate.
    """
    if isinstance(source, PairModel):
        return source.to_pair()
    data, label = _read_source(source, base_dir)
    return _validate(PairModel, data, label).to_pair()


def load_graph(
    source: str | Path | GraphModel, base_dir: Path = Path(".")
) -> Interconnection:
    """Load Γ from a file, inline JSON, a generator such as "ring:5", or a
    parsed model.

    Raises:
        ConfigError: If the source cannot be read or does not validate.
        GraphError: If the edges or matrix are not a valid interconnection.
    """
    if isinstance(source, GraphModel):
        return source.to_interconnection()
    text = str(source).strip()
    if text.startswith("ring:"):
        model = _validate(GraphModel, {"generator": text}, text)
    else:
        data, label = _read_source(text, base_dir)
        model = _validate(GraphModel, data, label)
    return model.to_interconnection()


def load_gain(source: str | Path, base_dir: Path = Path(".")) -> FeedbackGain:
    """Load a gain file written by `syncgain synthesize`."""
    data, label = _read_source(source, base_dir)
    return _validate(GainModel, data, label).to_gain()


def load_run_config(config_file: Path) -> RunConfig:
    """Load and validate a run configuration from a TOML or JSON file.

    Relative paths inside the file, including ``out``, resolve against its
    directory.

    Raises:
        ConfigError: If the file is missing, unparsable or invalid.
    """
    config_file = Path(config_file)
    data, label = _read_source(config_file.resolve(), Path("."))
    if not isinstance(data, dict):
        raise ConfigError(f"{label}: expected a table at the top level.")
    base_dir = config_file.resolve().parent
    config = _validate(RunConfig, {**data, "base_dir": base_dir}, label)
    if config.out is not None and not config.out.is_absolute():
        config.out = base_dir / config.out
    return config


# ----------------------------------------------------------------------
# Writers
# ----------------------------------------------------------------------


def _entry(path: Path, payload: bytes, root: Path) -> ManifestEntry:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return ManifestEntry(
        path=path.relative_to(root).as_posix(),
        sha256=hashlib.sha256(payload).hexdigest(),
    )


def dumps(data: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, exact floats."""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json", by_alias=True)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, data: Any, root: Path) -> ManifestEntry:
    return _entry(path, dumps(data).encode("utf-8"), root)


def write_trajectory_csv(
    path: Path, traj: ArrayTrajectory, root: Path
) -> ManifestEntry:
    """One row per sample: t, x[i][k] for node i and coordinate k (both
    1-based), sync_error and tracking_error (blank when not tracked)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["t"]
    header += [
        f"x[{i}][{k}]"
        for i in range(1, traj.p + 1)
        for k in range(1, traj.n + 1)
    ]
    writer.writerow(header + ["sync_error", "tracking_error"])
    for row, t in enumerate(traj.times):
        tracking = (
            ""
            if traj.tracking_error is None
            else repr(float(traj.tracking_error[row]))
        )
        writer.writerow(
            [repr(float(t))]
            + [repr(float(v)) for v in traj.states[row]]
            + [repr(float(traj.sync_error[row])), tracking]
        )
    return _entry(path, buffer.getvalue().encode("utf-8"), root)


def write_report(
    out_dir: Path,
    command: str,
    results: dict[str, Any],
    files: list[ManifestEntry],
) -> Path:
    """Write report.json listing ``files`` with their SHA-256 digests."""
    report = RunReport(
        command=command,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        results=results,
        files=files,
    )
    path = out_dir / "report.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report), encoding="utf-8")
    return path
