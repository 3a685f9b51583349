import re
from pathlib import Path
from typing import Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    field_validator,
    model_validator,
)

from syncgain.errors import SyncGainError

RING_PATTERN = re.compile(r"^ring:(\d+)$")

Complex = tuple[float, float]


def as_pair(z: complex) -> Complex:
    """Complex number as a JSON-friendly [re, im] pair."""
    return (float(z.real), float(z.imag))


class PairModel(BaseModel):
    """Pair file: {"A": [[...]], "C": [[...]]}."""

    model_config = ConfigDict(extra="forbid")

    A: list[list[float]]
    C: list[list[float]]

    @model_validator(mode="after")
    def check_shapes(self) -> "PairModel":
        from syncgain.sysclass import SystemPair

        try:
            SystemPair(C=self.C, A=self.A)
        except SyncGainError as e:
            raise ValueError(str(e)) from e
        return self

    def to_pair(self):
        from syncgain.sysclass import SystemPair

        return SystemPair(C=self.C, A=self.A)

    @classmethod
    def from_pair(cls, pair) -> "PairModel":
        return cls(A=pair.A.tolist(), C=pair.C.tolist())


class GraphModel(BaseModel):
    """Graph file: edges with p, a full gamma matrix, or a generator.

    Edges are 1-based [i, j, weight] triples. The only generator is
    "ring:p".
    """

    model_config = ConfigDict(extra="forbid")

    p: int | None = None
    edges: list[tuple[int, int, float]] | None = None
    gamma: list[list[float]] | None = None
    generator: str | None = None

    @field_validator("generator")
    @classmethod
    def validate_generator(cls, v: str | None) -> str | None:
        if v is not None and not RING_PATTERN.match(v.strip()):
            raise ValueError(
                f"Unknown generator {v!r}; expected 'ring:<p>'."
            )
        return None if v is None else v.strip()

    @model_validator(mode="after")
    def exactly_one_source(self) -> "GraphModel":
        given = [
            name
            for name in ("edges", "gamma", "generator")
            if getattr(self, name) is not None
        ]
        if len(given) != 1:
            raise ValueError(
                "A graph needs exactly one of 'edges', 'gamma' or "
                f"'generator'; got {given or 'none'}."
            )
        if self.edges is not None and self.p is None:
            raise ValueError("'edges' requires the node count 'p'.")
        return self

    def to_interconnection(self):
        from syncgain.interconnect import (
            from_matrix,
            from_weighted_edges,
            ring,
        )

        if self.generator is not None:
            return ring(int(RING_PATTERN.match(self.generator).group(1)))
        if self.gamma is not None:
            return from_matrix(self.gamma)
        return from_weighted_edges(self.p, self.edges)


class GainModel(BaseModel):
    """Gain file written by `synthesize` and read back by `simulate`."""

    L: list[list[float]]
    branch: Literal[
        "hurwitz_zero", "algorithm1", "fullstate_pinv", "riccati_delta"
    ]
    guarantee: Literal["G>=0", "G>0", "G>=delta"]
    delta: float | None = None
    diagnostics: dict[str, Any] = {}

    @classmethod
    def from_gain(cls, gain) -> "GainModel":
        return cls(
            L=gain.L.tolist(),
            branch=gain.branch,
            guarantee=gain.guarantee,
            delta=gain.delta,
            diagnostics=gain.diagnostics,
        )

    def to_gain(self):
        import numpy as np

        from syncgain.linops import frozen
        from syncgain.synthesis import FeedbackGain

        return FeedbackGain(
            L=frozen(np.array(self.L, dtype=float)),
            branch=self.branch,
            delta=self.delta,
            diagnostics=dict(self.diagnostics),
        )


class Tolerances(BaseModel):
    """Numerical tolerances; None means the relative default."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    eig: PositiveFloat | None = None
    gram: PositiveFloat = 1e-8
    care: PositiveFloat = 1e-8
    int_: PositiveFloat = Field(1e-6, alias="int")
    zero: PositiveFloat | None = None
    margin: float = Field(0.0, ge=0.0)


class RunConfig(BaseModel):
    """One run: where the pair and graph come from and how to process them.

    ``pair`` and ``graph`` are either tables or strings. A string is a path
    (relative to ``base_dir``), inline JSON, or for graphs "ring:p".
    """

    model_config = ConfigDict(extra="forbid")

    pair: PairModel | str | None = None
    graph: GraphModel | str | None = None
    gain: str | None = None
    delta: PositiveFloat | None = None
    tolerances: Tolerances = Tolerances()
    t_end: PositiveFloat | None = None
    steps: int = Field(1000, ge=2)
    x0: list[float] | None = None
    seed: int = 0
    out: Path | None = None
    base_dir: Path = Path(".")

    @field_validator("graph", mode="before")
    @classmethod
    def strip_graph(cls, v: Any) -> Any:
        return v.strip() if isinstance(v, str) else v


# ----------------------------------------------------------------------
# Output records
# ----------------------------------------------------------------------


class ManifestEntry(BaseModel):
    path: str
    sha256: str


class RunReport(BaseModel):
    """report.json: results of one command plus every file it wrote.

    ``created`` is the only field that changes between identical runs.
    """

    command: str
    created: str
    results: dict[str, Any]
    files: list[ManifestEntry] = []


class ModeRecord(BaseModel):
    eigenvalue: Complex
    algebraic: int
    geometric: int
    pbh_rank: int


class ClassRecord(BaseModel):
    flags: dict[str, bool]
    eigenvalues: list[Complex]
    modes: list[ModeRecord]
    rank_C: int
    rank_cutoff: float
    eig_tol: float
    cluster_radius: float

    @classmethod
    def from_report(cls, report) -> "ClassRecord":
        return cls(
            flags=report.flags(),
            eigenvalues=[as_pair(z) for z in report.eigenvalues],
            modes=[
                ModeRecord(
                    eigenvalue=as_pair(m.eigenvalue),
                    algebraic=m.algebraic,
                    geometric=m.geometric,
                    pbh_rank=m.pbh_rank,
                )
                for m in report.modes
            ],
            rank_C=report.rank_C,
            rank_cutoff=report.rank_cutoff,
            eig_tol=report.eig_tol,
            cluster_radius=report.cluster_radius,
        )


class BlockRecordModel(BaseModel):
    index: int
    eigenvalue: Complex
    abscissa: float
    hurwitz: bool
    indeterminate: bool
    surplus_zero: bool


class VerdictRecord(BaseModel):
    overall: bool
    margin: float | None
    required_margin: float
    records: list[BlockRecordModel]

    @classmethod
    def from_verdict(cls, verdict) -> "VerdictRecord":
        return cls(
            overall=verdict.overall,
            margin=verdict.margin,
            required_margin=verdict.required_margin,
            records=[
                BlockRecordModel(
                    index=r.index,
                    eigenvalue=as_pair(r.eigenvalue),
                    abscissa=r.abscissa,
                    hurwitz=r.hurwitz,
                    indeterminate=r.indeterminate,
                    surplus_zero=r.surplus_zero,
                )
                for r in verdict.records
            ],
        )


class SummaryRecord(BaseModel):
    initial_sync_error: float
    final_sync_error: float
    final_tracking_error: float | None
    decayed: bool
    exponent: float | None
    average_drift: float | None
    tol: float
    integrator_discrepancy: float | None = None

    @classmethod
    def from_summary(cls, summary, traj=None) -> "SummaryRecord":
        return cls(
            initial_sync_error=summary.initial_sync_error,
            final_sync_error=summary.final_sync_error,
            final_tracking_error=summary.final_tracking_error,
            decayed=summary.decayed,
            exponent=summary.exponent,
            average_drift=summary.average_drift,
            tol=summary.tol,
            integrator_discrepancy=(
                None if traj is None else traj.integrator_discrepancy
            ),
        )


class CounterexampleRecord(BaseModel):
    statement: Literal["e", "f", "g", "h"]
    pair: PairModel
    gamma: list[list[float]]
    L: list[list[float]]
    witness: dict[str, Any]
    verdict: VerdictRecord
    summary: SummaryRecord
    confirmed: bool
    notes: list[str] = []

    @classmethod
    def from_report(cls, report) -> "CounterexampleRecord":
        witness = {
            k: as_pair(v) if isinstance(v, complex) else v
            for k, v in report.witness.items()
        }
        return cls(
            statement=report.statement,
            pair=PairModel.from_pair(report.pair),
            gamma=report.gamma.gamma.tolist(),
            L=report.L.tolist(),
            witness=witness,
            verdict=VerdictRecord.from_verdict(report.verdict),
            summary=SummaryRecord.from_summary(
                report.summary, report.trajectory
            ),
            confirmed=report.confirmed,
            notes=report.notes,
        )
