"""Types shared by the two evaluators."""

from __future__ import annotations

from dataclasses import dataclass, field


class UnsupportedFormula(ValueError):
    """The DP monitor declines a formula; the reference evaluator still accepts it."""


@dataclass(frozen=True)
class MonitorConfig:
    """Run options.

    ``bb_resolution`` selects whether ``BB(id)`` of a frozen ID variable reads
    the box from the freeze frame (``frozen``) or from the frame being
    evaluated (``current``).  Function atoms always honour the freeze.
    """

    bb_resolution: str = "frozen"
    canonicalize: bool = True
    parallel: bool = False
    workers: int = 4
    trace: str | None = None
    max_cells: int = 50_000_000

    def __post_init__(self):
        if self.bb_resolution not in ("frozen", "current"):
            raise ValueError("bb_resolution must be 'frozen' or 'current'")


@dataclass(frozen=True)
class Binding:
    variable: str
    object_id: int
    frame: int

    def as_dict(self) -> dict:
        return {"variable": self.variable, "object_id": self.object_id, "frame": self.frame}


@dataclass(frozen=True)
class Verdict:
    value: bool
    witness: tuple[Binding, ...] | None = None
    counters: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return self.value


def base_name(var: str) -> str:
    """Strip the ``~k`` suffix added when binders are renamed apart."""
    return var.split("~", 1)[0]
