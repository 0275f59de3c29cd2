"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass

TOL_REL = 1e-9
TOL_CLASS = 1e-7


@dataclass(frozen=True)
class Tolerances:
    """Identity-residual tolerance ``rel`` and rank/sign decision tolerance ``cls``."""

    rel: float = TOL_REL
    cls: float = TOL_CLASS

    def __post_init__(self) -> None:
        for name in ("rel", "cls"):
            v = getattr(self, name)
            if not (v > 0 and v < 1):
                raise ValueError(f"tolerance {name} must lie in (0, 1), got {v}")


DEFAULT = Tolerances()
