"""Tolerance bundle shared by every numerical routine."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.

    ``spec_merge_tol`` and ``decomp_tol`` are relative to the operator norm
    of the input; the others are absolute.
    """

    eq_tol: float = 1e-9
    psd_tol: float = 1e-10
    spec_merge_tol: float = 1e-7
    decomp_tol: float = 1e-8
    sqrt_tol: float = 1e-8
    comm_tol: float = 1e-8
    cluster_gap: float = 1e-7

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"tolerance {f.name} must be positive, got {value!r}")

    def with_(self, **overrides: float) -> "Tolerances":
        return replace(self, **overrides)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()


def scale_of(norm: float) -> float:
    """Scale used for relative tolerances; a zero operator falls back to 1."""
    return norm if norm > 0.0 else 1.0
