"""Tolerance configuration shared by the verification battery and the CLI."""

from dataclasses import dataclass, fields

from .errors import ValidationError


@dataclass(frozen=True)
class Tolerances:
    """Named numerical thresholds with their defaults.

    Every threshold can be overridden from the CLI via --tol-override.
    """

    faithful_margin: float = 1e-9
    gap_margin: float = 1e-9
    williamson: float = 1e-10
    roundtrip: float = 1e-10
    sqrt_factorization: float = 1e-9
    det_identity: float = 1e-9
    compose: float = 1e-8
    mse_forms: float = 1e-10
    trace_distance: float = 1e-6
    born: float = 1e-6
    grid_distance: float = 1e-3
    completeness: float = 1e-3
    tail_mass: float = 1e-7

    def override(self, **updates: float) -> "Tolerances":
        names = {f.name for f in fields(self)}
        for key in updates:
            if key not in names:
                raise ValidationError(
                    f"unknown tolerance {key!r}; known: {sorted(names)}"
                )
        merged = {f.name: getattr(self, f.name) for f in fields(self)}
        merged.update(updates)
        return Tolerances(**merged)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()
