"""Numerical thresholds shared by the affinity and rigidity checks."""

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """All thresholds in one place; every verdict and report records them.

    ``tau_ker`` is relative to ``1 + largest Hessian eigenvalue`` and
    ``tau_aff`` to ``1 + |u(x0)|``.  ``eps_det`` and ``eps_convex`` are relative
    to ``(1 + largest eigenvalue)^n`` and ``1 + largest eigenvalue``.
    """

    tau_light: float = 1e-9
    tau_ker: float = 1e-8
    tau_aff: float = 1e-9
    tau_lem: float = 1e-8
    tau_id: float = 1e-8
    eps_decay: float = 1e-6
    eps_conclusion: float = 1e-7
    eps_det: float = 1e-10
    eps_convex: float = 1e-10

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {value!r}")

    def override(self, **changes):
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in changes.items()})

    def to_dict(self):
        return asdict(self)


DEFAULT = Tolerances()
