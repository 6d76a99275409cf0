"""Check outcomes and their default tolerances."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

DEFAULT_TOLERANCES = {
    "algebra.xx": 1e-10,
    "algebra.xp": 1e-10,
    "algebra.pp": 1e-10,
    "algebra.pphi_Lz": 1e-12,
    "hermiticity.physical": 1e-11,
    "algebra.cross_route": 1e-10,
    "secondary.Lp": 1e-10,
    "secondary.Lx": 1e-10,
    "secondary.LL": 1e-10,
    "secondary.L_from_pp": 1e-11,
    "scan.at_solution": 1e-10,
    "scan.away_floor": 1e-3,
    "gamma": 1e-9,
    "casimir.C2_pL": 1e-10,
    "casimir.C2_Lp": 1e-10,
    "casimir.C1": 1e-10,
    "anomaly.pointwise": 1e-8,
    "anomaly.constant": 1e-6,
    "rotation.px": 1e-10,
    "rotation.py": 1e-10,
    "boost.scaling": 0.5,
    "eigen.residual": 1e-10,
    "eigen.overlap": 1e-8,
    "eigen.diagonal": 1e-8,
    "eigen.not_band_limited": 1e-3,
    "hermiticity.nonphysical": 1e-3,
}



@dataclass
class CheckResult:
    """One verified relation.

    ``sense == "max"``: passes when ``residual <= tolerance``.
    ``sense == "min"``: ``tolerance`` is a floor and the check passes when
    ``residual > tolerance`` (used for defects that must not vanish).
    """

    name: str
    relation: str
    params: dict
    residual: float
    tolerance: float
    passed: bool = field(init=False)
    notes: str = ""
    values: dict = field(default_factory=dict)
    tolerance_source: str = "default"
    sense: str = "max"

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"unknown sense {self.sense!r}")
        self.residual = float(self.residual)
        if self.sense == "max":
            self.passed = bool(self.residual <= self.tolerance)
        else:
            self.passed = bool(self.residual > self.tolerance)

    def to_dict(self) -> dict:
        return asdict(self)


def tolerance(name: str, overrides: dict | None = None):
    """``(value, source)`` for a check.

    ``overrides`` maps check names to a value or to a ``(value, source)`` pair.
    """
    if overrides and name in overrides:
        v = overrides[name]
        if isinstance(v, tuple):
            return float(v[0]), str(v[1])
        return float(v), "override"
    return DEFAULT_TOLERANCES[name], "default"


def make_result(name, relation, params, residual, tolerances=None, **kw) -> CheckResult:
    tol, source = tolerance(name, tolerances)
    return CheckResult(name, relation, params, residual, tol, tolerance_source=source, **kw)
