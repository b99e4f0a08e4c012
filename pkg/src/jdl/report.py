"""Check reports: the uniform result record every verifier emits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"
SKIPPED = "skipped"


@dataclass
class CheckReport:
    """Outcome of one named identity checked over sample points.

    ``identity`` states the checked identity in plain text.  For
    residual-type checks, ``status == "pass"`` iff ``max_residual <
    tolerance``; threshold-type checks (volume forms) invert the comparison
    and say so in ``notes``.
    """

    check_id: str
    identity: str
    status: str
    max_residual: float
    tolerance: float
    samples: int
    worst_point: list = field(default_factory=list)
    wall_time: float = 0.0
    notes: str = ""

    def as_dict(self):
        return {
            "check_id": self.check_id,
            "identity": self.identity,
            "status": self.status,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "worst_point": list(map(float, self.worst_point)),
            "wall_time": self.wall_time,
            "notes": self.notes,
        }

    @property
    def passed(self):
        return self.status == PASS


def residual_report(check_id, identity, residuals_by_point, tolerance,
                    notes=""):
    """Aggregate (point, residual) pairs into a pass/fail report."""
    worst = max(residuals_by_point, key=lambda t: t[1]) if residuals_by_point \
        else (np.zeros(0), 0.0)
    status = PASS if worst[1] < tolerance else FAIL
    return CheckReport(check_id, identity, status, float(worst[1]),
                       tolerance, len(residuals_by_point),
                       worst_point=list(np.asarray(worst[0], dtype=float)),
                       notes=notes)


def threshold_report(check_id, identity, values_by_point, threshold,
                     notes=""):
    """Pass iff min |value| over points stays above the threshold."""
    worst = min(values_by_point, key=lambda t: abs(t[1])) if values_by_point \
        else (np.zeros(0), 0.0)
    status = PASS if abs(worst[1]) > threshold else FAIL
    return CheckReport(check_id, identity, status, float(abs(worst[1])),
                       threshold, len(values_by_point),
                       worst_point=list(np.asarray(worst[0], dtype=float)),
                       notes=notes or "threshold check: pass iff min |value| > tolerance")
