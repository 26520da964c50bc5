"""Machine-readable results of exact identity checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping

from .laurent import LaurentPoly, PolyMatrix


@dataclass
class IdentityReport:
    """Outcome of one exact identity check.

    Attributes
    ----------
    name : str
        Identity id, e.g. ``"factorization"``.
    rank : int
    couplings : dict
        Coupling assignments as text.
    passed : bool
    residuals : dict
        Label -> canonical text of each nonzero residual.
    notes : list of str
        Free-form decomposition or diagnostic lines.
    """

    name: str
    rank: int
    couplings: Dict[str, str] = field(default_factory=dict)
    passed: bool = True
    residuals: Dict[str, str] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add_residual(self, label: str, value: LaurentPoly) -> None:
        if not value.is_zero():
            self.residuals[label] = value.text()
            self.passed = False

    def add_matrix_residual(self, label: str, m: PolyMatrix) -> None:
        for (i, j), v in m.nonzero_entries().items():
            self.add_residual(f"{label}[{i},{j}]", v)

    def merge(self, other: "IdentityReport", prefix: str = "") -> None:
        for k, v in other.residuals.items():
            self.residuals[prefix + k] = v
        self.passed = self.passed and other.passed
        self.notes.extend(prefix + n for n in other.notes)

    def to_dict(self) -> dict:
        return {
            "identity": self.name,
            "rank": self.rank,
            "couplings": dict(self.couplings),
            "pass": self.passed,
            "residuals": dict(self.residuals),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def couplings_text(c: Mapping[str, object]) -> Dict[str, str]:
    return {k: (v.text() if isinstance(v, LaurentPoly) else str(v)) for k, v in c.items()}
