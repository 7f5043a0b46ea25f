from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional


def chi_from_average(f_av: float) -> float:
    """Process fidelity of a qubit operation from its average state fidelity."""
    if f_av < 1.0 / 3.0 - 1e-12:
        raise ValueError(f"average fidelity {f_av} is below the depolarized floor 1/3")
    return (3.0 * f_av - 1.0) / 2.0


@dataclass(frozen=True)
class FidelityReport:
    """Fidelity family for one parameter point; ``None`` marks a quantity not defined there.

    ``f_chi`` annotates ``f_qed_weighted`` when present, else ``f_ign``.
    """

    f_1q: Optional[float] = None
    f_ign: Optional[float] = None
    f_qed: Optional[float] = None
    f_qed_weighted: Optional[float] = None
    f_qec: Optional[float] = None
    p_select: Optional[float] = None

    @property
    def f_chi(self) -> Optional[float]:
        base = self.f_qed_weighted if self.f_qed_weighted is not None else self.f_ign
        if base is None or base < 1.0 / 3.0:
            return None
        return chi_from_average(base)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["f_chi"] = self.f_chi
        return out

    def values(self) -> list[float]:
        return [v for v in self.as_dict().values() if v is not None and not math.isnan(v)]
