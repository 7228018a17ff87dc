"""Collective investment through small zero-interest loans.

Participants lend money for a generation project, receive a share of its
output proportional to their loan, and are repaid in equal yearly
installments over the project life (years 1..n, no interest).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional, Union

import numpy as np

CENT = Decimal("0.01")


@dataclass(frozen=True)
class Project:
    name: str
    peak_kw: float
    capex: float


@dataclass(frozen=True)
class InvestmentPool:
    contributions: tuple[tuple[str, Decimal], ...]
    project: Optional[Project] = None
    repayment_years: int = 25
    min_contribution: Decimal = Decimal("100")

    def __post_init__(self):
        object.__setattr__(self, "contributions",
                           tuple((pid, Decimal(str(loan))) for pid, loan in self.contributions))
        object.__setattr__(self, "min_contribution", Decimal(str(self.min_contribution)))

    def problems(self) -> list[str]:
        out = []
        for pid, loan in self.contributions:
            if loan < self.min_contribution:
                out.append(f"{pid}: loan {loan} € is below the {self.min_contribution} € minimum")
        ids = [pid for pid, _ in self.contributions]
        if len(set(ids)) != len(ids):
            out.append("participant ids must be unique")
        if self.project is not None and sum(l for _, l in self.contributions) > Decimal(str(self.project.capex)):
            out.append("loans exceed the project capex")
        if self.repayment_years < 1:
            out.append("repayment must span at least one year")
        return out

    @classmethod
    def from_csv(cls, path: Union[str, Path], **kwargs) -> "InvestmentPool":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if set(reader.fieldnames or ()) < {"participant_id", "loan_eur"}:
                raise ValueError(f"{path}: expected columns participant_id,loan_eur")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append((row["participant_id"].strip(), Decimal(row["loan_eur"].strip())))
                except Exception:
                    raise ValueError(f"{path}:{lineno}: bad loan amount {row['loan_eur']!r}") from None
        return cls(tuple(rows), **kwargs)


def generation_shares(pool: InvestmentPool) -> np.ndarray:
    loans = np.array([float(l) for _, l in pool.contributions])
    if loans.size == 0:
        raise ValueError("investment pool is empty")
    total = loans.sum()
    if not total > 0:
        raise ValueError("total contribution must be positive")
    return loans / total


def installments(loan: Union[Decimal, float, str], years: int) -> list[Decimal]:
    """Equal yearly repayments rounded to the cent; the last one absorbs the remainder."""
    if years < 1:
        raise ValueError("repayment must span at least one year")
    loan = Decimal(str(loan))
    base = (loan / years).quantize(CENT, rounding=ROUND_HALF_UP)
    return [base] * (years - 1) + [loan - base * (years - 1)]


def repayment_schedule(pool: InvestmentPool) -> dict[str, list[tuple[int, Decimal]]]:
    return {
        pid: list(enumerate(installments(loan, pool.repayment_years), start=1))
        for pid, loan in pool.contributions
    }


def allocate_project_energy(pool: InvestmentPool, project_generation) -> np.ndarray:
    """Per-participant energy, one row per participant, shaped like the generation series."""
    gen = np.asarray(project_generation, dtype=float)
    shares = generation_shares(pool)
    return np.outer(shares, gen)
