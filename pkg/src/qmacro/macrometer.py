"""Two-factor macroscopicity bookkeeping: extensive difference times entanglement size."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import ArgumentError

STATUSES = ("achieved", "proposed")
CSV_COLUMNS = ("name", "s_ext", "s_ent", "product", "status", "basis", "notes")


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str


@dataclass(frozen=True)
class MacroscopicityRecord:
    name: str
    s_ext: float
    s_ent: float
    s_ext_basis: str
    experimental_status: str
    notes: str = ""

    def __post_init__(self):
        if self.s_ext <= 0 or self.s_ent <= 0:
            raise ArgumentError("s_ext and s_ent must be positive")
        if self.experimental_status not in STATUSES:
            raise ArgumentError(f"status must be one of {STATUSES}")

    @property
    def product(self) -> float:
        return self.s_ext * self.s_ent


def s_ext(difference: Quantity, reference: Quantity) -> float:
    """Extensive difference between the branches in units of a microscopic reference."""
    if difference.unit != reference.unit:
        raise ArgumentError(f"unit mismatch: {difference.unit!r} vs {reference.unit!r}")
    if reference.value <= 0:
        raise ArgumentError("reference must be positive")
    return difference.value / reference.value


def s_ent(constituent_count: float) -> float:
    if constituent_count < 1:
        raise ArgumentError("constituent count must be >= 1")
    return float(constituent_count)


def builtin_catalog() -> list[MacroscopicityRecord]:
    return [
        MacroscopicityRecord(
            "SQUID", 1e10, 1e9, "magnetic moment difference / Bohr magneton", "achieved",
            "s_ent = number of Cooper pairs",
        ),
        MacroscopicityRecord(
            "C70", 1e6, 1e3, "path separation 1 mm / molecule size 1 nm", "achieved",
            "s_ent = 3 x 6 x 70 nucleons and electrons",
        ),
        MacroscopicityRecord(
            "BEC", 1e7, 1e9, "angular momentum difference / hbar", "proposed",
            "s_ent ~ 100 N for 87Rb at N = 1e7; not yet experimentally achieved",
        ),
        MacroscopicityRecord(
            "neuron", 1e2, 3e7, "membrane thickness 10 nm / Na+ ion size 0.1 nm", "proposed",
            "s_ext range 1e2 to 1e3, lower bound stored",
        ),
    ]


def orders_between(a: MacroscopicityRecord, b: MacroscopicityRecord) -> float:
    return math.log10(a.product / b.product)


def catalog_csv(records: list[MacroscopicityRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.name, f"{r.s_ext:.12e}", f"{r.s_ent:.12e}", f"{r.product:.12e}",
                    r.experimental_status, r.s_ext_basis, r.notes])
    return buf.getvalue()


def read_catalog_csv(text: str) -> list[MacroscopicityRecord]:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        rec = MacroscopicityRecord(
            row["name"], float(row["s_ext"]), float(row["s_ent"]), row["basis"], row["status"], row["notes"],
        )
        if not math.isclose(rec.product, float(row["product"]), rel_tol=1e-12):
            raise ArgumentError(f"product column inconsistent for {rec.name}")
        out.append(rec)
    return out
