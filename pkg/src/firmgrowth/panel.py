"""Compustat-shaped quarterly panel ingestion and preprocessing.

The pipeline stages mirror the usual empirical workflow: parse and validate a
quarterly CSV, deflate nominal values, normalize sizes within each year so
their mean is one, build rolling annual log growth rates (exactly four
quarters apart, no imputation), filter firms, and produce descriptive
statistics.  Every dropped row or firm lands in an exclusion log with a
reason code so input counts always reconcile.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from firmgrowth.estimation import mad_volatility

DEFAULT_SCHEMA = {
    "firm_id": "firm_id",
    "year": "year",
    "quarter": "quarter",
    "size": "size",
    # optional: "fiscal_year_end_month": <column>
}


@dataclass(frozen=True)
class RawObservation:
    firm_id: str
    year: int
    quarter: int
    nominal_size: float
    fiscal_year_end_month: int | None = None


@dataclass
class QuarterlyPanel:
    """Column-oriented quarterly observations (one row per firm-quarter)."""

    firm_id: np.ndarray  # unicode
    year: np.ndarray
    quarter: np.ndarray
    size: np.ndarray
    fiscal_year_end_month: np.ndarray  # -1 where unknown

    def __post_init__(self):
        n = len(self.firm_id)
        for col in (self.year, self.quarter, self.size, self.fiscal_year_end_month):
            if len(col) != n:
                raise ValueError("panel columns must align")

    @property
    def n_obs(self):
        return len(self.firm_id)

    @classmethod
    def from_observations(cls, observations):
        obs = list(observations)
        return cls(
            firm_id=np.array([o.firm_id for o in obs]),
            year=np.array([o.year for o in obs], dtype=np.int64),
            quarter=np.array([o.quarter for o in obs], dtype=np.int64),
            size=np.array([o.nominal_size for o in obs], dtype=float),
            fiscal_year_end_month=np.array(
                [-1 if o.fiscal_year_end_month is None else o.fiscal_year_end_month for o in obs],
                dtype=np.int64,
            ),
        )

    def replace_sizes(self, sizes):
        return QuarterlyPanel(
            self.firm_id, self.year, self.quarter, np.asarray(sizes, dtype=float),
            self.fiscal_year_end_month,
        )

    def select(self, mask):
        return QuarterlyPanel(
            self.firm_id[mask], self.year[mask], self.quarter[mask], self.size[mask],
            self.fiscal_year_end_month[mask],
        )


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def ingest_csv(path, schema=None):
    """Parse and validate quarterly observations from a CSV file.

    `schema` maps the logical fields (firm_id, year, quarter, size, and
    optionally fiscal_year_end_month) to column names, so arbitrary exports
    work without code changes.  Rows failing validation raise ValueError with
    the 1-based data row number; duplicate (firm, year, quarter) keys are
    rejected the same way.
    """
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    fiscal_col = schema.get("fiscal_year_end_month")
    out = []
    seen = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for logical in ("firm_id", "year", "quarter", "size"):
            col = schema.get(logical)
            if col is None:
                raise ValueError(f"schema is missing the {logical!r} column mapping")
            if col not in header:
                raise ValueError(f"missing column {col!r} (for {logical}) in {path}")
        if fiscal_col is not None and fiscal_col not in header:
            raise ValueError(f"missing column {fiscal_col!r} (for fiscal_year_end_month) in {path}")

        for row_no, row in enumerate(reader, start=1):
            firm = row[schema["firm_id"]].strip()
            if not firm:
                raise ValueError(f"row {row_no}: empty firm id")
            try:
                year = int(row[schema["year"]])
                quarter = int(row[schema["quarter"]])
            except (TypeError, ValueError):
                raise ValueError(f"row {row_no}: non-integer year/quarter") from None
            if not 1 <= quarter <= 4:
                raise ValueError(f"row {row_no}: quarter {quarter} outside 1..4")
            try:
                size = float(row[schema["size"]])
            except (TypeError, ValueError):
                raise ValueError(
                    f"row {row_no}: non-numeric size {row[schema['size']]!r}"
                ) from None
            if not size > 0 or not np.isfinite(size):
                raise ValueError(f"row {row_no}: non-positive size {size!r}")
            fiscal = None
            if fiscal_col is not None and row.get(fiscal_col, "").strip():
                fiscal = int(row[fiscal_col])
                if not 1 <= fiscal <= 12:
                    raise ValueError(f"row {row_no}: fiscal month {fiscal} outside 1..12")
            key = (firm, year, quarter)
            if key in seen:
                raise ValueError(
                    f"row {row_no}: duplicate observation for {key} (first seen at row {seen[key]})"
                )
            seen[key] = row_no
            out.append(RawObservation(firm, year, quarter, size, fiscal))
    return out


# ---------------------------------------------------------------------------
# Deflation and normalization
# ---------------------------------------------------------------------------

@dataclass
class DeflatorSeries:
    """Price index by (year, quarter), base period = 1."""

    index: dict = field(default_factory=dict)

    @classmethod
    def from_csv(cls, path):
        table = {}
        with open(path, newline="") as fh:
            for row_no, row in enumerate(csv.DictReader(fh), start=1):
                try:
                    key = (int(row["year"]), int(row["quarter"]))
                    value = float(row["index"])
                except (KeyError, TypeError, ValueError):
                    raise ValueError(f"deflator row {row_no}: need year,quarter,index") from None
                if not value > 0:
                    raise ValueError(f"deflator row {row_no}: non-positive index")
                table[key] = value
        return cls(table)

    def lookup(self, year, quarter):
        try:
            return self.index[(int(year), int(quarter))]
        except KeyError:
            raise ValueError(f"deflator does not cover {int(year)}Q{int(quarter)}") from None


def deflate(panel: QuarterlyPanel, deflator: DeflatorSeries) -> QuarterlyPanel:
    """Real sizes: nominal divided by the period's price index."""
    idx = np.array([deflator.lookup(y, q) for y, q in zip(panel.year, panel.quarter)])
    return panel.replace_sizes(panel.size / idx)


def normalize_by_year(panel: QuarterlyPanel) -> QuarterlyPanel:
    """Within each year, rescale sizes so their mean is exactly one.

    The normalized size is N_y * S / sum(S) over the observations of year y,
    which removes secular drift and makes the size distribution stationary
    across years.  Years scale independently.
    """
    sizes = panel.size.astype(float).copy()
    for y in np.unique(panel.year):
        m = panel.year == y
        total = sizes[m].sum()
        if total <= 0:
            raise ValueError(f"year {y} has non-positive total size")
        sizes[m] = m.sum() * sizes[m] / total
    return panel.replace_sizes(sizes)


# ---------------------------------------------------------------------------
# Growth rates
# ---------------------------------------------------------------------------

@dataclass
class GrowthRecords:
    """Annual log growth rates, one per observation with a match 4 quarters on."""

    firm_id: np.ndarray
    year: np.ndarray       # base-period year
    quarter: np.ndarray    # base-period quarter
    growth: np.ndarray

    @property
    def n_obs(self):
        return len(self.growth)


def annual_log_growth(panel: QuarterlyPanel) -> GrowthRecords:
    """Rolling annual growth: log size difference exactly four quarters apart.

    Quarters with no same-firm observation four quarters later produce no
    record (gaps are never imputed).
    """
    if np.any(panel.size <= 0):
        raise ValueError("sizes must be positive to take logs")
    t = panel.year * 4 + (panel.quarter - 1)
    firms, codes = np.unique(panel.firm_id, return_inverse=True)
    key = codes.astype(np.int64) * (t.max() + 5) + t
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    target = key + 4
    pos = np.searchsorted(sorted_key, target)
    pos_clip = np.minimum(pos, sorted_key.size - 1)
    found = sorted_key[pos_clip] == target
    base = np.flatnonzero(found)
    later = order[pos_clip[base]]
    growth = np.log(panel.size[later]) - np.log(panel.size[base])
    return GrowthRecords(
        firm_id=panel.firm_id[base],
        year=panel.year[base],
        quarter=panel.quarter[base],
        growth=growth,
    )


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

def filter_firms(panel: QuarterlyPanel, min_growth_obs=2, fiscal_december_only=False):
    """Keep firms meeting the active criteria; log every exclusion.

    Returns (filtered_panel, exclusion_log) where the log maps firm_id to a
    reason code.  Counts reconcile: every input firm is either retained or
    present in the log.
    """
    growths = annual_log_growth(panel)
    g_firms, g_counts = np.unique(growths.firm_id, return_counts=True)
    count_by_firm = dict(zip(g_firms.tolist(), g_counts.tolist()))

    exclusion_log = {}
    keep_firms = set()
    for firm in np.unique(panel.firm_id).tolist():
        if fiscal_december_only:
            months = panel.fiscal_year_end_month[panel.firm_id == firm]
            if not np.all(months == 12):
                exclusion_log[firm] = "fiscal_year_not_december"
                continue
        if count_by_firm.get(firm, 0) < min_growth_obs:
            exclusion_log[firm] = "too_few_growth_rates"
            continue
        keep_firms.add(firm)

    mask = np.isin(panel.firm_id, sorted(keep_firms))
    return panel.select(mask), exclusion_log


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

def _stat_row(name, values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"variable": name, "n": 0, "mean": np.nan, "sd": np.nan, "min": np.nan, "max": np.nan}
    sd = values.std(ddof=1) if values.size > 1 else 0.0
    return {
        "variable": name,
        "n": int(values.size),
        "mean": float(values.mean()),
        "sd": float(sd),
        "min": float(values.min()),
        "max": float(values.max()),
    }


def descriptive_stats(panel: QuarterlyPanel):
    """Six-column summary rows for sizes, growth rates, volatilities, counts."""
    if panel.n_obs == 0:
        raise ValueError("panel is empty")
    growths = annual_log_growth(panel)
    rows = [
        _stat_row("size", panel.size),
        _stat_row("growth_rate", growths.growth),
    ]
    vols = []
    counts = []
    for firm in np.unique(growths.firm_id):
        g = growths.growth[growths.firm_id == firm]
        counts.append(g.size)
        if g.size >= 2:
            vols.append(mad_volatility(g))
    rows.append(_stat_row("growth_volatility_mad", vols))
    rows.append(_stat_row("n_growth_rates_per_firm", counts))
    return rows


def write_stats_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["variable", "n", "mean", "sd", "min", "max"])
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_growth_csv(growths: GrowthRecords, path):
    with open(path, "w") as fh:
        fh.write("firm_id,year,quarter,g\n")
        for f, y, q, g in zip(growths.firm_id, growths.year, growths.quarter, growths.growth):
            fh.write(f"{f},{y},{q},{float(g)!r}\n")
