"""CSV panel ingestion and outlier cleaning.

Ingestion is strict: rectangular numeric CSV with a unique header row.
Missing cells either fail fast or, in drop-missing mode, remove the whole
series (logged). Outliers are observations more than ten interquartile
ranges from the series mean; quartiles interpolate linearly between order
statistics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError
from .spectral import DataMatrix

__all__ = ["PanelDataset", "ingest_csv", "clean_outliers"]

_MISSING_TOKENS = {"", "na", "nan", "null"}

#: outlier rule: |x - mean| > OUTLIER_IQR_MULTIPLE * (Q3 - Q1)
OUTLIER_IQR_MULTIPLE = 10.0


@dataclass(frozen=True)
class PanelDataset:
    """Named series with their observations and a log of cleaning actions."""

    names: tuple[str, ...]
    data: DataMatrix
    cleaning_log: tuple[dict, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.names) != self.data.p:
            raise DataError(
                f"{len(self.names)} series names for {self.data.p} data columns"
            )
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "cleaning_log", tuple(self.cleaning_log))

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def p(self) -> int:
        return self.data.p


def ingest_csv(path, drop_missing: bool = False) -> PanelDataset:
    """Parse a rectangular CSV (header row, one observation per row).

    Missing cells (empty/NA/NaN/null) drop the whole series when
    drop_missing is set, otherwise raise. Ragged rows, non-numeric cells
    and duplicate headers raise ParseError with the offending location
    (1-based, header is row 1).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        names = [h.strip() for h in header]
        seen = {}
        for idx, name in enumerate(names, start=1):
            if name in seen:
                raise ParseError(
                    f"{path}: duplicate header {name!r} at columns {seen[name]} and {idx}"
                )
            seen[name] = idx

        rows: list[list[float]] = []
        missing_cols: set[int] = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise ParseError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(names)}"
                )
            parsed = []
            for col_no, cell in enumerate(row, start=1):
                text = cell.strip()
                if text.lower() in _MISSING_TOKENS:
                    missing_cols.add(col_no - 1)
                    parsed.append(np.nan)
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric cell {cell!r} at row {row_no}, "
                        f"column {col_no} ({names[col_no - 1]})"
                    ) from None
                if not np.isfinite(value):
                    missing_cols.add(col_no - 1)
                    value = np.nan
                parsed.append(value)
            rows.append(parsed)

    if not rows:
        raise ParseError(f"{path}: no data rows")
    values = np.asarray(rows, dtype=float)
    log: list[dict] = []
    if missing_cols:
        if not drop_missing:
            col = sorted(missing_cols)[0]
            raise DataError(
                f"{path}: series {names[col]!r} has missing observations "
                "(pass drop-missing mode to remove such series)"
            )
        keep = [j for j in range(len(names)) if j not in missing_cols]
        for j in sorted(missing_cols):
            log.append(
                {
                    "series": names[j],
                    "action": "dropped-missing",
                    "missing": int(np.count_nonzero(~np.isfinite(values[:, j]))),
                }
            )
        values = values[:, keep]
        names = [names[j] for j in keep]
    if values.shape[1] < 2:
        raise DataError(f"{path}: fewer than 2 usable series after ingestion")
    if values.shape[0] < 3:
        raise DataError(f"{path}: fewer than 3 observations")
    return PanelDataset(tuple(names), DataMatrix(values), tuple(log))


def clean_outliers(ds: PanelDataset, policy: str = "median") -> PanelDataset:
    """Flag observations more than ten IQRs from the series mean.

    policy="median" replaces each outlier with the series median (keeps
    series lengths aligned); policy="drop" removes the affected rows from
    every series. Series with zero IQR are skipped: silently when constant,
    logged otherwise. Needs at least 4 observations per series.
    """
    if policy not in ("median", "drop"):
        raise DataError(f"policy must be 'median' or 'drop', got {policy!r}")
    values = ds.data.values.copy()
    n, p = values.shape
    if n < 4:
        raise DataError(f"outlier cleaning needs at least 4 observations, got {n}")
    log = list(ds.cleaning_log)
    drop_rows: set[int] = set()
    for j in range(p):
        x = values[:, j]
        q1, q3 = np.percentile(x, [25.0, 75.0])  # linear interpolation
        iqr = q3 - q1
        if iqr == 0.0:
            if np.ptp(x) > 0.0:
                log.append({"series": ds.names[j], "action": "skipped-zero-iqr"})
            continue
        mask = np.abs(x - x.mean()) > OUTLIER_IQR_MULTIPLE * iqr
        if not mask.any():
            continue
        med = float(np.median(x))
        for i in np.flatnonzero(mask):
            log.append(
                {
                    "series": ds.names[j],
                    "row": int(i) + 1,
                    "value": float(x[i]),
                    "action": "replaced-median" if policy == "median" else "dropped-row",
                }
            )
        if policy == "median":
            values[mask, j] = med
        else:
            drop_rows.update(np.flatnonzero(mask).tolist())
    if policy == "drop" and drop_rows:
        keep = [i for i in range(n) if i not in drop_rows]
        if len(keep) < 3:
            raise DataError("outlier row removal left fewer than 3 observations")
        values = values[keep, :]
    return PanelDataset(ds.names, DataMatrix(values), tuple(log))
