"""Panel data container, CSV ingestion, variable transformations, standardization.

A :class:`Panel` holds an N x T matrix of observations (rows are
cross-sectional units / series, columns are time periods) together with its
labels. All entries are finite; series with missing observations are dropped
at ingestion time, never imputed.

Transformation codes follow the public FRED-QD convention:

====  =================================
code  transformation
====  =================================
1     level (no transformation)
2     first difference
3     second difference
4     log
5     first difference of log
6     second difference of log
7     first difference of growth rate
====  =================================
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateSeriesError,
    InsufficientSampleError,
    PanelParseError,
    TransformError,
)

VALID_TCODES = (1, 2, 3, 4, 5, 6, 7)

# order of differencing implied by each code; trimming drops this many leading points
TCODE_DIFF_ORDER = {1: 0, 2: 1, 3: 2, 4: 0, 5: 1, 6: 2, 7: 2}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Panel:
    """Immutable N x T data panel with series/time labels.

    Parameters
    ----------
    values : ndarray, shape (N, T)
        Observations; rows are series, columns are time periods.
    series_ids : tuple of str
        N series names.
    time_ids : tuple of str
        T time labels.
    group_ids : tuple of int, optional
        Small integer group id per series (1-13 in the FRED-QD use case).
    standardized : bool
        True once every row has mean 0 and unit variance.
    """

    values: np.ndarray
    series_ids: tuple
    time_ids: tuple
    group_ids: tuple | None = None
    standardized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "series_ids", tuple(self.series_ids))
        object.__setattr__(self, "time_ids", tuple(self.time_ids))
        if self.group_ids is not None:
            object.__setattr__(self, "group_ids", tuple(int(g) for g in self.group_ids))
        if self.values.ndim != 2:
            raise ValueError("Panel values must be a 2-d matrix")
        n, t = self.values.shape
        if len(self.series_ids) != n:
            raise ValueError(f"{len(self.series_ids)} series labels for {n} rows")
        if len(self.time_ids) != t:
            raise ValueError(f"{len(self.time_ids)} time labels for {t} columns")
        if self.group_ids is not None and len(self.group_ids) != n:
            raise ValueError(f"{len(self.group_ids)} group ids for {n} rows")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Panel values must be finite (no missing entries)")

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_periods(self) -> int:
        return self.values.shape[1]


@dataclass
class DropReport:
    """Names and reasons for series dropped during ingestion."""

    dropped: list = field(default_factory=list)  # (name, reason) pairs

    def add(self, name: str, reason: str) -> None:
        self.dropped.append((name, reason))

    def __len__(self) -> int:
        return len(self.dropped)


def _parse_cell(text: str) -> float:
    """Parse one CSV cell; empty or unparseable cells become NaN."""
    text = text.strip()
    if not text:
        return np.nan
    try:
        return float(text)
    except ValueError:
        return np.nan


def ingest_csv(source, orientation: str = "series_in_rows") -> tuple[Panel, DropReport]:
    """Read a labeled CSV into a Panel, dropping any series with gaps.

    Parameters
    ----------
    source : bytes, str, file-like, or path-like
        CSV content. First row holds time labels and first column series
        names when ``orientation="series_in_rows"``; transposed layout with
        ``"series_in_columns"``. An optional second column named ``group``
        carries integer group ids.
    orientation : {"series_in_rows", "series_in_columns"}

    Returns
    -------
    (Panel, DropReport)
        The panel (no missing entries) and the list of dropped series with
        reasons.

    Raises
    ------
    PanelParseError
        Empty file, duplicate series labels, or fewer than 2 time points.
    """
    if orientation not in ("series_in_rows", "series_in_columns"):
        raise ValueError(f"unknown orientation {orientation!r}")
    text = _as_text(source)
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise PanelParseError("empty file")
    if orientation == "series_in_columns":
        width = max(len(r) for r in rows)
        rows = [r + [""] * (width - len(r)) for r in rows]
        rows = [list(col) for col in zip(*rows)]

    header = [c.strip() for c in rows[0]]
    body = rows[1:]
    if not body:
        raise PanelParseError("no series rows after the header")

    has_group = len(header) >= 2 and header[1].lower() == "group"
    first_data_col = 2 if has_group else 1
    time_ids = tuple(header[first_data_col:])
    if len(time_ids) < 2:
        raise PanelParseError("fewer than 2 time points", location="header row")

    names, groups, data = [], [], []
    report = DropReport()
    seen = set()
    for i, row in enumerate(body):
        name = row[0].strip() if row else ""
        if not name:
            raise PanelParseError("missing series name", location=f"row {i + 2}")
        if name in seen:
            raise PanelParseError(f"duplicate series {name!r}", location=f"row {i + 2}")
        seen.add(name)
        cells = row[first_data_col:]
        if len(cells) < len(time_ids):
            cells = cells + [""] * (len(time_ids) - len(cells))
        vals = np.array([_parse_cell(c) for c in cells[: len(time_ids)]])
        if np.isnan(vals).any():
            report.add(name, "missing or unparseable observations")
            continue
        names.append(name)
        if has_group:
            try:
                groups.append(int(float(row[1])))
            except ValueError:
                raise PanelParseError(
                    f"group id {row[1]!r} is not an integer", location=f"row {i + 2}"
                ) from None
        data.append(vals)

    if not data:
        raise PanelParseError("all series were dropped (missing observations everywhere)")
    panel = Panel(
        values=np.vstack(data),
        series_ids=tuple(names),
        time_ids=time_ids,
        group_ids=tuple(groups) if has_group else None,
    )
    return panel, report


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    if hasattr(source, "read"):
        raw = source.read()
        return raw.decode("utf-8") if isinstance(raw, bytes) else raw
    with open(source, "rb") as fh:
        return fh.read().decode("utf-8")


def export_csv(panel: Panel) -> str:
    """Serialize a Panel back to the ingestion CSV layout (series in rows).

    Floats are rendered with :func:`repr` so finite decimals round-trip
    bit-exactly through ``ingest_csv``.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    has_group = panel.group_ids is not None
    header = ["series"] + (["group"] if has_group else []) + list(panel.time_ids)
    writer.writerow(header)
    for i, name in enumerate(panel.series_ids):
        row = [name]
        if has_group:
            row.append(str(panel.group_ids[i]))
        row.extend(repr(float(v)) for v in panel.values[i])
        writer.writerow(row)
    return buf.getvalue()


def apply_tcode(series, code: int) -> np.ndarray:
    """Apply one FRED-QD transformation code to a single series.

    Output length is the input length minus the differencing order of the
    code (0, 1, 2, 0, 1, 2, 2 for codes 1-7). Code 1 returns the input
    unchanged.

    Raises
    ------
    TransformError
        Nonpositive value under a log-based code (4-7), naming the index.
    ValueError
        Unknown code or series shorter than 3 observations.
    """
    if code not in VALID_TCODES:
        raise ValueError(f"transformation code must be in 1..7, got {code}")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("apply_tcode expects a 1-d series")
    if x.size < 3:
        raise ValueError(f"series too short for transformation (length {x.size} < 3)")
    if code in (4, 5, 6, 7):
        bad = np.nonzero(x <= 0)[0]
        if bad.size:
            raise TransformError(
                f"nonpositive value {x[bad[0]]!r} under log-based code {code}",
                index=int(bad[0]),
            )
    if code == 1:
        return x.copy()
    if code == 2:
        return np.diff(x)
    if code == 3:
        return np.diff(x, n=2)
    if code == 4:
        return np.log(x)
    if code == 5:
        return np.diff(np.log(x))
    if code == 6:
        return np.diff(np.log(x), n=2)
    # code 7: first difference of the exact growth rate
    growth = x[1:] / x[:-1] - 1.0
    return np.diff(growth)


def align_and_trim(panel: Panel, codes) -> Panel:
    """Transform every series by its code and align on a common sample.

    All transformed series are truncated to a common length of ``T - 2``
    (two initial observations are lost to the highest differencing order),
    dropping leading observations so every series starts at the same time
    index.

    Raises
    ------
    InsufficientSampleError
        If the trimmed panel would have fewer than 10 periods.
    """
    codes = list(codes)
    if len(codes) != panel.n_series:
        raise ValueError(f"{len(codes)} codes for {panel.n_series} series")
    t_out = panel.n_periods - 2
    if t_out < 10:
        raise InsufficientSampleError(
            f"only {t_out} periods would remain after trimming (minimum 10)"
        )
    out = np.empty((panel.n_series, t_out))
    for i, code in enumerate(codes):
        z = apply_tcode(panel.values[i], code)
        out[i] = z[len(z) - t_out :]
    return Panel(
        values=out,
        series_ids=panel.series_ids,
        time_ids=panel.time_ids[2:],
        group_ids=panel.group_ids,
        standardized=False,
    )


def standardize(panel: Panel) -> Panel:
    """Demean each series and scale it to unit sample variance (ddof=1).

    Raises
    ------
    DegenerateSeriesError
        If some series is constant, naming it.
    """
    x = panel.values
    mean = x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1, ddof=1, keepdims=True)
    flat = np.nonzero(sd.ravel() == 0.0)[0]
    if flat.size:
        raise DegenerateSeriesError(
            f"series {panel.series_ids[flat[0]]!r} is constant and cannot be standardized"
        )
    return replace(panel, values=(x - mean) / sd, standardized=True)


def standardization_scale(panel: Panel) -> tuple[np.ndarray, np.ndarray]:
    """Per-series (mean, sd) that ``standardize`` would remove; sd uses ddof=1."""
    return panel.values.mean(axis=1), panel.values.std(axis=1, ddof=1)
