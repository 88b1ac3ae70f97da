"""Quarterly macro series: loading, validation, transforms and panel alignment.

Transforms are written as small expressions over column names, e.g.
``"diff(log(rgdp))"``. Supported kinds are ``log``, ``diff`` and ``lag``
(one quarter). Derived series keep the full date index internally with
leading NaNs; tables returned to the caller are trimmed so every column is
defined on every date.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import DataError, DataNotFoundError, InsufficientRowsError

REQUIRED_COLUMNS = ("date", "rgdp", "gov_spend", "ted", "commodity", "unemp")
TRANSFORM_KINDS = ("log", "diff", "lag")

_QUARTER_RE = re.compile(r"^\s*(\d{4})\s*[-:]?\s*[Qq]([1-4])\s*$")
_ISO_RE = re.compile(r"^\s*(\d{4})-(\d{2})-(\d{2})\s*$")
_EXPR_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


def parse_quarter(text: str) -> pd.Period:
    """Parse ``"1995Q3"`` (also ``1995-Q3``) or an ISO date into a quarterly period."""
    m = _QUARTER_RE.match(text)
    if m:
        return pd.Period(year=int(m.group(1)), quarter=int(m.group(2)), freq="Q")
    m = _ISO_RE.match(text)
    if m:
        year, month, day = (int(v) for v in m.groups())
        if not (1 <= month <= 12 and 1 <= day <= 31):
            raise ValueError(f"invalid date {text!r}")
        return pd.Period(year=year, quarter=(month - 1) // 3 + 1, freq="Q")
    raise ValueError(f"unparsable date {text!r}")


@dataclass(frozen=True)
class MacroTable:
    """Validated quarterly table: consecutive quarters, equal-length finite columns."""

    dates: pd.PeriodIndex
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        dates = pd.PeriodIndex(self.dates, freq="Q")
        object.__setattr__(self, "dates", dates)
        cols = {}
        for name, values in self.columns.items():
            arr = np.asarray(values, dtype=float)
            if arr.ndim != 1 or arr.shape[0] != len(dates):
                raise DataError(f"column {name!r} has length {arr.shape[0]}, expected {len(dates)}")
            arr.setflags(write=False)
            cols[name] = arr
        object.__setattr__(self, "columns", cols)
        _check_consecutive(dates)

    def __len__(self) -> int:
        return len(self.dates)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"unknown column {name!r}") from None

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.columns, index=self.dates)

    def summary(self) -> dict:
        out = {
            "rows": len(self),
            "first": str(self.dates[0]) if len(self) else None,
            "last": str(self.dates[-1]) if len(self) else None,
        }
        for name, v in self.columns.items():
            out[name] = {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}
        return out


def _check_consecutive(dates: pd.PeriodIndex) -> None:
    if len(dates) < 2:
        return
    ordinals = dates.asi8
    steps = np.diff(ordinals)
    bad = np.flatnonzero(steps != 1)
    if bad.size:
        i = bad[0]
        if steps[i] <= 0:
            raise DataError(f"dates not strictly increasing: {dates[i]} followed by {dates[i + 1]}",
                            row=int(i) + 2)
        raise DataError(f"gap in quarters: {dates[i] + 1} missing")


def load_csv(path, date_col: str = "date", required: Sequence[str] = REQUIRED_COLUMNS) -> MacroTable:
    """Read a quarterly CSV. Rows may be in any order; they are sorted by date.

    Every column other than ``date_col`` must be numeric and finite. Errors
    report the 1-based data row (header excluded) and the column name.
    """
    path = Path(path)
    if not path.is_file():
        raise DataNotFoundError(f"data file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DataError(f"empty file: {path}") from None
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in dict.fromkeys([date_col, *required]) if c not in frame.columns]
    if missing:
        raise DataError(f"missing column(s): {', '.join(missing)}")

    periods = []
    for i, text in enumerate(frame[date_col], start=1):
        try:
            periods.append(parse_quarter(text))
        except ValueError:
            raise DataError(f"unparsable date {text!r}", row=i, column=date_col) from None

    columns = {}
    for name in frame.columns:
        if name == date_col:
            continue
        values = np.array([_to_float(v) for v in frame[name]], dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DataError("non-finite value", row=int(bad[0]) + 1, column=name)
        columns[name] = values

    dates = pd.PeriodIndex(periods, freq="Q")
    order = np.argsort(dates.asi8, kind="stable")
    dup = np.flatnonzero(np.diff(dates.asi8[order]) == 0)
    if dup.size:
        raise DataError(f"duplicate quarter {dates[order[dup[0]]]}")
    return MacroTable(dates[order], {k: v[order] for k, v in columns.items()})


def _to_float(text: str) -> float:
    # float() rounds correctly; pandas' fast parser can be off by one ulp.
    try:
        return float(text)
    except ValueError:
        return float("nan")


def write_csv(table: MacroTable, path, date_col: str = "date") -> None:
    """Write ``table`` so that :func:`load_csv` reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([date_col, *table.names])
        cols = [table[name] for name in table.names]
        for i, period in enumerate(table.dates):
            writer.writerow([str(period), *(repr(float(c[i])) for c in cols)])


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def parse_expr(expr: str):
    """Parse ``"diff(log(x))"`` into nested tuples ``("diff", ("log", "x"))``."""
    m = _EXPR_RE.match(expr)
    if not m:
        name = expr.strip()
        if not re.fullmatch(r"[A-Za-z_][\w.]*", name):
            raise DataError(f"malformed transform expression {expr!r}")
        return name
    kind, inner = m.group(1), m.group(2)
    if kind not in TRANSFORM_KINDS:
        raise DataError(f"unknown transform kind {kind!r}")
    return (kind, parse_expr(inner))


def _evaluate(node, table: MacroTable, dates) -> np.ndarray:
    if isinstance(node, str):
        return np.array(table[node], dtype=float)
    kind, inner = node
    values = _evaluate(inner, table, dates)
    out = np.full_like(values, np.nan)
    if kind == "log":
        bad = np.flatnonzero(values <= 0)
        if bad.size:
            raise DataError("log of non-positive value", row=str(dates[bad[0]]), column=_name(inner))
        out = np.log(values)
    elif kind == "diff":
        out[1:] = values[1:] - values[:-1]
    elif kind == "lag":
        out[1:] = values[:-1]
    return out


def _name(node) -> str:
    if isinstance(node, str):
        return node
    return f"{node[0]}({_name(node[1])})"


def evaluate(table: MacroTable, expr: str) -> np.ndarray:
    """Full-length series for ``expr``; leading entries lost to diff/lag are NaN."""
    return _evaluate(parse_expr(expr), table, table.dates)


def transform(table: MacroTable, spec: Sequence[str] | Mapping[str, str]) -> MacroTable:
    """Add derived columns and trim leading rows where any derived value is undefined.

    ``spec`` is a list of expressions (the expression text becomes the column
    name) or a mapping from new column name to expression.
    """
    items = spec.items() if isinstance(spec, Mapping) else ((_name(parse_expr(e)), e) for e in spec)
    derived = {name: evaluate(table, expr) for name, expr in items}
    start = 0
    for values in derived.values():
        finite = np.flatnonzero(np.isfinite(values))
        start = max(start, finite[0] if finite.size else len(values))
    cols = {name: v[start:] for name, v in table.columns.items()}
    cols.update({name: v[start:] for name, v in derived.items()})
    return MacroTable(table.dates[start:], cols)


# ---------------------------------------------------------------------------
# panel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PanelConfig:
    """Which series feed the outcome, the policy variable, covariates and forecaster.

    With ``log_unemployment`` (default) the unemployment covariate is the
    difference of the log rate; otherwise the raw difference is used.
    """

    y_col: str = "rgdp"
    g_col: str = "gov_spend"
    commodity_col: str = "commodity"
    unemp_col: str = "unemp"
    ted_col: str = "ted"
    log_unemployment: bool = True
    x_recipe: tuple[str, ...] | None = None
    z_recipe: tuple[str, ...] | None = None
    n_classes: int = 4

    def covariate_exprs(self) -> tuple[str, ...]:
        if self.x_recipe is not None:
            return tuple(self.x_recipe)
        unemp = f"diff(log({self.unemp_col}))" if self.log_unemployment else f"diff({self.unemp_col})"
        return (f"diff(log({self.y_col}))", f"diff(log({self.commodity_col}))", unemp)

    def macro_exprs(self) -> tuple[str, ...]:
        if self.z_recipe is not None:
            return tuple(self.z_recipe)
        return (f"log({self.y_col})", self.ted_col, f"log({self.commodity_col})", f"log({self.unemp_col})")

    def columns(self) -> list[str]:
        names = [self.y_col, self.g_col]
        for expr in (*self.covariate_exprs(), *self.macro_exprs()):
            node = parse_expr(expr)
            while not isinstance(node, str):
                node = node[1]
            names.append(node)
        return list(dict.fromkeys(names))


@dataclass(frozen=True)
class Panel:
    """Estimation rows. Row t holds y_t, y_{t+1}, g_t, x_{t-1} and z_{t-1}."""

    t: np.ndarray
    y: np.ndarray
    y_next: np.ndarray
    g: np.ndarray
    x: np.ndarray
    z: np.ndarray
    x_names: tuple[str, ...] = ()
    z_names: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.y)
        for name in ("y_next", "g"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        for name in ("x", "z"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.shape[0] != n:
                raise ValueError(f"{name} has {arr.shape[0]} rows, expected {n}")
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.y)

    def replace(self, **changes) -> "Panel":
        return replace(self, **changes)


def assemble_panel(table: MacroTable, config: PanelConfig | None = None) -> Panel:
    """Align outcome, lead, policy growth, lagged covariates and lagged macro vector.

    Rows lacking any lag or the one-quarter lead are dropped. With the default
    recipes a 112-quarter table yields 109 rows: two leading quarters go to the
    lagged log-differences and one trailing quarter to the lead.
    """
    config = config or PanelConfig()
    x_exprs = config.covariate_exprs()
    z_exprs = config.macro_exprs()

    y = evaluate(table, f"log({config.y_col})")
    y_next = np.append(y[1:], np.nan)
    g = evaluate(table, f"diff(log({config.g_col}))")
    x = np.column_stack([evaluate(table, f"lag({e})") for e in x_exprs])
    z = np.column_stack([evaluate(table, f"lag({e})") for e in z_exprs])

    ok = np.isfinite(y) & np.isfinite(y_next) & np.isfinite(g)
    ok &= np.isfinite(x).all(axis=1) & np.isfinite(z).all(axis=1)
    rows = np.flatnonzero(ok)
    minimum = config.n_classes + len(x_exprs) + 1
    if rows.size < minimum:
        raise InsufficientRowsError(
            f"only {rows.size} complete rows after alignment, need at least {minimum}")
    return Panel(
        t=np.asarray(table.dates[rows]),
        y=y[rows], y_next=y_next[rows], g=g[rows], x=x[rows], z=z[rows],
        x_names=tuple(x_exprs), z_names=tuple(z_exprs),
    )
