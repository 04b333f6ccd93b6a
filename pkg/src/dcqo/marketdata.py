"""Offline price ingestion: CSV closing prices to mean returns and covariance."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class MarketDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PriceTable:
    dates: tuple  # datetime.date, strictly increasing
    tickers: tuple
    prices: np.ndarray  # (len(dates), len(tickers))
    dropped_rows: int = 0


def sample_prices_path() -> Path:
    """Location of the bundled 20-asset sample price file."""
    return Path(str(resources.files("dcqo") / "data" / "sample_prices.csv"))


def load_prices(path) -> PriceTable:
    """Read ``date,<ticker1>,<ticker2>,...`` with ISO dates.

    Rows with any empty or non-numeric price are dropped; surviving rows keep
    file order, which must then be strictly increasing in date.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise MarketDataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MarketDataError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise MarketDataError(f"{path}: header must start with 'date' followed by tickers")
        tickers = tuple(t.strip() for t in header[1:])
        if len(set(tickers)) != len(tickers):
            dupes = sorted({t for t in tickers if tickers.count(t) > 1})
            raise MarketDataError(f"{path}: duplicate tickers {dupes}")
        dates, rows, dropped = [], [], 0
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            try:
                day = dt.date.fromisoformat(rec[0].strip())
            except ValueError as exc:
                raise MarketDataError(f"{path}:{lineno}: bad date {rec[0]!r}") from exc
            cells = rec[1:]
            try:
                if len(cells) != len(tickers):
                    raise ValueError
                vals = [float(c) for c in cells]
                if not all(np.isfinite(vals)):
                    raise ValueError
            except ValueError:
                dropped += 1
                continue
            dates.append(day)
            rows.append(vals)
    if len(rows) < 2:
        raise MarketDataError(f"{path}: fewer than 2 clean rows")
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise MarketDataError(f"{path}: dates are not strictly increasing")
    return PriceTable(tuple(dates), tickers, np.array(rows, dtype=float), dropped)


def daily_returns(pt: PriceTable) -> np.ndarray:
    p = pt.prices
    if np.any(p == 0):
        raise MarketDataError("zero price makes returns undefined")
    return p[1:] / p[:-1] - 1.0


def estimate_model(pt: PriceTable) -> tuple[np.ndarray, np.ndarray]:
    """Mean daily arithmetic return and sample covariance (divisor T-1)."""
    if len(pt.dates) < 3:
        raise MarketDataError("need at least 3 clean rows to estimate a covariance")
    r = daily_returns(pt)
    e = r.mean(axis=0)
    c = np.atleast_2d(np.cov(r, rowvar=False, ddof=1))
    # np.cov can leave asymmetry at the ulp level
    c = (c + c.T) / 2
    return e, c
