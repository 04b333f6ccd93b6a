"""Regenerate the bundled synthetic price file (src/dcqo/data/sample_prices.csv).

Correlated geometric Brownian motion: one market factor plus a sector factor
per asset, over NYSE trading days from 2022-06-06 to 2022-12-30. The tickers
are the 20 names of the reference study; the prices are not theirs.
"""

import argparse
import csv
import datetime as dt
from pathlib import Path

import numpy as np

TICKERS = ["AAPL", "JPM", "JNJ", "AMZN", "PG", "XOM", "BA", "DD", "T", "NEE",
           "AMT", "UPS", "HD", "PFE", "NVDA", "MSFT", "GILD", "GM", "BRK-B", "LMT"]
SECTOR = {"AAPL": 0, "AMZN": 0, "NVDA": 0, "MSFT": 0, "T": 0,
          "JPM": 1, "BRK-B": 1, "AMT": 1,
          "JNJ": 2, "PFE": 2, "GILD": 2,
          "PG": 3, "HD": 3, "GM": 3,
          "XOM": 4, "NEE": 4, "DD": 4,
          "BA": 5, "UPS": 5, "LMT": 5}
START = {"AAPL": 146.1, "JPM": 119.2, "JNJ": 177.6, "AMZN": 124.8, "PG": 145.0,
         "XOM": 97.3, "BA": 139.7, "DD": 65.5, "T": 20.9, "NEE": 75.6,
         "AMT": 251.3, "UPS": 183.4, "HD": 302.1, "PFE": 51.1, "NVDA": 187.2,
         "MSFT": 268.8, "GILD": 62.3, "GM": 37.6, "BRK-B": 303.0, "LMT": 430.9}
HOLIDAYS = {dt.date(2022, 6, 20), dt.date(2022, 7, 4), dt.date(2022, 9, 5),
            dt.date(2022, 11, 24), dt.date(2022, 12, 26)}


def trading_days(first=dt.date(2022, 6, 6), last=dt.date(2022, 12, 30)):
    d = first
    while d <= last:
        if d.weekday() < 5 and d not in HOLIDAYS:
            yield d
        d += dt.timedelta(days=1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20220606)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/dcqo/data/sample_prices.csv"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    days = list(trading_days())
    n, m = len(TICKERS), len(days)
    drift = rng.normal(0.0, 6e-4, n)
    beta = rng.uniform(0.6, 1.4, n)
    vol_market, vol_sector = 0.011, 0.007
    vol_idio = rng.uniform(0.008, 0.018, n)

    market = rng.normal(0, vol_market, m - 1)
    sectors = rng.normal(0, vol_sector, (m - 1, 6))
    idio = rng.normal(0, 1, (m - 1, n)) * vol_idio
    sec = np.array([SECTOR[t] for t in TICKERS])
    logret = drift + market[:, None] * beta + sectors[:, sec] + idio
    start = np.array([START[t] for t in TICKERS])
    prices = start * np.exp(np.vstack([np.zeros(n), np.cumsum(logret, axis=0)]))

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *TICKERS])
        for d, row in zip(days, prices):
            w.writerow([d.isoformat(), *(f"{p:.2f}" for p in row)])
    print(f"wrote {m} rows x {n} assets to {args.out}")


if __name__ == "__main__":
    main()
