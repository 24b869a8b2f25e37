"""
Utility functions for reports and console output
"""

import numpy as np
import pandas as pd

from .numerics import SparseVector


def format_number(num):
    """Format large numbers with commas"""
    if num is None or pd.isna(num):
        return "N/A"
    return f"{num:,.0f}"


def format_micros(micros):
    """Format a duration given in microseconds"""
    if micros is None or pd.isna(micros):
        return "N/A"
    if micros >= 1e6:
        return f"{micros / 1e6:.2f} s"
    if micros >= 1e3:
        return f"{micros / 1e3:.2f} ms"
    return f"{micros:.0f} µs"


def format_rate(rate):
    """Format a fraction as a percentage"""
    if rate is None or pd.isna(rate):
        return "N/A"
    return f"{100 * rate:.1f}%"


def format_sparse(v: SparseVector, digits: int = 6) -> str:
    """Support/value listing such as {2: 1.5, 7: -0.25}"""
    if not v.support:
        return "{}"
    items = ", ".join(f"{i}: {np.real(x):.{digits}g}" for i, x in zip(v.support, v.values))
    return "{" + items + "}"


def summarize_trials(frame: pd.DataFrame) -> pd.DataFrame:
    """Per (n, t, l, variant) success rate, outer accuracy and median decode time"""
    keys = ['n', 't', 'l', 'variant']
    grouped = frame.groupby(keys, sort=True)
    summary = grouped.agg(
        trials=('trial', 'count'),
        success_rate=('success', 'mean'),
        outer_rate=('outer_ok', 'mean'),
        max_residual=('residual', 'max'),
    ).reset_index()
    if 'decode_micros' in frame.columns:
        summary['median_micros'] = grouped['decode_micros'].median().to_numpy()
    else:
        summary['median_micros'] = np.nan
    return summary
