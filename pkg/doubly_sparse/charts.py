"""
Doubly Sparse CS - Chart Module

Plotly charts for bench reports: median decode time and success rate
against the signal length n, one trace per (t, l, variant).
"""

from pathlib import Path
from typing import Union
import logging

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
from plotly.subplots import make_subplots

logger = logging.getLogger(__name__)

COLORS = {
    'text': '#1e1e1e',
    'text_secondary': '#4b5563',
}

CHART_COLORS = [
    '#00d4ff', '#7c3aed', '#10b981', '#f59e0b', '#ef4444',
    '#06b6d4', '#84cc16', '#f97316', '#8b5cf6', '#ec4899'
]


def get_standard_layout():
    """Standard layout shared by all bench charts."""
    axis = dict(
        title_font=dict(size=16, color=COLORS['text']),
        tickfont=dict(size=14, color=COLORS['text_secondary']),
        showgrid=True,
        gridcolor='rgba(0,0,0,0.1)',
        zeroline=False,
    )
    return {
        'plot_bgcolor': 'white',
        'paper_bgcolor': 'white',
        'font_family': 'Inter, sans-serif',
        'font': dict(size=14, color=COLORS['text']),
        'title_x': 0.5,
        'title_font': dict(size=20, color=COLORS['text']),
        'xaxis': axis,
        'yaxis': axis,
        'legend': dict(font=dict(size=14, color=COLORS['text']), borderwidth=1),
    }


def _series_label(df: pd.DataFrame) -> pd.Series:
    return 't=' + df['t'].astype(str) + ', l=' + df['l'].astype(str) + ' (' + df['variant'] + ')'


class ChartBuilder:
    """Builds the charts of a bench report from its per-n summary table."""

    @staticmethod
    def create_scaling_chart(summary: pd.DataFrame) -> go.Figure:
        """
        Median decode time against n on log-log axes.

        Args:
            summary (pd.DataFrame): columns n, t, l, variant, median_micros

        Returns:
            go.Figure: Plotly line chart
        """
        df = summary.assign(series=_series_label(summary))
        fig = px.line(
            df,
            x='n',
            y='median_micros',
            color='series',
            title='⏱️ Median Decode Time',
            labels={'median_micros': 'Median decode time (µs)', 'n': 'Signal length n', 'series': ''},
            color_discrete_sequence=CHART_COLORS,
            markers=True,
            log_x=True,
            log_y=True,
        )
        fig.update_layout(**get_standard_layout())
        fig.update_traces(line=dict(width=3), marker=dict(size=9))
        return fig

    @staticmethod
    def create_success_chart(summary: pd.DataFrame) -> go.Figure:
        """Success rate per n as grouped bars."""
        df = summary.assign(series=_series_label(summary))
        fig = px.bar(
            df,
            x='n',
            y='success_rate',
            color='series',
            barmode='group',
            title='✅ Recovery Success Rate',
            labels={'success_rate': 'Success rate', 'n': 'Signal length n', 'series': ''},
            color_discrete_sequence=CHART_COLORS,
        )
        fig.update_layout(**get_standard_layout())
        fig.update_yaxes(range=[0, 1.05])
        return fig

    @staticmethod
    def create_bench_report(summary: pd.DataFrame) -> go.Figure:
        """Both bench charts side by side."""
        fig = make_subplots(rows=1, cols=2, subplot_titles=('Median decode time (µs)', 'Success rate'))
        timing = ChartBuilder.create_scaling_chart(summary)
        success = ChartBuilder.create_success_chart(summary)
        for trace in timing.data:
            fig.add_trace(trace, row=1, col=1)
        for trace in success.data:
            trace.showlegend = False
            fig.add_trace(trace, row=1, col=2)
        fig.update_layout(**get_standard_layout())
        fig.update_layout(title='📊 Decoder Bench', barmode='group', height=500)
        fig.update_xaxes(type='log', row=1, col=1)
        fig.update_yaxes(type='log', row=1, col=1)
        fig.update_yaxes(range=[0, 1.05], row=1, col=2)
        return fig


def save_html(fig: go.Figure, path: Union[str, Path]) -> Path:
    """Write a standalone HTML file (plotly.js loaded from the CDN)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(path), include_plotlyjs='cdn')
    logger.info(f"Wrote chart to {path}")
    return path
