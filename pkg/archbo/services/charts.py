"""
Gráfico de Convergência

Gera um SVG autônomo (reportlab.graphics) com o melhor valor viável
em função do índice de avaliação, uma polilinha por execução (tracejada no topo quando
não há ponto viável).
"""

import logging
from typing import Dict, List, Optional, Sequence

from reportlab.graphics import renderSVG
from reportlab.graphics.shapes import Drawing, Line, PolyLine, String
from reportlab.lib import colors

logger = logging.getLogger(__name__)

PALETTE = (
    colors.HexColor('#1f77b4'), colors.HexColor('#d62728'), colors.HexColor('#2ca02c'),
    colors.HexColor('#ff7f0e'), colors.HexColor('#9467bd'), colors.HexColor('#8c564b'),
    colors.HexColor('#e377c2'), colors.HexColor('#7f7f7f'),
)


class ConvergenceChart:
    """Gráfico melhor-até-agora x avaliação."""

    def __init__(self, width: int = 640, height: int = 400, margin: int = 50):
        self.width = width
        self.height = height
        self.margin = margin
        logger.debug("ConvergenceChart inicializado")

    def build(self, series: Dict[str, Sequence[Optional[float]]],
              title: str = 'Convergência') -> Drawing:
        """
        Monta o desenho.

        Args:
            series: Rótulo da execução -> best_so_far por avaliação (None antes do
                primeiro ponto viável)
            title: Título do gráfico

        Returns:
            Drawing do reportlab
        """
        drawing = Drawing(self.width, self.height)
        m = self.margin
        plot_w, plot_h = self.width - 2 * m, self.height - 2 * m

        values = [v for s in series.values() for v in s if v is not None]
        n_max = max((len(s) for s in series.values()), default=1)
        y_lo, y_hi = (min(values), max(values)) if values else (0.0, 1.0)
        if y_hi <= y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

        def to_xy(i, v):
            x = m + plot_w * (i - 1) / max(n_max - 1, 1)
            y = m + plot_h * (v - y_lo) / (y_hi - y_lo)
            return x, y

        drawing.add(Line(m, m, m + plot_w, m, strokeColor=colors.black))
        drawing.add(Line(m, m, m, m + plot_h, strokeColor=colors.black))
        drawing.add(String(self.width / 2, self.height - m / 2, title,
                           textAnchor='middle', fontSize=12))
        drawing.add(String(self.width / 2, m / 3, 'avaliação', textAnchor='middle', fontSize=9))
        drawing.add(String(m - 4, m, f'{y_lo:.4g}', textAnchor='end', fontSize=8))
        drawing.add(String(m - 4, m + plot_h, f'{y_hi:.4g}', textAnchor='end', fontSize=8))
        drawing.add(String(m + plot_w, m - 12, str(n_max), textAnchor='end', fontSize=8))

        for k, (label, values_k) in enumerate(series.items()):
            color = PALETTE[k % len(PALETTE)]
            points: List[float] = []
            for i, v in enumerate(values_k, start=1):
                if v is not None:
                    points.extend(to_xy(i, v))
            dash = None
            if not points:
                # sem ponto viável: tracejado na borda superior
                logger.warning(f"Execução sem ponto viável: {label}")
                x_end = to_xy(max(len(values_k), 1), y_hi)[0]
                points = [m, m + plot_h, x_end, m + plot_h]
                dash = [4, 3]
            if len(points) == 2:
                points.extend(points)
            drawing.add(PolyLine(points, strokeColor=color, strokeWidth=1.2, strokeDashArray=dash))
            drawing.add(String(m + plot_w + 4, m + plot_h - 12 * k, label,
                               fontSize=7, fillColor=color))
        return drawing

    def render(self, series: Dict[str, Sequence[Optional[float]]], title: str = 'Convergência') -> str:
        """SVG como texto."""
        return renderSVG.drawToString(self.build(series, title))
