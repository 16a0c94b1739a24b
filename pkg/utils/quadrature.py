"""
Composite Gauss-Legendre quadrature shared by projections and overlaps.

Panels of fixed width, each carrying a 64-node rule. All integrands in this
project are polynomials times Gaussians, so the rule converges far below 1e-12.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import GaussianPacketSpec, PhysicalParams

NODES_PER_PANEL = 64
PANEL_WIDTH = 0.5
TAIL_WIDTHS = 12.0
BASIS_MARGIN = 5.0


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Integrate samples taken at the nodes; sums over the last axis"""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=None)
def _reference_rule(order: int):
    return np.polynomial.legendre.leggauss(order)


def composite_rule(a: float, b: float, panel_width: float = PANEL_WIDTH,
                   order: int = NODES_PER_PANEL) -> QuadratureRule:
    if b <= a:
        raise ValueError(f"empty integration interval [{a}, {b}]")
    panels = max(1, math.ceil((b - a) / panel_width - 1e-12))
    edges = np.linspace(a, b, panels + 1)
    ref_nodes, ref_weights = _reference_rule(order)

    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    nodes = (mid + half * ref_nodes[None, :]).ravel()
    weights = (half * ref_weights[None, :]).ravel()
    return QuadratureRule(nodes=nodes, weights=weights)


def integration_half_width(params: PhysicalParams, x_s: float,
                           packet: GaussianPacketSpec = None, n_max: int = 0) -> float:
    """
    L = max(x_s, |x0|) + 12 max(sqrt(mu), sqrt(g/2)), widened if needed so the
    highest basis function has decayed, rounded up to whole panels.
    """
    reach = x_s
    width = math.sqrt(params.g / 2.0)
    if packet is not None:
        reach = max(reach, abs(packet.x0))
        width = max(width, math.sqrt(packet.mu))
    half_width = reach + TAIL_WIDTHS * width
    # classical turning point of phi_n_max plus a decay margin
    basis_extent = (math.sqrt(2.0 * n_max + 1.0) + BASIS_MARGIN) * math.sqrt(params.g)
    half_width = max(half_width, basis_extent)
    return PANEL_WIDTH * math.ceil(half_width / PANEL_WIDTH)


def line_rule(params: PhysicalParams, x_s: float, packet: GaussianPacketSpec = None,
              n_max: int = 0) -> QuadratureRule:
    """Rule over [-L, L]"""
    half_width = integration_half_width(params, x_s, packet, n_max)
    return composite_rule(-half_width, half_width)


def half_line_rule(params: PhysicalParams, x_s: float, n_max: int = 0) -> QuadratureRule:
    """Rule over [0, L]"""
    return composite_rule(0.0, integration_half_width(params, x_s, n_max=n_max))
