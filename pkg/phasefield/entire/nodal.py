"""Nodal sets, singular points and nodal domains of a field on a planar box."""

import logging
from typing import Dict, Hashable, List, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field

from ..exceptions import DegenerateFieldError, UnsupportedKindError
from ..mesh.surface import SurfaceMesh

logger = logging.getLogger(__name__)

INFINITY = "inf"


class NodalAnalysis(BaseModel):
    """Counts behind the Euler relation q = 1 + C - |S| for a truncated planar nodal set."""

    domain_count: int = Field(..., description="Nodal domains q")
    component_count: int = Field(..., description="Components C of the nodal set minus S")
    singular_count: int = Field(..., description="Singular points |S| (valence >= 4)")
    euler_consistent: bool
    unbounded_domain_count: int = Field(..., description="Domains reaching the box boundary")
    sign_pattern: str = Field(..., description="Cyclic signs of the ends along the boundary")
    end_count: int = Field(..., description="Nodal arcs reaching the boundary")
    singular_points: List[List[float]] = Field(default_factory=list)
    positive_domains: int = 0
    negative_domains: int = 0

    @property
    def changes_sign(self) -> bool:
        return self.positive_domains > 0 and self.negative_domains > 0


def _crossing_node(i: int, j: int) -> Tuple[str, int, int]:
    return ("e", min(i, j), max(i, j))


def _nodal_graph(
    mesh: SurfaceMesh, values: np.ndarray, signs: np.ndarray
) -> Tuple[nx.Graph, Dict[Hashable, np.ndarray]]:
    """Graph of the zero set of the piecewise-linear interpolant.

    Nodes are zero vertices and sign-changing edges; two nodes are joined when the zero set
    runs between them inside a triangle, so isolated zero vertices drop out. Nodal points on
    the boundary are joined to INFINITY.
    """
    graph = nx.Graph()
    positions: Dict[Hashable, np.ndarray] = {}

    def add(node: Hashable, point: np.ndarray) -> None:
        positions.setdefault(node, point)

    for tri in mesh.triangles:
        s = signs[tri]
        points: List[Hashable] = []
        for k in range(3):
            a = int(tri[k])
            if s[k] == 0:
                node = ("v", a)
                add(node, mesh.vertices[a])
                points.append(node)
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            if s[k] * s[(k + 1) % 3] < 0:
                lam = values[a] / (values[a] - values[b])
                node = _crossing_node(a, b)
                add(node, mesh.vertices[a] + lam * (mesh.vertices[b] - mesh.vertices[a]))
                points.append(node)

        zeros = int(np.sum(s == 0))
        if zeros == 1 and len(points) == 1:
            # Zero set touches the triangle only at a vertex.
            continue
        for m in range(len(points)):
            for n in range(m + 1, len(points)):
                graph.add_edge(points[m], points[n])

    boundary = mesh.boundary_mask
    edge_counts = {tuple(e): c for e, c in zip(mesh.edges.tolist(), mesh.edge_triangle_counts)}
    for node in list(graph.nodes):
        on_boundary = (
            boundary[node[1]] if node[0] == "v" else edge_counts[(node[1], node[2])] == 1
        )
        if on_boundary:
            graph.add_edge(node, INFINITY)
    return graph, positions


def _merge_close(
    graph: nx.Graph, positions: Dict[Hashable, np.ndarray], radius: float
) -> nx.Graph:
    if radius <= 0:
        return graph
    short = nx.Graph()
    short.add_nodes_from(n for n in graph.nodes if n != INFINITY)
    for a, b in graph.edges:
        if INFINITY not in (a, b) and np.linalg.norm(positions[a] - positions[b]) < radius:
            short.add_edge(a, b)
    mapping = {}
    for group in nx.connected_components(short):
        label = min(group)
        positions[label] = np.mean([positions[n] for n in group], axis=0)
        mapping.update({n: label for n in group})
    merged = nx.relabel_nodes(graph, mapping, copy=True)
    merged.remove_edges_from(list(nx.selfloop_edges(merged)))
    return merged


def _domains(mesh: SurfaceMesh, signs: np.ndarray) -> List[set]:
    graph = nx.Graph()
    graph.add_nodes_from(np.flatnonzero(signs != 0).tolist())
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    same = (signs[a] == signs[b]) & (signs[a] != 0)
    graph.add_edges_from(zip(a[same].tolist(), b[same].tolist()))
    return list(nx.connected_components(graph))


def _sign_pattern(mesh: SurfaceMesh, signs: np.ndarray) -> str:
    ring = mesh.boundary_vertices
    ring = ring[signs[ring] != 0]
    if ring.size == 0:
        return ""
    angles = np.arctan2(mesh.vertices[ring, 1], mesh.vertices[ring, 0])
    ordered = signs[ring[np.argsort(angles)]]
    runs = [ordered[0]] + [s for prev, s in zip(ordered, ordered[1:]) if s != prev]
    if len(runs) > 1 and runs[0] == runs[-1]:
        runs = runs[:-1]
    return "".join("+" if s > 0 else "-" for s in runs)


def nodal_analysis(
    values: np.ndarray,
    mesh: SurfaceMesh,
    zero_tol: float = 1e-10,
    singular_valence_tol: float = 0.0,
) -> NodalAnalysis:
    """Nodal structure of a field on a planar box, with the boundary identified with infinity.

    Values with |v| <= zero_tol count as zero. Singular points are nodes of the zero-set graph
    with valence >= 4 after merging nodes closer than ``singular_valence_tol``; nodal domains are
    connected components of same-sign vertices along mesh edges.

    Args:
        values: Per-vertex field
        mesh: planar_box mesh
        zero_tol: Zero threshold
        singular_valence_tol: Merge radius for junction detection

    Returns:
        NodalAnalysis
    """
    if mesh.kind != "planar_box":
        raise UnsupportedKindError(mesh.kind, "nodal_analysis")
    values = np.asarray(values, dtype=float)
    max_abs = float(np.max(np.abs(values)))
    if max_abs <= zero_tol:
        raise DegenerateFieldError(max_abs)
    signs = np.where(np.abs(values) <= zero_tol, 0, np.sign(values)).astype(int)

    graph, positions = _nodal_graph(mesh, values, signs)
    graph = _merge_close(graph, positions, singular_valence_tol)
    singular = [n for n in graph.nodes if n != INFINITY and graph.degree(n) >= 4]
    rest = graph.copy()
    rest.remove_nodes_from(singular + [INFINITY])
    components = nx.number_connected_components(rest)
    ends = graph.degree(INFINITY) if INFINITY in graph else 0

    domains = _domains(mesh, signs)
    boundary = set(mesh.boundary_vertices.tolist())
    positive = sum(1 for d in domains if signs[next(iter(d))] > 0)
    analysis = NodalAnalysis(
        domain_count=len(domains),
        component_count=components,
        singular_count=len(singular),
        euler_consistent=len(domains) == 1 + components - len(singular),
        unbounded_domain_count=sum(1 for d in domains if d & boundary),
        sign_pattern=_sign_pattern(mesh, signs),
        end_count=ends,
        singular_points=[positions[n].tolist() for n in singular],
        positive_domains=positive,
        negative_domains=len(domains) - positive,
    )
    log = logger.info if analysis.euler_consistent else logger.warning
    log(
        f"Nodal analysis: q={analysis.domain_count}, C={components}, |S|={len(singular)}, "
        f"ends={ends}, euler_consistent={analysis.euler_consistent}"
    )
    return analysis
