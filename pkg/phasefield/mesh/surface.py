"""Triangulated surfaces: spheres, ellipsoids, tori and planar boxes."""

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..exceptions import (
    DegenerateGeometry,
    PhaseFieldInputError,
    UnknownSurfaceKind,
    UnsupportedKindError,
)

logger = logging.getLogger(__name__)

SURFACE_KINDS = ("sphere", "ellipsoid", "torus_of_revolution", "flat_torus", "planar_box")
CLOSED_KINDS = ("sphere", "ellipsoid", "torus_of_revolution", "flat_torus")
PLANAR_KINDS = ("flat_torus", "planar_box")


@dataclass(frozen=True)
class SurfaceMesh:
    """Triangulated 2-dimensional domain.

    Flat tori are stored with one vertex per identified class, so periodic identifications are
    part of the indexing; ``periods`` holds the box side used to unwrap triangle corners.
    """

    vertices: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    periods: Optional[Tuple[float, float]] = None

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def is_planar(self) -> bool:
        return self.kind in PLANAR_KINDS

    @property
    def is_closed(self) -> bool:
        return self.boundary_vertices.size == 0

    def minimal_image(self, d: np.ndarray) -> np.ndarray:
        """Wrap displacement vectors into the fundamental cell of a periodic mesh."""
        if self.periods is None:
            return d
        period = np.asarray(self.periods, dtype=float)
        return d - period * np.round(d / period)

    def corner_positions(self) -> np.ndarray:
        """Triangle corner coordinates (n_triangles, 3, dim), unwrapped across periodic seams."""
        corners = self.vertices[self.triangles]
        if self.periods is None:
            return corners
        offsets = self.minimal_image(corners - corners[:, :1, :])
        return corners[:, :1, :] + offsets

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges (n_edges, 2), sorted lexicographically."""
        return np.unique(np.sort(self._half_edges, axis=1), axis=0)

    @cached_property
    def _half_edges(self) -> np.ndarray:
        return self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.linalg.norm(self.minimal_image(d), axis=1)

    @property
    def h_max(self) -> float:
        """Longest edge length."""
        return float(self.edge_lengths.max())

    @cached_property
    def edge_triangle_counts(self) -> np.ndarray:
        _, counts = np.unique(np.sort(self._half_edges, axis=1), axis=0, return_counts=True)
        return counts

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        boundary_edges = self.edges[self.edge_triangle_counts == 1]
        return np.unique(boundary_edges)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        return mask

    @cached_property
    def mesh_id(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.kind.encode())
        digest.update(np.ascontiguousarray(self.vertices, dtype=float).tobytes())
        digest.update(np.ascontiguousarray(self.triangles, dtype=np.int64).tobytes())
        return digest.hexdigest()[:16]

    def edge_graph(self) -> sparse.csr_matrix:
        """Symmetric sparse matrix of edge lengths, for graph distances."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        n = self.n_vertices
        w = self.edge_lengths
        return sparse.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(n, n),
        ).tocsr()

    def neighbors(self) -> List[np.ndarray]:
        """One-ring vertex neighbours of every vertex."""
        graph = self.edge_graph()
        ptr = graph.indptr
        return [graph.indices[ptr[k] : ptr[k + 1]] for k in range(self.n_vertices)]

    def submesh(self, vertex_mask: np.ndarray) -> Tuple["SurfaceMesh", np.ndarray]:
        """Restrict to triangles whose three vertices are selected.

        Args:
            vertex_mask: Boolean mask over vertices

        Returns:
            Tuple of (submesh, original indices of the submesh vertices)
        """
        keep = np.all(vertex_mask[self.triangles], axis=1)
        if not np.any(keep):
            raise PhaseFieldInputError("Vertex mask selects no complete triangle")
        kept = self.triangles[keep]
        used = np.unique(kept)
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(used.size)
        params = dict(self.params)
        params["parent"] = self.mesh_id
        sub = SurfaceMesh(
            vertices=self.vertices[used],
            triangles=remap[kept],
            kind=self.kind,
            params=params,
            periods=self.periods,
        )
        return sub, used

    def to_obj(self) -> str:
        """Wavefront OBJ text (1-based faces; planar vertices get z = 0)."""
        coords = self.vertices
        if self.dim == 2:
            coords = np.column_stack([coords, np.zeros(self.n_vertices)])
        lines = [f"# {self.kind} mesh {self.mesh_id}"]
        lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in coords]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.triangles]
        return "\n".join(lines) + "\n"


def _check_manifold(mesh: SurfaceMesh) -> None:
    if np.any(mesh.edge_triangle_counts > 2):
        raise DegenerateGeometry(f"{mesh.kind} mesh has edges shared by more than two triangles")
    # Consistent orientation: every directed half-edge appears at most once.
    _, counts = np.unique(mesh._half_edges, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise DegenerateGeometry(f"{mesh.kind} mesh is not consistently oriented")
    if mesh.kind in CLOSED_KINDS and mesh.boundary_vertices.size:
        raise DegenerateGeometry(f"Closed {mesh.kind} mesh has boundary vertices")


_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)  # fmt: skip


def _icosphere(level: int) -> Tuple[np.ndarray, np.ndarray]:
    g = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
            [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
            [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1],
        ],
        dtype=float,
    )  # fmt: skip
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = _ICOSAHEDRON_FACES.copy()

    for _ in range(level):
        edges = np.sort(faces[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
        unique, inverse = np.unique(edges, axis=0, return_inverse=True)
        mids = verts[unique[:, 0]] + verts[unique[:, 1]]
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        mid_index = (verts.shape[0] + inverse.reshape(-1)).reshape(-1, 3)
        a, b, c = faces.T
        ab, bc, ca = mid_index.T
        faces = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([b, bc, ab], axis=1),
                np.stack([c, ca, bc], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ]
        )
        verts = np.vstack([verts, mids])
    return verts, faces


def _grid_triangles(n_i: int, n_j: int, wrap: bool) -> np.ndarray:
    """Split grid cells into triangles with diagonals alternating by cell parity."""
    i, j = np.meshgrid(np.arange(n_i), np.arange(n_j), indexing="ij")
    i, j = i.ravel(), j.ravel()
    stride = n_j if wrap else n_j + 1

    def vid(a, b):
        if wrap:
            return (a % n_i) * stride + (b % n_j)
        return a * stride + b

    v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
    even = (i + j) % 2 == 0
    tri_a = np.where(even[:, None], np.stack([v00, v10, v11], 1), np.stack([v00, v10, v01], 1))
    tri_b = np.where(even[:, None], np.stack([v00, v11, v01], 1), np.stack([v10, v11, v01], 1))
    return np.concatenate([tri_a, tri_b])


def _positive(params: Dict[str, Any], *names: str) -> None:
    for name in names:
        if float(params[name]) <= 0.0:
            raise DegenerateGeometry(f"Geometry parameter '{name}' must be positive")


def build_surface(
    kind: str, resolution: int, params: Optional[Dict[str, Any]] = None
) -> SurfaceMesh:
    """Build a triangulated surface.

    Args:
        kind: One of sphere, ellipsoid, torus_of_revolution, flat_torus, planar_box
        resolution: Subdivision level (sphere, ellipsoid) or cells per side/ring
        params: Geometry parameters; sphere: radius; ellipsoid: a, b, c;
            torus_of_revolution: R, r; flat_torus: side; planar_box: half_width

    Returns:
        SurfaceMesh
    """
    if kind not in SURFACE_KINDS:
        raise UnknownSurfaceKind(f"Unknown surface kind '{kind}'; expected one of {SURFACE_KINDS}")
    if resolution < 1:
        raise PhaseFieldInputError(f"resolution must be >= 1, got {resolution}")
    params = dict(params or {})
    params["resolution"] = int(resolution)
    periods = None

    if kind == "sphere":
        params.setdefault("radius", 1.0)
        _positive(params, "radius")
        verts, tris = _icosphere(resolution)
        verts = verts * float(params["radius"])
    elif kind == "ellipsoid":
        for axis, default in zip("abc", (1.25, 1.0, 0.8)):
            params.setdefault(axis, default)
        _positive(params, "a", "b", "c")
        verts, tris = _icosphere(resolution)
        verts = verts * np.array([params["a"], params["b"], params["c"]], dtype=float)
    elif kind == "torus_of_revolution":
        params.setdefault("R", 1.0)
        params.setdefault("r", 0.4)
        _positive(params, "R", "r")
        R, r = float(params["R"]), float(params["r"])
        if r >= R:
            raise DegenerateGeometry(f"Tube radius r={r} must be smaller than ring radius R={R}")
        n_major = 8 * resolution
        n_minor = max(4, int(round(n_major * r / R)))
        phi = 2.0 * np.pi * np.arange(n_major) / n_major
        theta = 2.0 * np.pi * np.arange(n_minor) / n_minor
        P, T = np.meshgrid(phi, theta, indexing="ij")
        ring = R + r * np.cos(T)
        verts = np.column_stack(
            [(ring * np.cos(P)).ravel(), (ring * np.sin(P)).ravel(), (r * np.sin(T)).ravel()]
        )
        tris = _grid_triangles(n_major, n_minor, wrap=True)
    elif kind == "flat_torus":
        params.setdefault("side", 1.0)
        _positive(params, "side")
        n = resolution
        if n < 3:
            raise PhaseFieldInputError("flat_torus needs resolution >= 3")
        side = float(params["side"])
        coords = side * np.arange(n) / n
        X, Y = np.meshgrid(coords, coords, indexing="ij")
        verts = np.column_stack([X.ravel(), Y.ravel()])
        tris = _grid_triangles(n, n, wrap=True)
        periods = (side, side)
    else:
        params.setdefault("half_width", 1.0)
        _positive(params, "half_width")
        n = resolution
        L = float(params["half_width"])
        coords = np.linspace(-L, L, n + 1)
        X, Y = np.meshgrid(coords, coords, indexing="ij")
        verts = np.column_stack([X.ravel(), Y.ravel()])
        tris = _grid_triangles(n, n, wrap=False)

    mesh = SurfaceMesh(
        vertices=np.ascontiguousarray(verts, dtype=float),
        triangles=np.ascontiguousarray(tris, dtype=np.int64),
        kind=kind,
        params=params,
        periods=periods,
    )
    _check_manifold(mesh)
    logger.info(
        f"Built {kind} mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, "
        f"h_max={mesh.h_max:.4f}"
    )
    return mesh


@dataclass(frozen=True)
class ReferenceGeodesic:
    """Closed geodesic with an analytic length."""

    label: str
    points: np.ndarray = field(repr=False)
    length: float
    normal: Optional[np.ndarray] = field(default=None, repr=False)


def _great_circle(radius: float, normal: np.ndarray, samples: int) -> np.ndarray:
    normal = normal / np.linalg.norm(normal)
    helper = np.eye(3)[int(np.argmin(np.abs(normal)))]
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    t = 2.0 * np.pi * np.arange(samples) / samples
    return radius * (np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2))


def geodesic_reference(
    mesh: SurfaceMesh, normals: Optional[Sequence[Sequence[float]]] = None, samples: int = 512
) -> List[ReferenceGeodesic]:
    """Analytic closed geodesics of a sphere or flat torus.

    Args:
        mesh: Sphere or flat_torus mesh
        normals: Plane normals of the great circles (sphere only; default coordinate axes)
        samples: Points per reference polyline

    Returns:
        List of ReferenceGeodesic
    """
    if mesh.kind == "sphere":
        radius = float(mesh.params.get("radius", 1.0))
        axes = np.eye(3) if normals is None else np.asarray(normals, dtype=float)
        labels = ("meridian_yz", "meridian_xz", "equator") if normals is None else None
        geodesics = []
        for k, normal in enumerate(axes):
            normal = normal / np.linalg.norm(normal)
            geodesics.append(
                ReferenceGeodesic(
                    label=labels[k] if labels else f"great_circle_{k}",
                    points=_great_circle(radius, normal, samples),
                    length=2.0 * np.pi * radius,
                    normal=normal,
                )
            )
        return geodesics
    if mesh.kind == "flat_torus":
        side = float(mesh.params.get("side", 1.0))
        t = side * np.arange(samples) / samples
        zero = np.zeros(samples)
        return [
            ReferenceGeodesic(label="horizontal", points=np.column_stack([t, zero]), length=side),
            ReferenceGeodesic(label="vertical", points=np.column_stack([zero, t]), length=side),
        ]
    raise UnsupportedKindError(mesh.kind, "geodesic_reference")
