"""Spatial grid, boundary matching, diffusion operator and Poincare constants.

The domain is an interval or an axis-aligned rectangle, discretized with a
uniform cell-centered grid.  Boundary coupling is expressed per boundary
face by an involution on neuron indices: at each face, neuron i exchanges
flux with neuron partner(i), and partner(partner(i)) = i always.  A neuron
matched to itself has a zero-flux face there.

All operators fix their summation order, so results are reproducible
bit-for-bit regardless of call context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigenSolveError, MatchingError

_SIDES_1D = {"left": (0, 0), "right": (0, 1)}
_SIDES_2D = {"left": (0, 0), "right": (0, 1), "bottom": (1, 0), "top": (1, 1)}


@dataclass(frozen=True, eq=False)
class Domain:
    """Uniform cell-centered grid on an interval or rectangle.

    ``face_*`` arrays enumerate boundary faces axis-major, low side before
    high side, in increasing order of the transverse coordinate.  In 1D a
    face is an endpoint and carries counting-measure area 1; in 2D the face
    area is the cell width along the edge and ``face_pos`` is the transverse
    center coordinate, used to select faces by arc-length span.
    """

    dim: int
    extents: tuple
    cells: tuple
    h: tuple
    cell_volume: float
    omega_measure: float
    n_cells: int
    face_cell: np.ndarray
    face_axis: np.ndarray
    face_side: np.ndarray
    face_area: np.ndarray
    face_pos: np.ndarray

    @property
    def n_faces(self) -> int:
        return self.face_cell.shape[0]

    @property
    def boundary_measure(self) -> float:
        return float(np.sum(self.face_area))

    def grid_shape(self) -> tuple:
        return self.cells

    def cell_center_coords(self) -> tuple:
        """Per-axis center coordinate of every cell, each shaped (n_cells,)."""
        axes = [
            (np.arange(n) + 0.5) * hk for n, hk in zip(self.cells, self.h)
        ]
        if self.dim == 1:
            return (axes[0],)
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return gx.ravel(), gy.ravel()


def build_domain(dim: int, extents, cells) -> Domain:
    """Construct the grid; rejects 3D and degenerate shapes.

    Flat cell index runs x-major in 2D: ``cell = ix * ny + iy``.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim} (3D domains are out of scope)")
    extents = tuple(float(e) for e in extents)
    cells = tuple(int(n) for n in cells)
    if len(extents) != dim or len(cells) != dim:
        raise ValueError(f"extents and cells must each have {dim} entries")
    for e in extents:
        if not (math.isfinite(e) and e > 0):
            raise ValueError(f"extents must be positive and finite, got {e!r}")
    for n in cells:
        if n < 4:
            raise ValueError(f"cells_per_axis must be >= 4, got {n}")
    h = tuple(e / n for e, n in zip(extents, cells))
    cell_volume = math.prod(h)
    n_cells = math.prod(cells)
    omega_measure = n_cells * cell_volume

    face_cell, face_axis, face_side, face_area, face_pos = [], [], [], [], []
    if dim == 1:
        (nx,) = cells
        for side, cell in ((0, 0), (1, nx - 1)):
            face_cell.append(cell)
            face_axis.append(0)
            face_side.append(side)
            face_area.append(1.0)
            face_pos.append(0.0 if side == 0 else extents[0])
    else:
        nx, ny = cells
        hx, hy = h
        for axis in (0, 1):
            for side in (0, 1):
                if axis == 0:
                    ix = 0 if side == 0 else nx - 1
                    for iy in range(ny):
                        face_cell.append(ix * ny + iy)
                        face_axis.append(axis)
                        face_side.append(side)
                        face_area.append(hy)
                        face_pos.append((iy + 0.5) * hy)
                else:
                    iy = 0 if side == 0 else ny - 1
                    for ix in range(nx):
                        face_cell.append(ix * ny + iy)
                        face_axis.append(axis)
                        face_side.append(side)
                        face_area.append(hx)
                        face_pos.append((ix + 0.5) * hx)

    return Domain(
        dim=dim,
        extents=extents,
        cells=cells,
        h=h,
        cell_volume=cell_volume,
        omega_measure=omega_measure,
        n_cells=n_cells,
        face_cell=np.asarray(face_cell, dtype=np.intp),
        face_axis=np.asarray(face_axis, dtype=np.int8),
        face_side=np.asarray(face_side, dtype=np.int8),
        face_area=np.asarray(face_area, dtype=np.float64),
        face_pos=np.asarray(face_pos, dtype=np.float64),
    )


@dataclass(frozen=True, eq=False)
class BoundaryMatching:
    """Per-face involution on neuron indices (0-based internally).

    ``partner[f, i] = j`` means neuron i exchanges boundary flux with neuron
    j at face f; ``partner[f, i] = i`` is a zero-flux face for neuron i.
    Carries the face geometry (areas and owning cells) so boundary
    observables can be computed from a matching alone.
    """

    partner: np.ndarray
    face_area: np.ndarray
    face_cell: np.ndarray
    n_neurons: int

    def __post_init__(self):
        n_faces = self.face_area.shape[0]
        if self.face_cell.shape != (n_faces,):
            raise MatchingError("face_cell must have one entry per boundary face")
        if self.partner.shape != (n_faces, self.n_neurons):
            raise MatchingError(
                f"partner table must have shape ({n_faces}, {self.n_neurons}), "
                f"got {self.partner.shape}"
            )
        if self.partner.min(initial=0) < 0 or self.partner.max(initial=0) >= self.n_neurons:
            raise MatchingError("partner indices out of range")
        idx = np.arange(self.n_neurons)
        back = np.take_along_axis(self.partner, self.partner, axis=1)
        if not np.array_equal(back, np.broadcast_to(idx, self.partner.shape)):
            f, i = np.argwhere(back != idx)[0]
            raise MatchingError(
                f"matching is not an involution: at face {f}, neuron {i + 1} maps to "
                f"{self.partner[f, i] + 1} which maps back to {back[f, i] + 1}"
            )


def trivial_matching(domain: Domain, n_neurons: int) -> BoundaryMatching:
    """All faces zero-flux for every neuron."""
    partner = np.broadcast_to(
        np.arange(n_neurons, dtype=np.intp), (domain.n_faces, n_neurons)
    ).copy()
    return BoundaryMatching(partner=partner, face_area=domain.face_area,
                            face_cell=domain.face_cell, n_neurons=n_neurons)


def parse_pairs(text) -> list:
    """Parse a pair list like ``1-2, 3-3`` into 1-based index tuples.

    Also accepts an iterable of (i, j) tuples, passed through unchanged.
    """
    if not isinstance(text, str):
        return [(int(i), int(j)) for i, j in text]
    pairs = []
    body = text.strip()
    if not body:
        return pairs
    for chunk in body.split(","):
        chunk = chunk.strip()
        parts = chunk.split("-")
        if len(parts) != 2:
            raise MatchingError(f"malformed pair {chunk!r}: expected 'i-j'")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise MatchingError(f"malformed pair {chunk!r}: indices must be integers") from None
    return pairs


def _segment_faces(segment, domain: Domain, label: str) -> np.ndarray:
    sides = _SIDES_1D if domain.dim == 1 else _SIDES_2D
    side_name = str(segment.get("side", "")).strip().lower()
    if side_name not in sides:
        raise MatchingError(
            f"{label}: unknown side {side_name!r} for a {domain.dim}D domain "
            f"(expected one of {sorted(sides)})"
        )
    axis, side = sides[side_name]
    mask = (domain.face_axis == axis) & (domain.face_side == side)
    span = segment.get("span")
    if span is not None:
        if domain.dim == 1:
            raise MatchingError(f"{label}: span is only meaningful on 2D edges")
        lo, hi = float(span[0]), float(span[1])
        if not lo < hi:
            raise MatchingError(f"{label}: span must satisfy lo < hi, got ({lo}, {hi})")
        mask &= (domain.face_pos >= lo) & (domain.face_pos < hi)
    faces = np.flatnonzero(mask)
    if faces.size == 0:
        raise MatchingError(f"{label}: segment selects no boundary faces")
    return faces


def parse_matching(segments, domain: Domain, n_neurons: int) -> BoundaryMatching:
    """Assemble the boundary involution from segment descriptors.

    Each segment is a mapping with keys ``side`` (left/right, plus bottom/top
    in 2D), optional ``span`` = (lo, hi) selecting an arc-length interval of
    the 2D edge, and ``pairs``: a text pair list with 1-based neuron labels
    (``1-2, 3-3``) or an iterable of tuples.  Neurons unlisted at a face are
    zero-flux there, as are all faces no segment covers.

    Raises :class:`MatchingError` for overlapping segments, indices out of
    range, or a neuron listed twice at one segment.
    """
    if n_neurons < 2:
        raise MatchingError("a matching needs at least 2 neurons")
    partner = np.broadcast_to(
        np.arange(n_neurons, dtype=np.intp), (domain.n_faces, n_neurons)
    ).copy()
    claimed = np.zeros(domain.n_faces, dtype=bool)
    for k, segment in enumerate(segments):
        label = segment.get("label") or f"segment {k + 1}"
        faces = _segment_faces(segment, domain, label)
        if claimed[faces].any():
            raise MatchingError(f"{label}: overlaps a previously configured segment")
        claimed[faces] = True
        seen = set()
        for i1, j1 in parse_pairs(segment.get("pairs", "")):
            for idx in (i1, j1):
                if not 1 <= idx <= n_neurons:
                    raise MatchingError(
                        f"{label}: neuron index {idx} out of range 1..{n_neurons}"
                    )
            new = {i1, j1}
            if seen & new:
                raise MatchingError(
                    f"{label}: neuron {sorted(seen & new)[0]} appears in two pairs; "
                    f"the matching must be an involution"
                )
            seen |= new
            i, j = i1 - 1, j1 - 1
            partner[faces, i] = j
            partner[faces, j] = i
    return BoundaryMatching(partner=partner, face_area=domain.face_area,
                            face_cell=domain.face_cell, n_neurons=n_neurons)


def full_boundary_matching(domain: Domain, n_neurons: int, pairs) -> BoundaryMatching:
    """Matching with one pair list applied uniformly on the whole boundary."""
    if domain.dim == 1:
        segments = [{"side": "left", "pairs": pairs}, {"side": "right", "pairs": pairs}]
    else:
        segments = [{"side": s, "pairs": pairs} for s in ("left", "right", "bottom", "top")]
    return parse_matching(segments, domain, n_neurons)


def face_values(fields: np.ndarray, domain: Domain) -> np.ndarray:
    """Sample cell-centered fields at boundary-face cells: (..., n_faces)."""
    return fields[..., domain.face_cell]


def apply_diffusion(
    u_all: np.ndarray,
    domain: Domain,
    matching,
    d: float,
    p: float,
) -> np.ndarray:
    """Finite-volume diffusion with boundary-coupling fluxes.

    ``u_all`` has shape (N, n_cells).  Interior face flux is
    d (u_next - u_cell) / h * area; a boundary face matched to neuron j
    contributes d p (u_j - u_i) * area; each cell's net flux is divided by
    the cell volume.  Fixed-point faces contribute exactly zero.
    """
    u_all = np.asarray(u_all, dtype=np.float64)
    if u_all.ndim != 2 or u_all.shape[1] != domain.n_cells:
        raise ValueError(
            f"u_all must have shape (N, {domain.n_cells}), got {u_all.shape}"
        )
    n = u_all.shape[0]
    out = np.zeros_like(u_all)
    vol = domain.cell_volume

    g = u_all.reshape((n,) + domain.cells)
    og = out.reshape((n,) + domain.cells)
    if domain.dim == 1:
        (hx,) = domain.h
        flux = (d / (hx * vol)) * (g[:, 1:] - g[:, :-1])  # already times area (=1)
        og[:, :-1] += flux
        og[:, 1:] -= flux
    else:
        hx, hy = domain.h
        fx = (d * hy / (hx * vol)) * (g[:, 1:, :] - g[:, :-1, :])
        og[:, :-1, :] += fx
        og[:, 1:, :] -= fx
        fy = (d * hx / (hy * vol)) * (g[:, :, 1:] - g[:, :, :-1])
        og[:, :, :-1] += fy
        og[:, :, 1:] -= fy

    if p != 0.0 and matching is not None:
        fc = domain.face_cell
        coef = (d * p / vol) * domain.face_area
        uf = u_all[:, fc]  # (N, F)
        rows = np.arange(fc.shape[0])
        for i in range(n):
            j = matching.partner[:, i]
            contrib = coef * (uf[j, rows] - uf[i])
            np.add.at(out[i], fc, contrib)
    return out


def integrate_domain(field: np.ndarray, domain: Domain):
    """Midpoint quadrature: sum of values times cell volume.

    Accepts a single field (returns a float) or a stack of fields over the
    last axis (returns an array of integrals).
    """
    field = np.asarray(field)
    if field.shape[-1] != domain.n_cells:
        raise ValueError(f"field must have {domain.n_cells} cells, got {field.shape}")
    total = np.sum(field, axis=-1) * domain.cell_volume
    return float(total) if field.ndim == 1 else total


def integrate_boundary_pair(f_faces: np.ndarray, matching: BoundaryMatching, i: int, j: int):
    """Integrate per-face values over the faces where neuron i is matched to j.

    Indices are 0-based.  ``i == j`` integrates over the zero-flux faces of
    neuron i (legal; usually the zero function).
    """
    f_faces = np.asarray(f_faces)
    if f_faces.shape[-1] != matching.face_area.shape[0]:
        raise ValueError("f_faces must have one value per boundary face")
    mask = matching.partner[:, i] == j
    return float(np.sum(f_faces[..., mask] * matching.face_area[mask], axis=-1))


def _axis_laplacian(n: int, h: float) -> sp.csr_matrix:
    # zero-flux second-difference operator, negative semidefinite
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / (h * h)


def neumann_laplacian(domain: Domain) -> sp.csr_matrix:
    """Discrete zero-flux Laplacian on the grid (matches apply_diffusion at d=1, p=0)."""
    if domain.dim == 1:
        return _axis_laplacian(domain.cells[0], domain.h[0])
    nx, ny = domain.cells
    hx, hy = domain.h
    lx = _axis_laplacian(nx, hx)
    ly = _axis_laplacian(ny, hy)
    return (sp.kron(lx, sp.identity(ny)) + sp.kron(sp.identity(nx), ly)).tocsr()


def network_diffusion_matrix(
    domain: Domain, matching, d: float, p: float, n_neurons: int
) -> sp.csr_matrix:
    """Joint operator on the stacked u-fields: block diffusion plus coupling.

    Acts on a vector of length N * n_cells laid out neuron-major; equals
    apply_diffusion as a linear map.
    """
    lap = d * neumann_laplacian(domain)
    blocks = sp.block_diag([lap] * n_neurons, format="lil")
    if p != 0.0 and matching is not None:
        nc = domain.n_cells
        coef = (d * p / domain.cell_volume) * domain.face_area
        for f in range(domain.n_faces):
            cell = domain.face_cell[f]
            for i in range(n_neurons):
                j = matching.partner[f, i]
                if j != i:
                    blocks[i * nc + cell, j * nc + cell] += coef[f]
                    blocks[i * nc + cell, i * nc + cell] -= coef[f]
    return blocks.tocsr()


@dataclass(frozen=True)
class PoincareConstants:
    """First nonzero Neumann eigenvalue and its measure-normalized companion."""

    eta1: float
    eta2: float
    mode: str
    iterations: int
    residual: float


def poincare_constants(
    domain: Domain,
    mode: str = "discrete",
    rtol: float = 1e-10,
    max_iterations: int = 10000,
) -> PoincareConstants:
    """eta1 = first nonzero eigenvalue of the zero-flux Laplacian; eta2 = eta1/|Omega|.

    ``discrete`` runs shifted inverse iteration on the mean-free subspace of
    the grid operator (the constant kernel vector is projected out every
    step); ``analytic`` returns the continuum value (pi / longest extent)^2.
    Non-convergence within ``max_iterations`` raises
    :class:`EigenSolveError` carrying the last residual.
    """
    if mode == "analytic":
        eta1 = (math.pi / max(domain.extents)) ** 2
        return PoincareConstants(
            eta1=eta1, eta2=eta1 / domain.omega_measure,
            mode=mode, iterations=0, residual=0.0,
        )
    if mode != "discrete":
        raise ValueError(f"mode must be 'discrete' or 'analytic', got {mode!r}")

    a = (-neumann_laplacian(domain)).tocsc()  # positive semidefinite
    n = a.shape[0]
    sigma = 1e-6 * float(a.diagonal().max())
    lu = spla.splu((a + sigma * sp.identity(n, format="csc")).tocsc())

    # smooth deterministic start with strong overlap on the first mode
    coord = domain.cell_center_coords()[int(np.argmax(domain.extents))]
    x = np.cos(math.pi * coord / max(domain.extents))
    x -= x.mean()
    x /= np.linalg.norm(x)

    lam = 0.0
    residual = math.inf
    for it in range(1, max_iterations + 1):
        x = lu.solve(x)
        x -= x.mean()
        x /= np.linalg.norm(x)
        ax = a @ x
        lam = float(x @ ax)
        residual = float(np.linalg.norm(ax - lam * x)) / lam
        if residual <= rtol:
            return PoincareConstants(
                eta1=lam, eta2=lam / domain.omega_measure,
                mode=mode, iterations=it, residual=residual,
            )
    raise EigenSolveError(iterations=max_iterations, residual=residual, tol=rtol)
