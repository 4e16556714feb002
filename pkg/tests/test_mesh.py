"""Geometry, connectivity and interpolation stencils of the Cartesian mesh."""

from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest

from fvsolid import BOTTOM, LEFT, RIGHT, TOP, build_mesh
from fvsolid.mesh import PATCH_NAMES

# ---------------------------------------------------------------------------
# counts and geometry
# ---------------------------------------------------------------------------


def test_counts(mesh_small):
    m = mesh_small
    assert m.n_cells == 12
    assert m.n_bfaces == 2 * (3 + 4)
    assert m.n_unknowns == m.n_cells + m.n_bfaces
    assert m.n_faces == (m.nx + 1) * m.ny + (m.ny + 1) * m.nx
    assert m.n_vertices == 4 * 5
    assert len(m.interior_faces) + len(m.boundary_faces) == m.n_faces


def test_invalid_arguments():
    with pytest.raises(ValueError, match="at least one cell"):
        build_mesh(0, 4, 1.0, 1.0)
    with pytest.raises(ValueError, match="positive"):
        build_mesh(3, 4, 1.0, -2.0)


def test_cell_volumes_fill_domain(mesh_small):
    npt.assert_allclose(mesh_small.cell_volume.sum(), 1.5 * 1.0)


def test_spacings(mesh_small):
    assert mesh_small.dx == pytest.approx(0.5)
    assert mesh_small.dy == pytest.approx(0.25)


def test_centroids_row_major(mesh_small):
    m = mesh_small
    c = m.cell_index(2, 1)
    npt.assert_allclose(m.cell_centroids[c], [2.5 * m.dx, 1.5 * m.dy, 0.0])


def test_normals_are_unit_and_axis_aligned(mesh_small):
    norms = np.linalg.norm(mesh_small.face_normal, axis=1)
    npt.assert_allclose(norms, 1.0)
    npt.assert_allclose(
        np.abs(mesh_small.face_normal).sum(axis=1), 1.0
    )
    # Tangents are orthogonal to the normals.
    dots = np.einsum("fi,fi->f", mesh_small.face_normal, mesh_small.face_tangent)
    npt.assert_allclose(dots, 0.0, atol=1e-15)


def test_patch_normals_point_outward(mesh_small):
    m = mesh_small
    outward = {LEFT: [-1, 0, 0], RIGHT: [1, 0, 0],
               BOTTOM: [0, -1, 0], TOP: [0, 1, 0]}
    for patch, direction in outward.items():
        faces = m.patch_faces(patch)
        assert len(faces) == (m.ny if patch in (LEFT, RIGHT) else m.nx)
        npt.assert_allclose(m.face_normal[faces],
                            np.tile(direction, (len(faces), 1)))


def test_closed_surface_per_cell(mesh_small):
    """Signed area-weighted normals of each cell's faces sum to zero."""
    m = mesh_small
    total = np.einsum(
        "cf,cf,cfi->ci",
        m.cell_face_sign,
        m.face_area[m.cell_faces],
        m.face_normal[m.cell_faces],
    )
    npt.assert_allclose(total, 0.0, atol=1e-14)


def test_cell_face_signs_point_outward(mesh_small):
    m = mesh_small
    for c in range(m.n_cells):
        for k in range(4):
            f = m.cell_faces[c, k]
            outward = m.cell_face_sign[c, k] * m.face_normal[f]
            towards = m.face_centroid[f] - m.cell_centroids[c]
            assert outward @ towards > 0.0


# ---------------------------------------------------------------------------
# connectivity
# ---------------------------------------------------------------------------


def test_interior_across_is_neighbour(mesh_small):
    m = mesh_small
    inter = m.interior_faces
    npt.assert_array_equal(m.face_across[inter], m.face_neighbour[inter])
    assert (m.face_neighbour[inter] >= 0).all()
    assert (m.face_patch[inter] == -1).all()


def test_boundary_across_is_bface_unknown(mesh_small):
    m = mesh_small
    bnd = m.boundary_faces
    npt.assert_array_equal(
        m.face_across[bnd], m.n_cells + m.face_boundary_index[bnd]
    )
    assert (m.face_neighbour[bnd] == -1).all()
    # boundary_faces is ordered by boundary index
    npt.assert_array_equal(m.face_boundary_index[bnd], np.arange(m.n_bfaces))
    npt.assert_array_equal(m.bface_face, bnd)


def test_patch_bface_ranges(mesh_small):
    m = mesh_small
    ny, nx = m.ny, m.nx
    npt.assert_array_equal(m.patch_bfaces(LEFT), np.arange(ny))
    npt.assert_array_equal(m.patch_bfaces(RIGHT), ny + np.arange(ny))
    npt.assert_array_equal(m.patch_bfaces(BOTTOM), 2 * ny + np.arange(nx))
    npt.assert_array_equal(m.patch_bfaces(TOP), 2 * ny + nx + np.arange(nx))
    assert PATCH_NAMES == ("left", "right", "bottom", "top")


def test_face_distances(mesh_small):
    m = mesh_small
    inter = m.interior_faces
    vertical = inter[m.face_tangent[inter, 1] == 1.0]
    horizontal = inter[m.face_tangent[inter, 0] == 1.0]
    npt.assert_allclose(m.face_distance[vertical], m.dx)
    npt.assert_allclose(m.face_distance[horizontal], m.dy)
    left = m.patch_faces(LEFT)
    npt.assert_allclose(m.face_distance[left], 0.5 * m.dx)
    top = m.patch_faces(TOP)
    npt.assert_allclose(m.face_distance[top], 0.5 * m.dy)


def test_owner_distance_matches_geometry(mesh_small):
    m = mesh_small
    for f in range(m.n_faces):
        gap = m.face_centroid[f] - m.cell_centroids[m.face_owner[f]]
        if m.face_neighbour[f] >= 0:
            gap = m.cell_centroids[m.face_neighbour[f]] - m.cell_centroids[m.face_owner[f]]
        npt.assert_allclose(np.linalg.norm(gap), m.face_distance[f])


def test_arrays_are_frozen(mesh_small):
    with pytest.raises(ValueError):
        mesh_small.face_area[0] = 99.0


# ---------------------------------------------------------------------------
# vertex stencils
# ---------------------------------------------------------------------------


def test_stencil_weights_sum_to_one(mesh_small):
    m = mesh_small
    for v in range(m.n_vertices):
        ids, w = m.edge_stencil(v)
        assert w.sum() == pytest.approx(1.0)
        assert (ids >= 0).all() and (ids < m.n_unknowns).all()


def test_interior_vertex_stencil(mesh_small):
    m = mesh_small
    ids, w = m.edge_stencil(m.vertex_index(1, 1))
    expected = {m.cell_index(0, 0), m.cell_index(1, 0),
                m.cell_index(0, 1), m.cell_index(1, 1)}
    assert set(ids) == expected
    npt.assert_allclose(w, 0.25)


def test_edge_vertex_stencil_uses_boundary_faces(mesh_small):
    m = mesh_small
    ids, w = m.edge_stencil(m.vertex_index(0, 2))
    assert set(ids) == {m.n_cells + 1, m.n_cells + 2}
    npt.assert_allclose(w, 0.5)


def test_corner_vertex_stencil(mesh_small):
    m = mesh_small
    ids, w = m.edge_stencil(m.vertex_index(0, 0))
    npt.assert_array_equal(ids, [m.n_cells + 0])
    npt.assert_allclose(w, [1.0])
    ids, _ = m.edge_stencil(m.vertex_index(m.nx, m.ny))
    npt.assert_array_equal(ids, [m.n_cells + m.ny + (m.ny - 1)])


def test_face_record_consistency(mesh_small):
    m = mesh_small
    f = m.face(int(m.interior_faces[0]))
    assert f.neighbour >= 0 and f.patch == -1
    lo, hi = f.edges
    npt.assert_allclose(lo.binormal, -hi.binormal)
    assert lo.length == hi.length == 1.0
    b = m.face(int(m.patch_faces(TOP)[0]))
    assert b.neighbour == -1
    assert b.patch == TOP
    assert b.boundary_index >= 0
