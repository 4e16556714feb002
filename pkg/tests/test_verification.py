"""Manufactured fields, their boundary data, and the beam benchmark value."""

from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest

from fvsolid import MMSCase, build_mesh, cantilever_deflection, compute_errors
from fvsolid.assembly import DISPLACEMENT, SYMMETRY, TRACTION
from fvsolid.mesh import BOTTOM, LEFT, RIGHT, TOP
from fvsolid.verification import (
    dirichlet_data,
    mms_bcs,
    mms_deformation_gradient,
    traction_data,
)


def test_uniaxial_gradient_interpolates_in_load():
    case = MMSCase("uniaxial", DISPLACEMENT, 2.0)
    npt.assert_allclose(mms_deformation_gradient(case, 0.0), np.eye(3))
    npt.assert_allclose(mms_deformation_gradient(case, 0.5),
                        np.diag([1.5, 1.0, 1.0]))
    npt.assert_allclose(mms_deformation_gradient(case, 1.0),
                        np.diag([2.0, 1.0, 1.0]))


def test_shear_gradient_fills_upper_entry():
    case = MMSCase("shear", DISPLACEMENT, 0.45)
    f = mms_deformation_gradient(case, 1.0)
    expected = np.eye(3)
    expected[0, 1] = 0.45
    npt.assert_allclose(f, expected)
    npt.assert_allclose(mms_deformation_gradient(case, 0.2)[0, 1], 0.09)


def test_dirichlet_data_hand_values():
    stretch = MMSCase("uniaxial", DISPLACEMENT, 2.0)
    npt.assert_allclose(dirichlet_data(stretch, 1.0, [1.0, 0.5, 0.0]),
                        [1.0, 0.0, 0.0])
    shear = MMSCase("shear", DISPLACEMENT, 0.45)
    npt.assert_allclose(dirichlet_data(shear, 1.0, [0.5, 1.0, 0.0]),
                        [0.45, 0.0, 0.0])
    npt.assert_allclose(dirichlet_data(shear, 0.0, [0.5, 1.0, 0.0]), 0.0)


def test_traction_data_from_scalar_formulas(neo):
    """Uniaxial traction against the stress written out component-wise."""
    case = MMSCase("uniaxial", TRACTION, 2.0)
    phi, mu, lam = 2.0, neo.mu, neo.lam
    s11 = mu * (1.0 - 1.0 / phi**2) + lam * np.log(phi) / phi**2
    s22 = lam * np.log(phi)
    t_right = traction_data(case, neo, 1.0, np.array([1.0, 0.0, 0.0]))
    npt.assert_allclose(t_right, [phi * s11, 0.0, 0.0], rtol=1e-14)
    t_top = traction_data(case, neo, 1.0, np.array([0.0, 1.0, 0.0]))
    npt.assert_allclose(t_top, [0.0, s22, 0.0], rtol=1e-14)


def test_shear_traction_is_exactly_mu_omega(neo):
    """Simple shear of this model carries P12 = mu * omega on the top face."""
    case = MMSCase("shear", TRACTION, 0.45)
    t_top = traction_data(case, neo, 1.0, np.array([0.0, 1.0, 0.0]))
    npt.assert_allclose(t_top[0], neo.mu * 0.45, rtol=1e-14)
    t_right = traction_data(case, neo, 1.0, np.array([1.0, 0.0, 0.0]))
    npt.assert_allclose(t_right[1], neo.mu * 0.45, rtol=1e-14)


def test_mms_bcs_displacement_covers_all_patches(neo):
    case = MMSCase("uniaxial", DISPLACEMENT, 1.3)
    bcs = mms_bcs(case, neo)
    assert set(bcs) == {LEFT, RIGHT, BOTTOM, TOP}
    assert all(bc.kind == DISPLACEMENT for bc in bcs.values())
    npt.assert_allclose(bcs[RIGHT].value(np.array([1.0, 0.3, 0.0]), 1.0),
                        [0.3, 0.0, 0.0])


def test_mms_bcs_traction_pins_left_patch(neo):
    case = MMSCase("uniaxial", TRACTION, 1.3)
    bcs = mms_bcs(case, neo)
    assert bcs[LEFT].kind == DISPLACEMENT
    for patch in (RIGHT, BOTTOM, TOP):
        assert bcs[patch].kind == TRACTION
    # outward data: bottom carries minus the top traction
    top = bcs[TOP].value(np.zeros(3), 1.0)
    bottom = bcs[BOTTOM].value(np.zeros(3), 1.0)
    npt.assert_allclose(bottom, -top)


def test_mms_case_validation():
    with pytest.raises(ValueError, match="stretch must be positive"):
        MMSCase("uniaxial", DISPLACEMENT, -0.2)
    with pytest.raises(ValueError, match="unknown manufactured case"):
        MMSCase("bending", DISPLACEMENT, 1.0)
    with pytest.raises(ValueError, match="unknown bc kind"):
        MMSCase("shear", SYMMETRY, 0.45)


def test_compute_errors_metrics():
    mesh = build_mesh(4, 4, 1.0, 1.0)
    case = MMSCase("uniaxial", DISPLACEMENT, 1.5)
    grad = np.diag([0.5, 0.0, 0.0])
    exact = np.vstack([mesh.cell_centroids,
                       mesh.face_centroid[mesh.bface_face]]) @ grad.T
    metrics = compute_errors(mesh, exact, case)
    assert metrics.mean == metrics.max == metrics.min == 0.0

    shifted = exact.copy()
    shifted[: mesh.n_cells] += [3e-4, 4e-4, 0.0]
    metrics = compute_errors(mesh, shifted, case)
    npt.assert_allclose([metrics.mean, metrics.max, metrics.min], 5e-4)


def test_compute_errors_partial_load():
    mesh = build_mesh(3, 3, 1.0, 1.0)
    case = MMSCase("shear", DISPLACEMENT, 0.4)
    u = np.zeros((mesh.n_unknowns, 3))
    u[: mesh.n_cells, 0] = 0.2 * mesh.cell_centroids[:, 1]
    assert compute_errors(mesh, u, case, t=0.5).max < 1e-15


def test_cantilever_deflection_reference_value():
    """End-loaded plane-strain beam: 2 m by 0.1 m at 1 MPa end shear."""
    value = cantilever_deflection(E=200e9, nu=0.3, length=2.0,
                                  load=1e6 * 0.1,
                                  second_moment=0.1**3 / 12.0)
    assert value == pytest.approx(14.56e-3, rel=1e-3)


def test_cantilever_deflection_scales_linearly():
    base = cantilever_deflection(200e9, 0.3, 2.0, 1e5, 8.33e-5)
    npt.assert_allclose(cantilever_deflection(200e9, 0.3, 2.0, 2e5, 8.33e-5),
                        2.0 * base)
