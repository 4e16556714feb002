"""Linear solver layer: scaling, preconditioning, method agreement, failure paths."""

from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest
import scipy.io
import scipy.sparse as sp

from fvsolid import BOTTOM, LEFT, RIGHT, TOP, BoundaryCondition, LinearSolverConfig
from fvsolid import linsolve
from fvsolid.assembly import (
    DISPLACEMENT,
    TRACTION,
    assemble_system,
    build_boundary_table,
)
from fvsolid.kinematics import zero_state
from fvsolid.material import Lame, NeoHookean
from fvsolid.mesh import build_mesh


def random_block_system(rng, n_blocks=12):
    """Well-conditioned random block system with a known solution."""
    dense = rng.standard_normal((2 * n_blocks, 2 * n_blocks))
    dense += 2 * n_blocks * np.eye(2 * n_blocks)
    x = rng.standard_normal(2 * n_blocks)
    matrix = sp.csr_matrix(dense)
    return matrix, matrix @ x, x


def assembled_system(rng):
    """Small momentum system with mixed displacement/traction rows."""
    mesh = build_mesh(3, 3, 1.0, 1.0)
    mat = NeoHookean(Lame(mu=0.8, lam=1.3))
    bcs = {LEFT: BoundaryCondition(DISPLACEMENT, (0.0, 0.0, 0.0)),
           RIGHT: BoundaryCondition(TRACTION, (0.2, 0.1, 0.0)),
           BOTTOM: BoundaryCondition(DISPLACEMENT, (0.0, 0.0, 0.0)),
           TOP: BoundaryCondition(TRACTION, (0.0, 0.0, 0.0))}
    table = build_boundary_table(mesh, bcs)
    system = assemble_system(mesh, mat, zero_state(mesh), table)
    return system.matrix, system.flat_rhs() + 0.01 * rng.standard_normal(
        2 * mesh.n_unknowns)


def test_matvec_keeps_block_shape(rng):
    matrix, _, x = random_block_system(rng, 5)
    flat = linsolve.matvec(matrix, x)
    npt.assert_allclose(flat, matrix @ x)
    blocked = linsolve.matvec(matrix, x.reshape(-1, 2))
    assert blocked.shape == (5, 2)
    npt.assert_allclose(blocked.ravel(), flat)


def test_equilibrate_normalises_rows(rng):
    matrix, rhs, x = random_block_system(rng)
    matrix = sp.diags(np.geomspace(1.0, 1e9, matrix.shape[0])) @ matrix
    rhs = matrix @ x
    scaled, scale = linsolve.equilibrate(matrix.tocsr())
    row_max = np.abs(scaled).max(axis=1).toarray().ravel()
    npt.assert_allclose(row_max, 1.0)
    # scaling must not move the solution
    npt.assert_allclose(
        np.linalg.solve(scaled.toarray(), scale * rhs), x, rtol=1e-8)


def test_block_jacobi_inverts_block_diagonal(rng):
    blocks = rng.standard_normal((6, 2, 2)) + 3.0 * np.eye(2)
    matrix = sp.block_diag([sp.csr_matrix(b) for b in blocks]).tocsr()
    pre = linsolve.block_jacobi(matrix)
    x = rng.standard_normal(12)
    npt.assert_allclose(pre @ (matrix @ x), x, rtol=1e-12)


def test_direct_solve_matches_dense(rng):
    matrix, rhs, x = random_block_system(rng)
    sol = linsolve.solve(matrix, rhs, LinearSolverConfig(method="direct"))
    npt.assert_allclose(sol.x, x, rtol=1e-10)
    assert sol.iterations == 0
    assert sol.residual < 1e-12


def test_zero_rhs_short_circuits(rng):
    matrix, _, _ = random_block_system(rng)
    sol = linsolve.solve(matrix, np.zeros(matrix.shape[0]))
    npt.assert_allclose(sol.x, 0.0)
    assert sol.iterations == 0 and sol.residual == 0.0


def test_methods_agree_on_assembled_system(rng):
    matrix, rhs = assembled_system(rng)
    solutions = {}
    for method in ("direct", "bicgstab", "gmres"):
        cfg = LinearSolverConfig(method=method, tolerance=1e-12)
        solutions[method] = linsolve.solve(matrix, rhs, cfg).x
    scale = np.linalg.norm(solutions["direct"])
    for method in ("bicgstab", "gmres"):
        gap = np.linalg.norm(solutions[method] - solutions["direct"]) / scale
        assert gap < 1e-8, f"{method} disagrees with direct by {gap:.2e}"


def test_iterative_records_history(rng):
    matrix, rhs = assembled_system(rng)
    sol = linsolve.solve(matrix, rhs,
                         LinearSolverConfig(method="gmres", tolerance=1e-12))
    assert sol.iterations == len(sol.history) > 0


def test_precondition_toggle_changes_work_not_answer(rng):
    matrix, rhs = assembled_system(rng)
    on = linsolve.solve(matrix, rhs, LinearSolverConfig(
        method="bicgstab", tolerance=1e-12))
    off = linsolve.solve(matrix, rhs, LinearSolverConfig(
        method="bicgstab", tolerance=1e-12, precondition=False))
    scale = np.linalg.norm(on.x)
    assert np.linalg.norm(on.x - off.x) / scale < 1e-7


def test_auto_picks_direct_below_limit(rng):
    matrix, rhs, x = random_block_system(rng)
    sol = linsolve.solve(matrix, rhs, LinearSolverConfig(direct_limit=50))
    npt.assert_allclose(sol.x, x, rtol=1e-10)
    assert sol.iterations == 0      # direct path leaves no Krylov history


def test_unknown_method_rejected(rng):
    matrix, rhs, _ = random_block_system(rng)
    with pytest.raises(ValueError, match="unknown linear solver"):
        linsolve.solve(matrix, rhs, LinearSolverConfig(method="cholesky"))


def test_explicit_method_failure_is_fatal(rng):
    matrix, rhs = assembled_system(rng)
    cfg = LinearSolverConfig(method="bicgstab", tolerance=1e-14,
                             max_iterations=1)
    with pytest.raises(linsolve.LinearSolveError, match="bicgstab"):
        linsolve.solve(matrix, rhs, cfg)


def test_auto_falls_back_to_direct(rng, monkeypatch):
    """A Krylov breakdown under automatic selection must not kill the solve."""
    matrix, rhs, x = random_block_system(rng)

    def always_break(method, m, r, cfg):
        raise linsolve.LinearSolveError("bicgstab breakdown (info=-10)")

    monkeypatch.setattr(linsolve, "_solve_iterative", always_break)
    sol = linsolve.solve(matrix, rhs, LinearSolverConfig(direct_limit=1))
    npt.assert_allclose(sol.x, x, rtol=1e-10)

    cfg = LinearSolverConfig(method="bicgstab")
    with pytest.raises(linsolve.LinearSolveError, match="breakdown"):
        linsolve.solve(matrix, rhs, cfg)


def test_post_check_rejects_bad_solutions(rng, monkeypatch):
    matrix, rhs, x = random_block_system(rng)
    monkeypatch.setattr(linsolve, "_solve_direct",
                        lambda m, r: np.full_like(r, 7.0))
    with pytest.raises(linsolve.LinearSolveError, match="post-check"):
        linsolve.solve(matrix, rhs, LinearSolverConfig(method="direct"))


def test_dump_system_roundtrip(tmp_path, rng):
    matrix, rhs, _ = random_block_system(rng, 4)
    linsolve.dump_system(tmp_path, matrix, rhs)
    back = scipy.io.mmread(tmp_path / "A.mtx").tocsr()
    npt.assert_allclose(back.toarray(), matrix.toarray())
    back_rhs = np.asarray(scipy.io.mmread(tmp_path / "R.mtx")).ravel()
    npt.assert_allclose(back_rhs, rhs)
