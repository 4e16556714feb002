"""Constitutive models: compressible neo-Hookean and small-strain linear
elasticity, both exposing the same surface to the assembly code.

A material answers three questions about a state given by the displacement
gradient (or the deformation gradient reconstructed from it):

- ``stress_state``: deformation gradient and second Piola-Kirchhoff stress,
  so the face flux is ``(F @ S) @ N``
- ``face_linearisation``: the geometric vector ``w`` and the stack of
  coupling tensors ``T`` that linearise the flux: a perturbation ``B`` of
  the displacement gradient changes the flux by ``B @ w + sum_d T[d] @ (B @ e_d)``
- plain tensor-level building blocks (``second_piola``, ``elasticity_tensor``
  and friends) used by tests and by the closed-form/contraction cross-checks

The linear model keeps the geometry frozen (F = I, w = 0) so the coupled
solver reduces to one exact small-strain solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensors import IDENTITY, IDENTITY4_SYM, outer


@dataclass(frozen=True)
class Lame:
    mu: float
    lam: float


def lame_from_E_nu(E: float, nu: float, regime: str = "plane_strain") -> Lame:
    """Lame parameters from Young's modulus and Poisson ratio.

    ``regime`` selects the 2-D reduction: plane strain keeps the 3-D lambda,
    plane stress substitutes the usual reduced value.
    """
    mu = E / (2.0 * (1.0 + nu))
    if regime == "plane_strain":
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    elif regime == "plane_stress":
        lam = E * nu / ((1.0 + nu) * (1.0 - nu))
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return Lame(mu=mu, lam=lam)


class InvertedElementError(RuntimeError):
    """Deformation gradient with non-positive determinant."""

    def __init__(self, index: int, det_f: float, label: str = "cell"):
        self.index = index
        self.det_f = det_f
        super().__init__(f"inverted element: det(F) = {det_f:.6e} at {label} {index}")


def _check_positive_jacobian(det_f: np.ndarray, label: str) -> None:
    det_f = np.atleast_1d(det_f)
    if det_f.size == 0:
        return
    bad = int(np.argmin(det_f))
    if det_f[bad] <= 0.0:
        raise InvertedElementError(bad, float(det_f[bad]), label)


class NeoHookean:
    """Compressible neo-Hookean solid.

    S = mu (I - C^-1) + lam ln(J) C^-1, with C = F^T F and J = det F.
    """

    linear = False

    def __init__(self, lame: Lame):
        self.mu = lame.mu
        self.lam = lame.lam

    # -- tensor-level pieces -------------------------------------------

    def second_piola(self, c: np.ndarray) -> np.ndarray:
        c_inv = np.linalg.inv(c)
        log_j = 0.5 * np.log(np.linalg.det(c))
        return (self.mu * (IDENTITY - c_inv)
                + self.lam * log_j[..., None, None] * c_inv)

    def elasticity_tensor(self, c: np.ndarray) -> np.ndarray:
        """Material elasticity dS/dE as a fourth-order tensor."""
        c_inv = np.linalg.inv(c)
        log_j = 0.5 * np.log(np.linalg.det(c))
        term_vol = self.lam * np.einsum("...ij,...kl->...ijkl", c_inv, c_inv)
        j_sym = 0.5 * (np.einsum("...ik,...jl->...ijkl", c_inv, c_inv)
                       + np.einsum("...il,...jk->...ijkl", c_inv, c_inv))
        coef = 2.0 * (self.mu - self.lam * log_j)
        return term_vol + coef[..., None, None, None, None] * j_sym

    def transformed_elasticity(self, f: np.ndarray) -> np.ndarray:
        """Push the material tangent to mixed form: M_aJdL = F_aI C_IJKL F_dK."""
        c = np.einsum("...ki,...kj->...ij", f, f)
        cc = self.elasticity_tensor(c)
        return np.einsum("...aI,...IJKL,...dK->...aJdL", f, cc, f)

    def first_piola(self, grad_u: np.ndarray) -> np.ndarray:
        f = IDENTITY + grad_u
        c = np.einsum("...ki,...kj->...ij", f, f)
        return f @ self.second_piola(c)

    def dP_apply(self, grad_u: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Directional derivative of the first Piola stress along a gradient
        perturbation ``a``: a @ S plus the material-tangent contraction."""
        f = IDENTITY + grad_u
        c = np.einsum("...ki,...kj->...ij", f, f)
        s = self.second_piola(c)
        m = self.transformed_elasticity(f)
        return a @ s + np.einsum("...aJdL,...dL->...aJ", m, a)

    # -- solver surface ------------------------------------------------

    def stress_state(self, grad_u: np.ndarray, label: str = "cell"):
        f = IDENTITY + grad_u
        det_f = np.linalg.det(f)
        _check_positive_jacobian(det_f, label)
        c = np.einsum("...ki,...kj->...ij", f, f)
        return f, self.second_piola(c)

    def face_linearisation(self, f: np.ndarray, s: np.ndarray, n: np.ndarray):
        """Geometric vector and coupling-tensor stack for a face state.

        Returns ``w = S @ N`` and ``T`` with ``T[..., d, :, :]`` the 3x3
        tensor tied to direction d, in the closed form

            T_d = lam (a x A e_d) + (mu - lam ln J) (b_d I + A e_d x a)

        with A = F^-T, a = A N and b = C^-1 N.  The generic route contracts
        the transformed tangent with N; the property tests hold the two
        routes against each other.
        """
        w = np.einsum("...ij,...j->...i", s, n)
        a_mat = np.linalg.inv(np.swapaxes(f, -1, -2))        # F^-T
        a = np.einsum("...ij,...j->...i", a_mat, n)
        b = np.einsum("...ji,...j->...i", a_mat, a)          # F^-1 a = C^-1 N
        log_j = np.log(np.linalg.det(f))
        coef = (self.mu - self.lam * log_j)[..., None, None, None]
        t = (self.lam * np.einsum("...i,...jd->...dij", a, a_mat)
             + coef * (np.einsum("...d,ij->...dij", b, IDENTITY)
                       + np.einsum("...id,...j->...dij", a_mat, a)))
        return w, t

    def t_tensor(self, f: np.ndarray, n: np.ndarray, d: int) -> np.ndarray:
        """Row-d traction-coupling tensor in closed form.

        T^d_aL contracts the transformed tangent with the face normal over
        its second slot while fixing the third slot at d.  With A = F C^-1,
        a = A N, b = C^-1 N this collapses to

            T^d = lam (a x A_d) + (mu - lam ln J) (e_d x b + a_d A)

        because A F^T = I exactly.
        """
        c = np.einsum("...ki,...kj->...ij", f, f)
        a_mat = f @ np.linalg.inv(c)
        a = np.einsum("...ij,...j->...i", a_mat, n)
        b = np.einsum("...ji,...j->...i", a_mat, a)
        log_j = np.log(np.linalg.det(f))
        e_d = IDENTITY[d]
        coef = (self.mu - self.lam * log_j)[..., None, None]
        return (self.lam * outer(a, a_mat[..., d, :])
                + coef * (outer(np.broadcast_to(e_d, a.shape), b)
                          + a[..., d, None, None] * a_mat))

    def t_tensor_contracted(self, f: np.ndarray, n: np.ndarray, d: int) -> np.ndarray:
        """Same tensor by brute contraction of the transformed tangent."""
        m = self.transformed_elasticity(f)
        return np.einsum("...aJdL,...J->...adL", m, n)[..., d, :]


class LinearElastic:
    """Small-strain Hookean solid with frozen geometry.

    The stress is sigma = mu (g + g^T) + lam tr(g) I for the displacement
    gradient g; ``stress_state`` reports F = I so flux and linearisation
    carry no geometric terms and the coupled solve is exact in one go.
    """

    linear = True

    def __init__(self, lame: Lame):
        self.mu = lame.mu
        self.lam = lame.lam

    def stress(self, grad_u: np.ndarray) -> np.ndarray:
        tr = np.trace(grad_u, axis1=-2, axis2=-1)
        return (self.mu * (grad_u + np.swapaxes(grad_u, -1, -2))
                + self.lam * tr[..., None, None] * IDENTITY)

    def stress_state(self, grad_u: np.ndarray, label: str = "cell"):
        f = np.broadcast_to(IDENTITY, grad_u.shape)
        return f, self.stress(grad_u)

    def face_linearisation(self, f: np.ndarray, s: np.ndarray, n: np.ndarray):
        w = np.zeros(f.shape[:-2] + (3,))
        t = (self.lam * np.einsum("...i,jd->...dij", n, IDENTITY)
             + self.mu * (np.einsum("...d,ij->...dij", n, IDENTITY)
                          + np.einsum("id,...j->...dij", IDENTITY, n)))
        return w, np.broadcast_to(t, f.shape[:-2] + (3, 3, 3))

    def first_piola(self, grad_u: np.ndarray) -> np.ndarray:
        return self.stress(grad_u)

    def dP_apply(self, grad_u: np.ndarray, a: np.ndarray) -> np.ndarray:
        return self.stress(a)
