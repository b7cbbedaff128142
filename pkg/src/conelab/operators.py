"""The integration operator S and its discrete normal operator S*S.

S maps u to its running integral, (S u)(x) = integral of u over (0, x).
For a piecewise-constant u the image is continuous piecewise linear with
node values

    (S u)(k/n) = width * (u_1 + ... + u_k),

so everything about S on the mesh is exact: norms, inner products and
the Gram matrix G with G[i, j] = integral of (S e_i)(S e_j) are closed
forms in the cell width (all integrands are polynomials of degree <= 2
per cell).  The adjoint pairing uses (S*S u)_i = (G u)_i / width, the
exact cell average of x -> integral of (S u) over (x, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import GridFunction, Mesh, _check_same_mesh


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge within the iteration cap."""


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function given by its n+1 node values."""

    mesh: Mesh
    node_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.node_values, dtype=float, copy=True).reshape(-1)
        if vals.shape != (self.mesh.n + 1,):
            raise ValueError(
                f"expected {self.mesh.n + 1} node values, got shape "
                f"{np.shape(self.node_values)}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "node_values", vals)


def apply_S(u: GridFunction) -> PiecewiseLinear:
    """Running integral of a step function; node k holds width * sum(u_1..u_k)."""
    nodes = np.concatenate(([0.0], u.mesh.width * np.cumsum(u.values)))
    return PiecewiseLinear(u.mesh, nodes)


def norm_S_sq(u: GridFunction) -> float:
    """Exact squared L^2 norm of S u.

    On each cell S u runs linearly from a to b, and the integral of its
    square over the cell is width * (a^2 + a*b + b^2) / 3.
    """
    nodes = apply_S(u).node_values
    a, b = nodes[:-1], nodes[1:]
    return float(u.mesh.width / 3.0 * np.sum(a * a + a * b + b * b))


def pl_l2_inner(f: PiecewiseLinear, g: PiecewiseLinear) -> float:
    """Exact L^2 inner product of two piecewise-linear functions.

    Per cell with endpoint values (a1, a2) and (b1, b2) the product
    integrates to width * (2*a1*b1 + a1*b2 + a2*b1 + 2*a2*b2) / 6.
    """
    if f.mesh != g.mesh:
        raise ValueError("piecewise-linear functions live on different meshes")
    a1, a2 = f.node_values[:-1], f.node_values[1:]
    b1, b2 = g.node_values[:-1], g.node_values[1:]
    return float(
        f.mesh.width / 6.0 * np.sum(2 * a1 * b1 + a1 * b2 + a2 * b1 + 2 * a2 * b2)
    )


@lru_cache(maxsize=32)
def _gram(n: int) -> np.ndarray:
    # G[i, j] = integral of (S e_i)(S e_j) with 1-based cells i, j:
    #   i == j: w^3/3 + w^2 (1 - i w)
    #   i <  j: w^2 (w/2 + 1 - j w)
    w = 1.0 / n
    idx = np.arange(1, n + 1)
    j = np.maximum.outer(idx, idx)
    G = w * w * (w / 2.0 + 1.0 - j * w)
    np.fill_diagonal(G, w**3 / 3.0 + w * w * (1.0 - idx * w))
    G.setflags(write=False)
    return G


def gram_matrix(mesh: Mesh) -> np.ndarray:
    """Gram matrix of the images S e_i of the cell indicators (read-only)."""
    return _gram(mesh.n)


def apply_SstarS(u: GridFunction) -> GridFunction:
    """Cell averages of S*S u, computed exactly as (G u) / width."""
    w = gram_matrix(u.mesh) @ u.values
    return GridFunction(u.mesh, w / u.mesh.width)


def op_norm_SstarS(
    mesh: Mesh, tol: float = 1e-12, max_iterations: int = 100000
) -> float:
    """Largest eigenvalue of S*S on the mesh, by power iteration.

    Starts from the constant function, normalizes in L^2, and stops when
    the Rayleigh quotient changes by less than tol.  The limit increases
    with refinement toward 4/pi^2, so 2*lambda < 1 always holds; that
    bound is what lets the solvers reduce the box subproblem to sign
    patterns, and it is re-checked here at runtime.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = gram_matrix(mesh)
    width = mesh.width
    u = np.ones(mesh.n)
    lam = 0.0
    for _ in range(max_iterations):
        v = (G @ u) / width
        norm = np.sqrt(width * np.dot(v, v))
        u = v / norm
        Au = (G @ u) / width
        lam_new = np.dot(Au, u) / np.dot(u, u)
        if abs(lam_new - lam) < tol:
            if not 2.0 * lam_new < 1.0:
                raise RuntimeError(
                    f"largest eigenvalue {lam_new} violates 2*lambda < 1"
                )
            return float(lam_new)
        lam = lam_new
    raise PowerIterationError(
        f"power iteration did not converge in {max_iterations} iterations"
    )
