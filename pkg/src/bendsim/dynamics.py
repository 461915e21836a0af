"""Lumped-parameter dynamics of the reduced-order chain.

Equation of motion in standard manipulator form:

    M(q) qddot + (C(q, qdot) + D) qdot + K q = tau

with generalized inertia M, Coriolis/centrifugal matrix C, diagonal
viscous damping D, joint springs K = k_b * I restoring toward the rest
shape (q = 0), and a pressure-derived torque applied equally at every
joint. Gravity is absent: the actuator operates in a horizontal plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs

from .errors import InvalidInputError
from .kinematics import (
    JointState,
    LinkChain,
    LinkParams,
    com_jacobians,
)

__all__ = [
    "ActuatorGeometry",
    "DynamicsParams",
    "GeneralizedMatrices",
    "build_chain",
    "pressure_torque",
    "mass_matrix",
    "coriolis_matrix",
    "generalized_matrices",
    "eom_accel",
    "total_energy",
]


@dataclass(frozen=True)
class ActuatorGeometry:
    """Physical dimensions of the actuator body.

    Attributes:
        r1: outer radius (m).
        r2: inner bladder radius (m); the semi-annular pressurized
            cross-section has area pi*r2^2/2 with centroid 4*r2/(3*pi)
            off the flat face.
        wall: fiber-reinforced wall thickness (m).
        total_length: bending-section length (m).
        total_mass: bending-section mass (kg).
    """

    r1: float
    r2: float
    wall: float
    total_length: float
    total_mass: float

    def __post_init__(self):
        if not (0 < self.r2 < self.r1):
            raise InvalidInputError(
                f"need 0 < r2 < r1, got r2={self.r2}, r1={self.r1}"
            )
        if self.wall <= 0:
            raise InvalidInputError(f"wall must be > 0, got {self.wall}")
        if self.total_length <= 0:
            raise InvalidInputError(
                f"total_length must be > 0, got {self.total_length}"
            )
        if self.total_mass <= 0:
            raise InvalidInputError(
                f"total_mass must be > 0, got {self.total_mass}"
            )


@dataclass(frozen=True)
class DynamicsParams:
    """Identified lumped parameters: shared joint spring and per-joint damping.

    Attributes:
        k_b: torsional spring coefficient (N m/rad), shared by all joints.
        damping: per-joint viscous coefficients (N m s/rad), diagonal of D.
    """

    k_b: float
    damping: tuple[float, ...]

    def __post_init__(self):
        if not (math.isfinite(self.k_b) and self.k_b > 0):
            raise InvalidInputError(f"k_b must be > 0, got {self.k_b}")
        damping = tuple(float(d) for d in self.damping)
        if len(damping) < 1:
            raise InvalidInputError("damping needs at least one entry")
        if any(not math.isfinite(d) or d < 0 for d in damping):
            raise InvalidInputError("damping entries must be >= 0")
        object.__setattr__(self, "damping", damping)

    @staticmethod
    def uniform(k_b: float, damping: float, n: int) -> "DynamicsParams":
        """Same damping coefficient at every one of n joints."""
        return DynamicsParams(k_b=k_b, damping=(damping,) * n)


@dataclass(frozen=True)
class GeneralizedMatrices:
    """The assembled M, C, D, K of the equation of motion."""

    M: np.ndarray
    C: np.ndarray
    D: np.ndarray
    K: np.ndarray


def build_chain(
    geometry: ActuatorGeometry,
    n: int,
    reference=None,
) -> LinkChain:
    """Discretize the actuator body into an n-link chain.

    Lengths and rest offsets come from segmenting `reference` (a
    SensorFrame of the unactuated shape) when given, otherwise the chain
    is n equal straight links. Mass is distributed proportionally to
    link length and each link is treated as a uniform slender rod
    (COM at mid-length, inertia m*l^2/12 about the COM).
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if reference is not None:
        from .reconstruction import fit_reference_chain

        skeleton = fit_reference_chain(reference, n)
        lengths = skeleton.lengths
        offsets = skeleton.offsets
    else:
        lengths = np.full(n, geometry.total_length / n)
        offsets = np.zeros(n)
    masses = geometry.total_mass * lengths / lengths.sum()
    links = tuple(
        LinkParams(
            length=float(l),
            offset=float(off),
            mass=float(m),
            com_distance=float(l) / 2.0,
            inertia_com=float(m) * float(l) ** 2 / 12.0,
        )
        for l, off, m in zip(lengths, offsets, masses)
    )
    return LinkChain(links)


def pressure_torque(geometry: ActuatorGeometry, p: float) -> float:
    """Joint torque (N m) produced by bladder pressure p (Pa).

    The pressurized semi-annular section of area pi*r2^2/2 acts at the
    centroid lever arm 4*r2/(3*pi), so tau = p * A * d = (2/3) p r2^3.
    The same torque is applied at every joint. Negative pressures model
    suction.
    """
    if not math.isfinite(p):
        raise InvalidInputError("pressure must be finite")
    return (2.0 / 3.0) * p * geometry.r2**3


def mass_matrix(chain: LinkChain, q) -> np.ndarray:
    """Generalized inertia matrix M(q).

    Summed over links from the center-of-mass Jacobians:
    M = sum_i m_i Jv_i^T Jv_i + I_i Jw_i^T Jw_i. Symmetric positive
    definite for every configuration with positive link masses.
    """
    n = len(chain)
    M = np.zeros((n, n))
    masses = chain.masses
    inertias = chain.inertias_com
    for i, (jv, jw) in enumerate(com_jacobians(chain, q)):
        M += masses[i] * (jv.T @ jv) + inertias[i] * (jw.T @ jw)
    return M


class _ChainDynamics:
    """Precomputed chain constants for fast repeated M/C assembly.

    Uses absolute link headings phi = cumsum(q + offsets): the kinetic
    energy is (1/2) phidot^T H phidot with H = P o cos(phi_k - phi_m)
    + diag(I), where P collects the mass-weighted lever products. M, C
    follow by the constant lower-triangular map phi = L (q + offsets).
    The resulting C is the exact Christoffel-symbol Coriolis matrix of
    M(q).
    """

    def __init__(self, chain: LinkChain):
        n = len(chain)
        self.n = n
        self.offsets = chain.offsets
        lengths = chain.lengths
        coms = chain.com_distances
        masses = chain.masses
        # A[i, k]: lever of heading k in the COM position of link i.
        A = np.zeros((n, n))
        for i in range(n):
            A[i, :i] = lengths[:i]
            A[i, i] = coms[i]
        self.P = A.T @ (masses[:, None] * A)
        self.inertias = chain.inertias_com
        self.L = np.tril(np.ones((n, n)))
        self._diag = np.diag_indices(n)

    def mass_coriolis(self, q: np.ndarray, qdot: np.ndarray):
        """(M, C) at the given configuration and rates."""
        phi = np.cumsum(q + self.offsets)
        dphi = phi[:, None] - phi[None, :]
        H = self.P * np.cos(dphi)
        H[self._diag] += self.inertias
        M = self.L.T @ H @ self.L
        phidot = np.cumsum(qdot)
        Ct = (self.P * np.sin(dphi)) * phidot[None, :]
        C = self.L.T @ Ct @ self.L
        return M, C

    def mass(self, q: np.ndarray) -> np.ndarray:
        phi = np.cumsum(q + self.offsets)
        dphi = phi[:, None] - phi[None, :]
        H = self.P * np.cos(dphi)
        H[self._diag] += self.inertias
        return self.L.T @ H @ self.L


def coriolis_matrix(chain: LinkChain, q, qdot) -> np.ndarray:
    """Coriolis/centrifugal matrix C(q, qdot), exact Christoffel form.

    Built from the closed-form gradient of M in absolute-heading
    coordinates, so dM/dt - 2C is skew-symmetric by construction.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qdot = np.atleast_1d(np.asarray(qdot, dtype=float))
    if q.shape != (len(chain),) or qdot.shape != q.shape:
        raise InvalidInputError(
            f"expected q and qdot of length {len(chain)}"
        )
    _, C = _ChainDynamics(chain).mass_coriolis(q, qdot)
    return C


def generalized_matrices(
    chain: LinkChain, params: DynamicsParams, state: JointState
) -> GeneralizedMatrices:
    """Assemble all four matrices of the equation of motion."""
    _require_matching(chain, params)
    M, C = _ChainDynamics(chain).mass_coriolis(state.q, state.qdot)
    n = len(chain)
    return GeneralizedMatrices(
        M=M,
        C=C,
        D=np.diag(params.damping),
        K=params.k_b * np.eye(n),
    )


def _require_matching(chain: LinkChain, params: DynamicsParams):
    if len(params.damping) != len(chain):
        raise InvalidInputError(
            f"damping has {len(params.damping)} entries, chain has {len(chain)} links"
        )


# LAPACK Cholesky solve (?posv) for the SPD mass matrix; fetched once.
_POSV = get_lapack_funcs(("posv",), (np.empty((1, 1)), np.empty(1)))[0]


def _spd_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve M x = rhs by Cholesky factorization.

    Returns NaNs when the factorization fails (non-finite or non-PD M),
    so integration-loop callers surface it as divergence.
    """
    _, x, info = _POSV(M, rhs, lower=1)
    if info != 0:
        return np.full_like(rhs, np.nan)
    return x


def eom_accel(
    chain: LinkChain,
    params: DynamicsParams,
    geometry: ActuatorGeometry,
    state: JointState,
    p: float,
) -> np.ndarray:
    """Joint accelerations qddot under bladder pressure p (Pa).

    Solves M qddot = tau - (C + D) qdot - k_b q with a symmetric
    positive-definite factorization (no explicit inverse).
    """
    _require_matching(chain, params)
    tau = pressure_torque(geometry, p)
    dyn = _ChainDynamics(chain)
    acc = _accel(
        dyn, np.asarray(params.damping), params.k_b, tau, state.q, state.qdot
    )
    if not np.all(np.isfinite(acc)):
        raise InvalidInputError("mass matrix is not positive definite")
    return acc


def _accel(
    dyn: _ChainDynamics,
    damping: np.ndarray,
    k_b: float,
    tau: float,
    q: np.ndarray,
    qdot: np.ndarray,
) -> np.ndarray:
    M, C = dyn.mass_coriolis(q, qdot)
    rhs = tau - C @ qdot - damping * qdot - k_b * q
    return _spd_solve(M, rhs)


def total_energy(
    chain: LinkChain, params: DynamicsParams, state: JointState
) -> float:
    """Kinetic plus elastic energy (J): (1/2) qdot^T M qdot + (1/2) k_b |q|^2."""
    _require_matching(chain, params)
    if len(state) != len(chain):
        raise InvalidInputError(
            f"state has {len(state)} joints, chain has {len(chain)}"
        )
    M = _ChainDynamics(chain).mass(state.q)
    kinetic = 0.5 * state.qdot @ M @ state.qdot
    elastic = 0.5 * params.k_b * float(state.q @ state.q)
    return float(kinetic + elastic)
