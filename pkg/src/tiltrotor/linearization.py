"""Decoupling matrix of the (roll, pitch, yaw, altitude) loop and its determinant.

The controlled outputs are ``y = (phi, theta, psi, Z)``.  Differentiating
twice gives ``y'' = b + Delta @ w`` with

* rows 1-3 of ``Delta`` equal to ``T(eta) @ inv(I_B) @ torque_matrix(alpha)``,
* row 4 equal to ``(1/m) * (third row of R(eta)) @ thrust_matrix(alpha)``,
* ``b = (Tdot(eta, eta_dot) @ omega_body, -g)``.

Because the third row of ``R`` and the matrix ``T`` are yaw-free, the
determinant splits into attitude and tilt factors::

    m * cos(theta) * det(I_B) * det(Delta)
        = -sin(theta) * A + sin(phi) cos(theta) * B + cos(phi) cos(theta) * C

where ``A``, ``B``, ``C`` depend on the tilting angles only (see
:func:`det_decomposition`).  The zero set of the right-hand side is the
set of attitudes at which feedback linearization breaks down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tiltrotor._core import kernels
from tiltrotor.errors import RepresentationSingular  # noqa: F401  (re-exported for callers)
from tiltrotor.model import Params, State, _alpha4, check_pitch

# Delta is declared singular when |det| < EPS_SING * scale**4 with scale the
# geometric mean of its row norms.  Ratios near 1 mean well-separated rows;
# healthy closed-loop runs stay above ~0.5 while runs that lose control
# authority fall below 1e-4 on their way to rank deficiency.
EPS_SING = 1e-4


@dataclass(frozen=True)
class DetCoefficients:
    """Tilt-dependent coefficients of the determinant decomposition.

    ``D`` holds the four 3x3 minors of the torque map (column ``j``
    removed); ``A``, ``B``, ``C`` are the cofactor sums of the three
    thrust-map rows against those minors.
    """

    A: float
    B: float
    C: float
    D: np.ndarray

    @property
    def abc(self) -> tuple:
        return (self.A, self.B, self.C)


@dataclass(frozen=True)
class DecouplingMatrix:
    """4x4 input-to-output-acceleration map with its determinant and scale."""

    delta: np.ndarray
    det: float
    scale: float

    @property
    def ratio(self) -> float:
        """Scale-free singularity measure ``|det| / scale**4``."""
        if self.scale == 0.0:
            return 0.0
        return abs(self.det) / self.scale**4

    def is_singular(self, eps: float = EPS_SING) -> bool:
        return self.det == 0.0 or abs(self.det) < eps * self.scale**4


def decoupling_matrix(eta, alpha, params: Params) -> DecouplingMatrix:
    """Assemble the decoupling matrix at attitude ``eta`` and tilt ``alpha``.

    Depends only on ``(phi, theta)`` and ``alpha``; raises
    :class:`RepresentationSingular` inside the pitch guard band.
    """
    phi, theta = float(eta[0]), float(eta[1])
    check_pitch(theta)
    d, _, det, scale = kernels.decoupling(phi, theta, 0.0, 0.0, 0.0, _alpha4(alpha), params.pack)
    return DecouplingMatrix(delta=np.asarray(d).reshape(4, 4), det=float(det), scale=float(scale))


def drift_vector(state: State, params: Params) -> np.ndarray:
    """Drift ``b`` of the output dynamics: ``y'' = b + Delta @ w``.

    ``b[0:3] = Tdot(eta, eta_dot) @ omega_body`` with ``eta_dot = T @
    omega_body``, and ``b[3] = -g``.
    """
    phi, theta = float(state.eta[0]), float(state.eta[1])
    check_pitch(theta)
    p, q, r = (float(v) for v in state.omega)
    _, b, _, _ = kernels.decoupling(phi, theta, p, q, r, (0.0, 0.0, 0.0, 0.0), params.pack)
    return np.asarray(b)


def det_decomposition(alpha, params: Params) -> DetCoefficients:
    """Tilt-only coefficients ``(A, B, C, D)`` of the determinant identity.

    For all attitudes with ``|theta| < pi/2``::

        det(Delta) = (-sin(theta) * A + sin(phi) cos(theta) * B
                      + cos(phi) cos(theta) * C) / (m * cos(theta) * det(I_B))
    """
    a1, a2, a3, a4 = _alpha4(alpha)
    A, B, C, d1, d2, d3, d4 = kernels.det_coeffs(
        a1, a2, a3, a4, params.k_f, params.k_m, params.arm_length
    )
    return DetCoefficients(A=A, B=B, C=C, D=np.array([d1, d2, d3, d4]))


def normalized_det(phi, theta, coeffs: DetCoefficients):
    """Attitude factor ``g = -sin(theta) A + sin(phi) cos(theta) B + cos(phi) cos(theta) C``.

    Continuous on the whole ``(phi, theta)`` plane and proportional to
    ``det(Delta)`` on ``|theta| < pi/2``; accepts scalars or arrays.
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ct = np.cos(theta)
    return -np.sin(theta) * coeffs.A + np.sin(phi) * ct * coeffs.B + np.cos(phi) * ct * coeffs.C


def abc_scale(params: Params) -> float:
    """Natural magnitude of the ``A``, ``B``, ``C`` coefficients.

    The determinant of one thrust row stacked on the three torque rows
    scales as ``k_f * (arm * k_f + k_m)**3``; used for scale-aware
    tolerances on the coefficients.
    """
    return params.k_f * (params.arm_length * params.k_f + params.k_m) ** 3
