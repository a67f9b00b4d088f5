"""Vehicle parameters, rigid-body state, input maps, and integration.

The vehicle is a quadrotor whose four thrust units tilt about their arms:
the plant input is the 4-vector of signed squared rotor speeds ``w`` with
``w_i = varpi_i * |varpi_i|``, and the four tilting angles enter through
the force and torque maps ``thrust_matrix`` / ``torque_matrix``.

Conventions:

* World frame: x-y horizontal, z up.  Euler angles are Z-Y-X
  (yaw ``psi``, pitch ``theta``, roll ``phi``), so the body-to-world
  rotation is ``R = Rz(psi) @ Ry(theta) @ Rx(phi)``.
* The Euler-rate map ``euler_rate_matrix`` is valid for ``|theta| <
  pi/2 - EPS_REP`` and raises :class:`RepresentationSingular` outside.
* All tilting angles are wrapped to ``[-pi, pi)`` when stored in
  :class:`TiltAngles`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from tiltrotor._core import kernels
from tiltrotor.errors import RepresentationSingular

# guard band around the pitch representation singularity [rad]
EPS_REP = 1e-3

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap an angle (or array of angles) to ``[-pi, pi)``."""
    return (np.asarray(a) + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Params:
    """Physical constants of the vehicle.

    Attributes
    ----------
    m : float
        Total mass [kg].
    g : float
        Gravitational acceleration [m/s^2].
    k_f : float
        Thrust coefficient [N s^2 / rad^2].
    k_m : float
        Drag (yaw moment) coefficient [N m s^2 / rad^2].
    arm_length : float
        Distance from the center of mass to each rotor [m].
    inertia : (3, 3) ndarray
        Body inertia matrix [kg m^2]; must be symmetric positive definite.
    omega_lo, omega_hi : float
        Rotor speed magnitude limits [rad/s], ``0 <= omega_lo < omega_hi``.
    spin_sign : (4,) ndarray
        Nominal rotor spin directions (+/-1).  The alternating pattern
        (-, +, -, +) makes equal-magnitude speeds produce upward net
        force and zero net drag torque.
    """

    m: float = 1.0
    g: float = 9.81
    k_f: float = 8.048e-6
    k_m: float = 2.423e-7
    arm_length: float = 0.3
    inertia: np.ndarray = field(default_factory=lambda: np.diag([0.01, 0.01, 0.02]))
    omega_lo: float = 15.0
    omega_hi: float | None = None
    spin_sign: np.ndarray = field(default_factory=lambda: np.array([-1.0, 1.0, -1.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        object.__setattr__(self, "spin_sign", np.asarray(self.spin_sign, dtype=float))
        for name in ("m", "g", "k_f", "k_m", "arm_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.omega_hi is None:
            object.__setattr__(self, "omega_hi", 1.5 * self.hover_speed)
        if self.inertia.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got {self.inertia.shape}")
        if not np.allclose(self.inertia, self.inertia.T, rtol=1e-12, atol=0.0):
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError("inertia must be positive definite")
        if not 0 <= self.omega_lo < self.omega_hi:
            raise ValueError(
                f"need 0 <= omega_lo < omega_hi, got ({self.omega_lo}, {self.omega_hi})"
            )
        if 4.0 * self.k_f * self.omega_hi**2 <= self.m * self.g:
            raise ValueError("rotor speed ceiling cannot lift the vehicle")
        if self.spin_sign.shape != (4,) or np.any(np.abs(self.spin_sign) != 1.0):
            raise ValueError("spin_sign must be four values of +/-1")
        object.__setattr__(self, "inertia_inv", np.linalg.inv(self.inertia))
        ii = self.inertia_inv
        pack = (
            float(self.m), float(self.g), float(self.k_f), float(self.k_m),
            float(self.arm_length),
            ii[0, 0], ii[0, 1], ii[0, 2],
            ii[1, 0], ii[1, 1], ii[1, 2],
            ii[2, 0], ii[2, 1], ii[2, 2],
        )
        object.__setattr__(self, "pack", pack)

    @property
    def hover_speed(self) -> float:
        """Rotor speed magnitude that balances gravity at level attitude."""
        return math.sqrt(self.m * self.g / (4.0 * self.k_f))

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        kw = {}
        for key in ("m", "g", "k_f", "k_m", "arm_length", "omega_lo", "omega_hi"):
            if key in d:
                kw[key] = float(d[key])
        if "inertia" in d:
            kw["inertia"] = np.asarray(d["inertia"], dtype=float).reshape(3, 3)
        if "spin_sign" in d:
            kw["spin_sign"] = np.asarray(d["spin_sign"], dtype=float)
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "Params":
        """Load parameters from a JSON configuration file.

        Recognized keys: ``m, g, k_f, k_m, arm_length, inertia`` (9 numbers,
        row-major), ``omega_lo, omega_hi, spin_sign``; missing keys keep
        their defaults.
        """
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


load_params = Params.from_json


@dataclass(frozen=True)
class State:
    """Rigid-body state: position, velocity, attitude, body rates.

    ``pos`` and ``vel`` are world-frame [m, m/s]; ``eta = (phi, theta,
    psi)`` are roll/pitch/yaw [rad]; ``omega = (p, q, r)`` are body
    angular rates [rad/s].
    """

    pos: np.ndarray = field(default_factory=lambda: np.zeros(3))
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("pos", "vel", "eta", "omega"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        """12-vector layout ``(x, y, z, vx, vy, vz, phi, theta, psi, p, q, r)``."""
        return np.concatenate([self.pos, self.vel, self.eta, self.omega])

    @classmethod
    def from_array(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        return cls(pos=x[0:3].copy(), vel=x[3:6].copy(), eta=x[6:9].copy(), omega=x[9:12].copy())


@dataclass(frozen=True)
class TiltAngles:
    """The four tilting angles, wrapped to ``[-pi, pi)``."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.shape != (4,):
            raise ValueError("alpha must be a 4-vector")
        if not np.all(np.isfinite(a)):
            raise ValueError("tilting angles must be finite")
        object.__setattr__(self, "alpha", wrap_angle(a))

    def __iter__(self):
        return iter(self.alpha)


def _alpha4(alpha) -> tuple:
    if isinstance(alpha, TiltAngles):
        a = alpha.alpha
    else:
        a = np.asarray(alpha, dtype=float)
    return (float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def speeds_to_input(varpi) -> np.ndarray:
    """Signed squared speeds ``w_i = varpi_i * |varpi_i|``."""
    v = np.asarray(varpi, dtype=float)
    return v * np.abs(v)


def input_to_speeds(w) -> np.ndarray:
    """Inverse of :func:`speeds_to_input`: ``varpi_i = sign(w_i) sqrt(|w_i|)``."""
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.sqrt(np.abs(w))


def thrust_matrix(alpha, params: Params) -> np.ndarray:
    """3x4 map from signed squared rotor speeds to body-frame force."""
    a1, a2, a3, a4 = _alpha4(alpha)
    return np.asarray(kernels.thrust_entries(a1, a2, a3, a4, params.k_f)).reshape(3, 4)


def torque_matrix(alpha, params: Params) -> np.ndarray:
    """3x4 map from signed squared rotor speeds to body-frame torque."""
    a1, a2, a3, a4 = _alpha4(alpha)
    return np.asarray(
        kernels.torque_entries(a1, a2, a3, a4, params.k_f, params.k_m, params.arm_length)
    ).reshape(3, 4)


def rotation_matrix(eta) -> np.ndarray:
    """Body-to-world rotation for Z-Y-X Euler angles ``eta = (phi, theta, psi)``."""
    phi, theta, psi = (float(v) for v in eta)
    return np.asarray(kernels.rotation_entries(phi, theta, psi)).reshape(3, 3)


def check_pitch(theta: float) -> None:
    """Raise :class:`RepresentationSingular` when pitch is inside the guard band."""
    if abs(theta) >= math.pi / 2 - EPS_REP:
        raise RepresentationSingular(theta)


def euler_rate_matrix(eta) -> np.ndarray:
    """Matrix ``T`` with ``eta_dot = T @ omega_body``; requires ``|theta| < pi/2``."""
    phi, theta = float(eta[0]), float(eta[1])
    check_pitch(theta)
    return np.asarray(kernels.euler_rate_entries(phi, theta)).reshape(3, 3)


def state_derivative(state: State, alpha, w, params: Params) -> np.ndarray:
    """Time derivative of the state as a 12-vector.

    ``w`` is the signed squared rotor-speed input.  Raises
    :class:`RepresentationSingular` inside the pitch guard band.
    """
    check_pitch(float(state.eta[1]))
    out = kernels.state_derivative(
        tuple(state.as_array()), _alpha4(alpha), tuple(np.asarray(w, dtype=float)), params.pack
    )
    return np.asarray(out)


def integrate_step(
    state: State,
    alpha_of_t: Callable[[float], Sequence[float]],
    varpi_of_t: Callable[[float], Sequence[float]],
    t: float,
    dt: float,
    params: Params,
) -> State:
    """Advance the plant one fixed step with classical 4th-order Runge-Kutta.

    ``alpha_of_t`` and ``varpi_of_t`` are evaluated at the three stage
    times ``t``, ``t + dt/2``, ``t + dt``; pass constant-returning
    callables for a zero-order hold.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    check_pitch(float(state.eta[1]))
    a0 = _alpha4(alpha_of_t(t))
    am = _alpha4(alpha_of_t(t + 0.5 * dt))
    a1 = _alpha4(alpha_of_t(t + dt))
    w0 = tuple(speeds_to_input(varpi_of_t(t)))
    wm = tuple(speeds_to_input(varpi_of_t(t + 0.5 * dt)))
    w1 = tuple(speeds_to_input(varpi_of_t(t + dt)))
    out = kernels.rk4_step(tuple(state.as_array()), a0, am, a1, w0, wm, w1, float(dt), params.pack)
    return State.from_array(out)


def hover_speeds(params: Params) -> np.ndarray:
    """Signed rotor speeds that balance gravity at level attitude, zero tilt."""
    return params.spin_sign * params.hover_speed
