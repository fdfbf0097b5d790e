"""Physical parameters, dimensionless groups, and the exact classical flow.

The model is a harmonic oscillator of mass ``m`` and angular frequency
``omega``, subject to a velocity-proportional friction force ``m*beta*dq/dt``
and a stationary white-noise force of strength ``mu`` (so that the force
autocorrelation is ``mu * delta(t1 - t2)``).  Only the underdamped regime
``beta < 2*omega`` is supported.

Everything downstream works in the dimensionless phase-plane coordinates

    x = p / (hbar*alpha),   y = alpha*q,   alpha = sqrt(m*omega/hbar),

where ``p = m*qdot*exp(beta*t)`` is the canonical momentum of the explicitly
time-dependent generator of the motion and ``P = m*qdot`` is the physical
momentum.  The physical pair is ``(X, y) = (x*exp(-beta*t), y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveParameter, OverdampedUnsupported

__all__ = [
    "ModelParams",
    "DerivedParams",
    "PhasePoint",
    "AffineFlow",
    "TimeGenerator",
    "derive",
    "classical_flow",
    "time_generator",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the damped, noise-driven oscillator.

    Parameters
    ----------
    mass : float
        Oscillator mass, ``> 0``.
    omega : float
        Angular frequency, ``> 0``.
    beta : float
        Friction rate (inverse time), ``>= 0``.
    theta : float
        Bath temperature as an energy, ``k_B*T >= 0``.
    hbar : float
        Reduced Planck constant in the chosen unit system (default 1).
    mu : float, optional
        White-noise strength (force^2 * time).  When omitted it is pinned to
        the thermal-consistency value ``2*mass*beta*theta``, the choice for
        which the stationary state is Maxwell-Boltzmann.
    """

    mass: float
    omega: float
    beta: float = 0.0
    theta: float = 0.0
    hbar: float = 1.0
    mu: float | None = None

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise NonPositiveParameter(f"{name} must be positive and finite, got {v!r}")
        for name in ("beta", "theta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise NonPositiveParameter(f"{name} must be non-negative and finite, got {v!r}")
        if self.mu is not None and not (math.isfinite(self.mu) and self.mu >= 0):
            raise NonPositiveParameter(f"mu must be non-negative and finite, got {self.mu!r}")

    @property
    def noise_strength(self) -> float:
        """Effective white-noise strength, thermal-consistent unless overridden."""
        if self.mu is None:
            return 2.0 * self.mass * self.beta * self.theta
        return self.mu

    @property
    def thermal_consistency(self) -> bool:
        """True when the noise strength equals ``2*m*beta*theta`` exactly."""
        return self.noise_strength == 2.0 * self.mass * self.beta * self.theta

    @classmethod
    def from_dimensionless(cls, temperature_number: float, damping_ratio: float,
                           noise_number_free: float | None = None) -> "ModelParams":
        """Build params from the dimensionless groups used throughout.

        ``temperature_number = 2*theta/(hbar*omega)`` and
        ``damping_ratio = beta/omega`` with ``m = omega = hbar = 1``.  When
        ``noise_number_free`` is given, the noise strength is set to
        ``noise_number_free * m * omega**2 * hbar`` instead of the thermal
        value (the frictionless runs are parameterised this way).
        """
        mu = None if noise_number_free is None else float(noise_number_free)
        return cls(mass=1.0, omega=1.0, beta=float(damping_ratio),
                   theta=float(temperature_number) / 2.0, hbar=1.0, mu=mu)


@dataclass(frozen=True)
class DerivedParams:
    """Dimensionless groups derived from :class:`ModelParams`.

    Attributes
    ----------
    omega_damped : float
        Reduced oscillation frequency of the underdamped motion,
        ``sqrt(omega**2 - beta**2/4)``.
    eps : float
        ``sqrt(omega_damped/omega)``; rescales the dual integration
        variables of the averaged propagator.
    alpha : float
        Inverse length scale ``sqrt(m*omega/hbar)``.
    noise_number : float
        ``mu / (m * omega_damped**2 * hbar)``.
    temperature_number : float
        ``2*theta / (hbar*omega)`` (CLI flag ``--D``).
    damping_ratio : float
        ``beta/omega`` (CLI flag ``--B``).
    noise_number_free : float
        ``mu / (m * omega**2 * hbar)`` (CLI flag ``--No``); equals
        ``noise_number`` when ``beta = 0``.
    """

    params: ModelParams
    omega_damped: float
    eps: float
    alpha: float
    noise_number: float
    temperature_number: float
    damping_ratio: float
    noise_number_free: float

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def omega(self) -> float:
        return self.params.omega


def derive(params: ModelParams) -> DerivedParams:
    """Compute the dimensionless groups, rejecting non-underdamped input."""
    m, w, b, hbar = params.mass, params.omega, params.beta, params.hbar
    disc = w * w - b * b / 4.0
    if disc <= 0.0:
        raise OverdampedUnsupported(
            f"beta={b!r} >= 2*omega={2 * w!r}: only the underdamped regime is supported")
    omega_damped = math.sqrt(disc)
    mu = params.noise_strength
    return DerivedParams(
        params=params,
        omega_damped=omega_damped,
        eps=math.sqrt(omega_damped / w),
        alpha=math.sqrt(m * w / hbar),
        noise_number=mu / (m * omega_damped ** 2 * hbar),
        temperature_number=2.0 * params.theta / (hbar * w),
        damping_ratio=b / w,
        noise_number_free=mu / (m * w ** 2 * hbar),
    )


@dataclass(frozen=True)
class PhasePoint:
    """A point in the dimensionless canonical phase plane ``(x, y)``."""

    x: float
    y: float

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def angle(self) -> float:
        """Polar angle in [-pi, pi) with the convention ``x + i*y = R*exp(i*phi)``."""
        a = math.atan2(self.y, self.x)
        return -math.pi if a == math.pi else a

    def physical(self, beta: float, t: float) -> tuple[float, float]:
        """Physical pair ``(X, y) = (x*exp(-beta*t), y)`` at time ``t``."""
        return (self.x * math.exp(-beta * t), self.y)

    @classmethod
    def from_physical(cls, X: float, y: float, beta: float, t: float) -> "PhasePoint":
        return cls(X * math.exp(beta * t), y)


@dataclass(frozen=True)
class AffineFlow:
    """Linear classical flow of the damped oscillator from time ``start`` to ``end``.

    ``matrix`` maps the physical pair ``(X, y)`` at ``start`` to the physical
    pair at ``end``; its determinant is ``exp(-beta*tau)`` (phase-space
    contraction at the friction rate).  The canonical map, of unit
    determinant, differs only by the ``exp(beta*t)`` coordinate scalings at
    the two endpoints.
    """

    matrix: np.ndarray
    tau: float
    start: float
    beta: float

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def end(self) -> float:
        return self.start + self.tau

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def canonical(self) -> np.ndarray:
        """Map for the canonical pair ``(x, y)``; determinant 1."""
        scale_out = math.exp(self.beta * self.end)
        scale_in = math.exp(-self.beta * self.start)
        out = self.matrix.copy()
        out[0, :] *= scale_out
        out[:, 0] *= scale_in
        return out

    def apply_physical(self, X: float, y: float) -> tuple[float, float]:
        v = self.matrix @ (X, y)
        return (float(v[0]), float(v[1]))

    def apply_canonical(self, point: PhasePoint) -> PhasePoint:
        v = self.canonical @ (point.x, point.y)
        return PhasePoint(float(v[0]), float(v[1]))


def classical_flow(d: DerivedParams, tau: float, start: float = 0.0) -> AffineFlow:
    """Exact flow matrix of the unforced damped oscillator over a lag ``tau``.

    The physical-coordinate matrix is

        exp(-beta*tau/2) * [[cos(Od*tau) - g*sin(Od*tau), -(w/Od)*sin(Od*tau)],
                            [(w/Od)*sin(Od*tau),           cos(Od*tau) + g*sin(Od*tau)]]

    with ``Od = omega_damped`` and ``g = beta/(2*Od)``; it reduces to a pure
    rotation when ``beta = 0`` and to the identity at ``tau = 0``.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    od = d.omega_damped
    g = d.beta / (2.0 * od)
    c, s = math.cos(od * tau), math.sin(od * tau)
    damp = math.exp(-d.beta * tau / 2.0)
    mat = damp * np.array([[c - g * s, -(d.omega / od) * s],
                           [(d.omega / od) * s, c + g * s]])
    return AffineFlow(matrix=mat, tau=float(tau), start=float(start), beta=d.beta)


@dataclass(frozen=True)
class TimeGenerator:
    """Coefficients of the quadratic generator of the motion at one instant.

    The generator (not the energy once friction acts) is

        H_t(p, q) = p_squared*p**2 + q_squared*q**2 + q_linear*q

    in physical units, with ``p`` the canonical momentum.  Hamilton's
    equations for it reproduce ``m*qddot + m*beta*qdot + m*omega**2*q = F``.
    """

    p_squared: float
    q_squared: float
    q_linear: float
    t: float

    def value(self, p: float, q: float) -> float:
        return self.p_squared * p * p + self.q_squared * q * q + self.q_linear * q

    def hamilton_rhs(self, p: float, q: float) -> tuple[float, float]:
        """``(dp/dt, dq/dt)`` generated by this Hamiltonian."""
        return (-(2.0 * self.q_squared * q + self.q_linear), 2.0 * self.p_squared * p)


def time_generator(d: DerivedParams, t: float, force: float = 0.0) -> TimeGenerator:
    """Quadratic generator at time ``t`` with an instantaneous drive value."""
    m, w, b = d.params.mass, d.params.omega, d.params.beta
    decay = math.exp(-b * t)
    grow = math.exp(b * t)
    return TimeGenerator(
        p_squared=decay / (2.0 * m),
        q_squared=grow * m * w * w / 2.0,
        q_linear=-grow * force,
        t=float(t),
    )
