"""Gaussian states and the noise-averaged propagator in the phase plane.

Every state handled here is a (possibly degenerate) bivariate Gaussian in the
dimensionless canonical coordinates ``(x, y)``.  A :class:`Gaussian2D` with
``log_mass = 0`` is a unit-mass phase-space density: it integrates to 1 under
``dx dy``, which is the dimensionless form of the trace normalisation of a
quantum state (``dp dq = hbar dx dy`` and the density carries the ``1/hbar``).

Averaging the deterministic flow over realisations of the white-noise force
turns the delta-function propagator of the quadratic generator into a Gaussian
kernel.  Its covariance is assembled from three elementary damped-trig
integrals with closed-form antiderivatives; adaptive quadrature of the same
integrals is kept as a test oracle only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RequiresFriction
from .model import AffineFlow, DerivedParams, classical_flow

__all__ = [
    "Gaussian2D",
    "NoiseQuadraticForm",
    "PropagatorKernel",
    "ground_state",
    "coherent_state",
    "noise_form",
    "noise_form_longtime",
    "propagator",
    "evolve",
    "thermal_state",
    "state_overlap",
]

_DEGENERATE_TOL = 1e-300


@dataclass(frozen=True)
class Gaussian2D:
    """Bivariate Gaussian phase-space density in canonical ``(x, y)``.

    Parameters
    ----------
    mean : ndarray, shape (2,)
    cov : ndarray, shape (2, 2)
        Symmetric positive-semidefinite; an exactly singular covariance is
        allowed and flagged (delta-like direction).
    log_mass : float
        Log of the total integral under ``dx dy``.  Unit mass (``0.0``)
        corresponds to a trace-one state.
    """

    mean: np.ndarray
    cov: np.ndarray
    log_mass: float = 0.0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValueError("mean and cov must be finite")
        asym = abs(cov[0, 1] - cov[1, 0])
        scale = max(1.0, float(np.max(np.abs(cov))))
        if asym > 1e-12 * scale:
            raise ValueError(f"covariance not symmetric (asymmetry {asym:.3e})")
        cov = (cov + cov.T) / 2.0
        evals = np.linalg.eigvalsh(cov)
        if evals[0] < -1e-12 * scale:
            raise ValueError(f"covariance not positive semidefinite (min eig {evals[0]:.3e})")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def mass(self) -> float:
        return math.exp(self.log_mass)

    @property
    def is_degenerate(self) -> bool:
        return float(np.linalg.det(self.cov)) <= _DEGENERATE_TOL

    def density(self, x, y):
        """Density value(s) at ``(x, y)``; requires a non-degenerate covariance."""
        det = float(np.linalg.det(self.cov))
        if det <= _DEGENERATE_TOL:
            raise ValueError("degenerate covariance has no pointwise density")
        inv = np.linalg.inv(self.cov)
        dx = np.asarray(x, dtype=float) - self.mean[0]
        dy = np.asarray(y, dtype=float) - self.mean[1]
        quad = inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dy + inv[1, 1] * dy * dy
        return self.mass * np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))

    def physical(self, beta: float, t: float) -> "Gaussian2D":
        """The same density expressed in the physical pair ``(X, y)``.

        ``X = x*exp(-beta*t)``, so the x-row/column shrink and the mass is
        unchanged (the Jacobian is absorbed by the amplitude).
        """
        s = math.exp(-beta * t)
        scale = np.array([[s, 0.0], [0.0, 1.0]])
        return Gaussian2D(scale @ self.mean, scale @ self.cov @ scale, self.log_mass)


def ground_state() -> Gaussian2D:
    """Minimum-uncertainty isotropic state: mean 0, covariance I/2, mass 1."""
    return Gaussian2D(np.zeros(2), 0.5 * np.eye(2))


def coherent_state(x0: float, y0: float) -> Gaussian2D:
    """Displaced minimum-uncertainty state centred at ``(x0, y0)``."""
    return Gaussian2D(np.array([x0, y0], dtype=float), 0.5 * np.eye(2))


@dataclass(frozen=True)
class NoiseQuadraticForm:
    """Accumulated-noise quadratic form over the dual variables ``(a, b)``.

    The ensemble average over white-noise histories contributes
    ``exp(-0.5 * (a, b) Q (a, b)^T)`` to the Fourier representation of the
    propagator; ``Q`` is positive semidefinite and vanishes at ``t = 0``.
    """

    matrix: np.ndarray
    elapsed: float

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float).reshape(2, 2)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def _damped_trig_integrals(c: float, T: float) -> tuple[float, float, float]:
    """Closed forms of ``int_0^T exp(-c*u) * {sin^2 u, sin u cos u, cos^2 u} du``."""
    if T == 0.0:
        return 0.0, 0.0, 0.0
    if c == 0.0:
        half_s2 = math.sin(T) * math.cos(T)
        return (T - half_s2) / 2.0, math.sin(T) ** 2 / 2.0, (T + half_s2) / 2.0
    e = math.exp(-c * T)
    c2t, s2t = math.cos(2.0 * T), math.sin(2.0 * T)
    base = -math.expm1(-c * T) / c
    cos_part = (c + e * (2.0 * s2t - c * c2t)) / (c * c + 4.0)
    sin_part = (2.0 - e * (2.0 * c2t + c * s2t)) / (c * c + 4.0)
    return (base - cos_part) / 2.0, sin_part / 2.0, (base + cos_part) / 2.0


def noise_form(d: DerivedParams, t: float) -> NoiseQuadraticForm:
    """Noise quadratic form accumulated between 0 and ``t``.

    The integrand couples ``a`` to the position response ``sin`` and ``b`` to
    the momentum response ``cos - g*sin`` (``g = beta/(2*omega_damped)``),
    each damped by ``exp(-beta * lag)``.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    od = d.omega_damped
    c = d.beta / od
    g = c / 2.0
    T = od * t
    i_ss, i_sc, i_cc = _damped_trig_integrals(c, T)
    n = d.noise_number
    q_aa = n * i_ss
    q_ab = n * (i_sc - g * i_ss)
    q_bb = n * (i_cc - 2.0 * g * i_sc + g * g * i_ss)
    return NoiseQuadraticForm(np.array([[q_aa, q_ab], [q_ab, q_bb]]), elapsed=float(t))


def noise_form_longtime(d: DerivedParams) -> NoiseQuadraticForm:
    """Stationary limit of :func:`noise_form` (friction must be positive)."""
    if d.beta == 0.0:
        raise RequiresFriction("the noise form has no finite long-time limit at beta = 0")
    od, w, b, n = d.omega_damped, d.omega, d.beta, d.noise_number
    q = np.diag([n * od ** 3 / (2.0 * w * w * b), n * od / (2.0 * b)])
    return NoiseQuadraticForm(q, elapsed=math.inf)


@dataclass(frozen=True)
class PropagatorKernel:
    """Noise-averaged Gaussian transition kernel from ``start`` to ``end``.

    Acting on a state: the mean moves with the canonical flow and the
    canonical covariance picks up ``cov`` additively.  ``degenerate`` marks
    the delta-kernel limit at zero lag.
    """

    flow: AffineFlow
    cov: np.ndarray
    cov_physical: np.ndarray
    degenerate: bool

    @property
    def start(self) -> float:
        return self.flow.start

    @property
    def end(self) -> float:
        return self.flow.end


def propagator(d: DerivedParams, t: float, start: float = 0.0) -> PropagatorKernel:
    """Transition kernel of the noise-averaged dynamics from ``start`` to ``t``.

    The dual-variable form is integrated out exactly: in the physical pair
    the added covariance is ``[[eps^2*Q_bb, Q_ab], [Q_ab, Q_aa/eps^2]]``, and
    the canonical version rescales the x-row/column by ``exp(beta*t)``.
    Stationarity of the driving noise makes the kernel depend on ``start``
    only through those endpoint scalings.
    """
    if t < start:
        raise ValueError(f"t={t!r} must be >= start={start!r}")
    tau = t - start
    flow = classical_flow(d, tau, start=start)
    q = noise_form(d, tau).matrix
    e2 = d.eps ** 2
    cov_phys = np.array([[e2 * q[1, 1], q[0, 1]],
                         [q[0, 1], q[0, 0] / e2]])
    s = math.exp(d.beta * t)
    scale = np.array([[s, 0.0], [0.0, 1.0]])
    cov_can = scale @ cov_phys @ scale
    return PropagatorKernel(
        flow=flow,
        cov=cov_can,
        cov_physical=cov_phys,
        degenerate=bool(np.all(q == 0.0)),
    )


def evolve(state: Gaussian2D, d: DerivedParams, t: float, start: float = 0.0) -> Gaussian2D:
    """Push a Gaussian state through the averaged dynamics; mass is preserved."""
    kern = propagator(d, t, start=start)
    m_can = kern.flow.canonical
    mean = m_can @ state.mean
    cov = m_can @ state.cov @ m_can.T + kern.cov
    return Gaussian2D(mean, cov, state.log_mass)


def thermal_state(d: DerivedParams, t: float) -> Gaussian2D:
    """Long-time (Maxwell-Boltzmann) state at time ``t``, canonical coordinates.

    Unit mass; canonical covariance ``diag((D/2)*exp(2*beta*t), D/2)`` with
    ``D = temperature_number``, i.e. both physical marginals have variance
    ``D/2``.  Requires friction: without it the oscillator never thermalises.
    """
    if d.beta == 0.0:
        raise RequiresFriction("thermalisation requires beta > 0")
    half_d = d.temperature_number / 2.0
    grow = math.exp(2.0 * d.beta * t)
    return Gaussian2D(np.zeros(2), np.diag([half_d * grow, half_d]))


def state_overlap(a: Gaussian2D, b: Gaussian2D) -> float:
    """Quantum overlap ``Tr(rho_a rho_b)`` of two Gaussian states.

    Equals ``2*pi * integral(rho_a * rho_b dx dy)``; for unit-mass states

        mass_a*mass_b * exp(-0.5*d^T (Ca+Cb)^{-1} d) / sqrt(det(Ca+Cb))

    with ``d`` the mean separation.  If exactly one state is a delta
    (degenerate with zero covariance), the overlap is ``2*pi`` times the
    other density evaluated at its location.
    """
    csum = a.cov + b.cov
    det = float(np.linalg.det(csum))
    if det <= _DEGENERATE_TOL:
        for delta, other in ((a, b), (b, a)):
            if np.all(delta.cov == 0.0) and not other.is_degenerate:
                return float(2.0 * math.pi * delta.mass
                             * other.density(delta.mean[0], delta.mean[1]))
        raise ValueError("overlap of two degenerate states is not defined")
    diff = a.mean - b.mean
    quad = float(diff @ np.linalg.solve(csum, diff))
    return a.mass * b.mass * math.exp(-0.5 * quad) / math.sqrt(det)
