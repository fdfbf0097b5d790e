"""Expectation values built on the Gaussian engine.

Survival probabilities reduce to determinants via Gaussian overlap algebra;
angle expectations use an exact radial reduction followed by one-dimensional
adaptive quadrature; the long-time energy generating function is closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf, erfcx

from .errors import RequiresFriction
from .gaussian import Gaussian2D, evolve, ground_state, state_overlap
from .model import DerivedParams
from .quadrature import integrate_angular

__all__ = [
    "AngleFunctional",
    "survival_probability",
    "longtime_survival",
    "nofriction_survival",
    "mean_angle",
    "phase_expectation",
    "thermal_angle_expectation",
    "energy_generating_function",
    "energy_weyl_symbol",
]


def survival_probability(d: DerivedParams, t: float) -> float:
    """Ensemble-averaged probability that the ground state is still occupied.

    The overlap of the noise-evolved ground state with the ground state is a
    single Gaussian integral; for a centred evolved covariance ``C`` it equals
    ``1/sqrt(det(C + I/2))``, which lies in (0, 1].
    """
    return state_overlap(evolve(ground_state(), d, t), ground_state())


def longtime_survival(d: DerivedParams, t: float) -> float:
    """Large-``beta*t`` asymptote of :func:`survival_probability`.

    Uses the thermalised covariance, so it is meaningful only once memory of
    the initial state is damped out; it does not equal 1 at ``t = 0``.
    """
    if d.beta == 0.0:
        raise RequiresFriction("the long-time survival form requires beta > 0")
    big_d = d.temperature_number
    decay = math.exp(-d.beta * t)
    return (2.0 / big_d) * decay / math.sqrt((1.0 + 1.0 / big_d)
                                             * (1.0 + decay * decay / big_d))


def nofriction_survival(d: DerivedParams, t: float) -> float:
    """Exact survival probability when friction strictly vanishes.

    Closed form in the free-noise number ``No = mu/(m*omega**2*hbar)``:

        1 / sqrt((1 + No*w*t/2)**2 - (No/2)**2 * sin(w*t)**2)

    Valid for all ``t``; the oscillator heats without bound, so this decays
    like ``1/(w*t)`` instead of exponentially.
    """
    no = d.noise_number_free
    wt = d.omega * t
    return 1.0 / math.sqrt((1.0 + no * wt / 2.0) ** 2
                           - (no / 2.0) ** 2 * math.sin(wt) ** 2)


def _angle_profile(state: Gaussian2D):
    """Radial reduction of a Gaussian against functions of angle alone.

    Returns ``(profile, norm)`` with
    ``norm * integral(f(phi) * profile(phi) dphi) = E[f(angle)]``: the radial
    integral ``int_0^inf R * rho(R*u(phi)) dR`` is closed form.  For a
    centred state the profile is simply ``1/q(phi)`` with
    ``q = u^T C^{-1} u``; a non-zero mean adds an erf term, routed through
    ``erfcx`` so nothing overflows however eccentric the state.
    """
    det = float(np.linalg.det(state.cov))
    inv = np.linalg.inv(state.cov)
    i00, i01, i11 = float(inv[0, 0]), float(inv[0, 1]), float(inv[1, 1])
    m0, m1 = float(state.mean[0]), float(state.mean[1])
    norm = state.mass / (2.0 * math.pi * math.sqrt(det))
    if m0 == 0.0 and m1 == 0.0:
        def centred(phi: float) -> float:
            c, s = math.cos(phi), math.sin(phi)
            return 1.0 / (i00 * c * c + 2.0 * i01 * c * s + i11 * s * s)
        return centred, norm

    g0, g1 = i00 * m0 + i01 * m1, i01 * m0 + i11 * m1
    w = m0 * g0 + m1 * g1
    damp = math.exp(-w / 2.0)
    half_rt_pi = math.sqrt(math.pi / 2.0)

    def offset(phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        q = i00 * c * c + 2.0 * i01 * c * s + i11 * s * s
        lin = c * g0 + s * g1
        h = lin / math.sqrt(2.0 * q)
        if h >= 0.0:
            # h^2 <= w/2 by Cauchy-Schwarz, so the exponent stays <= 0
            tail = math.exp(h * h - w / 2.0) * (1.0 + erf(h))
        else:
            tail = damp * float(erfcx(-h))
        return damp / q + lin * half_rt_pi * tail / q ** 1.5

    return offset, norm


def mean_angle(state: Gaussian2D, tol: float = 1e-10) -> float:
    """Expectation of the polar angle ``atan2(y, x)`` on [-pi, pi) in ``state``.

    The radial integral is done in closed form and the remaining angular
    integral by adaptive quadrature.  Signs follow the branch convention
    ``x + i*y = R*exp(i*phi)``, ``phi in [-pi, pi)``.
    """
    profile, norm = _angle_profile(state)
    return norm * integrate_angular(lambda phi: phi * profile(phi), tol=tol)


def phase_expectation(state0: Gaussian2D | None, d: DerivedParams, t: float,
                      tol: float = 1e-10) -> float:
    """Expectation of the quantised phase at time ``t``.

    ``state0`` is the initial state (ground state when ``None``).  The state
    is evolved with the averaged propagator and the angle averaged against
    it; for any initial state the value decays to zero at long times.
    """
    state = evolve(ground_state() if state0 is None else state0, d, t)
    return mean_angle(state, tol=tol)


@dataclass(frozen=True)
class AngleFunctional:
    """A bounded function of the phase angle alone, ``phi in [-pi, pi)``.

    ``fourier(k)`` may supply the coefficients
    ``c_k = (1/2pi) * int Phi(phi) exp(i*k*phi) dphi`` when they are known in
    closed form (used by the operator-matrix builders).
    """

    func: Callable[[float], float]
    fourier: Callable[[int], complex] | None = None

    def __call__(self, phi: float) -> float:
        return self.func(phi)


def thermal_angle_expectation(phi_func: AngleFunctional | Callable[[float], float],
                              d: DerivedParams, t: float, physical: bool = False,
                              tol: float = 1e-10) -> float:
    """Long-time expectation of a function of angle alone.

    In the canonical plane the stationary angle density is

        (1/2pi) / (exp(-beta*t)*cos(phi)**2 + exp(beta*t)*sin(phi)**2),

    which integrates to one for every ``beta*t`` and concentrates on the
    ``x``-axis (``phi = 0`` and ``+-pi``) as ``beta*t`` grows.  That weight
    is exactly the Jacobian ``d(phys angle)/d(phi)``, so in the physical
    angle the same expectation is the plain uniform average, returned when
    ``physical=True``.
    """
    f = phi_func.func if isinstance(phi_func, AngleFunctional) else phi_func
    if physical:
        return integrate_angular(f, tol=tol) / (2.0 * math.pi)
    bt = d.beta * t
    lo, hi = math.exp(-bt), math.exp(bt)

    def weighted(phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        return f(phi) / (lo * c * c + hi * s * s)

    return integrate_angular(weighted, tol=tol) / (2.0 * math.pi)


def energy_generating_function(d: DerivedParams, b_param: float, t: float) -> float:
    """Thermal-limit expectation of ``exp(-B * E_osc)``, ``E_osc`` the physical energy.

    Exact Gaussian evaluation against the thermalised state:

        1 / (cosh(K) + D * exp(beta*t) * sinh(K)),   K = hbar*omega*B*exp(-beta*t)/2

    with ``D = temperature_number``.  At ``B = 0`` this is the trace, 1; as
    ``beta*t -> inf`` it tends to the classical value ``1/(1 + B*theta)``.
    """
    if b_param < 0:
        raise ValueError(f"b_param must be >= 0, got {b_param!r}")
    hw = d.params.hbar * d.omega
    k = hw * b_param * math.exp(-d.beta * t) / 2.0
    return 1.0 / (math.cosh(k) + d.temperature_number * math.exp(d.beta * t) * math.sinh(k))


def energy_weyl_symbol(d: DerivedParams, b_param: float, t: float) -> Callable:
    """Phase-space symbol of ``exp(-B * E_osc)`` at time ``t``.

    The physical energy is a harmonic Hamiltonian in rescaled constants
    (``m -> m*exp(2*beta*t)``, ``omega -> omega*exp(-beta*t)``), so its
    symbol is the standard Gaussian one evaluated on the rescaled radius
    ``Rbar^2 = x**2*exp(-beta*t) + y**2*exp(beta*t)``.  Returned as a
    vectorised function of canonical ``(x, y)`` for quadrature cross-checks.
    """
    hw = d.params.hbar * d.omega
    bt = d.beta * t
    k = hw * b_param * math.exp(-bt) / 2.0
    tk, ck = math.tanh(k), math.cosh(k)
    shrink, grow = math.exp(-bt), math.exp(bt)

    def symbol(x, y):
        rbar2 = np.asarray(x) ** 2 * shrink + np.asarray(y) ** 2 * grow
        return np.exp(-rbar2 * tk) / ck

    return symbol
