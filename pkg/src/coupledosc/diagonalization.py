"""Diagnostics for the normal-mode route to the closed form.

The Hamiltonian is first rotated and sheared in position space,
``x1/sqrt(w1) = x cos(theta) + y sin(theta)`` and
``x2/sqrt(w2) = (-x sin(theta) + y cos(theta)) (1 + delta)``, then conjugated by
``S = exp(i gamma d_x d_y) exp(i alpha x y)``. This module evaluates the
resulting coefficients literally (units with hbar = 1) and checks the
consistency relations the closed form relies on. Nothing here is used to
compute amplitudes; disagreements are returned as violations, not raised.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .dynamics import mixing
from .model import CouplingSet, RabiParams, point_from_R, rabi_params

MU_BRANCH_ATOL = 1e-10
ANGLE_ATOL = 1e-12


@dataclass(frozen=True)
class TransformedCoefficients:
    omega1x_sq: float
    omega2y_sq: float
    Ap11: float
    Ap22: float
    Ap12: float
    Ap21: float
    Bp: float
    Cp: float
    a: float
    b: float


@dataclass(frozen=True)
class UnitaryParams:
    theta1: float
    delta_shear: float
    alpha_s: float
    gamma_s: float
    eps1: float
    eps1_infinite: bool = False


@dataclass(frozen=True)
class AngleRelation:
    """Angles of the two-stage construction.

    ``eps`` is composed from ``eps1`` and ``eps2``; ``Theta`` obeys
    ``tan(2 Theta) = 1/eps``. ``eps_rabi`` and ``Theta_rabi`` are the values
    the closed-form amplitudes actually use.
    """

    eps1: float
    eps2: float
    eps: float
    theta1: float
    theta2: float
    Theta: float
    eps_rabi: float
    Theta_rabi: float
    mu: float
    mu_matches: tuple
    violations: tuple = ()


@dataclass(frozen=True)
class SplittingDiagnostics:
    """Complex-valued normal-mode quantities; only magnitudes are compared."""

    sigma: complex
    omega0: complex
    Omega0_sq: complex
    Omega1: complex
    Omega2: complex
    sigma_over_omega1: float
    target: float
    relative_gap: float


@dataclass(frozen=True)
class RegimeFlags:
    appendix_regime: bool   # |dw| <~ max coupling
    dynamics_regime: bool   # |dw| <~ Omega


@dataclass(frozen=True)
class DiagonalResidual:
    Bp: float
    Cp: float
    scale: float
    bound: float

    @property
    def passed(self) -> bool:
        return max(self.Bp, self.Cp) <= self.bound


def transform_coefficients(c: CouplingSet, omega1: float, omega2: float,
                           theta: float, delta: float) -> TransformedCoefficients:
    """Coefficients of the rotated and sheared Hamiltonian."""
    if 1.0 + delta == 0.0:
        raise ValueError("delta = -1 makes the shear singular")
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    d1 = 1.0 + delta
    s2t = math.sin(2.0 * theta)
    c2t = math.cos(2.0 * theta)
    cs = math.cos(theta) ** 2
    sn = math.sin(theta) ** 2
    r = math.sqrt(omega1 * omega2)
    A12 = c.A12 / c.hbar
    A21 = c.A21 / c.hbar
    B = c.B / c.hbar
    C = c.C / c.hbar
    u = A12 / d1 * math.sqrt(omega1 / omega2)
    v = math.sqrt(omega2 / omega1) * A21 * d1

    omega1x_sq = omega1 ** 2 * cs + omega2 ** 2 * d1 ** 2 * sn - B * r * s2t * d1
    omega2y_sq = omega2 ** 2 * cs * d1 ** 2 + omega1 ** 2 * sn + B * r * s2t * d1
    Ap11 = -0.5 * s2t * (u + v)
    Ap22 = 0.5 * s2t * (u + v)
    Ap12 = u * cs - v * sn
    Ap21 = -u * sn + v * cs
    Bp = 0.5 * s2t * (omega1 ** 2 - omega2 ** 2 * d1 ** 2) + B * r * (cs * d1 - sn * d1)
    Cp = -0.5 * s2t + s2t / (2.0 * d1 ** 2) + C / r * c2t / d1
    a = cs + sn / d1 ** 2 + s2t / d1 * C / r
    b = sn + cs / d1 ** 2 - s2t / d1 * C / r
    return TransformedCoefficients(omega1x_sq, omega2y_sq, Ap11, Ap22, Ap12, Ap21, Bp, Cp, a, b)


def unitary_params(c: CouplingSet, omega1: float, omega2: float) -> UnitaryParams:
    """Rotation, shear and ``S``-operator parameters chosen to diagonalize.

    ``eps1`` is evaluated as ``sqrt(dw^2 + (B-C)^2) / |A12 - A21|``, which is
    ``dw / (cos(2 theta1) |A12 - A21|)`` with the ``dw = 0`` limit filled in.
    It is nonnegative, and ``eps1 / |eps1|`` is taken as +1 at ``eps1 = 0``.
    """
    dw = omega2 - omega1
    bc = abs(c.B - c.C) / c.hbar
    C = c.C / c.hbar
    theta1 = 0.5 * math.atan2(bc, dw)
    if C == 0.0:
        delta = 0.0
    elif bc == 0.0:
        delta = math.copysign(math.inf, C * dw)
    else:
        delta = C / omega1 * (dw / bc)
    a_diff = abs(c.A12 - c.A21) / c.hbar
    num = math.hypot(dw, bc)
    if a_diff == 0.0:
        # pure B - C coupling; alpha -> 0 and gamma -> 1/2 as eps1 -> infinity
        return UnitaryParams(theta1, delta, 0.0, 0.5, math.inf, eps1_infinite=True)
    eps1 = num / a_diff
    root = math.sqrt(1.0 + eps1 * eps1)
    alpha = eps1 - root
    gamma = 0.5 / root
    return UnitaryParams(theta1, delta, alpha, gamma, eps1)


def composed_epsilon(eps1: float, eps2: float) -> float:
    if math.isinf(eps1) or math.isinf(eps2):
        if math.isinf(eps1) and math.isinf(eps2):
            return math.copysign(math.inf, eps1 * eps2)
        finite = eps2 if math.isinf(eps1) else eps1
        inf = eps1 if math.isinf(eps1) else eps2
        return math.copysign(1.0, inf) * finite
    return eps1 * eps2 / math.sqrt(1.0 + eps1 * eps1 + eps2 * eps2)


def half_angle(eps: float) -> float:
    """``Theta`` in ``(0, pi/2)`` with ``tan(2 Theta) = 1/eps``."""
    if math.isinf(eps):
        return 0.0 if eps > 0 else 0.5 * math.pi
    return 0.5 * math.atan2(1.0, eps)


def mu_branch(R: float, epsilon: float, branch=1) -> tuple:
    """``(mu, matches_tan, matches_cot)`` for the closed-form mu at ``(R, eps)``."""
    mu = mixing(point_from_R(R, epsilon, branch)).mu
    Theta = half_angle(epsilon)
    return (mu, abs(mu - math.tan(Theta)) <= MU_BRANCH_ATOL,
            abs(mu - 1.0 / math.tan(Theta)) <= MU_BRANCH_ATOL)


def angle_relation(u: UnitaryParams, e: RabiParams, R: float = 0.5, branch=1) -> AngleRelation:
    """Compose the two rotation angles and compare with the Rabi parameters.

    ``theta2`` follows from ``tan(theta2) = alpha``. The closed-form ``mu``
    is evaluated at reflection ``R`` (it does not depend on ``R``).
    """
    violations = []
    theta2 = math.atan(u.alpha_s)
    t2 = math.tan(2.0 * theta2)
    eps2 = math.inf if t2 == 0.0 else 1.0 / t2
    eps = composed_epsilon(u.eps1, eps2)
    Theta = half_angle(eps)
    if e.degenerate:
        violations.append("degenerate couplings: Omega = 0, closed form is the identity")
        return AngleRelation(u.eps1, eps2, eps, u.theta1, theta2, Theta, 0.0, math.nan,
                             math.nan, (False, False), tuple(violations))
    Theta_rabi = half_angle(e.epsilon)
    R = min(R, e.R_max)
    mu, m_tan, m_cot = mu_branch(R, e.epsilon, branch)
    if not (m_tan or m_cot):
        violations.append(f"mu={mu!r} matches neither tan(Theta) nor cot(Theta)")
    if m_tan and m_cot and e.epsilon != 0.0:
        violations.append("mu matches both tan(Theta) and cot(Theta) away from resonance")
    if abs(eps - e.epsilon) > ANGLE_ATOL * max(1.0, abs(e.epsilon)):
        violations.append(f"composed epsilon {eps!r} differs from Rabi epsilon {e.epsilon!r}")
    return AngleRelation(u.eps1, eps2, eps, u.theta1, theta2, Theta, e.epsilon, Theta_rabi,
                         mu, (m_tan, m_cot), tuple(violations))


def energy_splitting(c: CouplingSet, omega1: float, omega2: float) -> float:
    """Leading-order ``sigma / omega1 = Omega sqrt(1 + eps^2)``."""
    r = rabi_params(c, omega1, omega2)
    if r.degenerate:
        return 0.0
    return r.Omega * math.sqrt(1.0 + r.epsilon ** 2)


def splitting_diagnostics(c: CouplingSet, omega1: float, omega2: float) -> SplittingDiagnostics:
    """Evaluate ``sigma``, ``omega0``, ``Omega0^2``, ``Omega1``, ``Omega2`` in complex arithmetic."""
    u = unitary_params(c, omega1, omega2)
    target = energy_splitting(c, omega1, omega2)
    if u.eps1_infinite or not math.isfinite(u.delta_shear):
        nan = complex(math.nan, math.nan)
        return SplittingDiagnostics(nan, nan, nan, nan, nan, math.nan, target, math.nan)
    tc = transform_coefficients(c, omega1, omega2, u.theta1, u.delta_shear)
    sgn = 1.0 if u.eps1 >= 0 else -1.0
    diff = tc.Ap12 - tc.Ap21
    sigma = 1j * omega1 * sgn * math.sqrt(1.0 + u.eps1 ** 2) * diff
    den = tc.a * tc.Ap12 - tc.b * tc.Ap21
    num = tc.Ap21 * tc.omega1x_sq - tc.Ap12 * tc.omega2y_sq
    omega0 = 1j * cmath.sqrt(num / den) if den != 0.0 else complex(math.inf, 0.0)
    Omega0_sq = omega0 ** 2 * tc.a * tc.b + 1j * omega0 * u.eps1 * (tc.Ap12 + tc.Ap21)
    Omega1 = cmath.sqrt(Omega0_sq + sigma)
    Omega2 = cmath.sqrt(Omega0_sq - sigma)
    ratio = abs(sigma) / omega1
    gap = abs(ratio - target) / target if target > 0 else math.nan
    return SplittingDiagnostics(sigma, omega0, Omega0_sq, Omega1, Omega2, ratio, target, gap)


def regime_flags(c: CouplingSet, omega1: float, omega2: float) -> RegimeFlags:
    dw = abs(omega2 - omega1)
    r = rabi_params(c, omega1, omega2)
    return RegimeFlags(appendix_regime=dw <= c.max_coupling() / c.hbar,
                       dynamics_regime=(not r.degenerate) and dw <= r.Omega)


def diagonal_residual(c: CouplingSet, omega1: float, omega2: float,
                      rel_bound: float = 1e-2) -> DiagonalResidual:
    """Leftover ``x y`` and ``d_x d_y`` couplings after the chosen rotation and shear.

    Both are brought to frequency units (``|B'|/sqrt(w1 w2)`` and
    ``|C'| sqrt(w1 w2)``) and compared with ``rel_bound * |B - C|``. They
    vanish at first order only when ``B >= C``.
    """
    u = unitary_params(c, omega1, omega2)
    r = math.sqrt(omega1 * omega2)
    scale = abs(c.B - c.C) / c.hbar
    if not math.isfinite(u.delta_shear):
        return DiagonalResidual(math.inf, math.inf, scale, rel_bound * scale)
    tc = transform_coefficients(c, omega1, omega2, u.theta1, u.delta_shear)
    return DiagonalResidual(abs(tc.Bp) / r, abs(tc.Cp) * r, scale, rel_bound * scale)


@dataclass(frozen=True)
class AppendixReport:
    unitary: UnitaryParams
    coefficients: TransformedCoefficients | None
    angles: AngleRelation
    splitting: SplittingDiagnostics
    regime: RegimeFlags
    residual: DiagonalResidual
    notes: tuple = field(default_factory=tuple)


def appendix_report(c: CouplingSet, omega1: float, omega2: float) -> AppendixReport:
    u = unitary_params(c, omega1, omega2)
    e = rabi_params(c, omega1, omega2)
    notes = []
    if math.isfinite(u.delta_shear):
        tc = transform_coefficients(c, omega1, omega2, u.theta1, u.delta_shear)
    else:
        tc = None
        notes.append("B = C with C != 0 and dw != 0: shear delta is infinite")
    if c.B < c.C:
        notes.append("B < C: the shear does not cancel B' at first order")
    return AppendixReport(u, tc, angle_relation(u, e), splitting_diagnostics(c, omega1, omega2),
                          regime_flags(c, omega1, omega2), diagonal_residual(c, omega1, omega2),
                          tuple(notes))
