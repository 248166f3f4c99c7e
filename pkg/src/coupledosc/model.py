"""Parameter reductions for two linearly coupled oscillators.

The physical Hamiltonian couples the oscillators through ``i k1 x1 p2``,
``i k2 x2 p1``, ``k3 x1 x2`` and ``-k4 p1 p2``. Everything downstream works
with the dimensionless couplings ``(A12, A21, B, C)`` (energy units), their
ladder-operator form ``(alpha, beta, gamma, delta)``, and finally the pair
``(Omega, epsilon)`` that fixes the reflection coefficient ``R(t)`` and the
phase ``phi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

DEFAULT_WEAK_COUPLING_RATIO = 0.1

_DEGENERATE_ATOL = 1e-14


class WeakCouplingWarning(UserWarning):
    """Couplings are not small compared with the oscillator quanta."""


@dataclass(frozen=True)
class PhysicalParams:
    m1: float
    m2: float
    omega1: float
    omega2: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "omega1", "omega2", "hbar"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class CouplingSet:
    """Dimensionless-reduced couplings together with their ladder form."""

    A12: float
    A21: float
    B: float
    C: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    hbar: float = 1.0

    @classmethod
    def from_reduced(cls, A12: float, A21: float, B: float, C: float,
                     hbar: float = 1.0) -> "CouplingSet":
        alpha, beta, gamma, delta = ladder_couplings(A12, A21, B, C)
        return cls(A12, A21, B, C, alpha, beta, gamma, delta, hbar)

    @classmethod
    def from_ladder(cls, alpha: float, beta: float, gamma: float, delta: float,
                    hbar: float = 1.0) -> "CouplingSet":
        A12, A21, B, C = reduced_from_ladder(alpha, beta, gamma, delta)
        return cls(A12, A21, B, C, alpha, beta, gamma, delta, hbar)

    def max_coupling(self) -> float:
        return max(abs(self.A12), abs(self.A21), abs(self.B), abs(self.C))


@dataclass(frozen=True)
class RabiParams:
    Omega: float
    epsilon: float
    degenerate: bool
    delta_omega: float = 0.0

    @property
    def R_max(self) -> float:
        return 0.0 if self.degenerate else 1.0 / (1.0 + self.epsilon ** 2)


@dataclass(frozen=True)
class EvolutionPoint:
    R: float
    cos_phi: float
    sin_phi: float
    branch: int
    epsilon: float = 0.0
    t: float | None = None

    @property
    def is_identity(self) -> bool:
        return self.R == 0.0

    @property
    def is_swap(self) -> bool:
        return self.R == 1.0


def ladder_couplings(A12: float, A21: float, B: float, C: float):
    alpha = 0.5 * (A12 + A21 + B + C)
    beta = 0.5 * (-A12 + A21 + B - C)
    gamma = 0.5 * (A12 - A21 + B - C)
    delta = 0.5 * (-A12 - A21 + B + C)
    return alpha, beta, gamma, delta


def reduced_from_ladder(alpha: float, beta: float, gamma: float, delta: float):
    """Invert :func:`ladder_couplings`."""
    A12 = 0.5 * (alpha - delta + gamma - beta)
    A21 = 0.5 * (alpha - delta - gamma + beta)
    B = 0.5 * (alpha + delta + beta + gamma)
    C = 0.5 * (alpha + delta - beta - gamma)
    return A12, A21, B, C


def reduce_physical(p: PhysicalParams,
                    weak_coupling_ratio: float = DEFAULT_WEAK_COUPLING_RATIO) -> CouplingSet:
    """Map physical masses, frequencies and couplings to reduced couplings.

    A :class:`WeakCouplingWarning` is emitted (not raised) when a reduced
    coupling exceeds ``weak_coupling_ratio * hbar * omega_i``.
    """
    s1 = p.m1 * p.omega1
    s2 = p.m2 * p.omega2
    c = CouplingSet.from_reduced(
        A12=p.hbar * p.k1 * math.sqrt(s2 / s1),
        A21=p.hbar * p.k2 * math.sqrt(s1 / s2),
        B=p.hbar * p.k3 / math.sqrt(s1 * s2),
        C=p.hbar * p.k4 * math.sqrt(s1 * s2),
        hbar=p.hbar,
    )
    if not is_weak_coupling(c, p.omega1, p.omega2, weak_coupling_ratio):
        warnings.warn(
            f"couplings (max {c.max_coupling():.3g}) exceed {weak_coupling_ratio} * hbar*omega; "
            "closed form is evaluated anyway",
            WeakCouplingWarning,
            stacklevel=2,
        )
    return c


def is_weak_coupling(c: CouplingSet, omega1: float, omega2: float,
                     ratio: float = DEFAULT_WEAK_COUPLING_RATIO) -> bool:
    bound = ratio * c.hbar * min(omega1, omega2)
    return c.max_coupling() < bound


def rabi_params(c: CouplingSet, omega1: float, omega2: float) -> RabiParams:
    dw = omega2 - omega1
    Omega = math.hypot(abs(c.B - c.C), abs(c.A12 - c.A21)) / c.hbar
    if Omega <= _DEGENERATE_ATOL:
        # interaction terms cancel: the state never leaves |s1>|s2>
        return RabiParams(Omega=0.0, epsilon=0.0, degenerate=True, delta_omega=dw)
    return RabiParams(Omega=Omega, epsilon=dw / Omega, degenerate=False, delta_omega=dw)


def omega_from_ladder(c: CouplingSet) -> float:
    """Effective coupling written through the number-conserving ladder terms."""
    return math.sqrt(2.0) * math.hypot(abs(c.beta), abs(c.gamma)) / c.hbar


def _resolve_branch(branch) -> int:
    if branch in (1, "+", "+1"):
        return 1
    if branch in (-1, "-", "-1"):
        return -1
    raise ValueError(f"branch must be +1 or -1, got {branch!r}")


def _phase(R: float, epsilon: float, branch: int):
    if R >= 1.0:
        cos_phi = 0.0
    else:
        cos_phi = -epsilon * math.sqrt(R / (1.0 - R))
        cos_phi = min(1.0, max(-1.0, cos_phi))
    sin_phi = branch * math.sqrt(max(0.0, 1.0 - cos_phi * cos_phi))
    return cos_phi, sin_phi


def evolution_point(r: RabiParams, t: float, branch=None) -> EvolutionPoint:
    """Reflection coefficient and phase reached after time ``t``.

    ``branch`` picks the sign of ``sin(phi)``, which the closed form leaves
    open. ``None`` selects ``sign(sin(Omega t sqrt(1+eps^2)))``: that is the
    choice for which the transition amplitudes (not only their moduli)
    coincide with exact evolution. Probabilities do not depend on it.
    """
    if r.degenerate:
        b = 1 if branch is None else _resolve_branch(branch)
        return EvolutionPoint(R=0.0, cos_phi=0.0, sin_phi=float(b), branch=b,
                              epsilon=0.0, t=t)
    root = math.sqrt(1.0 + r.epsilon ** 2)
    chi = r.Omega * t * root
    if branch is None:
        b = -1 if math.sin(chi) < 0.0 else 1
    else:
        b = _resolve_branch(branch)
    R = math.sin(0.5 * chi) ** 2 / (1.0 + r.epsilon ** 2)
    if r.epsilon == 0.0 and R > 1.0 - 1e-15:
        R = 1.0
    cos_phi, sin_phi = _phase(R, r.epsilon, b)
    return EvolutionPoint(R=R, cos_phi=cos_phi, sin_phi=sin_phi, branch=b,
                          epsilon=r.epsilon, t=t)


def point_from_R(R: float, epsilon: float = 0.0, branch=1) -> EvolutionPoint:
    bound = 1.0 / (1.0 + epsilon ** 2)
    if not (0.0 <= R <= bound * (1.0 + 1e-12)):
        raise ValueError(f"R={R!r} outside the admissible range [0, 1/(1+eps^2)] = [0, {bound!r}]")
    R = min(R, bound)
    b = _resolve_branch(branch)
    cos_phi, sin_phi = _phase(R, epsilon, b)
    return EvolutionPoint(R=R, cos_phi=cos_phi, sin_phi=sin_phi, branch=b, epsilon=epsilon)
