"""Physical parameters and closed-form derived quantities.

The system is a whispering-gallery resonator with degenerate counterpropagating
optical modes (clockwise / counterclockwise), an intracavity two-photon pump
that dresses each optical mode into a squeezed mode, one broadband squeezed
vacuum reservoir per propagation direction, and two mechanical modes coupled
by phonon hopping.

Everything in the core is dimensionless: rates and frequencies are measured in
units of the first mechanical frequency.  The only SI-aware helpers are the
thermal-occupancy and drive-power conversions at the bottom, which the CLI's
unit layer uses.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

# CODATA / exact-SI constants, used only in the unit-conversion helpers.
HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23  # J / K
TWO_PI = 2.0 * math.pi

DIRECTIONS = ("cw", "ccw")


class ModelError(ValueError):
    """Invalid physical parameters."""


@dataclass(frozen=True)
class Reservoir:
    """Squeezed-vacuum reservoir of one propagation direction.

    The reservoir is parameterized by its mismatch against the intracavity
    squeezing: ``delta_r = r_e - r_d`` and ``delta_theta = theta_e - theta_d``.
    Storing mismatches (rather than the absolute ``r_e``, ``theta_e``) keeps
    the matched condition ``delta_r = 0, delta_theta = pi`` invariant when a
    sweep moves ``r_d``.
    """

    delta_r: float = 0.0
    delta_theta: float = math.pi


@dataclass(frozen=True)
class EffectiveDrive:
    """Drive specified through the dressed mean-field couplings directly."""

    g_eff: tuple[complex, complex]


@dataclass(frozen=True)
class PhysicalDrive:
    """Drive specified through bare couplings and a coherent amplitude.

    The mean fields (and hence the dressed couplings) must then be obtained
    from the self-consistent steady-state solver.
    """

    g_bare: tuple[float, float]
    epsilon_d: complex


@dataclass(frozen=True)
class ModelParams:
    """All physical inputs, in units of the first mechanical frequency."""

    kappa: float
    omega_m: tuple[float, float] = (1.0, 1.0)
    gamma_m: tuple[float, float] = (1e-5, 1e-5)
    nbar_m: tuple[float, float] = (0.0, 0.0)
    lambda_hop: float = 0.0
    delta_c: float = 1.0
    r_d: float = 0.0
    theta_d: float = math.pi
    reservoir_cw: Reservoir = field(default_factory=Reservoir)
    reservoir_ccw: Reservoir = field(default_factory=Reservoir)
    drive: EffectiveDrive | PhysicalDrive = EffectiveDrive((0.0 + 0.0j, 0.0 + 0.0j))
    direction: str = "ccw"

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise ModelError("kappa must be positive")
        if any(w <= 0 for w in self.omega_m):
            raise ModelError("omega_m entries must be positive")
        if any(g <= 0 for g in self.gamma_m):
            raise ModelError("gamma_m entries must be positive")
        if any(n < 0 for n in self.nbar_m):
            raise ModelError("nbar_m entries must be non-negative")
        if self.r_d < 0:
            raise ModelError("r_d must be non-negative")
        if self.r_d > 0 and self.delta_c <= 0:
            # The pump amplitude is defined through a logarithm that needs
            # delta_c > 2*xi_d >= 0 whenever squeezing is on.
            raise ModelError("delta_c must be positive when r_d > 0")
        if self.direction not in DIRECTIONS:
            raise ModelError(f"direction must be one of {DIRECTIONS}")
        for direction in DIRECTIONS:
            res = self.reservoir(direction)
            if self.r_d + res.delta_r < 0:
                raise ModelError(
                    f"reservoir_{direction}: r_d + delta_r must be non-negative"
                )
        if self.omega_m[0] != self.omega_m[1]:
            warnings.warn(
                "non-degenerate mechanical modes: the phonon-hopping coupling "
                "is only reliable for degenerate modes",
                stacklevel=2,
            )

    def reservoir(self, direction: str) -> Reservoir:
        if direction == "cw":
            return self.reservoir_cw
        if direction == "ccw":
            return self.reservoir_ccw
        raise ModelError(f"direction must be one of {DIRECTIONS}")


@dataclass(frozen=True)
class DerivedQuantities:
    """Closed-form effective quantities for one propagation direction.

    ``zeta_s``, ``zeta_p`` and ``f_drive`` require the bare couplings and are
    ``None`` in effective-drive mode; ``lambda_eff`` and ``pi_factor`` require
    the dressed couplings and are ``None`` in physical-drive mode until a mean
    field has been supplied.  ``pi_factor`` entries are ``None`` (absent, not
    zero) wherever the corresponding coupling vanishes.
    """

    xi_d: float
    omega_s: float
    n_s: float
    m_s: complex
    delta_r: float
    delta_theta: float
    r_e: float
    theta_e: float
    zeta_s: tuple[float, float] | None = None
    zeta_p: tuple[float, float] | None = None
    f_drive: tuple[float, float] | None = None
    lambda_eff: tuple[complex, complex] | None = None
    pi_factor: tuple[float | None, float | None] | None = None


@dataclass(frozen=True)
class CouplingResult:
    """Dressed coupling and its enhancement over the bare value."""

    lambda_eff: complex
    enhancement: float | None  # None when the bare coupling is zero


def pump_from_squeezing(delta_c: float, r_d: float) -> float:
    """Two-photon pump amplitude that realizes squeezing strength ``r_d``.

    Inverse of :func:`squeezing_from_pump`; equals ``(delta_c/2) tanh(2 r_d)``.
    """
    if delta_c <= 0:
        raise ModelError("delta_c must be positive")
    if r_d < 0:
        raise ModelError("r_d must be non-negative")
    return 0.5 * delta_c * math.tanh(2.0 * r_d)


def squeezing_from_pump(delta_c: float, xi_d: float) -> float:
    """Squeezing strength realized by pump amplitude ``xi_d``.

    ``r_d = (1/4) ln[(delta_c + 2 xi_d) / (delta_c - 2 xi_d)]``, defined for
    ``|2 xi_d| < delta_c``.
    """
    if delta_c <= 0:
        raise ModelError("delta_c must be positive")
    if abs(2.0 * xi_d) >= delta_c:
        raise ModelError("pump amplitude out of range: need |2 xi_d| < delta_c")
    return 0.25 * math.log((delta_c + 2.0 * xi_d) / (delta_c - 2.0 * xi_d))


def effective_frequency(delta_c: float, r_d: float) -> float:
    """Resonance frequency of the squeezed optical mode.

    ``(delta_c - 2 xi_d) exp(2 r_d)``, which collapses to
    ``delta_c / cosh(2 r_d)``.
    """
    if r_d < 0:
        raise ModelError("r_d must be non-negative")
    if r_d > 0 and delta_c <= 0:
        raise ModelError("delta_c must be positive when r_d > 0")
    return delta_c / math.cosh(2.0 * r_d)


def reservoir_noise(
    r_d: float, theta_d: float, r_e: float, theta_e: float
) -> tuple[float, complex]:
    """Effective thermal noise and two-photon correlation of a squeezed mode.

    In the dressed basis the squeezed-vacuum reservoir acts as a thermal-like
    bath with occupation ``N_s`` and two-photon correlation ``M_s``:

        N_s = sinh^2(r_d) cosh^2(r_e) + cosh^2(r_d) sinh^2(r_e)
              + (1/2) cos(dtheta) sinh(2 r_d) sinh(2 r_e)
        M_s = e^{i theta_d} [sinh(r_d) cosh(r_e) + e^{i dtheta} cosh(r_d) sinh(r_e)]
                          * [cosh(r_d) cosh(r_e) + e^{-i dtheta} sinh(r_d) sinh(r_e)]

    with ``dtheta = theta_e - theta_d``.  The pair always saturates the
    physicality bound, ``|M_s|^2 = N_s (N_s + 1)``, and vanishes identically
    under the matched condition ``r_e = r_d``, ``dtheta = pi (mod 2 pi)``.
    """
    if r_d < 0 or r_e < 0:
        raise ModelError("squeezing strengths must be non-negative")
    dtheta = theta_e - theta_d
    shd, chd = math.sinh(r_d), math.cosh(r_d)
    she, che = math.sinh(r_e), math.cosh(r_e)
    n_s = (
        shd * shd * che * che
        + chd * chd * she * she
        + 0.5 * math.cos(dtheta) * math.sinh(2.0 * r_d) * math.sinh(2.0 * r_e)
    )
    phase = cmath.exp(1j * dtheta)
    m_s = (
        cmath.exp(1j * theta_d)
        * (shd * che + phase * chd * she)
        * (chd * che + shd * she / phase)
    )
    return n_s, m_s


def effective_coupling(g_eff: complex, r_d: float, theta_d: float) -> CouplingResult:
    """Dressed optomechanical coupling and its enhancement factor.

    ``lambda = G cosh(2 r_d) - G* sinh(2 r_d) e^{-i theta_d}``.  The
    enhancement ``|lambda / G|`` depends on ``G`` only through its phase; it is
    reported as absent (``None``) when ``G = 0``.
    """
    if r_d < 0:
        raise ModelError("r_d must be non-negative")
    g_eff = complex(g_eff)
    lam = g_eff * math.cosh(2.0 * r_d) - g_eff.conjugate() * math.sinh(
        2.0 * r_d
    ) * cmath.exp(-1j * theta_d)
    if g_eff == 0:
        return CouplingResult(lam, None)
    return CouplingResult(lam, abs(lam / g_eff))


def derive(
    params: ModelParams, direction: str, a_mean: complex | None = None
) -> DerivedQuantities:
    """All closed-form derived quantities for one propagation direction.

    For a :class:`PhysicalDrive`, pass the solved optical mean field as
    ``a_mean`` to obtain the dressed couplings; without it they are left
    absent.
    """
    res = params.reservoir(direction)
    r_e = params.r_d + res.delta_r
    theta_e = params.theta_d + res.delta_theta
    xi_d = pump_from_squeezing(params.delta_c, params.r_d) if params.r_d > 0 else 0.0
    omega_s = effective_frequency(params.delta_c, params.r_d)
    n_s, m_s = reservoir_noise(params.r_d, params.theta_d, r_e, theta_e)

    zeta_s = zeta_p = f_drive = None
    g_eff: tuple[complex, complex] | None = None
    if isinstance(params.drive, PhysicalDrive):
        ch2, sh2 = math.cosh(2.0 * params.r_d), math.sinh(2.0 * params.r_d)
        sh_sq = math.sinh(params.r_d) ** 2
        g1, g2 = params.drive.g_bare
        zeta_s = (g1 * ch2, g2 * ch2)
        zeta_p = (g1 * sh2, g2 * sh2)
        f_drive = (g1 * sh_sq, g2 * sh_sq)
        if a_mean is not None:
            g_eff = (g1 * a_mean, g2 * a_mean)
    else:
        g_eff = params.drive.g_eff

    lambda_eff = pi_factor = None
    if g_eff is not None:
        c1 = effective_coupling(g_eff[0], params.r_d, params.theta_d)
        c2 = effective_coupling(g_eff[1], params.r_d, params.theta_d)
        lambda_eff = (c1.lambda_eff, c2.lambda_eff)
        pi_factor = (c1.enhancement, c2.enhancement)

    return DerivedQuantities(
        xi_d=xi_d,
        omega_s=omega_s,
        n_s=n_s,
        m_s=m_s,
        delta_r=res.delta_r,
        delta_theta=res.delta_theta,
        r_e=r_e,
        theta_e=theta_e,
        zeta_s=zeta_s,
        zeta_p=zeta_p,
        f_drive=f_drive,
        lambda_eff=lambda_eff,
        pi_factor=pi_factor,
    )


# --- SI-facing helpers (unit-conversion layer only) -------------------------


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency ``omega`` [rad/s]
    in a bath at ``temperature`` [K]."""
    if omega <= 0:
        raise ModelError("omega must be positive")
    if temperature <= 0:
        raise ModelError("temperature must be positive")
    return 1.0 / math.expm1(HBAR * omega / (KB * temperature))


def temperature_from_occupancy(omega: float, nbar: float) -> float:
    """Bath temperature [K] that yields occupation ``nbar`` at ``omega`` [rad/s]."""
    if omega <= 0:
        raise ModelError("omega must be positive")
    if nbar <= 0:
        raise ModelError("nbar must be positive")
    return HBAR * omega / (KB * math.log1p(1.0 / nbar))


def drive_amplitude_from_power(kappa: float, omega_d: float, power: float) -> float:
    """Coherent drive amplitude ``sqrt(2 kappa P / (hbar omega_d))`` [rad/s].

    ``kappa`` and ``omega_d`` are angular frequencies in rad/s, ``power`` in W.
    """
    if kappa <= 0 or omega_d <= 0:
        raise ModelError("kappa and omega_d must be positive")
    if power < 0:
        raise ModelError("power must be non-negative")
    return math.sqrt(2.0 * kappa * power / (HBAR * omega_d))
