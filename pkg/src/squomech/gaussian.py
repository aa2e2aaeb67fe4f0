"""Covariance-matrix assembly and Gaussian entanglement / steering measures.

Quadrature convention: ``X = (a+ + a)/sqrt(2)``, ``Y = i (a+ - a)/sqrt(2)``,
mechanical ``q_j, p_j`` as-is, so every commutator is ``i`` and the vacuum
variance is 1/2.  The 6x6 covariance matrix is ordered
``(X, Y, q1, p1, q2, p2)`` over the modes ``(a, q1, q2)``.

Moment-to-covariance expansions (upper triangle; V is then symmetrized):

    V11 = (x1 + x2 + x7 + x8)/2        V22 = (x1 + x2 - x7 - x8)/2
    V12 = i (x8 - x7)/2
    V13 = (x13 + x14)/sqrt(2)          V23 = i (x14 - x13)/sqrt(2)
    V14 = (x15 + x16)/sqrt(2)          V24 = i (x16 - x15)/sqrt(2)
    V15 = (x17 + x18)/sqrt(2)          V25 = i (x18 - x17)/sqrt(2)
    V16 = (x19 + x20)/sqrt(2)          V26 = i (x20 - x19)/sqrt(2)
    V33 = x3    V44 = x4    V55 = x5   V66 = x6
    V34 = (x9 + x10)/2                 V56 = (x11 + x12)/2
    V35 = x21   V36 = x23   V45 = x24  V46 = x22

Every entry must come out real (to tolerance) for moments produced by a valid
steady-state solve; a larger imaginary residue signals an upstream defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import MomentVector

MODES = ("a", "q1", "q2")
MODE_INDEX = {name: k for k, name in enumerate(MODES)}
BIPARTITIONS = (("a", "q1"), ("a", "q2"), ("q1", "q2"))

#: 6x6 symplectic form for (X, Y, q1, p1, q2, p2), [psi_k, psi_l] = i Omega_kl
OMEGA = np.kron(np.eye(3), np.array([[0.0, 1.0], [-1.0, 0.0]]))

#: threshold below which a steerability / negativity counts as zero
ZERO_THRESHOLD = 1e-10

REGIME_NO_WAY = "no-way"
REGIME_ONE_WAY = "one-way"
REGIME_TWO_WAY = "two-way"


class NonHermitianMomentsError(RuntimeError):
    """Covariance entries acquired an imaginary residue beyond tolerance."""


class NonPhysicalReducedError(RuntimeError):
    """A reduced covariance matrix violates the bona fide bound."""


@dataclass
class CovarianceMatrix:
    """Real symmetric 6x6 covariance matrix over (X, Y, q1, p1, q2, p2)."""

    v: np.ndarray
    modes: tuple[str, str, str] = MODES

    def __post_init__(self) -> None:
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != (6, 6):
            raise ValueError("covariance matrix must be 6x6")

    def reduced(self, mu: str, nu: str) -> np.ndarray:
        """4x4 reduced covariance matrix of the (mu, nu) bipartition."""
        return reduced_cm(self.v, mu, nu)


def assemble_cm(x: MomentVector, imag_tol: float = 1e-9) -> CovarianceMatrix:
    """Build the covariance matrix from steady-state moments."""
    s = 1.0 / math.sqrt(2.0)
    v = np.zeros((6, 6), dtype=complex)
    v[0, 0] = 0.5 * (x[1] + x[2] + x[7] + x[8])
    v[1, 1] = 0.5 * (x[1] + x[2] - x[7] - x[8])
    v[0, 1] = 0.5j * (x[8] - x[7])
    v[0, 2] = s * (x[13] + x[14])
    v[1, 2] = 1j * s * (x[14] - x[13])
    v[0, 3] = s * (x[15] + x[16])
    v[1, 3] = 1j * s * (x[16] - x[15])
    v[0, 4] = s * (x[17] + x[18])
    v[1, 4] = 1j * s * (x[18] - x[17])
    v[0, 5] = s * (x[19] + x[20])
    v[1, 5] = 1j * s * (x[20] - x[19])
    v[2, 2] = x[3]
    v[3, 3] = x[4]
    v[4, 4] = x[5]
    v[5, 5] = x[6]
    v[2, 3] = 0.5 * (x[9] + x[10])
    v[4, 5] = 0.5 * (x[11] + x[12])
    v[2, 4] = x[21]
    v[2, 5] = x[23]
    v[3, 4] = x[24]
    v[3, 5] = x[22]
    residue = float(np.max(np.abs(v.imag)))
    if residue > imag_tol:
        raise NonHermitianMomentsError(
            f"imaginary residue {residue:.3e} in covariance assembly "
            "(upstream steady-state solve is suspect)"
        )
    vr = v.real
    vr = np.triu(vr) + np.triu(vr, 1).T
    return CovarianceMatrix(vr)


def symplectic_spectrum(v: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a 2n x 2n covariance matrix, ascending.

    Computed as the moduli of the eigenvalues of ``i Omega v`` (which come in
    +/- pairs), deduplicated to n values.
    """
    v = np.asarray(v, dtype=float)
    n2 = v.shape[0]
    if v.shape != (n2, n2) or n2 % 2:
        raise ValueError("covariance matrix must be square with even dimension")
    omega = np.kron(np.eye(n2 // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega @ v)))
    return moduli[::2]


def is_bona_fide(v: np.ndarray, tol: float = 1e-8) -> bool:
    """Uncertainty-principle check: all symplectic eigenvalues >= 1/2 - tol."""
    return bool(np.min(symplectic_spectrum(v)) >= 0.5 - tol)


def reduced_cm(v6: np.ndarray, mu: str, nu: str) -> np.ndarray:
    if mu == nu:
        raise ValueError("bipartition requires two distinct modes")
    idx = []
    for mode in (mu, nu):
        k = MODE_INDEX[mode]
        idx.extend((2 * k, 2 * k + 1))
    return np.asarray(v6, dtype=float)[np.ix_(idx, idx)]


def _partial_transpose(v: np.ndarray, mode: int) -> np.ndarray:
    """Momentum-flip partial transpose of one mode of a 2n-mode CM."""
    p = np.eye(v.shape[0])
    p[2 * mode + 1, 2 * mode + 1] = -1.0
    return p @ v @ p


def _eta_min_closed_form(v4: np.ndarray) -> float:
    """Minimum symplectic eigenvalue of the partial transpose of a two-mode CM.

    Closed form through the partially transposed symplectic invariant
    ``Sigma = det A + det B - 2 det C`` of the 2x2 blocks.
    """
    a = np.linalg.det(v4[0:2, 0:2])
    b = np.linalg.det(v4[2:4, 2:4])
    c = np.linalg.det(v4[0:2, 2:4])
    det_v = np.linalg.det(v4)
    sigma = a + b - 2.0 * c
    disc = max(sigma * sigma - 4.0 * det_v, 0.0)
    return math.sqrt(max(sigma - math.sqrt(disc), 0.0) / 2.0)


def log_negativity(
    v6: CovarianceMatrix | np.ndarray,
    mu: str,
    nu: str,
    *,
    crosscheck_tol: float = 1e-9,
) -> float:
    """Logarithmic negativity ``max[0, -ln(2 eta)]`` of a bipartition.

    ``eta`` is evaluated twice on every call: from the closed-form invariant
    and from the symplectic spectrum of the explicitly transposed reduced CM.
    The two routes must agree; a mismatch indicates a numerical pathology.
    """
    v = v6.v if isinstance(v6, CovarianceMatrix) else np.asarray(v6, dtype=float)
    v4 = reduced_cm(v, mu, nu)
    if not is_bona_fide(v4):
        raise NonPhysicalReducedError(
            f"reduced CM of ({mu}|{nu}) violates the bona fide bound"
        )
    eta = _eta_min_closed_form(v4)
    eta_spectral = float(symplectic_spectrum(_partial_transpose(v4, 1))[0])
    if abs(eta - eta_spectral) > crosscheck_tol * max(1.0, eta):
        raise NonPhysicalReducedError(
            f"partial-transpose spectrum cross-check failed for ({mu}|{nu}): "
            f"closed form {eta:.12e} vs spectral {eta_spectral:.12e}"
        )
    return max(0.0, -math.log(2.0 * eta))


def one_vs_two_contangle(v6: CovarianceMatrix | np.ndarray, focus: str) -> float:
    """Squared logarithmic negativity of the ``focus | rest`` 1-vs-2 split.

    The partial transpose flips the momentum of the focus mode on the full
    6x6 CM; ``eta`` is the minimum modulus eigenvalue of ``i Omega V_pt``.
    """
    v = v6.v if isinstance(v6, CovarianceMatrix) else np.asarray(v6, dtype=float)
    v_pt = _partial_transpose(v, MODE_INDEX[focus])
    eta = float(symplectic_spectrum(v_pt)[0])
    return max(0.0, -math.log(2.0 * eta)) ** 2


@dataclass
class ContangleReport:
    """Residual-contangle minimum with per-focus diagnostics."""

    r_tau_min: float  # max(0, raw minimum)
    raw_minimum: float
    residuals: dict[str, float]  # focus mode -> residual contangle
    monogamy_ok: bool  # no residual below -1e-9


def residual_contangle_min(
    v6: CovarianceMatrix | np.ndarray, *, monogamy_tol: float = 1e-9
) -> ContangleReport:
    """Minimum residual contangle over the three focus choices.

    Contangle is the squared logarithmic negativity; each residual is
    ``E(r|st) - E(r|s) - E(r|t)``.  Monogamy requires every residual to be
    non-negative; small negative values beyond ``-monogamy_tol`` are flagged
    as violations (diagnostic, not fatal).
    """
    residuals: dict[str, float] = {}
    for focus in MODES:
        others = [m for m in MODES if m != focus]
        e_full = one_vs_two_contangle(v6, focus)
        e_pair = sum(log_negativity(v6, focus, other) ** 2 for other in others)
        residuals[focus] = e_full - e_pair
    raw = min(residuals.values())
    return ContangleReport(
        r_tau_min=max(0.0, raw),
        raw_minimum=raw,
        residuals=residuals,
        monogamy_ok=raw >= -monogamy_tol,
    )


@dataclass
class SteeringResult:
    forward: float  # S(mu -> nu)
    backward: float  # S(nu -> mu)
    regime: str


def steering_pair(
    v6: CovarianceMatrix | np.ndarray,
    mu: str,
    nu: str,
    *,
    threshold: float = ZERO_THRESHOLD,
) -> SteeringResult:
    """Directional Gaussian steerabilities of a bipartition and their regime.

    ``S(mu -> nu) = max[0, (1/2) ln(det A_mu / (4 det V))]`` with ``A_mu`` the
    steering party's 2x2 block of the reduced CM, and symmetrically for the
    reverse direction.  Regimes: both zero -> no-way, exactly one positive ->
    one-way, both positive -> two-way (zero means below ``threshold``).
    """
    v = v6.v if isinstance(v6, CovarianceMatrix) else np.asarray(v6, dtype=float)
    v4 = reduced_cm(v, mu, nu)
    det_v = float(np.linalg.det(v4))
    if det_v <= 0:
        raise NonPhysicalReducedError(
            f"reduced CM of ({mu}|{nu}) has non-positive determinant"
        )
    det_a = float(np.linalg.det(v4[0:2, 0:2]))
    det_b = float(np.linalg.det(v4[2:4, 2:4]))
    forward = max(0.0, 0.5 * math.log(det_a / (4.0 * det_v)))
    backward = max(0.0, 0.5 * math.log(det_b / (4.0 * det_v)))
    fwd_on = forward > threshold
    bwd_on = backward > threshold
    if fwd_on and bwd_on:
        regime = REGIME_TWO_WAY
    elif fwd_on or bwd_on:
        regime = REGIME_ONE_WAY
    else:
        regime = REGIME_NO_WAY
    return SteeringResult(forward, backward, regime)


@dataclass
class MeasureReport:
    """All entanglement and steering measures of one steady state."""

    e_n: dict[tuple[str, str], float]
    steering: dict[tuple[str, str], SteeringResult]
    contangle: ContangleReport

    @property
    def r_tau_min(self) -> float:
        return self.contangle.r_tau_min

    def regime(self, mu: str, nu: str) -> str:
        return self.steering[(mu, nu)].regime


def measure_report(v6: CovarianceMatrix | np.ndarray) -> MeasureReport:
    """Evaluate every bipartite measure and the tripartite contangle."""
    e_n = {pair: log_negativity(v6, *pair) for pair in BIPARTITIONS}
    steering = {pair: steering_pair(v6, *pair) for pair in BIPARTITIONS}
    return MeasureReport(e_n=e_n, steering=steering, contangle=residual_contangle_min(v6))


# --- test helpers -------------------------------------------------------------


def two_mode_squeezed_cm(r: float) -> np.ndarray:
    """Covariance matrix of a two-mode squeezed vacuum (vacuum variance 1/2)."""
    ch, sh = 0.5 * math.cosh(2.0 * r), 0.5 * math.sinh(2.0 * r)
    v = np.zeros((4, 4))
    v[0:2, 0:2] = ch * np.eye(2)
    v[2:4, 2:4] = ch * np.eye(2)
    v[0:2, 2:4] = sh * np.diag([1.0, -1.0])
    v[2:4, 0:2] = sh * np.diag([1.0, -1.0])
    return v
