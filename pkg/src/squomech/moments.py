"""Second-moment dynamics of the linearized squeezed optomechanical system.

The fluctuation state is tracked through 24 operator moments of the squeezed
optical mode ``a`` and the mechanical quadratures ``q_j, p_j``:

    x1  = <a+ a>    x2  = <a a+>    x3  = <q1 q1>   x4  = <p1 p1>
    x5  = <q2 q2>   x6  = <p2 p2>   x7  = <a a>     x8  = <a+ a+>
    x9  = <q1 p1>   x10 = <p1 q1>   x11 = <q2 p2>   x12 = <p2 q2>
    x13 = <a q1>    x14 = <a+ q1>   x15 = <a p1>    x16 = <a+ p1>
    x17 = <a q2>    x18 = <a+ q2>   x19 = <a p2>    x20 = <a+ p2>
    x21 = <q1 q2>   x22 = <p1 p2>   x23 = <q1 p2>   x24 = <q2 p1>

They obey a linear ODE ``dX/dt = A X + b``.  The basis is redundant: the
operator identities ``x2 = x1 + 1``, ``x10 = x9 - i`` and ``x12 = x11 - i``
hold identically.  Two equivalent drift representations are provided:

* the *normative* form, whose damping of the mechanical ``<q p>`` moments is
  written symmetrically over the conjugate pair (rows 9-12).  In this form the
  differences ``x9 - x10`` and ``x11 - x12`` are exact constants of motion, so
  the 24x24 matrix carries two structural zero eigenvalues and is singular;
* the *solver* form, identical on the constraint surface, in which those
  differences relax at the mechanical damping rate toward their canonical
  values (the relaxation constants appear in ``b``).  This form is strictly
  Hurwitz whenever the physical modes are damped, has a unique steady state,
  and is what the linear solve, the stability gate and the integrator use.

Both forms are independently re-derived, term by term, by
:func:`derive_drift_oracle`, which mechanically expands the adjoint equations
of motion with the operator algebra of :mod:`squomech.algebra`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .algebra import A as OP_A
from .algebra import AD, P1, P2, Q1, Q2, Poly

N_MOMENTS = 24

#: ordered operator pair (left, right) defining each moment x1..x24
MOMENT_OPERATORS: tuple[tuple[int, int], ...] = (
    (AD, OP_A), (OP_A, AD), (Q1, Q1), (P1, P1), (Q2, Q2), (P2, P2),
    (OP_A, OP_A), (AD, AD), (Q1, P1), (P1, Q1), (Q2, P2), (P2, Q2),
    (OP_A, Q1), (AD, Q1), (OP_A, P1), (AD, P1), (OP_A, Q2), (AD, Q2),
    (OP_A, P2), (AD, P2), (Q1, Q2), (P1, P2), (Q1, P2), (Q2, P1),
)

# Ordered product -> moment slot.  Same-mode non-commuting products keep both
# orders as distinct slots; commuting products map either order to one slot.
_SLOT: dict[tuple[int, int], int] = {
    pair: k for k, pair in enumerate(MOMENT_OPERATORS)
}
for _k, (_g, _h) in enumerate(MOMENT_OPERATORS):
    _SLOT.setdefault((_h, _g), _k)

#: index pairs (k, l) with x_l the hermitian conjugate moment of x_k
CONJUGATE_PAIRS = ((7, 8), (13, 14), (15, 16), (17, 18), (19, 20))


class UnstableDriftError(RuntimeError):
    """The drift matrix is not strictly Hurwitz; no steady state exists."""

    def __init__(self, spectral_abscissa: float):
        self.spectral_abscissa = spectral_abscissa
        super().__init__(
            f"drift matrix is not Hurwitz (spectral abscissa {spectral_abscissa:.3e})"
        )


class SingularSystemError(RuntimeError):
    """The steady-state linear system is numerically singular."""


class StepTooLargeError(ValueError):
    """The requested integrator step violates the RK4 stability bound."""


@dataclass
class MomentVector:
    """The 24 complex second moments, indexable with the 1-based labels above."""

    x: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=complex)
        if self.x.shape != (N_MOMENTS,):
            raise ValueError("moment vector must have 24 entries")

    def __getitem__(self, label: int) -> complex:
        if not 1 <= label <= N_MOMENTS:
            raise IndexError("moment labels run from 1 to 24")
        return self.x[label - 1]

    def canonical_residuals(self) -> dict[str, float]:
        """Deviations from the operator identities the basis must satisfy."""
        res = {
            "x2 - x1 - 1": abs(self[2] - self[1] - 1.0),
            "x9 - x10 - i": abs(self[9] - self[10] - 1j),
            "x11 - x12 - i": abs(self[11] - self[12] - 1j),
        }
        for k, l in CONJUGATE_PAIRS:
            res[f"x{l} - conj(x{k})"] = abs(self[l] - np.conj(self[k]))
        return res


@dataclass
class DriftSystem:
    """Drift matrix, noise vector and stability data for one parameter point.

    ``a_matrix``/``b_vector`` hold the normative form; ``a_solver``/``b_solver``
    the equivalent strictly-damped form used for solving and for the Hurwitz
    gate (see module docstring).
    """

    a_matrix: np.ndarray
    b_vector: np.ndarray
    a_solver: np.ndarray
    b_solver: np.ndarray
    eigenvalues: np.ndarray
    spectral_abscissa: float
    stable: bool

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


def _drift_pair(
    delta_s: float,
    lambda_eff: tuple[complex, complex],
    kappa: float,
    omega_m: tuple[float, float],
    gamma_m: tuple[float, float],
    nbar_m: tuple[float, float],
    lambda_hop: float,
    n_s: float,
    m_s: complex,
    *,
    solver_form: bool,
    verbatim_rows_17_18: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Hand-coded assembly of (A, b).

    ``solver_form`` selects the strictly-damped representation of rows 9-12.
    ``verbatim_rows_17_18`` reproduces the source table's mechanical-frequency
    label in rows 17/18 (``omega_m[0]`` where the adjoint derivation gives
    ``omega_m[1]``); the two agree for degenerate mechanics.
    """
    L1, L2 = complex(lambda_eff[0]), complex(lambda_eff[1])
    L1c, L2c = L1.conjugate(), L2.conjugate()
    w1, w2 = omega_m
    g1, g2 = gamma_m
    n1, n2 = nbar_m
    lam = lambda_hop
    k = kappa
    iD = 1j * delta_s
    w_17 = w1 if verbatim_rows_17_18 else w2

    A = np.zeros((N_MOMENTS, N_MOMENTS), dtype=complex)
    b = np.zeros(N_MOMENTS, dtype=complex)

    # x1, x2: photon-number-like moments
    for r in (0, 1):
        A[r, r] = -k
        A[r, 13] += 1j * L1
        A[r, 12] += -1j * L1c
        A[r, 17] += 1j * L2
        A[r, 16] += -1j * L2c
    b[0] = k * n_s
    b[1] = k * (n_s + 1.0)

    # x3..x6: mechanical variances
    A[2, 8] = A[2, 9] = w1
    A[3, 3] = -2.0 * g1
    A[3, 8] = A[3, 9] = -w1
    A[3, 15] = 2.0 * L1
    A[3, 14] = 2.0 * L1c
    A[3, 23] = -2.0 * lam
    b[3] = 2.0 * g1 * n1
    A[4, 10] = A[4, 11] = w2
    A[5, 5] = -2.0 * g2
    A[5, 10] = A[5, 11] = -w2
    A[5, 19] = 2.0 * L2
    A[5, 18] = 2.0 * L2c
    A[5, 22] = -2.0 * lam
    b[5] = 2.0 * g2 * n2

    # x7, x8: optical anomalous moments
    A[6, 6] = -(2.0 * iD + k)
    A[6, 12] = 2j * L1
    A[6, 16] = 2j * L2
    b[6] = k * m_s.conjugate()
    A[7, 7] = 2.0 * iD - k
    A[7, 13] = -2j * L1c
    A[7, 17] = -2j * L2c
    b[7] = k * m_s

    # x9..x12: mechanical <q p> moments.  The two representations differ only
    # here: symmetric split with no constant, or diagonal damping with the
    # canonical-commutator relaxation constant in b.
    for r, (gm, wm, cs, cc, hop) in (
        (8, (g1, w1, 12, 13, 20)),
        (9, (g1, w1, 12, 13, 20)),
        (10, (g2, w2, 16, 17, 20)),
        (11, (g2, w2, 16, 17, 20)),
    ):
        var_lo = 2 if r < 10 else 4
        A[r, var_lo] = -wm
        A[r, var_lo + 1] = wm
        A[r, hop] = -lam
        Lj = L1 if r < 10 else L2
        A[r, cs] = Lj.conjugate()
        A[r, cc] = Lj
        if solver_form:
            A[r, r] = -gm
            b[r] = 0.5j * gm if r % 2 == 0 else -0.5j * gm
        else:
            pair = (8, 9) if r < 10 else (10, 11)
            A[r, pair[0]] = A[r, pair[1]] = -0.5 * gm

    # x13..x20: optomechanical cross moments
    A[12, 12] = -(iD + 0.5 * k)
    A[12, 14] = w1
    A[12, 2] = 1j * L1
    A[12, 20] = 1j * L2
    A[13, 13] = iD - 0.5 * k
    A[13, 15] = w1
    A[13, 2] = -1j * L1c
    A[13, 20] = -1j * L2c
    A[14, 14] = -(iD + g1 + 0.5 * k)
    A[14, 12] = -w1
    A[14, 6] = L1c
    A[14, 1] = L1
    A[14, 8] = 1j * L1
    A[14, 23] = 1j * L2
    A[14, 16] = -lam
    A[15, 15] = iD - g1 - 0.5 * k
    A[15, 13] = -w1
    A[15, 7] = L1
    A[15, 0] = L1c
    A[15, 8] = -1j * L1c
    A[15, 23] = -1j * L2c
    A[15, 17] = -lam
    A[16, 16] = -(iD + 0.5 * k)
    A[16, 18] = w_17
    A[16, 20] = 1j * L1
    A[16, 4] = 1j * L2
    A[17, 17] = iD - 0.5 * k
    A[17, 19] = w_17
    A[17, 20] = -1j * L1c
    A[17, 4] = -1j * L2c
    A[18, 18] = -(iD + g2 + 0.5 * k)
    A[18, 16] = -w2
    A[18, 22] = 1j * L1
    A[18, 1] = L2
    A[18, 6] = L2c
    A[18, 10] = 1j * L2
    A[18, 12] = -lam
    A[19, 19] = iD - g2 - 0.5 * k
    A[19, 17] = -w2
    A[19, 22] = -1j * L1c
    A[19, 0] = L2c
    A[19, 7] = L2
    A[19, 10] = -1j * L2c
    A[19, 13] = -lam

    # x21..x24: mechanical cross moments
    A[20, 23] = w1
    A[20, 22] = w2
    A[21, 21] = -(g1 + g2)
    A[21, 22] = -w1
    A[21, 23] = -w2
    A[21, 9] = -lam
    A[21, 10] = -lam
    A[21, 19] = L1
    A[21, 18] = L1c
    A[21, 15] = L2
    A[21, 14] = L2c
    A[22, 22] = -g2
    A[22, 21] = w1
    A[22, 20] = -w2
    A[22, 2] = -lam
    A[22, 13] = L2
    A[22, 12] = L2c
    A[23, 23] = -g1
    A[23, 20] = -w1
    A[23, 21] = w2
    A[23, 4] = -lam
    A[23, 17] = L1
    A[23, 16] = L1c

    return A, b


def drift_matrices(
    delta_s: float,
    lambda_eff: tuple[complex, complex],
    kappa: float,
    omega_m: tuple[float, float],
    gamma_m: tuple[float, float],
    nbar_m: tuple[float, float],
    lambda_hop: float,
    n_s: float,
    m_s: complex,
    form: str = "solver",
) -> tuple[np.ndarray, np.ndarray]:
    """(A, b) in the requested representation.

    ``form``: ``"solver"`` (strictly damped), ``"normative"`` (symmetric rows
    9-12, derived mechanical frequency in rows 17/18) or ``"verbatim"``
    (symmetric rows 9-12 and the source table's rows 17/18 as printed).
    """
    if form not in ("solver", "normative", "verbatim"):
        raise ValueError(f"unknown drift form {form!r}")
    return _drift_pair(
        delta_s, lambda_eff, kappa, omega_m, gamma_m, nbar_m, lambda_hop, n_s, m_s,
        solver_form=form == "solver",
        verbatim_rows_17_18=form == "verbatim",
    )


#: strict Hurwitz threshold: marginal systems count as unstable
STABILITY_THRESHOLD = -1e-12


def build_drift(
    delta_s: float,
    lambda_eff: tuple[complex, complex],
    kappa: float,
    omega_m: tuple[float, float],
    gamma_m: tuple[float, float],
    nbar_m: tuple[float, float],
    lambda_hop: float,
    n_s: float,
    m_s: complex,
) -> DriftSystem:
    """Assemble the drift system and evaluate its stability.

    Eigenvalues and the Hurwitz flag come from the solver form, whose spectrum
    equals the normative one except that the two structural zero modes of the
    redundant basis are replaced by physical relaxations at ``-gamma_m[j]``.
    """
    args = (delta_s, lambda_eff, kappa, omega_m, gamma_m, nbar_m, lambda_hop, n_s, m_s)
    a_norm, b_norm = drift_matrices(*args, form="normative")
    a_sol, b_sol = drift_matrices(*args, form="solver")
    eigenvalues = np.linalg.eigvals(a_sol)
    abscissa = float(np.max(eigenvalues.real))
    return DriftSystem(
        a_matrix=a_norm,
        b_vector=b_norm,
        a_solver=a_sol,
        b_solver=b_sol,
        eigenvalues=eigenvalues,
        spectral_abscissa=abscissa,
        stable=abscissa < STABILITY_THRESHOLD,
    )


# --- independent derivation (oracle) ----------------------------------------


def _hamiltonian(
    delta_s: float,
    lambda_eff: tuple[complex, complex],
    omega_m: tuple[float, float],
    lambda_hop: float,
) -> Poly:
    L1, L2 = complex(lambda_eff[0]), complex(lambda_eff[1])
    w1, w2 = omega_m
    return alg.poly(
        (delta_s, (AD, OP_A)),
        (0.5 * w1, (P1, P1)), (0.5 * w1, (Q1, Q1)),
        (0.5 * w2, (P2, P2)), (0.5 * w2, (Q2, Q2)),
        (-L1, (AD, Q1)), (-L1.conjugate(), (OP_A, Q1)),
        (-L2, (AD, Q2)), (-L2.conjugate(), (OP_A, Q2)),
        (lambda_hop, (Q1, Q2)),
    )


def _lindblad_adjoint(op: Poly, c: Poly, c_dag: Poly, weight: complex) -> Poly:
    """weight * (2 c+ O c - c+ c O - O c+ c), the adjoint of a dissipator."""
    cdc = alg.pmul(c_dag, c)
    return alg.pscale(
        alg.padd(
            alg.pscale(alg.pmul(alg.pmul(c_dag, op), c), 2.0),
            alg.pscale(alg.pmul(cdc, op), -1.0),
            alg.pscale(alg.pmul(op, cdc), -1.0),
        ),
        weight,
    )


def _correlation_adjoint(op: Poly, c: Poly, weight: complex) -> Poly:
    """weight * (2 c O c - O c c - c c O), adjoint of the two-photon term."""
    cc = alg.pmul(c, c)
    return alg.pscale(
        alg.padd(
            alg.pscale(alg.pmul(alg.pmul(c, op), c), 2.0),
            alg.pscale(alg.pmul(op, cc), -1.0),
            alg.pscale(alg.pmul(cc, op), -1.0),
        ),
        weight,
    )


def _optical_adjoint(op: Poly, kappa: float, n_s: float, m_s: complex) -> Poly:
    a, ad = alg.gen(OP_A), alg.gen(AD)
    return alg.padd(
        _lindblad_adjoint(op, a, ad, 0.5 * kappa * (n_s + 1.0)),
        _lindblad_adjoint(op, ad, a, 0.5 * kappa * n_s),
        _correlation_adjoint(op, a, -0.5 * kappa * m_s),
        _correlation_adjoint(op, ad, -0.5 * kappa * m_s.conjugate()),
    )


def _brownian_adjoint(op: Poly, gamma_m, nbar_m) -> Poly:
    """Adjoint of the mechanical friction-plus-diffusion dissipators.

    Friction: -i (gamma/2) (O q p + p O q - q O p - p q O); diffusion:
    -gamma nbar [q, [q, O]].
    """
    parts = []
    for gm, nb, qi, pi in ((gamma_m[0], nbar_m[0], Q1, P1), (gamma_m[1], nbar_m[1], Q2, P2)):
        q, p = alg.gen(qi), alg.gen(pi)
        friction = alg.padd(
            alg.pmul(alg.pmul(op, q), p),
            alg.pmul(alg.pmul(p, op), q),
            alg.pscale(alg.pmul(alg.pmul(q, op), p), -1.0),
            alg.pscale(alg.pmul(alg.pmul(p, q), op), -1.0),
        )
        parts.append(alg.pscale(friction, -0.5j * gm))
        parts.append(
            alg.pscale(alg.commutator(q, alg.commutator(q, op)), -gm * nb)
        )
    return alg.padd(*parts)


def _linear_drift(gen_index: int, ham: Poly, kappa: float, n_s: float,
                  m_s: complex, gamma_m, nbar_m) -> dict[int, complex]:
    """Drift coefficients of one generator under the full adjoint generator."""
    g = alg.gen(gen_index)
    total = alg.padd(
        alg.pscale(alg.commutator(ham, g), 1j),
        _optical_adjoint(g, kappa, n_s, m_s),
        _brownian_adjoint(g, gamma_m, nbar_m),
    )
    const, linear, rest = alg.split_by_degree(total)
    if rest or abs(const) > 0:
        raise AssertionError(
            f"drift of generator {alg.GENERATOR_NAMES[gen_index]} is not linear: "
            f"{alg.format_poly(total)}"
        )
    return linear


def derive_drift_oracle(
    delta_s: float,
    lambda_eff: tuple[complex, complex],
    kappa: float,
    omega_m: tuple[float, float],
    gamma_m: tuple[float, float],
    nbar_m: tuple[float, float],
    lambda_hop: float,
    n_s: float,
    m_s: complex,
    form: str = "normative",
) -> tuple[np.ndarray, np.ndarray]:
    """Re-derive (A, b) mechanically from the adjoint equations of motion.

    For each moment ``x_k = <g h>`` the row is built from exact operator
    identities, never from the hand-coded table:

    * Hamiltonian and optical dissipators obey a Leibniz split
      ``L+(g h) = L+(g) h + g L+(h) + D(g, h)`` with linear drifts ``L+(g)``
      and a scalar diffusion ``D`` that the algebra engine evaluates and
      checks; drift terms keep their literal operator order, which maps each
      product onto its moment slot.
    * The mechanical friction uses either the exact anticommutator identity
      ``-i (gamma/2) {[O, q], p}`` (``form="normative"``: damping lands
      symmetrically on conjugate <q p> pairs) or the same Leibniz split
      (``form="solver"``: diagonal damping plus scalar relaxation constants).
    """
    if form not in ("normative", "solver"):
        raise ValueError(f"unknown oracle form {form!r}")
    ham = _hamiltonian(delta_s, lambda_eff, omega_m, lambda_hop)
    zero_noise_gamma = gamma_m if form == "solver" else (0.0, 0.0)
    drifts = {
        g: _linear_drift(g, ham, kappa, n_s, m_s, zero_noise_gamma, nbar_m)
        for g in range(6)
    }

    A = np.zeros((N_MOMENTS, N_MOMENTS), dtype=complex)
    b = np.zeros(N_MOMENTS, dtype=complex)
    comm_scalar = {
        (P1, Q1): -1j, (Q1, P1): 1j, (P2, Q2): -1j, (Q2, P2): 1j,
        (OP_A, AD): 1.0, (AD, OP_A): -1.0,
    }

    for row, (g, h) in enumerate(MOMENT_OPERATORS):
        # drift contributions, literal operator order preserved
        for c_gen, coeff in drifts[g].items():
            A[row, _SLOT[(c_gen, h)]] += coeff
        for c_gen, coeff in drifts[h].items():
            A[row, _SLOT[(g, c_gen)]] += coeff

        gh = alg.pmul(alg.gen(g), alg.gen(h))

        # optical diffusion: scalar remainder of the Leibniz split
        opt_full = _optical_adjoint(gh, kappa, n_s, m_s)
        opt_drift = alg.padd(
            alg.pmul(_optical_adjoint(alg.gen(g), kappa, n_s, m_s), alg.gen(h)),
            alg.pmul(alg.gen(g), _optical_adjoint(alg.gen(h), kappa, n_s, m_s)),
        )
        b[row] += alg.constant_part(
            alg.padd(opt_full, alg.pscale(opt_drift, -1.0))
        )

        # mechanical friction and diffusion
        for gm, nb, qi, pi in (
            (gamma_m[0], nbar_m[0], Q1, P1),
            (gamma_m[1], nbar_m[1], Q2, P2),
        ):
            if form == "normative":
                # -i (gamma/2) { [g h, q], p } with [g h, q] = [h,q] g + [g,q] h
                alpha = comm_scalar.get((h, qi), 0.0)
                beta = comm_scalar.get((g, qi), 0.0)
                if alpha:
                    A[row, _SLOT[(g, pi)]] += -0.5j * gm * alpha
                    A[row, _SLOT[(pi, g)]] += -0.5j * gm * alpha
                if beta:
                    A[row, _SLOT[(h, pi)]] += -0.5j * gm * beta
                    A[row, _SLOT[(pi, h)]] += -0.5j * gm * beta
            else:
                # friction drift already included via drifts[]; keep the
                # scalar remainder of its Leibniz split
                friction_full = _brownian_adjoint(gh, (gm, 0.0) if qi == Q1 else (0.0, gm), (0.0, 0.0))
                friction_drift = alg.padd(
                    alg.pscale(alg.pmul(alg.gen(pi), alg.gen(h)), -gm if g == pi else 0.0),
                    alg.pscale(alg.pmul(alg.gen(g), alg.gen(pi)), -gm if h == pi else 0.0),
                )
                b[row] += alg.constant_part(
                    alg.padd(friction_full, alg.pscale(friction_drift, -1.0))
                )
            # thermal diffusion -gamma nbar [q, [q, g h]] is a pure scalar
            q = alg.gen(qi)
            b[row] += alg.constant_part(
                alg.pscale(alg.commutator(q, alg.commutator(q, gh)), -gm * nb)
            )

    return A, b


# --- steady state and time evolution -----------------------------------------


def steady_moments(
    system: DriftSystem,
    *,
    residual_tol: float = 1e-10,
    condition_limit: float = 1e12,
) -> MomentVector:
    """Steady moments from a dense linear solve of the solver-form system.

    Refuses unstable systems.  The solution automatically satisfies the
    canonical identities of the redundant basis and therefore also zeroes the
    normative-form residual.
    """
    if not system.stable:
        raise UnstableDriftError(system.spectral_abscissa)
    cond = np.linalg.cond(system.a_solver)
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularSystemError(
            f"steady-state system condition estimate {cond:.3e} exceeds limit"
        )
    x = np.linalg.solve(system.a_solver, -system.b_solver)
    scale = max(float(np.max(np.abs(system.b_solver))), 1.0)
    residual = float(np.max(np.abs(system.a_solver @ x + system.b_solver)))
    if residual > residual_tol * scale:
        raise SingularSystemError(
            f"steady-state residual {residual:.3e} exceeds tolerance"
        )
    return MomentVector(x)


def _rk4_step_map(a: np.ndarray, b: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step of dx/dt = A x + b as the affine map x -> M x + c."""
    eye = np.eye(a.shape[0], dtype=complex)
    da = dt * a
    m = eye + da @ (eye + da @ (eye / 2.0 + da @ (eye / 6.0 + da / 24.0)))
    c = dt * ((eye + da @ (eye / 2.0 + da @ (eye / 6.0 + da / 24.0))) @ b)
    return m, c


def evolve_moments(
    system: DriftSystem,
    x0: MomentVector | np.ndarray | None,
    t_final: float,
    dt: float | None = None,
    *,
    max_direct_steps: int = 20_000,
) -> MomentVector:
    """Propagate the solver-form moment ODE with classical fixed-step RK4.

    ``dt`` defaults to ``1.5 / spectral_radius``; any requested step must keep
    ``dt * spectral_radius < 2`` (the RK4 stability bound used here).  Beyond
    ``max_direct_steps`` the constant-step recurrence is composed by repeated
    squaring of the one-step affine map, which reproduces the same propagation
    up to floating-point reassociation.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    rho = system.spectral_radius
    if dt is None:
        dt = 1.5 / rho if rho > 0 else max(t_final / 100.0, 1e-3)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt * rho >= 2.0:
        raise StepTooLargeError(
            f"dt * spectral_radius = {dt * rho:.3f} violates the RK4 bound (< 2)"
        )
    if x0 is None:
        x = np.zeros(N_MOMENTS, dtype=complex)
    elif isinstance(x0, MomentVector):
        x = x0.x.astype(complex).copy()
    else:
        x = np.asarray(x0, dtype=complex).copy()

    n_steps = int(math.ceil(t_final / dt)) if t_final > 0 else 0
    if n_steps == 0:
        return MomentVector(x)
    m, c = _rk4_step_map(system.a_solver, system.b_solver, dt)
    if n_steps <= max_direct_steps:
        for _ in range(n_steps):
            x = m @ x + c
    else:
        # binary-power composition of the affine step map
        remaining = n_steps
        while remaining:
            if remaining & 1:
                x = m @ x + c
            remaining >>= 1
            if remaining:
                c = m @ c + c
                m = m @ m
    return MomentVector(x)
