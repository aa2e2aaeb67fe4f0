"""Tiny normal-ordering algebra over the six mode operators.

Operators are polynomials in the generators (a_dag, a, q1, p1, q2, p2) with
complex coefficients, represented as ``{monomial_tuple: coefficient}`` where a
monomial is a tuple of generator indices.  Canonical form sorts every monomial
ascending in the fixed generator order, inserting the scalar commutators
``[a, a_dag] = 1`` and ``[p_j, q_j] = -i`` while swapping.

This is deliberately minimal: the moment-equation oracle only ever needs
degree <= 4, six generators and exact Leibniz bookkeeping, for which a dict of
tuples beats pulling in a full CAS.
"""

from __future__ import annotations

AD, A, Q1, P1, Q2, P2 = range(6)
GENERATOR_NAMES = ("ad", "a", "q1", "p1", "q2", "p2")

# [g, h] for the descending-ordered pairs that do not commute.
_COMM: dict[tuple[int, int], complex] = {
    (A, AD): 1.0 + 0.0j,
    (P1, Q1): -1.0j,
    (P2, Q2): -1.0j,
}

Poly = dict[tuple[int, ...], complex]


def poly(*terms: tuple[complex, tuple[int, ...]]) -> Poly:
    """Build a canonical polynomial from (coefficient, monomial) pairs."""
    out: Poly = {}
    for coeff, mono in terms:
        _reduce(tuple(mono), complex(coeff), out)
    return _prune(out)


def gen(index: int) -> Poly:
    return {(index,): 1.0 + 0.0j}


def scalar(value: complex) -> Poly:
    return {(): complex(value)} if value != 0 else {}


def _reduce(mono: tuple[int, ...], coeff: complex, out: Poly) -> None:
    for i in range(len(mono) - 1):
        g, h = mono[i], mono[i + 1]
        if g > h:
            _reduce(mono[:i] + (h, g) + mono[i + 2 :], coeff, out)
            comm = _COMM.get((g, h))
            if comm is not None:
                _reduce(mono[:i] + mono[i + 2 :], coeff * comm, out)
            return
    out[mono] = out.get(mono, 0.0) + coeff


def _prune(p: Poly) -> Poly:
    return {m: c for m, c in p.items() if c != 0}


def padd(*polys: Poly) -> Poly:
    out: Poly = {}
    for p in polys:
        for m, c in p.items():
            out[m] = out.get(m, 0.0) + c
    return _prune(out)


def pscale(p: Poly, factor: complex) -> Poly:
    if factor == 0:
        return {}
    return {m: c * factor for m, c in p.items()}


def pmul(p1: Poly, p2: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            _reduce(m1 + m2, c1 * c2, out)
    return _prune(out)


def commutator(p1: Poly, p2: Poly) -> Poly:
    return padd(pmul(p1, p2), pscale(pmul(p2, p1), -1.0))


def dagger(p: Poly) -> Poly:
    """Hermitian adjoint: reverse each monomial, swap a <-> a_dag, conjugate."""
    swap = {AD: A, A: AD, Q1: Q1, P1: P1, Q2: Q2, P2: P2}
    out: Poly = {}
    for m, c in p.items():
        _reduce(tuple(swap[g] for g in reversed(m)), c.conjugate(), out)
    return _prune(out)


def degree(p: Poly) -> int:
    return max((len(m) for m in p), default=0)


def split_by_degree(p: Poly) -> tuple[complex, dict[int, complex], Poly]:
    """Return (constant, {generator: coeff} linear part, remainder)."""
    const = 0.0 + 0.0j
    linear: dict[int, complex] = {}
    rest: Poly = {}
    for m, c in p.items():
        if len(m) == 0:
            const += c
        elif len(m) == 1:
            linear[m[0]] = linear.get(m[0], 0.0) + c
        else:
            rest[m] = c
    return const, linear, _prune(rest)


def constant_part(p: Poly) -> complex:
    """The scalar part of ``p``; raises if any operator content remains."""
    const, linear, rest = split_by_degree(p)
    if linear or rest:
        raise ValueError(f"polynomial is not a scalar: {format_poly(p)}")
    return const


def format_poly(p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for m in sorted(p, key=lambda mono: (len(mono), mono)):
        name = " ".join(GENERATOR_NAMES[g] for g in m) or "1"
        parts.append(f"({p[m]:.6g}) {name}")
    return " + ".join(parts)
