"""Univariate polynomials over Q: factorization and resonance probes.

Polynomials are lists of Fraction coefficients, low degree first.  The
heavy lifting (irreducible factorization over Q) is delegated to sympy;
everything else is a few lines of exact arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

from .series import q

_T = sympy.Symbol("_t")


def _to_sympy(coeffs):
    return sympy.Poly(
        [sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)],
        _T,
        domain="QQ",
    )


def _from_sympy(poly):
    cs = poly.all_coeffs()
    return [Fraction(int(c.p), int(c.q)) for c in reversed(cs)]


def factor_rational(coeffs):
    """Irreducible factorization over Q.

    Returns (constant, [(factor_coeffs, multiplicity), ...]) with monic
    factors, low-degree-first coefficient lists.
    """
    coeffs = [q(c) for c in coeffs]
    poly = _to_sympy(coeffs)
    const, factors = poly.factor_list()
    out = []
    for f, mult in factors:
        fc = _from_sympy(sympy.Poly(f, _T))
        lead = fc[-1]
        if lead != 1:
            fc = [c / lead for c in fc]
        out.append((fc, int(mult)))
    return Fraction(int(sympy.Rational(const).p), int(sympy.Rational(const).q)), out


def rational_roots(coeffs):
    """Rational roots with multiplicities: [(root, mult), ...]."""
    _, factors = factor_rational(coeffs)
    out = []
    for fc, mult in factors:
        if len(fc) == 2:  # monic linear: c0 + t
            out.append((-fc[0], mult))
    return out


def poly_eval(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_shift(coeffs, a: Fraction):
    """Coefficients of p(t + a)."""
    out = [Fraction(0)] * len(coeffs)
    for c in reversed(coeffs):
        # multiply accumulated by (t + a), then add c
        carry = Fraction(0)
        new = [Fraction(0)] * len(coeffs)
        for i in range(len(out) - 1, 0, -1):
            new[i] = out[i - 1]
        for i in range(len(out)):
            new[i] += out[i] * a
        new[0] += c
        out = new
    return out


def poly_gcd_degree(a, b) -> int:
    """Degree of gcd over Q (0 means coprime)."""
    pa, pb = _to_sympy([q(c) for c in a]), _to_sympy([q(c) for c in b])
    return int(sympy.degree(sympy.gcd(pa, pb), _T) or 0)


def integer_difference_possible(f, g, max_shift: int) -> bool:
    """True if some root of f equals a root of g plus a nonzero integer k
    with 1 <= k <= max_shift (used to pre-screen resonances)."""
    for k in range(1, max_shift + 1):
        if poly_gcd_degree(f, poly_shift(g, Fraction(-k))) > 0:
            return True
    return False
