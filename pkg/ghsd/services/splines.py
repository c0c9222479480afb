"""
〰️ Spline Oracles
Exact piecewise polynomials: B-splines, the Hermite interpolants theta_l,
the generalized Hermite interpolants of the spline spaces S_{m,N}, printed
basis functions of the worked examples, and refinement-residual checks.

Pieces live on left-open / right-closed intervals (b_i, b_{i+1}]; a spline
is zero at and left of its first breakpoint and right of its last one.
"""

import json
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import Poly, QQ, Rational, Symbol

from services.core import (
    AnalysisError,
    HermiteType,
    Mask,
    RegistryError,
    ZERO,
    format_rational,
    from_sympy_rational,
    to_fraction,
)

Number = Union[int, Fraction]
_VAR = Symbol("x")


# =========================================================================
# Polynomial
# =========================================================================

@dataclass(frozen=True)
class Polynomial:
    """
    Univariate polynomial over Q, coefficients in ascending order.

    Arithmetic runs on sympy.Poly over QQ; the Fraction tuple is the
    stored form.
    """
    coeffs: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls((Fraction(c),))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((ZERO, Fraction(1)))

    @classmethod
    def linear(cls, slope: Number, intercept: Number) -> "Polynomial":
        return cls((Fraction(intercept), Fraction(slope)))

    @classmethod
    def from_poly(cls, p: Poly) -> "Polynomial":
        return cls(tuple(from_sympy_rational(c) for c in reversed(p.all_coeffs())))

    @property
    def poly(self) -> Poly:
        rep = [Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)]
        return Poly.from_list(rep or [0], _VAR, domain=QQ)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: Number) -> Fraction:
        result = ZERO
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def __add__(self, other) -> "Polynomial":
        return Polynomial.from_poly(self.poly + _as_poly(other).poly)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Polynomial":
        return Polynomial.from_poly(self.poly - _as_poly(other).poly)

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        return Polynomial.from_poly(self.poly * _as_poly(other).poly)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        return Polynomial.from_poly(self.poly ** n)

    def derivative(self, order: int = 1) -> "Polynomial":
        if order == 0:
            return self
        return Polynomial.from_poly(self.poly.diff((_VAR, order)))

    def antiderivative(self) -> "Polynomial":
        """Primitive vanishing at 0."""
        return Polynomial.from_poly(self.poly.integrate())

    def compose_affine(self, a: Number, b: Number) -> "Polynomial":
        """p(a x + b)."""
        return Polynomial.from_poly(self.poly.compose(Polynomial.linear(a, b).poly))

    def truncated_reciprocal(self, n: int) -> "Polynomial":
        """Taylor polynomial of degree n of 1/p at 0, the inverse of p modulo x^{n+1}."""
        if not self.coeffs or self.coeffs[0] == 0:
            raise AnalysisError("non-invertible germ")
        modulus = Poly.from_list([1] + [0] * (n + 1), _VAR, domain=QQ)
        return Polynomial.from_poly(self.poly.invert(modulus))

    def truncate(self, n: int) -> "Polynomial":
        return Polynomial(self.coeffs[: n + 1])

    def to_list(self) -> List[str]:
        return [format_rational(c) for c in self.coeffs]


def _as_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial.constant(value)


X = Polynomial.x()


# =========================================================================
# Piecewise polynomials
# =========================================================================

@dataclass(frozen=True)
class PiecewisePoly:
    """pieces[i] lives on (breakpoints[i], breakpoints[i+1]]."""
    breakpoints: Tuple[Fraction, ...]
    pieces: Tuple[Polynomial, ...]

    def __post_init__(self):
        bp = tuple(Fraction(b) for b in self.breakpoints)
        if len(bp) != len(self.pieces) + 1:
            raise AnalysisError("piecewise polynomial needs one more breakpoint than pieces")
        if any(b >= c for b, c in zip(bp, bp[1:])):
            raise AnalysisError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @classmethod
    def on_integers(cls, start: int, pieces: Sequence[Polynomial]) -> "PiecewisePoly":
        return cls(tuple(range(start, start + len(pieces) + 1)), tuple(pieces))

    @property
    def support(self) -> Tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.pieces), default=0)

    def piece_index(self, x: Number) -> Optional[int]:
        i = bisect_left(self.breakpoints, Fraction(x)) - 1
        if i < 0 or i >= len(self.pieces):
            return None
        return i

    def __call__(self, x: Number) -> Fraction:
        i = self.piece_index(x)
        return ZERO if i is None else self.pieces[i](Fraction(x))

    def derivative(self, order: int = 1) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple(p.derivative(order) for p in self.pieces))

    def scale(self, c: Number) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple(p * Fraction(c) for p in self.pieces))

    def to_dict(self) -> Dict:
        return {
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "pieces": [p.to_list() for p in self.pieces],
        }


def evaluate(f: Union[PiecewisePoly, "TensorSpline"], x) -> Fraction:
    return f(x)


def derivative(f: PiecewisePoly, order: int = 1) -> PiecewisePoly:
    return f.derivative(order)


@dataclass(frozen=True)
class TensorSpline:
    """Product f_1(x_1) ... f_d(x_d), evaluated lazily."""
    factors: Tuple[PiecewisePoly, ...]

    @property
    def dim(self) -> int:
        return len(self.factors)

    def __call__(self, x: Sequence) -> Fraction:
        result = Fraction(1)
        for f, xi in zip(self.factors, x):
            result *= f(xi)
            if result == 0:
                break
        return result

    def derivative(self, mu: Sequence[int]) -> "TensorSpline":
        return TensorSpline(tuple(f.derivative(m) for f, m in zip(self.factors, mu)))


def tensor_spline(*factors: PiecewisePoly) -> TensorSpline:
    return TensorSpline(tuple(factors))


@dataclass
class SplineVector:
    """phi = [phi_1, ..., phi_r]^T with an optional declared type."""
    components: List[Union[PiecewisePoly, TensorSpline]]
    htype: Optional[HermiteType] = None

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        first = self.components[0]
        return first.dim if isinstance(first, TensorSpline) else 1

    def __call__(self, x) -> Tuple[Fraction, ...]:
        return tuple(f(x) for f in self.components)

    def derivative(self, mu) -> "SplineVector":
        if self.dim == 1:
            order = mu[0] if isinstance(mu, (tuple, list)) else mu
            return SplineVector([f.derivative(order) for f in self.components], self.htype)
        return SplineVector([f.derivative(mu) for f in self.components], self.htype)

    def hull(self) -> Tuple[Fraction, Fraction]:
        """Smallest interval containing every 1D component support."""
        lows = [f.support[0] for f in self.components]
        highs = [f.support[1] for f in self.components]
        return min(lows), max(highs)

    def breakpoints(self) -> List[Fraction]:
        points = set()
        for f in self.components:
            points.update(f.breakpoints)
        return sorted(points)

    def to_dict(self) -> Dict:
        data = {"components": [f.to_dict() for f in self.components]}
        if self.htype is not None:
            data.update(self.htype.to_dict())
        return data


def dump_spline(phi: SplineVector, path: Optional[str] = None) -> str:
    """Spline JSON (breakpoints and ascending coefficient lists as rational strings)."""
    text = json.dumps(phi.to_dict(), indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    return text


# =========================================================================
# B-splines and Hermite interpolants
# =========================================================================

def bspline(n: int) -> PiecewisePoly:
    """B_1 = chi_(0,1], B_n = B_{n-1} * B_1; support [0, n]."""
    if n < 1:
        raise AnalysisError("B-spline order must be >= 1")
    pieces = [Polynomial.constant(1)]
    for order in range(2, n + 1):
        primitives = [p.antiderivative() for p in pieces]
        new_pieces = []
        for k in range(order):
            # x in (k, k+1]: int_{x-1}^{k} B(t) dt over piece k-1 plus int_{k}^{x} over piece k
            total = Polynomial()
            if 0 <= k - 1 < len(primitives):
                prim = primitives[k - 1]
                total = total + (prim(Fraction(k)) - prim.compose_affine(1, -1))
            if k < len(primitives):
                prim = primitives[k]
                total = total + (prim - prim(Fraction(k)))
            new_pieces.append(total)
        pieces = new_pieces
    return PiecewisePoly.on_integers(0, pieces)


def hermite_theta(m: int) -> SplineVector:
    """
    theta_l on (0,1] = (1-x)^{m+1} x^l / l! sum_{j<=m-l} binom(m+j, j) x^j,
    extended by theta_l(x) = (-1)^l theta_l(-x) on (-1,0].
    """
    if m < 0:
        raise AnalysisError("m must be >= 0")
    one_minus = Polynomial.linear(-1, 1) ** (m + 1)
    components = []
    for ell in range(m + 1):
        series = Polynomial(tuple(Fraction(comb(m + j, j)) for j in range(m - ell + 1)))
        right = one_minus * (X ** ell) * Fraction(1, factorial(ell)) * series
        left = right.compose_affine(-1, 0) * ((-1) ** ell)
        components.append(PiecewisePoly((-1, 0, 1), (left, right)))
    return SplineVector(components, HermiteType.univariate(list(range(m + 1))))


def example12_interpolant(m: int, n_copies: int) -> SplineVector:
    """
    Generalized Hermite interpolant generating the C^m splines of degree
    < (m+1)(N+1) with breakpoints on Z: Lambda = N copies of {0..m},
    T = N copies each of 0, 1/N, ..., (N-1)/N.
    """
    if m < 0 or n_copies < 1:
        raise AnalysisError("need m >= 0 and N >= 1")
    r = (m + 1) * n_copies
    nus = [(ell - 1) % (m + 1) for ell in range(1, r + 1)]
    taus = [Fraction((ell - 1) // (m + 1), n_copies) for ell in range(1, r + 1)]
    components = []
    for nu, tau in zip(nus, taus):
        p = Polynomial.constant(1)
        for k in range(n_copies + 1):
            if k == n_copies * tau:
                continue
            p = p * Polynomial.linear(1, -Fraction(k, n_copies)) ** (m + 1)
        shifted = p.compose_affine(1, tau)
        # q(x + tau) = x^nu / (nu! p(x + tau)) + O(x^{m+1})
        local = (X ** nu * shifted.truncated_reciprocal(m)).truncate(m) * Fraction(1, factorial(nu))
        q = local.compose_affine(1, -tau)
        right = p * q
        if tau == 0:
            left = right.compose_affine(-1, 0) * ((-1) ** nu)
            components.append(PiecewisePoly((-1, 0, 1), (left, right)))
        else:
            components.append(PiecewisePoly((-1, 0, 1), (Polynomial(), right)))
    htype = HermiteType.univariate(nus, taus)
    return SplineVector(components, htype)


# =========================================================================
# Verification
# =========================================================================

@dataclass
class ResidualResult:
    max_abs: Fraction
    witness: Optional[Dict] = None

    @property
    def ok(self) -> bool:
        return self.max_abs == 0


def _check_points(phi: SplineVector, margin: int = 1) -> List[Fraction]:
    """deg + 1 interior points of every half-integer cell of the hull plus a margin."""
    lo, hi = phi.hull()
    deg = max(f.degree for f in phi.components)
    start = (lo - margin) * 2
    stop = (hi + margin) * 2
    points = []
    cell = Fraction(int(start) - 1, 2) if start.denominator == 1 else Fraction(int(start), 2)
    while cell < Fraction(stop, 2):
        for j in range(1, deg + 2):
            points.append(cell + Fraction(j, 2 * (deg + 2)))
        cell += Fraction(1, 2)
    return points


def refinement_residual(phi: SplineVector, mask: Mask) -> ResidualResult:
    """
    max |phi(x) - 2 sum_k a(k) phi(2x - k)| over exact check points.

    Breakpoints of phi(2x - k) are half-integers for integer-breakpoint
    splines, so deg + 1 points per half cell certify the identity.
    """
    if mask.dim != 1 or mask.multiplicity != phi.size:
        raise AnalysisError("spline and mask sizes do not agree")
    r = phi.size
    worst = ZERO
    witness = None
    for x in _check_points(phi):
        lhs = phi(x)
        rhs = [ZERO] * r
        for k, a in mask.coeffs.items():
            values = phi(2 * x - k[0])
            for i in range(r):
                rhs[i] += 2 * sum((a[i][j] * values[j] for j in range(r)), ZERO)
        for i in range(r):
            diff = abs(lhs[i] - rhs[i])
            if diff > worst:
                worst = diff
                witness = {"x": format_rational(x), "component": i + 1,
                           "residual": format_rational(lhs[i] - rhs[i])}
    return ResidualResult(max_abs=worst, witness=witness)


def interpolation_check(phi: SplineVector, htype: HermiteType, window: int = 3) -> bool:
    """phi^{(nu_l)}(k + tau_l) = delta(k) e_l for |k| <= window (d = 1)."""
    for ell, (nu, tau) in enumerate(zip(htype.nus, htype.taus)):
        deriv = phi.derivative(nu[0])
        for k in range(-window, window + 1):
            values = deriv(Fraction(k) + tau[0])
            expected = tuple(Fraction(1) if (k == 0 and i == ell) else ZERO for i in range(phi.size))
            if values != expected:
                return False
    return True


def polynomial_reproduction_check(
    phi: SplineVector,
    pmu_values,
    xs: Sequence[Fraction],
    mu: int,
    scale: Optional[Fraction] = None,
) -> Tuple[bool, Fraction]:
    """
    sum_k p_mu(k) . phi(x - k) = c x^mu / mu! at every check point x (d = 1).

    `pmu_values(k)` returns the row p_mu(k). The constant c is the one
    found for mu = 0 when `scale` is given, else it is read off here.
    """
    lo, hi = phi.hull()
    results = []
    for x in xs:
        total = ZERO
        for k in range(int(x - hi) - 1, int(x - lo) + 2):
            row = pmu_values(k)
            values = phi(x - k)
            total += sum((a * b for a, b in zip(row, values)), ZERO)
        results.append((x, total))
    target = [Fraction(x) ** mu / factorial(mu) for x, _ in results]
    if scale is None:
        nonzero = [(t, v) for t, (_, v) in zip(target, results) if t != 0]
        if not nonzero:
            return all(v == 0 for _, v in results), ZERO
        scale = nonzero[0][1] / nonzero[0][0]
    ok = all(v == scale * t for t, (_, v) in zip(target, results))
    return ok, scale


# =========================================================================
# Printed basis functions
# =========================================================================

def _p(*coeffs) -> Polynomial:
    """Polynomial from descending coefficients."""
    return Polynomial(tuple(Fraction(c) for c in reversed(coeffs)))


def _birkhoff2_spline(t: Fraction) -> SplineVector:
    t = Fraction(t)
    phi1_mid = _p(Fraction(-1, 7), Fraction(2, 3), Fraction(-3, 2), Fraction(5, 3), 0, Fraction(-4, 3), 0,
                  Fraction(16, 21))
    phi2_mid = _p(
        Fraction(-85, 4116) + Fraction(8, 147) * t,
        Fraction(61, 294) - Fraction(16, 63) * t,
        Fraction(-386, 735) + Fraction(4, 7) * t,
        Fraction(64, 147) - Fraction(40, 63) * t,
        0,
        Fraction(-4, 49) + Fraction(32, 63) * t,
        0,
        -(Fraction(152, 5145) + Fraction(128, 441) * t),
    )
    phi1_out = _p(1, -2) ** 5 * _p(2, -8, 1) * Fraction(1, 42)
    # (2 - x)^5, the sign that makes phi_2 continuous at 1
    phi2_out = _p(-1, 2) ** 5 * _p(555 + 1120 * t, -(2220 + 4480 * t), 792 + 560 * t) * Fraction(1, 61740)
    return SplineVector([_even_extension(phi1_mid, phi1_out), _even_extension(phi2_mid, phi2_out)],
                        HermiteType.univariate([0, 2]))


def _even_extension(mid: Polynomial, outer: Polynomial) -> PiecewisePoly:
    """f on [0,1] = mid, (1,2] = outer, f(-x) = f(x)."""
    return PiecewisePoly(
        (-2, -1, 0, 1, 2),
        (outer.compose_affine(-1, 0), mid.compose_affine(-1, 0), mid, outer),
    )


def _dual_hermite_spline() -> SplineVector:
    phi1 = PiecewisePoly.on_integers(-1, [
        _p(1, 1) ** 4 * _p(-3, 2) * Fraction(1, 4),
        _p(Fraction(5, 4), Fraction(-5, 2), 0, Fraction(5, 4), Fraction(1, 2)),
        _p(1, -2) ** 4 * _p(3, -1) * Fraction(1, 4),
    ])
    phi2 = PiecewisePoly.on_integers(-1, [
        _p(1, 1) ** 4 * _p(11, -4) * Fraction(1, 40),
        _p(2, -1) * _p(19, -38, 6, 13, 4) * Fraction(1, 40),
        _p(1, -2) ** 4 * _p(11, -7) * Fraction(1, 40),
    ])
    return SplineVector([phi1, phi2], HermiteType.univariate([0, 1], [Fraction(1, 2)] * 2))


def _lagrange_spline(variant: int) -> SplineVector:
    phi1 = PiecewisePoly.on_integers(-1, [
        _p(1, 1) ** 3 * _p(-3, 1) * Fraction(5, 4),
        _p(-1, 1) ** 3 * _p(3, 1) * Fraction(5, 4),
        Polynomial(),
    ])
    if variant == 1:
        phi2 = PiecewisePoly.on_integers(-1, [
            _p(1, 1) ** 3 * Fraction(5, 4),
            _p(Fraction(15, 2), -15, Fraction(15, 4), Fraction(15, 4), Fraction(5, 4)),
            _p(-1, 2) ** 3 * Fraction(5, 4),
        ])
    else:
        phi2 = PiecewisePoly.on_integers(-1, [
            _p(1, 1) ** 4 * Fraction(5, 8),
            _p(Fraction(25, 4), Fraction(-25, 2), Fraction(15, 4), Fraction(5, 2), Fraction(5, 8)),
            _p(1, -2) ** 4 * Fraction(5, 8),
        ])
    return SplineVector([phi1, phi2], HermiteType.univariate([0, 0], [0, Fraction(1, 2)]))


def registry_spline(spline_id: str, params: Optional[Dict[str, Fraction]] = None) -> SplineVector:
    """
    Printed closed-form basis functions by registry id.

    Raises:
        RegistryError: unknown id
    """
    params = params or {}
    if spline_id == "ex6.2b":
        return _birkhoff2_spline(to_fraction(params.get("t", 0)))
    if spline_id == "ex6.2c":
        return _birkhoff2_spline(to_fraction(params.get("t", 1)))
    if spline_id == "ex6.3b":
        return _dual_hermite_spline()
    if spline_id == "ex6.4c":
        return _lagrange_spline(1)
    if spline_id == "ex6.4d":
        return _lagrange_spline(2)
    if spline_id.startswith("bspline"):
        n = int(spline_id[len("bspline"):] or params.get("n", 2))
        return SplineVector([bspline(n)], HermiteType.scalar(1))
    raise RegistryError(f"unknown spline id {spline_id!r}")


SPLINE_IDS = ["ex6.2b", "ex6.2c", "ex6.3b", "ex6.4c", "ex6.4d"]
