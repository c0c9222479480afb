"""
🌊 Polynomial Subdivision
Vector polynomials p * v, the refinement engine w_n = S_a^n w_0 D^{-n},
basis-function sampling and the exact polynomial/interpolation checks.

Refinement data at level n lives on 2^{-n} Z^d; channel l of w_n(k)
approximates the nu_l-th derivative of the limit at 2^{-n}(k + tau_l).
"""

import csv
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from dotenv import load_dotenv

from services.analysis import MatchingFilter, derive_theta, spectral_condition, sum_rule_order
from services.core import (
    AnalysisError,
    HermiteType,
    LevelCapError,
    Mask,
    Point,
    Row,
    VectorData,
    ZERO,
    format_rational,
    lattice_box,
    mi_abs,
    mi_factorial,
    mi_leq,
    mi_power,
    mi_sub,
    multi_indices,
)
from services.jets import Jet

load_dotenv()

MAX_LEVEL_ENV = os.getenv("GHSD_MAX_LEVEL")

# Default level caps by dimension; support grows like 2^{nd}
DEFAULT_LEVEL_CAPS = {
    1: 12,
    2: 8,
}

ScalarPoly = Dict[Point, Fraction]
Window = Tuple[Point, Point]


def level_cap(d: int) -> int:
    """Refinement level cap (GHSD_MAX_LEVEL overrides the per-dimension default)."""
    if MAX_LEVEL_ENV:
        return int(MAX_LEVEL_ENV)
    return DEFAULT_LEVEL_CAPS.get(d, 6)


# =========================================================================
# Scalar and vector polynomials
# =========================================================================

def monomial(mu: Sequence[int], coeff=1) -> ScalarPoly:
    return {tuple(mu): Fraction(coeff)}


def normalized_monomial(mu: Sequence[int]) -> ScalarPoly:
    """x^mu / mu!."""
    return monomial(mu, Fraction(1, mi_factorial(mu)))


def poly_derivative(p: ScalarPoly, mu: Sequence[int]) -> ScalarPoly:
    out: ScalarPoly = {}
    for mono, c in p.items():
        if not mi_leq(mu, mono):
            continue
        rest = mi_sub(mono, mu)
        out[rest] = out.get(rest, ZERO) + c * Fraction(mi_factorial(mono), mi_factorial(rest))
    return {k: v for k, v in out.items() if v != 0}


def poly_evaluate(p: ScalarPoly, x: Sequence) -> Fraction:
    return sum((c * mi_power(x, mono) for mono, c in p.items()), ZERO)


def poly_degree(p: ScalarPoly) -> int:
    return max((mi_abs(m) for m in p), default=0)


@dataclass
class VectorPolynomial:
    """Row of r polynomials on R^d: monomial -> 1 x r coefficient row."""
    dim: int
    width: int
    coeffs: Dict[Point, Row] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {
            tuple(k): tuple(Fraction(x) for x in row)
            for k, row in self.coeffs.items() if any(x != 0 for x in row)
        }

    @property
    def degree(self) -> int:
        return max((mi_abs(m) for m in self.coeffs), default=0)

    def component(self, ell: int) -> ScalarPoly:
        return {m: row[ell] for m, row in self.coeffs.items() if row[ell] != 0}

    def evaluate(self, x: Sequence) -> Row:
        total = [ZERO] * self.width
        for mono, row in self.coeffs.items():
            w = mi_power(x, mono)
            if w:
                for j, c in enumerate(row):
                    total[j] += w * c
        return tuple(total)

    def derivative(self, mu: Sequence[int]) -> "VectorPolynomial":
        out: Dict[Point, List[Fraction]] = {}
        for mono, row in self.coeffs.items():
            if not mi_leq(mu, mono):
                continue
            rest = mi_sub(mono, mu)
            w = Fraction(mi_factorial(mono), mi_factorial(rest))
            slot = out.setdefault(rest, [ZERO] * self.width)
            for j, c in enumerate(row):
                slot[j] += w * c
        return VectorPolynomial(self.dim, self.width, {k: tuple(v) for k, v in out.items()})

    def shift(self, t: Sequence) -> "VectorPolynomial":
        """p(. - t)."""
        out: Dict[Point, List[Fraction]] = {}
        for mono, row in self.coeffs.items():
            for lower in multi_indices(self.dim, mi_abs(mono)):
                if not mi_leq(lower, mono):
                    continue
                rest = mi_sub(mono, lower)
                w = Fraction(mi_factorial(mono), mi_factorial(lower) * mi_factorial(rest))
                w *= mi_power([-Fraction(x) for x in t], rest)
                if w == 0:
                    continue
                slot = out.setdefault(lower, [ZERO] * self.width)
                for j, c in enumerate(row):
                    slot[j] += w * c
        return VectorPolynomial(self.dim, self.width, {k: tuple(v) for k, v in out.items()})

    def sample(self, window: Window, level: int = 0) -> VectorData:
        """Lattice data k -> p(k) on a box."""
        return VectorData(
            dim=self.dim, width=self.width, level=level,
            values={k: self.evaluate(k) for k in lattice_box(*window)},
        )


def conv_poly(p: ScalarPoly, v: Jet) -> VectorPolynomial:
    """
    p * v = sum_mu (-1)^{|mu|} / mu! p^{(mu)} N_mu(v).

    Raises:
        AnalysisError: jet order below deg(p)
    """
    deg = poly_degree(p)
    if v.order < deg:
        raise AnalysisError(f"insufficient jet order {v.order} for degree {deg}")
    r = v.shape[1]
    d = v.dim
    out: Dict[Point, List[Fraction]] = {}
    for mu in multi_indices(d, deg):
        row = v.row(mu)
        if not any(row):
            continue
        dp = poly_derivative(p, mu)
        w = Fraction((-1) ** mi_abs(mu), mi_factorial(mu))
        for mono, c in dp.items():
            slot = out.setdefault(mono, [ZERO] * r)
            for j in range(r):
                slot[j] += w * c * row[j]
    return VectorPolynomial(d, r, {k: tuple(x) for k, x in out.items()})


def pmu(mu: Sequence[int], filt: Union[MatchingFilter, Jet]) -> VectorPolynomial:
    """p_mu = (x^mu / mu!) * v_a."""
    jet = filt.jet if isinstance(filt, MatchingFilter) else filt
    return conv_poly(normalized_monomial(mu), jet)


# =========================================================================
# Subdivision operator
# =========================================================================

def _accumulate(out: Dict[Point, List[Fraction]], key: Point, row: Row, mat, scale) -> None:
    slot = out.get(key)
    if slot is None:
        slot = out[key] = [ZERO] * len(mat[0])
    for i, x in enumerate(row):
        if x == 0:
            continue
        w = scale * x
        for j, a in enumerate(mat[i]):
            if a:
                slot[j] += w * a


def subdivide_grid(
    mask: Mask,
    v: Union[VectorData, VectorPolynomial],
    window: Optional[Window] = None,
) -> VectorData:
    """(S_a v)(j) = 2^d sum_k v(k) a(j - 2k); polynomial input needs a window."""
    d = mask.dim
    factor = 2 ** d
    out: Dict[Point, List[Fraction]] = {}
    if isinstance(v, VectorPolynomial):
        if window is None:
            raise AnalysisError("polynomial input needs an evaluation window")
        for j in lattice_box(*window):
            out.setdefault(j, [ZERO] * mask.multiplicity)
            for s, a in mask.coeffs.items():
                diff = mi_sub(j, s)
                if any(x % 2 for x in diff):
                    continue
                k = tuple(x // 2 for x in diff)
                _accumulate(out, j, v.evaluate(k), a, factor)
        level = 1
    else:
        for k, row in v.values.items():
            for s, a in mask.coeffs.items():
                _accumulate(out, tuple(2 * x + y for x, y in zip(k, s)), row, a, factor)
        if window is not None:
            lo, hi = window
            out = {j: row for j, row in out.items() if all(a <= x <= b for a, x, b in zip(lo, j, hi))}
        level = v.level + 1
    return VectorData(dim=d, width=mask.multiplicity, level=level,
                      values={k: tuple(row) for k, row in out.items()})


def _default_window(d: int, degree: int) -> Window:
    b = degree + 2
    return tuple([-b] * d), tuple([b] * d)


@dataclass
class PolyCheckVerdict:
    ok: bool
    witness: Optional[Dict] = None


def eigenpoly_check(
    mask: Mask,
    filt: MatchingFilter,
    mu: Sequence[int],
    window: Optional[Window] = None,
) -> PolyCheckVerdict:
    """S_a p_mu = 2^{-|mu|} p_mu, checked exactly on a window."""
    p = pmu(mu, filt)
    window = window or _default_window(mask.dim, mi_abs(mu))
    refined = subdivide_grid(mask, p, window)
    scale = Fraction(1, 2 ** mi_abs(mu))
    for j in lattice_box(*window):
        expected = tuple(scale * x for x in p.evaluate(j))
        got = refined.get(j)
        if got != expected:
            return PolyCheckVerdict(ok=False, witness={
                "k": list(j),
                "got": [format_rational(x) for x in got],
                "expected": [format_rational(x) for x in expected],
            })
    return PolyCheckVerdict(ok=True)


# =========================================================================
# Refinement engine
# =========================================================================

def _level_matrix(mask: Mask, htype: HermiteType, n: int) -> Dict[Point, Tuple[Tuple[Fraction, ...], ...]]:
    """D^{n-1} a(s) D^{-n} with D = diag(2^{-|nu_l|})."""
    degrees = [mi_abs(nu) for nu in htype.nus]
    out = {}
    for s, a in mask.coeffs.items():
        out[s] = tuple(
            tuple(
                x * Fraction(2) ** (degrees[j] * n - degrees[i] * (n - 1))
                for j, x in enumerate(row)
            )
            for i, row in enumerate(a)
        )
    return out


def _refine_step(mask: Mask, htype: HermiteType, w: VectorData, n: int) -> VectorData:
    factor = 2 ** mask.dim
    scaled = _level_matrix(mask, htype, n)
    out: Dict[Point, List[Fraction]] = {}
    for k, row in w.values.items():
        for s, a in scaled.items():
            _accumulate(out, tuple(2 * x + y for x, y in zip(k, s)), row, a, factor)
    return VectorData(dim=mask.dim, width=mask.multiplicity, level=n,
                      values={k: tuple(r) for k, r in out.items()})


def _check_levels(d: int, levels: int, cap: Optional[int]) -> None:
    cap = level_cap(d) if cap is None else cap
    if levels > cap:
        raise LevelCapError(f"{levels} levels requested, cap is {cap} for d={d}")


def refine(
    mask: Mask,
    htype: HermiteType,
    w0: VectorData,
    levels: int,
    cap: Optional[int] = None,
    log_callback: Optional[Callable[[str], None]] = None,
) -> List[VectorData]:
    """
    [w_0, ..., w_n] with w_n(j) = 2^d sum_k w_{n-1}(k) D^{n-1} a(j-2k) D^{-n}.

    Raises:
        LevelCapError: levels above the configured cap
    """
    if w0.width != mask.multiplicity:
        raise AnalysisError(f"data width {w0.width} does not match multiplicity {mask.multiplicity}")
    _check_levels(mask.dim, levels, cap)
    data = [w0]
    for n in range(1, levels + 1):
        data.append(_refine_step(mask, htype, data[-1], n))
        if log_callback:
            log_callback(f"✓ level {n}: {len(data[-1].values)} lattice points")
    return data


@dataclass
class BasisSamples:
    """samples[(i, l)][x] = value of phi_i^{(nu_l)} at x = 2^{-n}(k + tau_l)."""
    level: int
    samples: Dict[Tuple[int, int], Dict[Tuple[Fraction, ...], Fraction]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def value(self, i: int, ell: int, x: Sequence) -> Fraction:
        return self.samples[(i, ell)].get(tuple(Fraction(t) for t in x), ZERO)


def sample_position(k: Sequence[int], tau: Sequence, n: int) -> Tuple[Fraction, ...]:
    return tuple((Fraction(a) + Fraction(t)) / 2 ** n for a, t in zip(k, tau))


def basis_samples(mask: Mask, htype: HermiteType, levels: int, cap: Optional[int] = None) -> BasisSamples:
    """Refine delta e_i data; column l of level n samples phi_i^{(nu_l)}."""
    result = BasisSamples(level=levels)
    spectral = spectral_condition(mask, htype.max_degree)
    if not spectral.ok:
        result.warnings.append("spectral condition fails; samples may not converge")
    r = mask.multiplicity
    for i in range(r):
        w0 = VectorData.delta(mask.dim, r, i)
        wn = refine(mask, htype, w0, levels, cap)[-1]
        for ell in range(r):
            result.samples[(i, ell)] = {
                sample_position(k, htype.taus[ell], levels): row[ell]
                for k, row in wn.values.items() if row[ell] != 0
            }
    return result


def _valid_windows(mask: Mask, base: Window, levels: int) -> List[Window]:
    """Per level, the box where refining truncated data is still exact."""
    lo_s, hi_s = mask.bounds()
    windows = [base]
    lo, hi = base
    for _ in range(levels):
        lo = tuple(2 * a + h for a, h in zip(lo, hi_s))
        hi = tuple(2 * b + l for b, l in zip(hi, lo_s))
        windows.append((lo, hi))
    return windows


def _restrict(w: VectorData, window: Window) -> VectorData:
    lo, hi = window
    return VectorData(
        dim=w.dim, width=w.width, level=w.level,
        values={k: r for k, r in w.values.items() if all(a <= x <= b for a, x, b in zip(lo, k, hi))},
    )


def poly_interp_check(
    mask: Mask,
    htype: HermiteType,
    degree: int,
    levels: int,
    filt: Optional[MatchingFilter] = None,
) -> PolyCheckVerdict:
    """
    For every monomial p of degree <= `degree`, refining w_0 = p * v_a gives
    w_n(k) e_l = p^{(nu_l)}(2^{-n}(k + tau_l)) exactly.
    """
    d = mask.dim
    if filt is None:
        filt = sum_rule_order(mask, degree).matching_filter
    if filt.order < degree:
        return PolyCheckVerdict(ok=False, witness={"reason": f"sum rules only to order {filt.order + 1}"})
    lo_s, hi_s = mask.bounds()
    width = max(h - l for l, h in zip(lo_s, hi_s))
    b = width + degree + 2
    base = (tuple([-b] * d), tuple([b] * d))
    windows = _valid_windows(mask, base, levels)

    for mu in multi_indices(d, degree):
        p = monomial(mu)
        w = conv_poly(p, filt.jet).sample(base)
        for n in range(1, levels + 1):
            w = _restrict(_refine_step(mask, htype, w, n), windows[n])
            for k in lattice_box(*windows[n]):
                row = w.get(k)
                for ell, (nu, tau) in enumerate(zip(htype.nus, htype.taus)):
                    expected = poly_evaluate(poly_derivative(p, nu), sample_position(k, tau, n))
                    if row[ell] != expected:
                        return PolyCheckVerdict(ok=False, witness={
                            "monomial": list(mu), "level": n, "k": list(k), "component": ell + 1,
                            "got": format_rational(row[ell]), "expected": format_rational(expected),
                        })
    return PolyCheckVerdict(ok=True)


def interpolation_relation_check(mask: Mask, htype: HermiteType, w0: VectorData, levels: int) -> PolyCheckVerdict:
    """w_n(2k + beta_l) e_theta(l) = w_{n-1}(k) e_l at every level."""
    th = derive_theta(htype)
    data = refine(mask, htype, w0, levels)
    for n in range(1, levels + 1):
        prev, cur = data[n - 1], data[n]
        for ell in range(mask.multiplicity):
            beta = th.betas[ell]
            col = th.theta[ell] - 1
            keys = set(prev.values)
            for j in cur.values:
                diff = mi_sub(j, beta)
                if all(x % 2 == 0 for x in diff):
                    keys.add(tuple(x // 2 for x in diff))
            for k in sorted(keys):
                got = cur.get(tuple(2 * x + y for x, y in zip(k, beta)))[col]
                expected = prev.get(k)[ell]
                if got != expected:
                    return PolyCheckVerdict(ok=False, witness={
                        "level": n, "k": list(k), "component": ell + 1,
                        "got": format_rational(got), "expected": format_rational(expected),
                    })
    return PolyCheckVerdict(ok=True)


# =========================================================================
# Export
# =========================================================================

def refinement_rows(data: VectorData, htype: HermiteType) -> List[List[str]]:
    """CSV rows: component, positions 2^{-n}(k + tau_l), exact value, float value."""
    rows = []
    for k, row in data.values.items():
        for ell, value in enumerate(row):
            position = sample_position(k, htype.taus[ell], data.level)
            rows.append(
                [str(ell + 1)]
                + [format_rational(x) for x in position]
                + [format_rational(value), "%.17g" % float(value)]
            )
    return rows


def export_refinement(data: VectorData, htype: HermiteType, path: Optional[str] = None) -> List[List[str]]:
    """Write refinement CSV (header + rows); returns the rows including the header."""
    header = ["component"] + [f"position_{i + 1}" for i in range(data.dim)] + ["value_exact", "value_float"]
    table = [header] + refinement_rows(data, htype)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerows(table)
    return table
