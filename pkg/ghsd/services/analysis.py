"""
🔎 Mask Analysis
Classifies a matrix mask: matching filter, sum rules, generalized Hermite
type, linear-phase moments, interpolatory structure and the spectral
condition on the symbol at zero.

Sum rules of order s with matching filter v mean, in jet coordinates,

    sum_{beta<=mu} binom(mu,beta) 2^{|beta|} N_beta(v) N_{mu-beta}(a at pi*omega) = delta(omega) N_mu(v)

for every omega in {0,1}^d and |mu| < s. The omega = 0 identity determines
v recursively; the omega != 0 identities are what gets checked.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.core import (
    AnalysisError,
    HermiteType,
    Mask,
    Point,
    ResonanceError,
    Row,
    ZERO,
    coset,
    format_rational,
    gamma_set,
    identity_matrix,
    indices_of_degree,
    mat_mul,
    mat_scale,
    mat_sub,
    matrix_rank,
    matrix_to_float,
    mi_abs,
    mi_binom,
    mi_sub,
    multi_indices,
    nullspace,
    solve_linear,
    sub_indices,
    transpose,
)
from services.jets import (
    Jet,
    germ_dilate,
    germ_product,
    germ_scale,
    jet_equal,
    phase_monomial_jet,
    row_from_components,
    sequence_jet,
    truncate,
    upsample,
)

# Margin on strict eigenvalue-modulus inequalities
EIGEN_TOLERANCE = 1e-9


# =========================================================================
# Result types
# =========================================================================

@dataclass
class MatchingFilter:
    """Matching-filter row jet with the order it was solved to."""
    jet: Jet
    order: int
    warnings: List[str] = field(default_factory=list)

    def printed(self, ell: int, mu: Sequence[int]) -> Fraction:
        """Printed coefficient of (i xi)^mu in component ell (0-based)."""
        return self.jet.printed(mu)[0][ell]

    def to_dict(self) -> Dict:
        return {
            "order": self.order,
            "rows": {
                ",".join(str(x) for x in mu): [format_rational(x) for x in self.jet.row(mu)]
                for mu in self.jet.indices()
            },
        }


@dataclass
class SpectralVerdict:
    ok: bool
    simple: bool
    bound: float
    moduli: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


@dataclass
class SumRuleResult:
    order: int
    matching_filter: MatchingFilter
    warnings: List[str] = field(default_factory=list)


@dataclass
class HermiteVerdict:
    ok: bool
    sr_order: int
    reason: str = ""


@dataclass
class ThetaResult:
    theta: Tuple[int, ...]                       # 1-based
    betas: Tuple[Tuple[int, ...], ...]
    warnings: List[str] = field(default_factory=list)


@dataclass
class InterpolatoryVerdict:
    ok: bool
    witness: Optional[Dict] = None


@dataclass
class ClassificationReport:
    """Aggregated verdicts for one mask and one candidate type."""
    sr_order: int
    lpm_order: int
    hermite_type_ok: bool
    interpolatory_ok: bool
    spectral_ok: bool
    matching_filter: MatchingFilter
    theta: Optional[Tuple[int, ...]] = None
    betas: Optional[Tuple[Tuple[int, ...], ...]] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "sr_order": self.sr_order,
            "lpm_order": self.lpm_order,
            "hermite_type_ok": self.hermite_type_ok,
            "interpolatory_ok": self.interpolatory_ok,
            "spectral_ok": self.spectral_ok,
            "matching_filter": self.matching_filter.to_dict(),
            "theta": list(self.theta) if self.theta else None,
            "betas": [list(b) for b in self.betas] if self.betas else None,
            "warnings": list(self.warnings),
        }


# =========================================================================
# Spectral data of a^(0)
# =========================================================================

def left_unit_eigenvector(mask: Mask) -> Row:
    """Exact v with v a^(0) = v, normalized so that v e_1 = 1."""
    r = mask.multiplicity
    a0 = mask.symbol_at_zero()
    shifted = mat_sub(transpose(a0), identity_matrix(r))
    kernel = nullspace([list(row) for row in shifted], r)
    if len(kernel) != 1:
        raise AnalysisError(f"eigenvalue 1 not simple (kernel dimension {len(kernel)})")
    v = kernel[0]
    if v[0] == 0:
        raise AnalysisError("normalization impossible: left eigenvector has first entry 0")
    return tuple(x / v[0] for x in v)


def spectral_condition(mask: Mask, mdeg: int) -> SpectralVerdict:
    """
    1 is a simple eigenvalue of a^(0) (exact rank test) and every other
    eigenvalue has modulus < 2^{-mdeg}.
    """
    r = mask.multiplicity
    a0 = mask.symbol_at_zero()
    shifted = mat_sub(a0, identity_matrix(r))
    simple = (
        matrix_rank([list(x) for x in shifted]) == r - 1
        and matrix_rank([list(x) for x in mat_mul(shifted, shifted)]) == r - 1
    )
    bound = 2.0 ** (-mdeg)
    verdict = SpectralVerdict(ok=False, simple=simple, bound=bound)
    if not simple:
        verdict.warnings.append("eigenvalue 1 of a^(0) is not simple")
        return verdict

    eigenvalues = list(np.linalg.eigvals(matrix_to_float(a0)))
    unit = min(range(len(eigenvalues)), key=lambda i: abs(eigenvalues[i] - 1.0))
    others = [abs(complex(z)) for i, z in enumerate(eigenvalues) if i != unit]
    verdict.moduli = others
    verdict.ok = all(x < bound - EIGEN_TOLERANCE for x in others)
    for x in others:
        if abs(x - bound) <= EIGEN_TOLERANCE:
            verdict.warnings.append(f"near-boundary eigenvalue modulus {x:.12g} vs 2^-{mdeg}")
    return verdict


# =========================================================================
# Matching filter recursion
# =========================================================================

class _FilterSolver:
    """Degree-by-degree solver for the matching-filter jets of one mask."""

    def __init__(self, mask: Mask, order: int):
        self.mask = mask
        self.order = order
        self.r = mask.multiplicity
        self.zero = tuple([0] * mask.dim)
        self.omegas = [g for g in gamma_set(mask.dim) if any(g)]
        self.jets = {self.zero: sequence_jet(mask, order)}
        for omega in self.omegas:
            self.jets[omega] = sequence_jet(mask, order, omega)
        self.a0 = mask.symbol_at_zero()
        self.rows: Dict[Point, Row] = {self.zero: left_unit_eigenvector(mask)}
        self.warnings: List[str] = []
        self.free_steps = 0

    def _partial(self, mu: Point, omega: Point, include_top: bool = False) -> List[Fraction]:
        total = [ZERO] * self.r
        jets = self.jets[omega]
        for beta in sub_indices(mu):
            if beta == mu and not include_top:
                continue
            nb = self.rows[beta]
            if not any(nb):
                continue
            a = jets[mi_sub(mu, beta)]
            w = mi_binom(mu, beta) * 2 ** mi_abs(beta)
            for j in range(self.r):
                s = sum((nb[i] * a[i][j] for i in range(self.r)), ZERO)
                total[j] += w * s
        return total

    def solve(self, mu: Point):
        scale = 2 ** mi_abs(mu)
        m = mat_sub(identity_matrix(self.r), mat_scale(self.a0, scale))
        # row unknown x: sum_i x_i m[i][j] = rhs[j]
        eqs = [[m[i][j] for i in range(self.r)] for j in range(self.r)]
        rhs = self._partial(mu, self.zero)
        if matrix_rank(eqs) == self.r:
            x, _ = solve_linear(eqs, rhs)
            self.rows[mu] = tuple(x)
            return
        for omega in self.omegas:
            top = self.jets[omega][self.zero]
            part = self._partial(mu, omega)
            for j in range(self.r):
                eqs.append([scale * top[i][j] for i in range(self.r)])
                rhs.append(-part[j])
        try:
            x, free = solve_linear(eqs, rhs)
        except AnalysisError as e:
            raise ResonanceError(f"resonant eigenvalue 2^-{mi_abs(mu)} at mu={mu}") from e
        if free:
            self.free_steps += 1
            self.warnings.append(
                f"resonant step at mu={mu}: {len(free)} free variable(s) set to 0"
            )
        self.rows[mu] = tuple(x)

    def solve_degree(self, total: int) -> Tuple[bool, Optional[str]]:
        """Greedy step for every mu of degree `total`; (ok, resonance message)."""
        for mu in indices_of_degree(self.mask.dim, total):
            try:
                self.solve(mu)
            except ResonanceError as e:
                return False, str(e)
            if not self.sum_rules_hold(mu):
                return False, None
        return True, None

    def solve_jointly(self, total: int) -> bool:
        """
        Solve every row of degree 1..total at once against all sum-rule
        equations of degree <= total. Rows are only replaced when the
        system is consistent.
        """
        d, r = self.mask.dim, self.r
        unknowns = [mu for mu in multi_indices(d, total) if mi_abs(mu) > 0]
        offset = {mu: n * r for n, mu in enumerate(unknowns)}
        width = len(unknowns) * r
        n0 = self.rows[self.zero]
        eqs: List[List[Fraction]] = []
        rhs: List[Fraction] = []
        for mu in unknowns:
            for omega in [self.zero] + self.omegas:
                jets = self.jets[omega]
                const = jets[mu]
                for j in range(r):
                    row = [ZERO] * width
                    for beta in sub_indices(mu):
                        if beta == self.zero:
                            continue
                        a = jets[mi_sub(mu, beta)]
                        w = mi_binom(mu, beta) * 2 ** mi_abs(beta)
                        for i in range(r):
                            row[offset[beta] + i] += w * a[i][j]
                    if omega == self.zero:
                        row[offset[mu] + j] -= 1
                    eqs.append(row)
                    rhs.append(-sum((n0[i] * const[i][j] for i in range(r)), ZERO))
        try:
            x, free = solve_linear(eqs, rhs)
        except AnalysisError:
            return False
        for mu in unknowns:
            self.rows[mu] = tuple(x[offset[mu]:offset[mu] + r])
        if free:
            self.warnings.append(
                f"joint solve through degree {total}: {len(free)} free variable(s) set to 0"
            )
        return True

    def residual_free(self, mu: Point) -> bool:
        """Every sum-rule equation at mu holds for the current rows, omega = 0 included."""
        at_zero = self._partial(mu, self.zero, include_top=True)
        if any(x != y for x, y in zip(at_zero, self.rows.get(mu, (ZERO,) * self.r))):
            return False
        return self.sum_rules_hold(mu)

    def sum_rules_hold(self, mu: Point) -> bool:
        return all(not any(self._partial(mu, omega, include_top=True)) for omega in self.omegas)

    def jet(self, order: int) -> Jet:
        entries = {mu: (row,) for mu, row in self.rows.items() if mi_abs(mu) <= order}
        return Jet(dim=self.mask.dim, order=order, shape=(1, self.r), entries=entries)


def matching_filter(mask: Mask, order: int) -> MatchingFilter:
    """
    Matching-filter jets to `order` from the omega = 0 recursion.

    Raises:
        AnalysisError: eigenvalue 1 not simple / normalization impossible
        ResonanceError: singular step whose sum-rule equations are inconsistent
    """
    solver = _FilterSolver(mask, order)
    for total in range(1, order + 1):
        for mu in indices_of_degree(mask.dim, total):
            solver.solve(mu)
    return MatchingFilter(jet=solver.jet(order), order=order, warnings=solver.warnings)


def sum_rule_order(mask: Mask, cap: int) -> SumRuleResult:
    """
    Largest s <= cap + 1 such that sum rules of order s hold with the
    matching filter; the filter is returned truncated to order s - 1.

    Degrees are solved greedily until a resonant step leaves free
    variables; from the first failure after that every degree is
    re-solved jointly.
    """
    solver = _FilterSolver(mask, cap)
    zero = solver.zero
    warnings: List[str] = []
    if not solver.sum_rules_hold(zero):
        return SumRuleResult(order=0, matching_filter=MatchingFilter(solver.jet(0), 0))
    order = cap + 1
    joint = False
    for total in range(1, cap + 1):
        if joint:
            ok, resonance = solver.solve_jointly(total), None
        else:
            ok, resonance = solver.solve_degree(total)
            if not ok and solver.free_steps:
                joint = True
                ok, resonance = solver.solve_jointly(total), None
        if not ok:
            if resonance:
                warnings.append(resonance)
            order = total
            break
    warnings = solver.warnings + warnings
    filt = MatchingFilter(jet=solver.jet(order - 1), order=order - 1, warnings=list(solver.warnings))
    return SumRuleResult(order=order, matching_filter=filt, warnings=warnings)


def coset_sum_rule_check(mask: Mask, filt: MatchingFilter, order: int) -> bool:
    """
    Coset form of the sum rules:
    v(2 xi) a^[gamma](2 xi) = 2^{-d} e^{i gamma.xi} v(xi) up to `order`, all gamma.
    """
    d = mask.dim
    v = truncate(filt.jet, order)
    v2 = germ_dilate(v, 2)
    for gamma in gamma_set(d):
        part = coset(mask, gamma)
        if not part:
            rhs = germ_product(phase_monomial_jet(tuple([0] * d), gamma, order), v)
            if any(rhs.entries):
                return False
            continue
        lhs = germ_product(v2, sequence_jet(upsample(part, 2), order))
        rhs = germ_scale(germ_product(phase_monomial_jet(tuple([0] * d), gamma, order), v),
                         Fraction(1, 2 ** d))
        if not jet_equal(lhs, rhs, order):
            return False
    return True


# =========================================================================
# Type conditions
# =========================================================================

def is_generalized_hermite(mask: Mask, htype: HermiteType, cap: int) -> HermiteVerdict:
    """
    Type-Lambda test: sr >= max|nu| + 1 and component l of the matching
    filter is (i xi)^{nu_l} + O(|xi|^{|nu_l|+1}).
    """
    if htype.size != mask.multiplicity or htype.dim != mask.dim:
        return HermiteVerdict(ok=False, sr_order=0, reason="type size does not match multiplicity")
    m_min = htype.max_degree
    result = sum_rule_order(mask, max(cap, m_min + 1))
    if result.order < m_min + 1:
        return HermiteVerdict(ok=False, sr_order=result.order,
                              reason=f"sum rules of order {result.order} < {m_min + 1}")
    v = result.matching_filter.jet
    for ell, nu in enumerate(htype.nus):
        target = phase_monomial_jet(nu, [0] * mask.dim, mi_abs(nu))
        got = truncate(v.component(ell), mi_abs(nu))
        if not jet_equal(got, target, mi_abs(nu)):
            return HermiteVerdict(ok=False, sr_order=result.order,
                                  reason=f"component {ell + 1} is not (i xi)^{nu} to order {mi_abs(nu)}")
    return HermiteVerdict(ok=True, sr_order=result.order)


def lpm_order(mask: Mask, htype: HermiteType, cap: int, sr: Optional[SumRuleResult] = None) -> int:
    """
    Largest s <= sr such that the row ((i xi)^{nu_l} e^{i tau_l.xi})_l is a
    matching filter for sum rules of order s.

    The target row is substituted into the sum-rule equations directly.
    """
    sr = sr or sum_rule_order(mask, cap)
    if htype.size != mask.multiplicity or sr.order == 0:
        return 0
    target = row_from_components([
        phase_monomial_jet(nu, tau, sr.order - 1) for nu, tau in zip(htype.nus, htype.taus)
    ])
    solver = _FilterSolver(mask, sr.order - 1)
    solver.rows = {mu: target.row(mu) for mu in multi_indices(mask.dim, sr.order - 1)}
    for total in range(sr.order):
        for mu in indices_of_degree(mask.dim, total):
            if not solver.residual_free(mu):
                return total
    return sr.order


def derive_theta(htype: HermiteType) -> ThetaResult:
    """
    theta(l) = smallest j with nu_j = nu_l and 2 tau_l - tau_j integral;
    beta_l = 2 tau_l - tau_theta(l).
    """
    warnings: List[str] = []
    theta: List[int] = []
    betas: List[Tuple[int, ...]] = []
    for ell, (nu, tau) in enumerate(zip(htype.nus, htype.taus)):
        admissible = []
        for j, (nu_j, tau_j) in enumerate(zip(htype.nus, htype.taus)):
            if nu_j != nu:
                continue
            beta = tuple(2 * a - b for a, b in zip(tau, tau_j))
            if all(Fraction(x).denominator == 1 for x in beta):
                admissible.append((j, tuple(int(x) for x in beta)))
        if htype.theta is not None:
            chosen = [c for c in admissible if c[0] == htype.theta[ell] - 1]
            if not chosen:
                raise AnalysisError(f"incompatible (Lambda,T): declared theta({ell + 1}) not admissible")
            admissible = chosen
        if not admissible:
            raise AnalysisError(f"incompatible (Lambda,T): no admissible theta({ell + 1})")
        if len(admissible) > 1:
            warnings.append(
                f"theta({ell + 1}) ambiguous: candidates {[j + 1 for j, _ in admissible]}, chose {admissible[0][0] + 1}"
            )
        theta.append(admissible[0][0] + 1)
        betas.append(admissible[0][1])
    return ThetaResult(theta=tuple(theta), betas=tuple(betas), warnings=warnings)


def interpolatory_check(mask: Mask, htype: HermiteType) -> InterpolatoryVerdict:
    """a(2k + beta_l) e_theta(l) = 2^{-d-|nu_l|} delta(k) e_l for all k and l."""
    th = derive_theta(htype)
    d, r = mask.dim, mask.multiplicity
    if htype.size != r:
        return InterpolatoryVerdict(ok=False, witness={"reason": "type size does not match multiplicity"})
    for ell in range(r):
        col = th.theta[ell] - 1
        beta = th.betas[ell]
        scale = Fraction(1, 2 ** (d + mi_abs(htype.nus[ell])))
        keys = {beta} | {k for k in mask.support() if all((a - b) % 2 == 0 for a, b in zip(k, beta))}
        for key in sorted(keys):
            column = tuple(mask[key][i][col] for i in range(r))
            expected = tuple(scale if (i == ell and key == beta) else ZERO for i in range(r))
            if column != expected:
                return InterpolatoryVerdict(ok=False, witness={
                    "component": ell + 1,
                    "k": list(key),
                    "column": [format_rational(x) for x in column],
                    "expected": [format_rational(x) for x in expected],
                })
    return InterpolatoryVerdict(ok=True)


# =========================================================================
# Aggregate report
# =========================================================================

def classify(
    mask: Mask,
    htype: HermiteType,
    cap: int,
    log_callback: Optional[Callable[[str], None]] = None,
) -> ClassificationReport:
    """Run every analysis step for one (mask, type) pair."""
    log = log_callback or (lambda _msg: None)
    warnings: List[str] = []

    spectral = spectral_condition(mask, htype.max_degree)
    warnings.extend(spectral.warnings)
    log(f"{'✓' if spectral.ok else '⚠'} spectral condition (bound 2^-{htype.max_degree})")

    sr = sum_rule_order(mask, cap)
    warnings.extend(sr.warnings)
    log(f"✓ sum rules of order {sr.order}")

    hermite = is_generalized_hermite(mask, htype, cap)
    if not hermite.ok:
        warnings.append(f"not of type Lambda: {hermite.reason}")
    lpm = lpm_order(mask, htype, cap, sr)
    log(f"✓ linear-phase moments of order {lpm}")

    theta = None
    betas = None
    interpolatory = False
    try:
        th = derive_theta(htype)
        theta, betas = th.theta, th.betas
        warnings.extend(th.warnings)
        interpolatory = interpolatory_check(mask, htype).ok
    except AnalysisError as e:
        warnings.append(str(e))
        log(f"⚠ {e}")

    return ClassificationReport(
        sr_order=sr.order,
        lpm_order=lpm,
        hermite_type_ok=hermite.ok,
        interpolatory_ok=interpolatory,
        spectral_ok=spectral.ok,
        matching_filter=sr.matching_filter,
        theta=theta,
        betas=betas,
        warnings=warnings,
    )
