"""
🧭 Normal Form
Strongly invertible normalizers, mask transformation and the generator
set that seeds the smoothness estimator.

A normalizer U for a row jet u satisfies u(xi) U^(xi) = [1, 0, ..., 0] + O(|xi|^{m+1}).
It is built as U = P U1 U2 with
    P   a column permutation when N_0(u_1) = 0,
    U1  = [[1, -c_2 .. -c_r], [0, I]]   where c_l realizes u_l / u_1,
    U2  = [[c1, -h], [h, g]] (+) I      where c1 realizes 1 / u_1,
so every factor has an explicit Laurent inverse.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix as SympyMatrix, Mul, Rational, expand, eye, symbols, zeros

from services.core import (
    AnalysisError,
    LatticeSequence,
    Mask,
    ONE,
    Point,
    ZERO,
    dirac,
    gamma_set,
    identity_matrix,
    matrix_to_strings,
    mi_power,
    multi_indices,
    seq_add,
    seq_clean,
    seq_convolve,
    seq_scale,
    seq_upsample,
    solve_linear,
    unit_index,
)
from services.jets import (
    Jet,
    dirac_jet,
    germ_product,
    germ_reciprocal,
    jet_equal,
    row_from_components,
    sequence_jet,
    vanishes_to,
)

ScalarSeq = LatticeSequence  # 1x1 matrix valued


# =========================================================================
# LaurentMatrix
# =========================================================================

@dataclass
class LaurentMatrix:
    """Finitely supported r x r sequence paired with its convolution inverse."""
    dim: int
    size: int
    coeffs: LatticeSequence
    inverse_coeffs: LatticeSequence

    @classmethod
    def identity(cls, d: int, r: int) -> "LaurentMatrix":
        return cls(dim=d, size=r, coeffs=dirac(d, r), inverse_coeffs=dirac(d, r))

    def convolve(self, other: "LaurentMatrix") -> "LaurentMatrix":
        """Product U V with inverse V^{-1} U^{-1}."""
        return LaurentMatrix(
            dim=self.dim,
            size=self.size,
            coeffs=seq_convolve(self.coeffs, other.coeffs),
            inverse_coeffs=seq_convolve(other.inverse_coeffs, self.inverse_coeffs),
        )

    def inverse(self) -> "LaurentMatrix":
        return LaurentMatrix(self.dim, self.size, self.inverse_coeffs, self.coeffs)

    def symbol(self, inverse: bool = False) -> SympyMatrix:
        """Laurent-polynomial matrix sum_k U(k) z^k in the variables z_1..z_d."""
        z = symbols(f"z1:{self.dim + 1}")
        seq = self.inverse_coeffs if inverse else self.coeffs
        out = zeros(self.size, self.size)
        for k, m in seq.items():
            monomial = Mul(*(zi ** ki for zi, ki in zip(z, k)))
            out += SympyMatrix([[Rational(c.numerator, c.denominator) for c in map(Fraction, row)] for row in m]) * monomial
        return out

    def is_strongly_inverse(self) -> bool:
        """Both Laurent products U U^{-1} and U^{-1} U expand to the identity."""
        u, v = self.symbol(), self.symbol(inverse=True)
        unit = eye(self.size)
        return (u * v).applyfunc(expand) == unit and (v * u).applyfunc(expand) == unit

    def jet(self, order: int) -> Jet:
        return sequence_jet(self.coeffs, order)

    def to_dict(self) -> Dict:
        def block(seq):
            return [{"k": list(k), "rows": matrix_to_strings(seq[k])} for k in sorted(seq)]
        return {
            "dim": self.dim,
            "multiplicity": self.size,
            "coeffs": block(self.coeffs),
            "inverse": {"coeffs": block(self.inverse_coeffs)},
        }


# =========================================================================
# Scalar sequence helpers
# =========================================================================

def _scalar(seq: ScalarSeq, k: Point) -> Fraction:
    m = seq.get(k)
    return m[0][0] if m else ZERO


def _delta(d: int) -> ScalarSeq:
    return dirac(d, 1)


def _assemble(entries: Dict[Tuple[int, int], ScalarSeq], d: int, r: int) -> LatticeSequence:
    """r x r sequence from scalar entry sequences (missing entries zero)."""
    keys = set()
    for seq in entries.values():
        keys.update(seq)
    out = {}
    for k in keys:
        out[k] = tuple(
            tuple(_scalar(entries[(i, j)], k) if (i, j) in entries else ZERO for j in range(r))
            for i in range(r)
        )
    return seq_clean(out)


def _permutation(d: int, r: int, p: int) -> LatticeSequence:
    """delta * (matrix swapping coordinates 0 and p)."""
    rows = [list(row) for row in identity_matrix(r)]
    rows[0], rows[p] = rows[p], rows[0]
    return {tuple([0] * d): tuple(tuple(row) for row in rows)}


def realize_from_jets(jet: Jet, d: int, m: int) -> ScalarSeq:
    """
    Sequence on the principal lattice {k >= 0 : |k| <= m} whose moments
    sum_k u(k) k^mu match N_mu(jet) for |mu| <= m.
    """
    if jet.order < m:
        raise AnalysisError(f"insufficient jet order {jet.order} < {m}")
    points = list(multi_indices(d, m))
    mus = list(multi_indices(d, m))
    system = [[mi_power(k, mu) for k in points] for mu in mus]
    rhs = [jet.scalar(mu) for mu in mus]
    values, free = solve_linear(system, rhs)
    assert not free, "principal lattice moment system must be poised"
    return seq_clean({k: ((v,),) for k, v in zip(points, values)})


def nabla(nu: Sequence[int]) -> ScalarSeq:
    """Backward difference nabla^nu delta, nabla_i u = u - u(. - e_i)."""
    d = len(nu)
    result = _delta(d)
    for i, power in enumerate(nu):
        step = {tuple([0] * d): ((ONE,),), unit_index(d, i): ((-ONE,),)}
        for _ in range(power):
            result = seq_convolve(result, step)
    return result


# =========================================================================
# Normalizer construction
# =========================================================================

def build_normalizer(u: Jet, m: int) -> LaurentMatrix:
    """
    U with u U^ = [1, 0, ..., 0] + O(|xi|^{m+1}); verified in jets.

    Raises:
        AnalysisError: N_0(u) = 0
    """
    d = u.dim
    r = u.shape[1]
    zero = tuple([0] * d)
    n0 = u.row(zero)
    if r == 1:
        if n0[0] == 0:
            raise AnalysisError("non-invertible germ")
        return LaurentMatrix.identity(d, 1)
    if not any(n0):
        raise AnalysisError("normalizer needs N_0(u) != 0")

    # pivot
    pivot = 0
    perm = dirac(d, r)
    if n0[0] == 0:
        pivot = max(range(r), key=lambda j: (abs(n0[j]), -j))
        perm = _permutation(d, r, pivot)
    components = [u.component(j) for j in range(r)]
    components[0], components[pivot] = components[pivot], components[0]

    inv_u1 = germ_reciprocal(components[0], m)

    # U1 = [[1, -c_2..-c_r], [0, I]]
    upper: Dict[Tuple[int, int], ScalarSeq] = {(i, i): _delta(d) for i in range(r)}
    upper_inv: Dict[Tuple[int, int], ScalarSeq] = {(i, i): _delta(d) for i in range(r)}
    for ell in range(1, r):
        c_ell = realize_from_jets(germ_product(components[ell], inv_u1), d, m)
        upper[(0, ell)] = seq_scale(c_ell, -1)
        upper_inv[(0, ell)] = c_ell

    # U2 = [[c1, -h], [h, g]] (+) I
    c1 = realize_from_jets(inv_u1, d, m)
    alpha = sum((v[0][0] for v in c1.values()), ZERO)
    c_tilde = seq_scale(c1, 1 / alpha)
    base = seq_add(_delta(d), seq_scale(c_tilde, -1))
    h = _delta(d)
    for _ in range(m + 1):
        h = seq_convolve(h, base)
    top = 2 * m + 2
    g = seq_scale(_delta(d), comb(top, top) * (-1) ** (top + 1))
    for j in range(top - 1, 0, -1):
        g = seq_add(seq_convolve(g, c_tilde), seq_scale(_delta(d), comb(top, j) * (-1) ** (j + 1)))
    g = seq_scale(g, 1 / alpha)

    lower = {(0, 0): c1, (0, 1): seq_scale(h, -1), (1, 0): h, (1, 1): g}
    lower_inv = {(0, 0): g, (0, 1): h, (1, 0): seq_scale(h, -1), (1, 1): c1}
    for i in range(2, r):
        lower[(i, i)] = _delta(d)
        lower_inv[(i, i)] = _delta(d)

    p_mat = LaurentMatrix(d, r, perm, perm)
    u1 = LaurentMatrix(d, r, _assemble(upper, d, r), _assemble(upper_inv, d, r))
    u2 = LaurentMatrix(d, r, _assemble(lower, d, r), _assemble(lower_inv, d, r))
    result = p_mat.convolve(u1).convolve(u2)
    _verify_normal_row(u, result, m)
    return result


def _unit_row(d: int, r: int, m: int) -> Jet:
    e1 = dirac_jet(d, m)
    zero = Jet(dim=d, order=m, shape=(1, 1), entries={})
    return row_from_components([e1] + [zero] * (r - 1))


def _verify_normal_row(u: Jet, normalizer: LaurentMatrix, m: int) -> None:
    got = germ_product(u, normalizer.jet(m))
    if not jet_equal(got, _unit_row(u.dim, u.shape[1], m), m):
        raise AnalysisError("normalizer verification failed: u U is not e_1 to the requested order")


def normalizer_to_target(u: Jet, v: Jet, m: int) -> LaurentMatrix:
    """U = U_u U_v^{-1} so that u U^ = v + O(|xi|^{m+1})."""
    if u.shape[1] == 1:
        return LaurentMatrix.identity(u.dim, 1)
    uu = build_normalizer(u, m)
    uv = build_normalizer(v, m)
    result = uu.convolve(uv.inverse())
    got = germ_product(u, result.jet(m))
    if not jet_equal(got, v, m):
        raise AnalysisError("normalizer verification failed: u U does not reach the target row")
    return result


# =========================================================================
# Mask transformation
# =========================================================================

def transform_mask(mask: Mask, normalizer: LaurentMatrix) -> Mask:
    """(U^{-1} upsampled by 2) * a * U, i.e. U^(2 xi)^{-1} a^(xi) U^(xi)."""
    if normalizer.size != mask.multiplicity or normalizer.dim != mask.dim:
        raise AnalysisError("normalizer size does not match the mask")
    seq = seq_convolve(seq_upsample(normalizer.inverse_coeffs, 2), mask.coeffs)
    seq = seq_convolve(seq, normalizer.coeffs)
    return Mask(dim=mask.dim, multiplicity=mask.multiplicity, coeffs=seq)


@dataclass
class NormalFormVerdict:
    ok: bool
    failures: List[str] = field(default_factory=list)


def normalform_verify(mask: Mask, m: int) -> NormalFormVerdict:
    """
    Normal-form conditions to order m:
    a11(0) = 1, a11 vanishes at every pi*omega with omega != 0, and the
    remaining first-row entries vanish at every pi*omega.
    """
    d, r = mask.dim, mask.multiplicity
    zero = tuple([0] * d)
    failures = []
    for omega in gamma_set(d):
        jet = sequence_jet(mask, m, omega)
        a11 = jet.entry(0, 0)
        if not any(omega):
            if a11.scalar(zero) != 1:
                failures.append(f"a11(0) = {a11.scalar(zero)} != 1")
        elif not vanishes_to(a11, m):
            failures.append(f"a11 does not vanish to order {m + 1} at omega={omega}")
        for j in range(1, r):
            if not vanishes_to(jet.entry(0, j), m):
                failures.append(f"a1{j + 1} does not vanish to order {m + 1} at omega={omega}")
    return NormalFormVerdict(ok=not failures, failures=failures)


# =========================================================================
# Generator set
# =========================================================================

def _column(seq: ScalarSeq, r: int, j: int = 0) -> LatticeSequence:
    """Scalar sequence placed in entry j of an r x 1 column."""
    return {
        k: tuple((v[0][0] if i == j else ZERO,) for i in range(r))
        for k, v in seq.items()
    }


def generator_set(
    normalizer: LaurentMatrix,
    m: int,
    r: int,
    d: int,
    filt: Optional[Jet] = None,
) -> List[LatticeSequence]:
    """
    U * [nabla^nu delta, 0, ..., 0]^T for |nu| = m+1, then U * delta e_j for j >= 2.

    With `filt`, every generator is checked to satisfy v u^ = O(|xi|^{m+1}).
    """
    generators: List[LatticeSequence] = []
    order = max(m + 1, 0)
    for nu in multi_indices(d, order):
        if sum(nu) != order:
            continue
        generators.append(seq_convolve(normalizer.coeffs, _column(nabla(nu), r)))
    for j in range(1, r):
        generators.append(seq_convolve(normalizer.coeffs, _column(_delta(d), r, j)))
    if filt is not None and m >= 0:
        for gen in generators:
            if not vanishes_to(germ_product(filt, sequence_jet(gen, m)), m):
                raise AnalysisError("generator outside V_{m,v}: normalizer construction bug")
    return generators
