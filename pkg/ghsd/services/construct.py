"""
🏗️ Mask Construction
Mask factories and symmetry machinery.

- B-spline and tensor-product masks
- Coset vectorization of an L-channel mask by an integer dilation N
- Conversion of a vector mask to a prescribed generalized Hermite type
- The existence pipeline (B-spline -> vectorize -> convert)
- Interpolatory masks read off from generalized Hermite interpolants
- Symmetry matrices S(E, Lambda), orbit completion and checks
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, comb, floor
from typing import Dict, List, Optional, Sequence, Tuple, Union

from services.analysis import sum_rule_order
from services.core import (
    AnalysisError,
    HermiteType,
    Mask,
    Matrix,
    Point,
    SymmetryBlock,
    SymmetryError,
    ZERO,
    as_matrix,
    format_rational,
    kron,
    mat_inverse,
    mat_mul,
    matrix_to_strings,
    transpose,
)
from services.jets import (
    Jet,
    germ_product,
    germ_substitute,
    linear_power,
    phase_monomial_jet,
    row_from_components,
)
from services.normalform import normalizer_to_target, transform_mask
from services.splines import SplineVector, example12_interpolant

DEFAULT_CONVERT_CAP = 12


# =========================================================================
# B-spline and tensor masks
# =========================================================================

def bspline_mask(n: int) -> Mask:
    """a^B_n(k) = binom(n, k) / 2^n for k = 0..n."""
    if n < 1:
        raise AnalysisError("B-spline order must be >= 1")
    return Mask.scalar({(k,): Fraction(comb(n, k), 2 ** n) for k in range(n + 1)})


def tensor_mask(a: Mask, b: Mask) -> Mask:
    """(a (x) b)(j, k) = a(j) (x) b(k)."""
    coeffs = {}
    for j, x in a.coeffs.items():
        for k, y in b.coeffs.items():
            coeffs[j + k] = kron(x, y)
    return Mask(dim=a.dim + b.dim, multiplicity=a.multiplicity * b.multiplicity, coeffs=coeffs)


def tensor_power(a: Mask, d: int) -> Mask:
    result = a
    for _ in range(d - 1):
        result = tensor_mask(result, a)
    return result


# =========================================================================
# Coset vectorization
# =========================================================================

IntMatrix = Union[int, Sequence[Sequence[int]]]


def _as_dilation(n: IntMatrix, d: int) -> Matrix:
    if isinstance(n, int):
        if d != 1:
            raise AnalysisError("a scalar dilation needs d = 1")
        return ((Fraction(n),),)
    m = as_matrix(n)
    if len(m) != d or any(len(row) != d for row in m):
        raise AnalysisError(f"dilation must be {d}x{d}")
    if any(x.denominator != 1 for row in m for x in row):
        raise AnalysisError("dilation must be an integer matrix")
    return m


def _det(m: Matrix) -> Fraction:
    n = len(m)
    if n == 1:
        return m[0][0]
    return sum(
        ((-1) ** j * m[0][j] * _det(tuple(row[:j] + row[j + 1:] for row in m[1:])) for j in range(n)),
        ZERO,
    )


def _apply(m: Matrix, x: Sequence) -> Tuple[Fraction, ...]:
    return tuple(sum((a * Fraction(b) for a, b in zip(row, x)), ZERO) for row in m)


def coset_representatives(n: IntMatrix, d: int) -> List[Point]:
    """Gamma_N = N[0,1)^d cap Z^d; gamma_1 = 0, the rest lexicographic."""
    m = _as_dilation(n, d)
    if _det(m) == 0:
        raise AnalysisError("singular N")
    inv = mat_inverse(m)
    corners = [_apply(m, c) for c in product((0, 1), repeat=d)]
    lo = [int(min(c[i] for c in corners)) - 1 for i in range(d)]
    hi = [int(max(c[i] for c in corners)) + 1 for i in range(d)]
    points = []
    for x in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        y = _apply(inv, x)
        if all(0 <= t < 1 for t in y):
            points.append(tuple(x))
    zero = tuple([0] * d)
    return [zero] + sorted(p for p in points if p != zero)


def vectorize_mask(big: Mask, n: IntMatrix) -> Mask:
    """
    Block (j, k) of a(p) is A(N p - 2 gamma_j + gamma_k).

    Raises:
        AnalysisError: singular N
    """
    d, big_r = big.dim, big.multiplicity
    m = _as_dilation(n, d)
    gammas = coset_representatives(n, d)
    inv = mat_inverse(m)
    r = len(gammas)
    size = r * big_r
    blocks: Dict[Point, List[List[Fraction]]] = {}
    for key, value in big.coeffs.items():
        for j, gj in enumerate(gammas):
            for k, gk in enumerate(gammas):
                target = [key[i] + 2 * gj[i] - gk[i] for i in range(d)]
                p = _apply(inv, target)
                if any(x.denominator != 1 for x in p):
                    continue
                p = tuple(int(x) for x in p)
                slot = blocks.setdefault(p, [[ZERO] * size for _ in range(size)])
                for a in range(big_r):
                    for b in range(big_r):
                        slot[j * big_r + a][k * big_r + b] = value[a][b]
    return Mask(dim=d, multiplicity=size, coeffs=blocks)


def vectorized_type(htype: HermiteType, n: IntMatrix) -> HermiteType:
    """Channel (j, l) keeps nu_l and moves to N^{-1}(gamma_j + tau_l)."""
    d = htype.dim
    inv = mat_inverse(_as_dilation(n, d))
    nus, taus = [], []
    for gamma in coset_representatives(n, d):
        for nu, tau in zip(htype.nus, htype.taus):
            nus.append(nu)
            taus.append(_apply(inv, [g + t for g, t in zip(gamma, tau)]))
    return HermiteType(nus=tuple(nus), taus=tuple(taus))


def vectorize_filter(filt: Jet, n: IntMatrix) -> Jet:
    """Companion filter: component (j, l) is e^{i (N^{-1} gamma_j).xi} v_l(N^{-T} xi)."""
    d = filt.dim
    m = _as_dilation(n, d)
    inv = mat_inverse(m)
    substituted = germ_substitute(filt, transpose(inv))
    components = []
    for gamma in coset_representatives(n, d):
        phase = phase_monomial_jet(tuple([0] * d), _apply(inv, gamma), filt.order)
        shifted = germ_product(phase, substituted)
        components.extend(shifted.component(ell) for ell in range(filt.shape[1]))
    return row_from_components(components)


# =========================================================================
# Conversion to a prescribed type
# =========================================================================

def hermite_target(htype: HermiteType, order: int) -> Jet:
    """[(i xi)^{nu_1}, ..., (i xi)^{nu_r}] as a row jet."""
    zero = [0] * htype.dim
    return row_from_components([phase_monomial_jet(nu, zero, order) for nu in htype.nus])


def hermite_convert(mask: Mask, htype: HermiteType, cap: int = DEFAULT_CONVERT_CAP) -> Mask:
    """
    Similarity transform of `mask` whose matching filter is the type-Lambda
    monomial row to the full sum-rule order.

    Raises:
        AnalysisError: size mismatch or insufficient sum rules
    """
    if htype.size != mask.multiplicity or htype.dim != mask.dim:
        raise AnalysisError(
            f"size mismatch: type has {htype.size} entries, mask multiplicity is {mask.multiplicity}"
        )
    sr = sum_rule_order(mask, max(cap, htype.max_degree + 1))
    if sr.order < htype.max_degree + 1:
        raise AnalysisError(
            f"insufficient sum rules: order {sr.order} < {htype.max_degree + 1}"
        )
    order = sr.order - 1
    normalizer = normalizer_to_target(sr.matching_filter.jet, hermite_target(htype, order), order)
    return transform_mask(mask, normalizer)


def existence_pipeline(htype: HermiteType, cap: int = DEFAULT_CONVERT_CAP) -> Mask:
    """
    Spline generalized Hermite mask of type Lambda:
    A = (x)^d a^B_{m+2}, N = diag(r, 1, ..., 1), then convert.
    """
    d, r = htype.dim, htype.size
    m = htype.max_degree
    big = tensor_power(bspline_mask(m + 2), d)
    dilation = [[r if (i == j == 0) else (1 if i == j else 0) for j in range(d)] for i in range(d)]
    vector = vectorize_mask(big, dilation)
    return hermite_convert(vector, htype, cap)


# =========================================================================
# Interpolatory masks from interpolants
# =========================================================================

def interpolant_to_mask(phi: SplineVector, htype: HermiteType) -> Mask:
    """a(k) column l = 2^{-1-nu_l} phi^{(nu_l)}((k + tau_l) / 2) for d = 1."""
    if htype.dim != 1 or phi.dim != 1:
        raise AnalysisError("interpolant_to_mask supports d = 1 only")
    r = phi.size
    if htype.size != r:
        raise AnalysisError("spline and type sizes do not agree")
    lo, hi = phi.hull()
    columns: Dict[int, List[Tuple[Fraction, ...]]] = {}
    for ell, (nu, tau) in enumerate(zip(htype.nus, htype.taus)):
        deriv = phi.derivative(nu[0])
        scale = Fraction(1, 2 ** (1 + nu[0]))
        first = floor(2 * lo - tau[0]) - 1
        last = ceil(2 * hi - tau[0]) + 1
        for k in range(first, last + 1):
            values = deriv((k + tau[0]) / 2)
            if any(values):
                columns.setdefault(k, [(ZERO,) * r for _ in range(r)])[ell] = tuple(v * scale for v in values)
    coeffs = {
        (k,): tuple(tuple(cols[ell][i] for ell in range(r)) for i in range(r))
        for k, cols in columns.items()
    }
    return Mask(dim=1, multiplicity=r, coeffs=coeffs)


def example12_mask(m: int, n_copies: int) -> Tuple[Mask, HermiteType]:
    phi = example12_interpolant(m, n_copies)
    return interpolant_to_mask(phi, phi.htype), phi.htype


# =========================================================================
# Symmetry
# =========================================================================

def _int_matrix(rows) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in rows)


def _with_negatives(mats) -> List[Tuple[Tuple[int, ...], ...]]:
    mats = [_int_matrix(m) for m in mats]
    return mats + [tuple(tuple(-x for x in row) for row in m) for m in mats]


SYMMETRY_TABLES: Dict[str, List[Tuple[Tuple[int, ...], ...]]] = {
    "Z2": [((1,),), ((-1,),)],
    "D4": _with_negatives([
        [[1, 0], [0, 1]],
        [[1, 0], [0, -1]],
        [[0, 1], [1, 0]],
        [[0, 1], [-1, 0]],
    ]),
    "D6": _with_negatives([
        [[1, 0], [0, 1]],
        [[0, -1], [1, -1]],
        [[-1, 1], [-1, 0]],
        [[0, 1], [1, 0]],
        [[1, -1], [0, -1]],
        [[-1, 0], [-1, 1]],
    ]),
}


def group_elements(group: str):
    if group not in SYMMETRY_TABLES:
        raise SymmetryError(f"unknown symmetry group {group!r}")
    return list(SYMMETRY_TABLES[group])


def symmetry_matrix(e, htype: HermiteType) -> Matrix:
    """
    S[j, l] = coefficient of xi^{nu_j} in (E^T xi)^{nu_l}, i.e. the matrix
    of xi -> E^T xi acting on the monomial row [(i xi)^{nu_1}, ...].

    Raises:
        SymmetryError: repeated entries in Lambda, Lambda not closed under E
    """
    if len(set(htype.nus)) != len(htype.nus):
        raise SymmetryError("ambiguous: repeated entries in Lambda")
    et = transpose(as_matrix(e))
    index = {nu: j for j, nu in enumerate(htype.nus)}
    r = htype.size
    s = [[ZERO] * r for _ in range(r)]
    for ell, nu in enumerate(htype.nus):
        for mono, c in linear_power(et, nu).items():
            if c == 0:
                continue
            if mono not in index:
                raise SymmetryError(
                    f"Lambda not closed under E: (E^T xi)^{nu} has the term xi^{mono}",
                    witness={"E": [list(row) for row in e], "nu": list(nu)},
                )
            s[index[mono]][ell] += c
    return as_matrix(s)


@dataclass
class SymmetryDescriptor:
    """Group elements, center c and the matrix S_E for each element."""
    group: str
    center: Tuple[Fraction, ...]
    elements: List[Tuple[Tuple[int, ...], ...]]
    s_map: Dict[Tuple[Tuple[int, ...], ...], Matrix] = field(default_factory=dict)

    def to_block(self, representatives: bool = False) -> SymmetryBlock:
        return SymmetryBlock(group=self.group, center=self.center, representatives=representatives)


def symmetry_descriptor(group: str, htype: HermiteType, center: Optional[Sequence] = None) -> SymmetryDescriptor:
    elements = group_elements(group)
    if len(elements[0]) != htype.dim:
        raise SymmetryError(f"group {group} acts on dimension {len(elements[0])}, type has {htype.dim}")
    c = tuple(Fraction(x) for x in center) if center is not None else tuple(ZERO for _ in range(htype.dim))
    s_map = {e: symmetry_matrix(e, htype) for e in elements}
    return SymmetryDescriptor(group=group, center=c, elements=elements, s_map=s_map)


def descriptor_from_block(block: SymmetryBlock, htype: HermiteType) -> SymmetryDescriptor:
    return symmetry_descriptor(block.group, htype, block.center)


def _image(e, k: Sequence[int], c: Sequence[Fraction]) -> Point:
    """E(k - c) + c; must be a lattice point."""
    shifted = [Fraction(x) - y for x, y in zip(k, c)]
    image = [sum((Fraction(a) * b for a, b in zip(row, shifted)), ZERO) + ci for row, ci in zip(e, c)]
    if any(x.denominator != 1 for x in image):
        raise SymmetryError(
            "non-lattice image under the symmetry group",
            witness={"E": [list(row) for row in e], "k": list(k)},
        )
    return tuple(int(x) for x in image)


def _conjugate(s: Matrix, a: Matrix) -> Matrix:
    return mat_mul(mat_mul(s, a), mat_inverse(s))


def symmetry_complete(
    representatives: Dict[Point, Matrix],
    descriptor: SymmetryDescriptor,
    multiplicity: int,
) -> Mask:
    """
    Full mask with a(E(k - c) + c) = S_E a(k) S_E^{-1} for every E.

    Raises:
        SymmetryError: two orbit routes disagree (witness holds both values)
    """
    full: Dict[Point, Matrix] = {}
    origin: Dict[Point, Point] = {}
    for k, value in representatives.items():
        k = tuple(k)
        value = as_matrix(value)
        for e in descriptor.elements:
            target = _image(e, k, descriptor.center)
            image = _conjugate(descriptor.s_map[e], value)
            if target in full and full[target] != image:
                raise SymmetryError(
                    f"orbit conflict at {list(target)}",
                    witness={
                        "k": list(target),
                        "from": [list(origin[target]), list(k)],
                        "values": [matrix_to_strings(full[target]), matrix_to_strings(image)],
                    },
                )
            full[target] = image
            origin.setdefault(target, k)
    dim = len(descriptor.center)
    return Mask(dim=dim, multiplicity=multiplicity, coeffs=full)


@dataclass
class SymmetryVerdict:
    ok: bool
    witness: Optional[Dict] = None


def symmetry_check(mask: Mask, htype: HermiteType, descriptor: SymmetryDescriptor) -> SymmetryVerdict:
    """
    Centered orbit relation for every E and every k in the support.

    Raises:
        SymmetryError: translations not uniform ("unsupported symmetry form")
    """
    if not htype.is_uniform_translation():
        raise SymmetryError("unsupported symmetry form: translations are not uniform")
    for e in descriptor.elements:
        s = descriptor.s_map[e]
        for k in mask.support():
            target = _image(e, k, descriptor.center)
            expected = _conjugate(s, mask[k])
            if mask[target] != expected:
                return SymmetryVerdict(ok=False, witness={
                    "E": [list(row) for row in e],
                    "k": list(k),
                    "image": list(target),
                })
    return SymmetryVerdict(ok=True)


def restrict_to_representatives(mask: Mask, descriptor: SymmetryDescriptor) -> Dict[Point, Matrix]:
    """Lexicographically smallest support point of each orbit."""
    seen = set()
    reps: Dict[Point, Matrix] = {}
    for k in sorted(mask.support()):
        if k in seen:
            continue
        orbit = {_image(e, k, descriptor.center) for e in descriptor.elements}
        seen.update(orbit)
        reps[k] = mask[k]
    return reps


def describe_symmetry(descriptor: SymmetryDescriptor) -> Dict:
    return {
        "group": descriptor.group,
        "center": [format_rational(x) for x in descriptor.center],
        "order": len(descriptor.elements),
        "s_matrices": [
            {"E": [list(row) for row in e], "S": matrix_to_strings(s)}
            for e, s in descriptor.s_map.items()
        ],
    }
