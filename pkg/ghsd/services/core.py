"""
🧮 Lattice Core
Exact rational data model for subdivision masks on the integer lattice.

Provides:
- Rational parsing/formatting with the "p/q" grammar of mask files
- Multi-index helpers (graded lexicographic enumeration, factorials, binomials)
- Small dense matrices over Fraction; row reduction, ranks and inverses
  go through sympy DomainMatrix over QQ
- Finitely supported lattice sequences (convolution, upsampling, cosets)
- Mask / HermiteType / VectorData containers and the JSON mask format

Every value stored here is an exact Fraction. Floating point only appears
in `Mask.to_array()`, which feeds the numerical smoothness engine.
"""

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import QQ, Matrix as SympyMatrix, Rational, kronecker_product
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError, DMNonSquareMatrixError


# =========================================================================
# Errors
# =========================================================================

class GHSDError(ValueError):
    """Base error for everything raised by the mask toolkit."""


class MaskFormatError(GHSDError):
    """Malformed mask file, rational string or type declaration."""


class AnalysisError(GHSDError):
    """A classification or construction step cannot be carried out."""


class ResonanceError(AnalysisError):
    """Matching-filter recursion hit an eigenvalue 2^{-|mu|} of the symbol at zero."""


class SymmetryError(GHSDError):
    """Symmetry completion/check failure. `witness` carries the offending data."""

    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness or {}


class LevelCapError(GHSDError):
    """Refinement level or memory guard exceeded."""


class RegistryError(GHSDError):
    """Unknown example/spline id or bad parameter override."""


# =========================================================================
# Type aliases
# =========================================================================

Point = Tuple[int, ...]
Row = Tuple[Fraction, ...]
Matrix = Tuple[Row, ...]
LatticeSequence = Dict[Point, Matrix]

ZERO = Fraction(0)
ONE = Fraction(1)

RATIONAL_PATTERN = re.compile(r"^-?[0-9]+(/[1-9][0-9]*)?$")
SYMMETRY_GROUPS = ("Z2", "D4", "D6")
MASK_FILE_VERSION = 1


# =========================================================================
# Rationals
# =========================================================================

def parse_rational(value) -> Fraction:
    """
    Parse a rational from a mask file.

    Accepts "p", "p/q" strings and plain JSON integers. Floats, complex
    strings and zero denominators are rejected.
    """
    if isinstance(value, bool):
        raise MaskFormatError(f"malformed rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise MaskFormatError(f"malformed rational: floating-point value {value!r} not accepted")
    if not isinstance(value, str) or not RATIONAL_PATTERN.match(value.strip()):
        raise MaskFormatError(f"malformed rational: {value!r}")
    return Fraction(value.strip())


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p" or "p/q"."""
    return str(Fraction(value))


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and rational strings to Fraction."""
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


# =========================================================================
# Multi-indices
# =========================================================================

@lru_cache(maxsize=None)
def indices_of_degree(d: int, total: int) -> Tuple[Point, ...]:
    """All multi-indices of length d and total degree `total`, lexicographically descending."""
    if d == 1:
        return ((total,),)
    out = []
    for first in range(total, -1, -1):
        for rest in indices_of_degree(d - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def multi_indices(d: int, order: int) -> Tuple[Point, ...]:
    """Graded lexicographic enumeration of {mu : |mu| <= order}."""
    out: List[Point] = []
    for total in range(order + 1):
        out.extend(indices_of_degree(d, total))
    return tuple(out)


def mi_abs(mu: Sequence[int]) -> int:
    return sum(mu)


def mi_factorial(mu: Sequence[int]) -> int:
    result = 1
    for m in mu:
        result *= factorial(m)
    return result


def mi_binom(mu: Sequence[int], beta: Sequence[int]) -> int:
    result = 1
    for m, b in zip(mu, beta):
        result *= comb(m, b)
    return result


def mi_leq(beta: Sequence[int], mu: Sequence[int]) -> bool:
    return all(b <= m for b, m in zip(beta, mu))


def mi_add(a: Sequence[int], b: Sequence[int]) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: Sequence[int], b: Sequence[int]) -> Point:
    return tuple(x - y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def sub_indices(mu: Point) -> Tuple[Point, ...]:
    """All beta <= mu componentwise."""
    return tuple(product(*(range(m + 1) for m in mu)))


def mi_power(x: Sequence, mu: Sequence[int]) -> Fraction:
    """x^mu for a rational (or integer) vector x; 0^0 = 1."""
    result = ONE
    for xi, m in zip(x, mu):
        if m:
            result *= Fraction(xi) ** m
    return result


def unit_index(d: int, i: int) -> Point:
    return tuple(1 if j == i else 0 for j in range(d))


def lattice_box(lo: Sequence[int], hi: Sequence[int]) -> List[Point]:
    """All lattice points of the box [lo, hi] in lexicographic order."""
    return list(product(*(range(a, b + 1) for a, b in zip(lo, hi))))


def gamma_set(d: int) -> List[Point]:
    """Gamma = {0,1}^d in lexicographic order (gamma_1 = 0)."""
    return list(product(*([range(2)] * d)))


# =========================================================================
# Dense matrices over Fraction
# =========================================================================

def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def zero_matrix(rows: int, cols: Optional[int] = None) -> Matrix:
    cols = rows if cols is None else cols
    return tuple(tuple(ZERO for _ in range(cols)) for _ in range(rows))


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def mat_shape(a: Matrix) -> Tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if mat_shape(a)[1] != mat_shape(b)[0]:
        raise AnalysisError(f"shape mismatch: {mat_shape(a)} x {mat_shape(b)}")
    cols = list(zip(*b))
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col)), ZERO) for col in cols)
        for row in a
    )


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Matrix, c) -> Matrix:
    c = Fraction(c)
    return tuple(tuple(c * x for x in row) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def is_zero_matrix(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product a (x) b."""
    product = SympyMatrix(kronecker_product(_to_sympy_matrix(a), _to_sympy_matrix(b)))
    return tuple(
        tuple(from_sympy_rational(x) for x in product.row(i))
        for i in range(product.rows)
    )


def matrix_to_strings(a: Matrix) -> List[List[str]]:
    return [[format_rational(x) for x in row] for row in a]


def matrix_to_float(a: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a], dtype=float)


# =========================================================================
# Exact linear algebra over QQ (sympy DomainMatrix)
# =========================================================================

def from_sympy_rational(x) -> Fraction:
    """Fraction from a sympy Rational or a QQ domain element."""
    if hasattr(x, "p") and hasattr(x, "q"):
        return Fraction(int(x.p), int(x.q))
    return Fraction(int(x.numerator), int(x.denominator))


def _to_sympy_matrix(a: Sequence[Sequence]) -> SympyMatrix:
    return SympyMatrix([[Rational(f.numerator, f.denominator) for f in map(Fraction, row)] for row in a])


def to_domain_matrix(rows: Sequence[Sequence], n_cols: Optional[int] = None) -> DomainMatrix:
    """Dense DomainMatrix over QQ; `n_cols` is only needed for zero rows."""
    data = [[QQ(f.numerator, f.denominator) for f in map(Fraction, row)] for row in rows]
    cols = len(data[0]) if data else (n_cols or 0)
    return DomainMatrix(data, (len(data), cols), QQ)


def row_reduce(rows: Sequence[Sequence]) -> Tuple[List[List[Fraction]], List[int]]:
    """
    Reduced row echelon form over Q.

    Returns:
        (rref rows with zero rows dropped, pivot column list)
    """
    if not rows:
        return [], []
    reduced, pivots = to_domain_matrix(rows).rref()
    data = reduced.to_list()
    return [[from_sympy_rational(x) for x in data[i]] for i in range(len(pivots))], list(pivots)


def matrix_rank(a: Sequence[Sequence]) -> int:
    if not a:
        return 0
    return to_domain_matrix(a).rank()


def nullspace(a: Sequence[Sequence], n_cols: Optional[int] = None) -> List[List[Fraction]]:
    """Basis of {x : a x = 0}, one vector per free column."""
    if not a:
        n = n_cols or 0
        return [[ONE if i == j else ZERO for i in range(n)] for j in range(n)]
    reduced, pivots = row_reduce(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * n
        x[f] = ONE
        for row, p in zip(reduced, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve_linear(a: Sequence[Sequence], b: Sequence) -> Tuple[List[Fraction], List[int]]:
    """
    Solve a x = b exactly.

    Free variables are set to zero. Raises AnalysisError on an
    inconsistent system.

    Returns:
        (solution, list of free column indices)
    """
    n = len(a[0]) if a else 0
    augmented = [list(row) + [bi] for row, bi in zip(a, b)]
    reduced, pivots = row_reduce(augmented)
    if n in pivots:
        raise AnalysisError("inconsistent linear system")
    x = [ZERO] * n
    for row, p in zip(reduced, pivots):
        x[p] = row[n]
    free = [c for c in range(n) if c not in pivots]
    return x, free


def mat_inverse(a: Matrix) -> Matrix:
    try:
        inverse = to_domain_matrix(a).inv()
    except (DMNonInvertibleMatrixError, DMNonSquareMatrixError) as e:
        raise AnalysisError("singular matrix") from e
    return tuple(tuple(from_sympy_rational(x) for x in row) for row in inverse.to_list())


# =========================================================================
# Lattice sequences (finitely supported, matrix valued)
# =========================================================================

def seq_clean(u: LatticeSequence) -> LatticeSequence:
    return {k: v for k, v in u.items() if not is_zero_matrix(v)}


def seq_convolve(u: LatticeSequence, v: LatticeSequence) -> LatticeSequence:
    """(u * v)(k) = sum_j u(j) v(k - j) with matrix products."""
    acc: Dict[Point, List[List[Fraction]]] = {}
    for ku, a in u.items():
        for kv, b in v.items():
            k = mi_add(ku, kv)
            prod_ab = mat_mul(a, b)
            slot = acc.get(k)
            if slot is None:
                acc[k] = [list(row) for row in prod_ab]
            else:
                for i, row in enumerate(prod_ab):
                    for j, x in enumerate(row):
                        slot[i][j] += x
    return seq_clean({k: tuple(tuple(row) for row in rows) for k, rows in acc.items()})


def seq_add(u: LatticeSequence, v: LatticeSequence) -> LatticeSequence:
    out = dict(u)
    for k, b in v.items():
        out[k] = mat_add(out[k], b) if k in out else b
    return seq_clean(out)


def seq_scale(u: LatticeSequence, c) -> LatticeSequence:
    return seq_clean({k: mat_scale(a, c) for k, a in u.items()})


def seq_upsample(u: LatticeSequence, factor: int) -> LatticeSequence:
    """k -> factor * k; symbol u(xi) becomes u(factor * xi)."""
    return {tuple(factor * x for x in k): a for k, a in u.items()}


def seq_shift(u: LatticeSequence, t: Sequence[int]) -> LatticeSequence:
    """(u(. - t))."""
    return {mi_add(k, t): a for k, a in u.items()}


def seq_adjoint(u: LatticeSequence) -> LatticeSequence:
    """u°(k) = u(-k)^T (symbol conjugate transpose for real sequences)."""
    return {tuple(-x for x in k): transpose(a) for k, a in u.items()}


def seq_map(u: LatticeSequence, fn) -> LatticeSequence:
    return seq_clean({k: fn(a) for k, a in u.items()})


def dirac(d: int, n: int) -> LatticeSequence:
    """delta * I_n."""
    return {tuple([0] * d): identity_matrix(n)}


def scalar_sequence(values: Dict[Point, Fraction]) -> LatticeSequence:
    """Wrap scalar values as 1x1 matrices."""
    return seq_clean({k: ((Fraction(v),),) for k, v in values.items()})


def support_box(keys: Iterable[Point]) -> Tuple[Point, Point]:
    keys = list(keys)
    if not keys:
        raise AnalysisError("empty support")
    d = len(keys[0])
    lo = tuple(min(k[i] for k in keys) for i in range(d))
    hi = tuple(max(k[i] for k in keys) for i in range(d))
    return lo, hi


# =========================================================================
# Data model
# =========================================================================

@dataclass(frozen=True)
class Mask:
    """
    Finitely supported r x r rational matrix mask on Z^d.

    Zero matrices are never stored; the support is never empty.
    """
    dim: int
    multiplicity: int
    coeffs: Dict[Point, Matrix]

    def __post_init__(self):
        if self.dim < 1 or self.multiplicity < 1:
            raise MaskFormatError("dim and multiplicity must be positive")
        clean: Dict[Point, Matrix] = {}
        for k, a in self.coeffs.items():
            k = tuple(int(x) for x in k)
            if len(k) != self.dim:
                raise MaskFormatError(f"lattice key {k} does not have dimension {self.dim}")
            a = as_matrix(a)
            if mat_shape(a) != (self.multiplicity, self.multiplicity):
                raise MaskFormatError(
                    f"coefficient at {k} has shape {mat_shape(a)}, expected "
                    f"{self.multiplicity}x{self.multiplicity}"
                )
            if not is_zero_matrix(a):
                clean[k] = a
        if not clean:
            raise MaskFormatError("mask support is empty")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_list(cls, start: int, matrices: Sequence[Sequence[Sequence]]) -> "Mask":
        """Univariate mask {a(start), a(start+1), ...}."""
        seq = {(start + i,): as_matrix(m) for i, m in enumerate(matrices)}
        r = len(matrices[0])
        return cls(dim=1, multiplicity=r, coeffs=seq)

    @classmethod
    def scalar(cls, values: Dict[Point, Fraction]) -> "Mask":
        d = len(next(iter(values)))
        return cls(dim=d, multiplicity=1, coeffs=scalar_sequence(values))

    def support(self) -> List[Point]:
        return list(self.coeffs.keys())

    def __getitem__(self, k: Point) -> Matrix:
        return self.coeffs.get(tuple(k), zero_matrix(self.multiplicity))

    def bounds(self) -> Tuple[Point, Point]:
        return support_box(self.coeffs.keys())

    def symbol_at_zero(self) -> Matrix:
        """a^(0) = sum_k a(k)."""
        total = zero_matrix(self.multiplicity)
        for a in self.coeffs.values():
            total = mat_add(total, a)
        return total

    def sequence(self) -> LatticeSequence:
        return dict(self.coeffs)

    def to_array(self) -> Tuple[np.ndarray, Point]:
        """Dense float array of shape (n_1, ..., n_d, r, r) and the lower corner."""
        lo, hi = self.bounds()
        shape = tuple(h - l + 1 for l, h in zip(lo, hi)) + (self.multiplicity, self.multiplicity)
        arr = np.zeros(shape, dtype=float)
        for k, a in self.coeffs.items():
            arr[mi_sub(k, lo)] = matrix_to_float(a)
        return arr, lo

    def to_dict(self) -> Dict:
        return {
            "dim": self.dim,
            "multiplicity": self.multiplicity,
            "coeffs": [
                {"k": list(k), "rows": matrix_to_strings(a)}
                for k, a in self.coeffs.items()
            ],
        }


@dataclass(frozen=True)
class HermiteType:
    """
    Generalized Hermite type: multiset Lambda = {nu_1..nu_r} with nu_1 = 0,
    translations T = {tau_1..tau_r} and an optional coset map theta (1-based).
    """
    nus: Tuple[Point, ...]
    taus: Tuple[Tuple[Fraction, ...], ...] = ()
    theta: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        nus = tuple(tuple(int(x) for x in nu) for nu in self.nus)
        if not nus:
            raise MaskFormatError("type multiset is empty")
        d = len(nus[0])
        if any(len(nu) != d for nu in nus) or any(x < 0 for nu in nus for x in nu):
            raise MaskFormatError("type entries must be nonnegative multi-indices of equal length")
        if any(x != 0 for x in nus[0]):
            raise MaskFormatError("type must start with the zero multi-index (nu_1 = 0)")
        taus = self.taus or tuple(tuple(ZERO for _ in range(d)) for _ in nus)
        taus = tuple(tuple(to_fraction(x) for x in tau) for tau in taus)
        if len(taus) != len(nus) or any(len(t) != d for t in taus):
            raise MaskFormatError("translation list does not match the type multiset")
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "taus", taus)
        if self.theta is not None:
            object.__setattr__(self, "theta", tuple(int(x) for x in self.theta))

    @classmethod
    def scalar(cls, d: int = 1) -> "HermiteType":
        return cls(nus=(tuple([0] * d),))

    @classmethod
    def univariate(cls, orders: Sequence[int], shifts: Optional[Sequence] = None) -> "HermiteType":
        """Lambda = {nu_1, ...} for d = 1 from plain integers."""
        taus = tuple((to_fraction(s),) for s in shifts) if shifts is not None else ()
        return cls(nus=tuple((n,) for n in orders), taus=taus)

    @property
    def dim(self) -> int:
        return len(self.nus[0])

    @property
    def size(self) -> int:
        return len(self.nus)

    @property
    def max_degree(self) -> int:
        return max(mi_abs(nu) for nu in self.nus)

    def is_uniform_translation(self) -> bool:
        return all(t == self.taus[0] for t in self.taus)

    def to_dict(self) -> Dict:
        data = {
            "type": [list(nu) for nu in self.nus],
            "translation": [[format_rational(x) for x in tau] for tau in self.taus],
        }
        if self.theta is not None:
            data["theta"] = list(self.theta)
        return data


@dataclass
class VectorData:
    """Refinement data w_n: lattice point -> 1 x r rational row, tagged with its level."""
    dim: int
    width: int
    level: int = 0
    values: Dict[Point, Row] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, row in self.values.items():
            row = tuple(Fraction(x) for x in row)
            if len(row) != self.width or len(k) != self.dim:
                raise MaskFormatError(f"data value at {k} does not match width {self.width}")
            if any(x != 0 for x in row):
                clean[tuple(k)] = row
        self.values = dict(sorted(clean.items()))

    @classmethod
    def delta(cls, d: int, r: int, component: int = 0) -> "VectorData":
        """delta(k) e_component^T."""
        row = tuple(ONE if j == component else ZERO for j in range(r))
        return cls(dim=d, width=r, level=0, values={tuple([0] * d): row})

    def support(self) -> List[Point]:
        return list(self.values.keys())

    def get(self, k: Point) -> Row:
        return self.values.get(tuple(k), tuple(ZERO for _ in range(self.width)))

    def as_sequence(self) -> LatticeSequence:
        return {k: (row,) for k, row in self.values.items()}


@dataclass(frozen=True)
class SymmetryBlock:
    """`symmetry` block of a mask file."""
    group: str
    center: Tuple[Fraction, ...]
    representatives: bool = False

    def to_dict(self) -> Dict:
        return {
            "group": self.group,
            "center": [format_rational(x) for x in self.center],
            "representatives": self.representatives,
        }


@dataclass
class MaskFile:
    """Parsed mask file: mask, type and optional symmetry descriptor."""
    mask: Mask
    htype: HermiteType
    symmetry: Optional[SymmetryBlock] = None


# =========================================================================
# Mask file I/O
# =========================================================================

def _require(condition: bool, message: str):
    if not condition:
        raise MaskFormatError(message)


def parse_mask(text: str) -> MaskFile:
    """
    Parse mask-file JSON into (Mask, HermiteType, SymmetryBlock).

    Raises:
        MaskFormatError: malformed JSON or rational, r/d mismatch,
            nu_1 != 0, duplicate lattice key
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MaskFormatError(f"invalid JSON: {e}") from e
    _require(isinstance(data, dict), "mask file must be a JSON object")
    _require(data.get("version", MASK_FILE_VERSION) == MASK_FILE_VERSION,
             f"unsupported mask file version {data.get('version')!r}")

    d = data.get("dim")
    r = data.get("multiplicity")
    _require(isinstance(d, int) and not isinstance(d, bool) and d >= 1, "dim must be a positive integer")
    _require(isinstance(r, int) and not isinstance(r, bool) and r >= 1, "multiplicity must be a positive integer")

    raw_type = data.get("type", [[0] * d] if r == 1 else None)
    _require(isinstance(raw_type, list) and len(raw_type) == r,
             f"type must list {r} multi-indices (r/d mismatch)")
    for nu in raw_type:
        _require(isinstance(nu, list) and len(nu) == d and all(isinstance(x, int) and not isinstance(x, bool) for x in nu),
                 f"type entry {nu!r} is not a multi-index of length {d} (r/d mismatch)")

    raw_translation = data.get("translation")
    taus: Tuple = ()
    if raw_translation is not None:
        _require(isinstance(raw_translation, list) and len(raw_translation) == r,
                 f"translation must list {r} vectors (r/d mismatch)")
        parsed = []
        for tau in raw_translation:
            _require(isinstance(tau, list) and len(tau) == d,
                     f"translation entry {tau!r} must have length {d} (r/d mismatch)")
            parsed.append(tuple(parse_rational(x) for x in tau))
        taus = tuple(parsed)

    raw_theta = data.get("theta")
    theta = None
    if raw_theta is not None:
        _require(isinstance(raw_theta, list) and len(raw_theta) == r
                 and all(isinstance(x, int) and not isinstance(x, bool) and 1 <= x <= r for x in raw_theta),
                 f"theta must list {r} channel numbers in 1..{r}")
        theta = tuple(raw_theta)

    htype = HermiteType(nus=tuple(tuple(nu) for nu in raw_type), taus=taus, theta=theta)

    raw_coeffs = data.get("coeffs")
    _require(isinstance(raw_coeffs, list) and raw_coeffs, "coeffs must be a non-empty list")
    coeffs: Dict[Point, Matrix] = {}
    for entry in raw_coeffs:
        _require(isinstance(entry, dict) and "k" in entry and "rows" in entry,
                 "each coefficient needs 'k' and 'rows'")
        k = entry["k"]
        _require(isinstance(k, list) and len(k) == d and all(isinstance(x, int) and not isinstance(x, bool) for x in k),
                 f"lattice key {k!r} must be {d} integers (r/d mismatch)")
        key = tuple(k)
        _require(key not in coeffs, f"duplicate lattice key {list(key)}")
        rows = entry["rows"]
        _require(isinstance(rows, list) and len(rows) == r and all(isinstance(row, list) and len(row) == r for row in rows),
                 f"coefficient at {list(key)} must be {r}x{r} (r/d mismatch)")
        coeffs[key] = tuple(tuple(parse_rational(x) for x in row) for row in rows)

    mask = Mask(dim=d, multiplicity=r, coeffs=coeffs)

    symmetry = None
    raw_sym = data.get("symmetry")
    if raw_sym is not None:
        _require(isinstance(raw_sym, dict), "symmetry must be an object")
        group = raw_sym.get("group")
        _require(group in SYMMETRY_GROUPS, f"unknown symmetry group {group!r}")
        center = raw_sym.get("center", ["0"] * d)
        _require(isinstance(center, list) and len(center) == d, f"symmetry center must have length {d}")
        symmetry = SymmetryBlock(
            group=group,
            center=tuple(parse_rational(x) for x in center),
            representatives=bool(raw_sym.get("representatives", False)),
        )

    return MaskFile(mask=mask, htype=htype, symmetry=symmetry)


def serialize_mask(mask: Mask, htype: HermiteType, symmetry: Optional[SymmetryBlock] = None) -> str:
    """Mask file JSON with lattice keys in lexicographic order."""
    data = {
        "version": MASK_FILE_VERSION,
        "dim": mask.dim,
        "multiplicity": mask.multiplicity,
        **htype.to_dict(),
        "coeffs": [
            {"k": list(k), "rows": matrix_to_strings(mask.coeffs[k])}
            for k in sorted(mask.coeffs)
        ],
    }
    if symmetry is not None:
        data["symmetry"] = symmetry.to_dict()
    return json.dumps(data, indent=2)


def load_mask_file(path) -> MaskFile:
    with open(path, "r", encoding="utf-8") as f:
        return parse_mask(f.read())


def parse_vector_data(text: str, dim: int, width: int) -> VectorData:
    """
    Refinement data JSON: {"values": [{"k": [...], "row": ["p/q", ...]}, ...]}.

    Raises:
        MaskFormatError: malformed JSON, rational or row width
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MaskFormatError(f"invalid JSON: {e}") from e
    _require(isinstance(data, dict) and isinstance(data.get("values"), list),
             "data file must be an object with a 'values' list")
    values: Dict[Point, Row] = {}
    for entry in data["values"]:
        _require(isinstance(entry, dict) and "k" in entry and "row" in entry, "data entry needs 'k' and 'row'")
        key = tuple(entry["k"])
        _require(len(key) == dim and all(isinstance(x, int) for x in key),
                 f"lattice key {entry['k']} does not have dimension {dim}")
        _require(key not in values, f"duplicate lattice key {list(key)}")
        _require(isinstance(entry["row"], list) and len(entry["row"]) == width,
                 f"data row at {list(key)} must have width {width}")
        values[key] = tuple(parse_rational(x) for x in entry["row"])
    return VectorData(dim=dim, width=width, level=0, values=values)


# =========================================================================
# Cosets
# =========================================================================

def coset(mask: Mask, gamma: Sequence[int]) -> LatticeSequence:
    """a^[gamma](k) = a(gamma + 2k) for gamma in {0,1}^d."""
    gamma = tuple(gamma)
    if len(gamma) != mask.dim or any(g not in (0, 1) for g in gamma):
        raise AnalysisError(f"coset index {gamma} outside {{0,1}}^{mask.dim}")
    out = {}
    for k, a in mask.coeffs.items():
        diff = mi_sub(k, gamma)
        if all(x % 2 == 0 for x in diff):
            out[tuple(x // 2 for x in diff)] = a
    return out


def interleave(cosets: Dict[Point, LatticeSequence], dim: int, multiplicity: int) -> Mask:
    """Inverse of `coset`: a(gamma + 2k) = a^[gamma](k)."""
    coeffs: Dict[Point, Matrix] = {}
    for gamma, seq in cosets.items():
        for k, a in seq.items():
            coeffs[tuple(g + 2 * x for g, x in zip(gamma, k))] = a
    return Mask(dim=dim, multiplicity=multiplicity, coeffs=coeffs)
