"""
📐 Normalized Jets
Truncated Taylor data at xi = 0 of lattice-sequence symbols and analytic germs.

Convention:
    N_mu(f) := f^{(mu)}(0) / (-i)^{|mu|}

so that for a finitely supported sequence u the jet entries are plain
rational moments N_mu(u) = sum_k u(k) k^mu. A printed coefficient c of
(i xi)^mu corresponds to N_mu = (-1)^{|mu|} mu! c.

Every jet is matrix shaped: scalars are 1x1, filters are 1xr rows and
mask symbols are rxr.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from services.core import (
    AnalysisError,
    LatticeSequence,
    Mask,
    Matrix,
    ONE,
    Point,
    VectorData,
    ZERO,
    as_matrix,
    format_rational,
    identity_matrix,
    indices_of_degree,
    is_zero_matrix,
    mat_add,
    mat_mul,
    mat_scale,
    mat_shape,
    mi_abs,
    mi_binom,
    mi_factorial,
    mi_leq,
    mi_power,
    mi_sub,
    multi_indices,
    seq_upsample,
    sub_indices,
    zero_matrix,
)

SequenceLike = Union[Mask, VectorData, LatticeSequence]


@dataclass(frozen=True)
class Jet:
    """
    Normalized jet of order `order` on R^d.

    `entries` maps multi-indices to matrices of shape `shape`; missing
    entries are zero.
    """
    dim: int
    order: int
    shape: Tuple[int, int]
    entries: Dict[Point, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mu, value in self.entries.items():
            if mi_abs(mu) > self.order:
                continue
            value = as_matrix(value)
            if mat_shape(value) != self.shape:
                raise AnalysisError(f"shape mismatch: jet entry {mat_shape(value)} vs {self.shape}")
            if not is_zero_matrix(value):
                clean[tuple(mu)] = value
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, mu: Sequence[int]) -> Matrix:
        return self.entries.get(tuple(mu), zero_matrix(*self.shape))

    def scalar(self, mu: Sequence[int]) -> Fraction:
        """Entry of a 1x1 jet."""
        return self[mu][0][0]

    def row(self, mu: Sequence[int]) -> Tuple[Fraction, ...]:
        """Entry of a 1xr row jet."""
        return self[mu][0]

    def component(self, ell: int) -> "Jet":
        """Scalar jet of column `ell` (0-based) of a row jet."""
        return Jet(
            dim=self.dim,
            order=self.order,
            shape=(1, 1),
            entries={mu: ((m[0][ell],),) for mu, m in self.entries.items()},
        )

    def entry(self, i: int, j: int) -> "Jet":
        """Scalar jet of entry (i, j)."""
        return Jet(
            dim=self.dim,
            order=self.order,
            shape=(1, 1),
            entries={mu: ((m[i][j],),) for mu, m in self.entries.items()},
        )

    def indices(self) -> Tuple[Point, ...]:
        return multi_indices(self.dim, self.order)

    def printed(self, mu: Sequence[int]) -> Matrix:
        """Coefficient of (i xi)^mu in the Taylor expansion."""
        c = Fraction((-1) ** mi_abs(mu), mi_factorial(mu))
        return mat_scale(self[mu], c)

    def to_dict(self) -> Dict:
        return {
            "dim": self.dim,
            "order": self.order,
            "shape": list(self.shape),
            "entries": [
                {"mu": list(mu), "value": [[format_rational(x) for x in r] for r in self[mu]]}
                for mu in self.indices()
            ],
        }


# =========================================================================
# Constructors
# =========================================================================

def _as_sequence(u: SequenceLike) -> LatticeSequence:
    if isinstance(u, Mask):
        return u.coeffs
    if isinstance(u, VectorData):
        return u.as_sequence()
    return u


def sequence_jet(u: SequenceLike, order: int, omega: Optional[Sequence[int]] = None) -> Jet:
    """
    Jets of the symbol of u at xi + pi*omega.

    N_mu = sum_k u(k) (-1)^{k.omega} k^mu for all |mu| <= order.
    """
    seq = _as_sequence(u)
    if not seq:
        raise AnalysisError("cannot take the jet of an empty sequence")
    first_key, first_value = next(iter(seq.items()))
    d = len(first_key)
    shape = mat_shape(first_value)
    omega = tuple(omega) if omega is not None else tuple([0] * d)
    acc: Dict[Point, List[List[Fraction]]] = {
        mu: [[ZERO] * shape[1] for _ in range(shape[0])] for mu in multi_indices(d, order)
    }
    for k, value in seq.items():
        sign = -1 if sum(a * b for a, b in zip(k, omega)) % 2 else 1
        for mu, slot in acc.items():
            w = sign * mi_power(k, mu)
            if w == 0:
                continue
            for i, row in enumerate(value):
                for j, x in enumerate(row):
                    if x:
                        slot[i][j] += w * x
    return Jet(dim=d, order=order, shape=shape, entries={mu: m for mu, m in acc.items()})


def dirac_jet(d: int, order: int, n: int = 1) -> Jet:
    """Jet of delta * I_n."""
    return Jet(dim=d, order=order, shape=(n, n), entries={tuple([0] * d): identity_matrix(n)})


def zero_jet(d: int, order: int, shape: Tuple[int, int]) -> Jet:
    return Jet(dim=d, order=order, shape=shape, entries={})


def phase_monomial_jet(nu: Sequence[int], tau: Sequence, order: int) -> Jet:
    """
    Jet of (i xi)^nu e^{i tau.xi}.

    N_mu = (-1)^{|mu|} mu! tau^{mu-nu} / (mu-nu)! for nu <= mu, else 0.
    """
    nu = tuple(nu)
    d = len(nu)
    tau = tuple(Fraction(x) for x in tau)
    entries = {}
    for mu in multi_indices(d, order):
        if not mi_leq(nu, mu):
            continue
        diff = mi_sub(mu, nu)
        value = Fraction((-1) ** mi_abs(mu) * mi_factorial(mu), mi_factorial(diff)) * mi_power(tau, diff)
        entries[mu] = ((value,),)
    return Jet(dim=d, order=order, shape=(1, 1), entries=entries)


def jet_from_expansion(coeffs: Dict[Point, object], d: int, order: int) -> Jet:
    """Scalar jet from printed coefficients of (i xi)^mu."""
    entries = {}
    for mu, c in coeffs.items():
        mu = tuple(mu)
        if len(mu) != d:
            raise AnalysisError(f"multi-index {mu} does not have dimension {d}")
        entries[mu] = ((Fraction(c) * (-1) ** mi_abs(mu) * mi_factorial(mu),),)
    return Jet(dim=d, order=order, shape=(1, 1), entries=entries)


def row_from_components(components: Sequence[Jet]) -> Jet:
    """Stack scalar jets into a 1xr row jet."""
    if not components:
        raise AnalysisError("row jet needs at least one component")
    d = components[0].dim
    order = min(c.order for c in components)
    entries = {
        mu: (tuple(c.scalar(mu) for c in components),)
        for mu in multi_indices(d, order)
    }
    return Jet(dim=d, order=order, shape=(1, len(components)), entries=entries)


# =========================================================================
# Algebra
# =========================================================================

def germ_product(f: Jet, g: Jet) -> Jet:
    """Leibniz rule: N_mu(fg) = sum_{beta<=mu} binom(mu,beta) N_beta(f) N_{mu-beta}(g)."""
    if f.dim != g.dim:
        raise AnalysisError(f"dimension mismatch: {f.dim} vs {g.dim}")
    if f.shape[1] != g.shape[0]:
        raise AnalysisError(f"shape mismatch: {f.shape} x {g.shape}")
    order = min(f.order, g.order)
    shape = (f.shape[0], g.shape[1])
    entries = {}
    for mu in multi_indices(f.dim, order):
        total = zero_matrix(*shape)
        for beta in sub_indices(mu):
            fb = f.entries.get(beta)
            if fb is None:
                continue
            gm = g.entries.get(mi_sub(mu, beta))
            if gm is None:
                continue
            total = mat_add(total, mat_scale(mat_mul(fb, gm), mi_binom(mu, beta)))
        entries[mu] = total
    return Jet(dim=f.dim, order=order, shape=shape, entries=entries)


def germ_add(f: Jet, g: Jet) -> Jet:
    if f.shape != g.shape or f.dim != g.dim:
        raise AnalysisError(f"shape mismatch: {f.shape} + {g.shape}")
    order = min(f.order, g.order)
    return Jet(
        dim=f.dim, order=order, shape=f.shape,
        entries={mu: mat_add(f[mu], g[mu]) for mu in multi_indices(f.dim, order)},
    )


def germ_scale(f: Jet, c) -> Jet:
    return Jet(dim=f.dim, order=f.order, shape=f.shape,
               entries={mu: mat_scale(m, c) for mu, m in f.entries.items()})


def germ_dilate(f: Jet, lam: int) -> Jet:
    """Jet of f(lam * xi): N_mu scales by lam^{|mu|}."""
    if lam < 1:
        raise AnalysisError("dilation factor must be >= 1")
    return Jet(dim=f.dim, order=f.order, shape=f.shape,
               entries={mu: mat_scale(m, Fraction(lam) ** mi_abs(mu)) for mu, m in f.entries.items()})


def germ_reciprocal(f: Jet, order: Optional[int] = None) -> Jet:
    """Jet of 1/f for a scalar jet with N_0(f) != 0."""
    if f.shape != (1, 1):
        raise AnalysisError("germ_reciprocal needs a scalar jet")
    order = f.order if order is None else min(order, f.order)
    zero = tuple([0] * f.dim)
    f0 = f.scalar(zero)
    if f0 == 0:
        raise AnalysisError("non-invertible germ")
    g: Dict[Point, Fraction] = {}
    for mu in multi_indices(f.dim, order):
        if mu == zero:
            g[mu] = 1 / f0
            continue
        total = ZERO
        for beta in sub_indices(mu):
            if beta == zero:
                continue
            total += mi_binom(mu, beta) * f.scalar(beta) * g[mi_sub(mu, beta)]
        g[mu] = -total / f0
    return Jet(dim=f.dim, order=order, shape=(1, 1), entries={mu: ((v,),) for mu, v in g.items()})


def germ_power(f: Jet, n: int) -> Jet:
    """f^n for a square jet, n >= 0."""
    result = dirac_jet(f.dim, f.order, f.shape[0])
    for _ in range(n):
        result = germ_product(result, f)
    return result


def truncate(f: Jet, order: int) -> Jet:
    return Jet(dim=f.dim, order=min(order, f.order), shape=f.shape, entries=f.entries)


def jet_equal(f: Jet, g: Jet, order: Optional[int] = None) -> bool:
    """Exact equality of all entries with |mu| <= order."""
    if f.dim != g.dim or f.shape != g.shape:
        return False
    order = min(f.order, g.order) if order is None else order
    return all(f[mu] == g[mu] for mu in multi_indices(f.dim, order))


def vanishes_to(f: Jet, order: int) -> bool:
    """True iff N_mu(f) = 0 for all |mu| <= order."""
    return all(is_zero_matrix(f[mu]) for mu in multi_indices(f.dim, min(order, f.order)))


def first_mismatch(f: Jet, g: Jet) -> Optional[Point]:
    """Smallest multi-index (graded lex) where f and g differ, up to the common order."""
    for mu in multi_indices(f.dim, min(f.order, g.order)):
        if f[mu] != g[mu]:
            return mu
    return None


# =========================================================================
# Linear substitution xi -> M xi
# =========================================================================

def linear_power(m: Matrix, nu: Point) -> Dict[Point, Fraction]:
    """Coefficients of (M xi)^nu as a polynomial in xi."""
    d = len(nu)
    poly: Dict[Point, Fraction] = {tuple([0] * d): ONE}
    for i, power in enumerate(nu):
        linear = {tuple(1 if c == j else 0 for c in range(d)): Fraction(m[i][j])
                  for j in range(d) if m[i][j] != 0}
        for _ in range(power):
            nxt: Dict[Point, Fraction] = {}
            for k1, c1 in poly.items():
                for k2, c2 in linear.items():
                    key = tuple(a + b for a, b in zip(k1, k2))
                    nxt[key] = nxt.get(key, ZERO) + c1 * c2
            poly = nxt
    return poly


def germ_substitute(f: Jet, m: Sequence[Sequence]) -> Jet:
    """
    Jet of f(M xi) for a rational d x d matrix M.

    N_mu(f(M.)) = mu! sum_{|nu|=|mu|} N_nu(f) c_{nu,mu} / nu!, with c_{nu,mu}
    the coefficient of xi^mu in (M xi)^nu.
    """
    m = as_matrix(m)
    entries: Dict[Point, Matrix] = {}
    for total in range(f.order + 1):
        for nu in indices_of_degree(f.dim, total):
            value = f.entries.get(nu)
            if value is None:
                continue
            for mu, c in linear_power(m, nu).items():
                if c == 0:
                    continue
                w = c * Fraction(mi_factorial(mu), mi_factorial(nu))
                entries[mu] = mat_add(entries.get(mu, zero_matrix(*f.shape)), mat_scale(value, w))
    return Jet(dim=f.dim, order=f.order, shape=f.shape, entries=entries)


def upsample(u: LatticeSequence, factor: int = 2) -> LatticeSequence:
    """Sequence whose symbol is u^(factor xi)."""
    return seq_upsample(u, factor)
