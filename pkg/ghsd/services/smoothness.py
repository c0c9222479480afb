"""
📈 Smoothness Estimation
Critical L2 smoothness of a mask through its transfer operator, the
sup-norm heuristic, and convergence verdicts for the vector cascade.

For a finitely supported column u with autocorrelation F = u * u°
(u°(k) = u(-k)^T), the transfer operator

    (T F)(k) = 2^d H(2k),   H = a * F * a°

satisfies ||a_n * u||_2^2 = 2^{-dn} t_n with t_n = trace((T^n F)(0)).
The growth rate lambda = lim t_{n+1} / t_n over generators u of the
difference space gives

    rho_2 = 2^{d/2} sqrt(lambda),   sm_2 = -log2(lambda) / 2,   sm_inf >= sm_2 - d/2.

Exact Fraction versions of the operator live here for validation; the
estimator itself runs in binary64 on dense numpy arrays.
"""

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from services.analysis import is_generalized_hermite, sum_rule_order
from services.core import (
    AnalysisError,
    HermiteType,
    LatticeSequence,
    LevelCapError,
    Mask,
    ONE,
    Point,
    ZERO,
    matrix_to_float,
    mi_abs,
    mi_binom,
    mi_power,
    mi_sub,
    multi_indices,
    nullspace,
    seq_adjoint,
    seq_clean,
    seq_convolve,
    seq_upsample,
    sub_indices,
)
from services.jets import Jet
from services.normalform import build_normalizer, generator_set, nabla, realize_from_jets

load_dotenv()

SM_TOL = float(os.getenv("GHSD_SM_TOL", "1e-10"))
SM_ITERS = int(os.getenv("GHSD_SM_ITERS", "200"))
RHO_INF_MAX_POINTS = int(os.getenv("GHSD_RHO_INF_MAX_POINTS", "2000000"))
SR_CAP = int(os.getenv("GHSD_SR_CAP", "12"))

# Dense eigen-solve limit on the restricted transfer matrix
DENSE_LIMIT = 4000

# Consecutive small ratio changes required for convergence
STABLE_STEPS = 3

# Verdict margin on sm_inf lower bounds
VERDICT_MARGIN = 1e-3


# =========================================================================
# Exact oracle
# =========================================================================

def autocorrelation(u: LatticeSequence) -> LatticeSequence:
    """F = u * u° for an r x 1 column sequence."""
    return seq_convolve(u, seq_adjoint(u))


def transfer_apply(mask: Mask, f: LatticeSequence) -> LatticeSequence:
    """(T F)(k) = 2^d (a * F * a°)(2k), exact."""
    if not f:
        return {}
    h = seq_convolve(seq_convolve(mask.coeffs, f), seq_adjoint(mask.coeffs))
    scale = 2 ** mask.dim
    out = {}
    for k, value in h.items():
        if all(x % 2 == 0 for x in k):
            out[tuple(x // 2 for x in k)] = tuple(tuple(scale * x for x in row) for row in value)
    return seq_clean(out)


def trace_coefficient(f: LatticeSequence, d: int) -> Fraction:
    value = f.get(tuple([0] * d))
    if value is None:
        return ZERO
    return sum((value[i][i] for i in range(len(value))), ZERO)


def iterate_mask(mask: Mask, n: int) -> LatticeSequence:
    """a_n with a_n^(xi) = a^(2^{n-1} xi) ... a^(xi)."""
    result = mask.coeffs
    for _ in range(n - 1):
        result = seq_convolve(seq_upsample(result, 2), mask.coeffs)
    return result


def sequence_norm_sq(u: LatticeSequence) -> Fraction:
    return sum((x * x for value in u.values() for row in value for x in row), ZERO)


# =========================================================================
# Generators of the difference space
# =========================================================================

def _column(values: Dict[Point, Sequence[Fraction]]) -> LatticeSequence:
    return seq_clean({k: tuple((x,) for x in v) for k, v in values.items()})


def compact_generators(filt: Optional[Jet], m: int, d: int, r: int) -> List[LatticeSequence]:
    """
    nabla^nu delta e_j for |nu| = m+1, plus a basis of the columns supported
    on {k >= 0 : |k| <= m} with v^ u^ = O(|xi|^{m+1}).
    """
    zero = tuple([0] * d)
    if m < 0:
        return [_column({zero: [ONE if i == j else ZERO for i in range(r)]}) for j in range(r)]
    generators = []
    for nu in multi_indices(d, m + 1):
        if mi_abs(nu) != m + 1:
            continue
        diff = nabla(nu)
        for j in range(r):
            generators.append(_column({
                k: [v[0][0] if i == j else ZERO for i in range(r)] for k, v in diff.items()
            }))
    points = list(multi_indices(d, m))
    unknowns = [(k, i) for k in points for i in range(r)]
    rows = []
    for mu in multi_indices(d, m):
        row = []
        for k, i in unknowns:
            total = ZERO
            for beta in sub_indices(mu):
                nb = filt.row(beta)[i]
                if nb:
                    total += mi_binom(mu, beta) * nb * mi_power(k, mi_sub(mu, beta))
            row.append(total)
        rows.append(row)
    for vec in nullspace(rows, len(unknowns)):
        values: Dict[Point, List[Fraction]] = {}
        for (k, i), x in zip(unknowns, vec):
            values.setdefault(k, [ZERO] * r)[i] = x
        generators.append(_column(values))
    return generators


def normalizer_generators(filt: Optional[Jet], m: int, d: int, r: int) -> List[LatticeSequence]:
    if m < 0:
        return compact_generators(filt, m, d, r)
    normalizer = build_normalizer(filt, m)
    return generator_set(normalizer, m, r, d, filt)


def _radius(seqs: Sequence[LatticeSequence]) -> int:
    return max((abs(x) for s in seqs for k in s for x in k), default=0)


# =========================================================================
# Numerical transfer engine
# =========================================================================

@dataclass
class GeneratorRun:
    """Power-iteration record for one seed autocorrelation."""
    lam: float
    iterations: int
    converged: bool
    history: List[float] = field(default_factory=list)


@dataclass
class Rho2Estimate:
    lam: float
    rho: float
    runs: List[GeneratorRun]
    converged: bool
    method: str = "power"
    warnings: List[str] = field(default_factory=list)
    dense_lam: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None

    @property
    def iterations(self) -> int:
        return max((run.iterations for run in self.runs), default=0)


class TransferEngine:
    """
    Transfer operator of one mask on autocorrelations supported in the
    box [-R, R]^d, with the projection onto the invariant subspace of
    symmetric autocorrelations whose moments vanish against the matching
    filter (v F and F v^* to order m+1, v F v^* to order 2m+2).
    """

    RANK_TOLERANCE = 1e-9

    def __init__(self, mask: Mask, filt: Optional[Jet], m: int, radius: int):
        self.mask = mask
        self.d = mask.dim
        self.r = mask.multiplicity
        self.m = m
        self.coeffs, _ = mask.to_array()
        self.widths = tuple(n - 1 for n in self.coeffs.shape[: self.d])
        self.radius = max(max(self.widths), radius, 1)
        self.side = 2 * self.radius + 1
        self.shape = (self.side,) * self.d + (self.r, self.r)
        self.size = int(np.prod(self.shape))
        self.offsets = [
            (s, self.coeffs[s]) for s in np.ndindex(*self.coeffs.shape[: self.d]) if self.coeffs[s].any()
        ]
        self.center = (self.radius,) * self.d
        self.basis = self._invariant_basis(filt)

    # ---------------------------------------------------------------
    # Operator
    # ---------------------------------------------------------------

    def apply(self, f: np.ndarray) -> np.ndarray:
        d, big_r = self.d, self.radius
        p = np.zeros(tuple(self.side + w for w in self.widths) + (self.r, self.r))
        for s, a in self.offsets:
            window = tuple(slice(si, si + self.side) for si in s)
            p[window] += np.einsum("ij,...jk->...ik", a, f)
        pad = [(w, w) for w in self.widths] + [(0, 0), (0, 0)]
        p = np.pad(p, pad)
        h = np.zeros(tuple(self.side + 2 * w for w in self.widths) + (self.r, self.r))
        for s, a in self.offsets:
            window = tuple(slice(si, si + self.side + 2 * w) for si, w in zip(s, self.widths))
            h += np.einsum("...ij,kj->...ik", p[window], a)
        h = np.pad(h, [(big_r, big_r)] * d + [(0, 0), (0, 0)])
        take = tuple(slice(w, w + 4 * big_r + 1, 2) for w in self.widths)
        return (2 ** d) * h[take]

    def symmetrize(self, f: np.ndarray) -> np.ndarray:
        flipped = f[(slice(None, None, -1),) * self.d]
        return 0.5 * (f + np.swapaxes(flipped, -1, -2))

    def project(self, f: np.ndarray) -> np.ndarray:
        flat = f.reshape(-1)
        return (self.basis @ (self.basis.T @ flat)).reshape(self.shape)

    def trace0(self, f: np.ndarray) -> float:
        return float(np.trace(f[self.center]))

    def embed(self, seq: LatticeSequence) -> np.ndarray:
        f = np.zeros(self.shape)
        for k, value in seq.items():
            idx = tuple(x + self.radius for x in k)
            if any(i < 0 or i >= self.side for i in idx):
                raise AnalysisError(f"autocorrelation point {k} outside the transfer box")
            f[idx] = matrix_to_float(value)
        return f

    # ---------------------------------------------------------------
    # Invariant subspace
    # ---------------------------------------------------------------

    def _grid(self) -> np.ndarray:
        return np.indices((self.side,) * self.d).reshape(self.d, -1).T - self.radius

    def _legendre_rows(self, points: np.ndarray, degree: int, scale: float) -> np.ndarray:
        """Products of Legendre polynomials of total degree <= degree at points / scale."""
        tables = []
        for axis in range(self.d):
            x = points[:, axis] / scale
            tables.append(np.array([
                np.polynomial.legendre.Legendre.basis(n)(x) for n in range(degree + 1)
            ]))
        rows = []
        for mu in multi_indices(self.d, degree):
            values = np.ones(points.shape[0])
            for axis, n in enumerate(mu):
                values = values * tables[axis][n]
            rows.append(values)
        return np.array(rows)

    def _invariant_basis(self, filt: Optional[Jet]) -> np.ndarray:
        n_points = self.side ** self.d
        index = np.arange(self.size).reshape(self.shape)
        mirror = np.swapaxes(index[(slice(None, None, -1),) * self.d], -1, -2).reshape(-1)
        constraints = [np.eye(self.size) - np.eye(self.size)[mirror]]

        if filt is not None and self.m >= 0:
            v = [
                realize_from_jets(filt.component(ell), self.d, self.m) for ell in range(self.r)
            ]
            support = sorted({k for comp in v for k in comp})
            taps = {
                k: np.array([float(comp[k][0][0]) if k in comp else 0.0 for comp in v])
                for k in support
            }
            grid = self._grid()
            scale = float(self.radius + self.m + 1)
            first: List[np.ndarray] = []
            n_low = len(multi_indices(self.d, self.m))
            left = np.zeros((n_low, n_points, self.r))
            right = np.zeros((n_low, n_points, self.r))
            for k, tap in taps.items():
                left += self._legendre_rows(grid + np.array(k), self.m, scale)[:, :, None] * tap[None, None, :]
                right += self._legendre_rows(grid - np.array(k), self.m, scale)[:, :, None] * tap[None, None, :]
            for q in range(n_low):
                for j in range(self.r):
                    row = np.zeros((n_points, self.r, self.r))
                    row[:, :, j] = left[q]
                    first.append(row.reshape(-1))
                    row = np.zeros((n_points, self.r, self.r))
                    row[:, j, :] = right[q]
                    first.append(row.reshape(-1))
            pairs: Dict[Point, np.ndarray] = {}
            for k1, t1 in taps.items():
                for k2, t2 in taps.items():
                    delta = tuple(a - b for a, b in zip(k1, k2))
                    pairs[delta] = pairs.get(delta, 0) + np.outer(t1, t2)
            degree = 2 * self.m + 1
            n_high = len(multi_indices(self.d, degree))
            quad = np.zeros((n_high, n_points, self.r, self.r))
            for delta, weight in pairs.items():
                values = self._legendre_rows(grid + np.array(delta), degree, scale)
                quad += values[:, :, None, None] * weight[None, None, :, :]
            constraints.append(np.array(first))
            constraints.append(quad.reshape(n_high, -1))

        c = np.vstack(constraints)
        norms = np.linalg.norm(c, axis=1)
        c = c[norms > 0] / norms[norms > 0, None]
        _, sv, vt = np.linalg.svd(c, full_matrices=True)
        rank = int(np.sum(sv > self.RANK_TOLERANCE * sv[0])) if sv.size else 0
        return vt[rank:].T

    # ---------------------------------------------------------------
    # Spectral estimates
    # ---------------------------------------------------------------

    def step(self, f: np.ndarray) -> np.ndarray:
        return self.project(self.symmetrize(self.apply(f)))

    def power_iteration(self, seed: np.ndarray, iters: int, tol: float) -> GeneratorRun:
        """Growth ratio t_{n+1} / t_n from one seed autocorrelation."""
        f = self.project(self.symmetrize(seed))
        f = f / _magnitude(f, self.trace0(f))
        history: List[float] = []
        stable = 0
        for it in range(1, iters + 1):
            g = self.step(f)
            t_f, t_g = self.trace0(f), self.trace0(g)
            if t_f > 0 and t_g > 0:
                lam = t_g / t_f
            else:
                lam = float(np.linalg.norm(g) / max(np.linalg.norm(f), np.finfo(float).tiny))
            if history and abs(lam - history[-1]) <= tol * abs(lam):
                stable += 1
            else:
                stable = 0
            history.append(lam)
            if stable >= STABLE_STEPS:
                return GeneratorRun(lam=lam, iterations=it, converged=True, history=history)
            norm = _magnitude(g, t_g)
            if norm == 0:
                return GeneratorRun(lam=0.0, iterations=it, converged=True, history=history)
            f = g / norm
        return GeneratorRun(lam=history[-1] if history else 0.0, iterations=iters,
                            converged=False, history=history)

    def dense_radius(self) -> float:
        """Spectral radius of the restricted operator B^T T B."""
        n = self.basis.shape[1]
        if n == 0:
            return 0.0
        images = np.empty((self.size, n))
        for col in range(n):
            images[:, col] = self.step(self.basis[:, col].reshape(self.shape)).reshape(-1)
        restricted = self.basis.T @ images
        return float(np.max(np.abs(np.linalg.eigvals(restricted))))


def _magnitude(f: np.ndarray, trace: float) -> float:
    """Trace normalization with a Frobenius fallback."""
    if trace > 0:
        return trace
    return float(np.linalg.norm(f))


# =========================================================================
# Estimator service
# =========================================================================

@dataclass
class SmoothnessReport:
    """sm_2 and derived quantities for one mask."""
    dim: int
    sr_order: int
    m_used: int
    generators: int
    lambda_per_generator: List[float]
    lam: float
    rho2: float
    sm2: float
    sminf_lower: float
    iterations: int
    converged: bool
    method: str
    warnings: List[str] = field(default_factory=list)
    dense_sm2: Optional[float] = None
    last_bracket: Optional[Tuple[float, float]] = None

    @property
    def best_sm2(self) -> float:
        """sm_2 from the dense eigen-solve when power iteration stalled."""
        if not self.converged and self.dense_sm2 is not None:
            return self.dense_sm2
        return self.sm2

    def to_dict(self) -> Dict:
        return {
            "sr_order": self.sr_order,
            "m_used": self.m_used,
            "generators": self.generators,
            "lambda_per_generator": list(self.lambda_per_generator),
            "rho2": self.rho2,
            "sm2": self.sm2,
            "sminf_lower": self.sminf_lower,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "dense_sm2": self.dense_sm2,
            "last_ratio_bracket": list(self.last_bracket) if self.last_bracket else None,
            "warnings": list(self.warnings),
        }


def sm_from_lambda(lam: float) -> float:
    if lam <= 0:
        return math.inf
    return -0.5 * math.log2(lam)


class SmoothnessEstimator:
    """
    Configured sm_2 pipeline: sum rules -> matching filter -> generators
    -> transfer power iteration. A stalled iteration stays unconverged;
    on small problems the dense restricted eigen-solve is reported beside it.
    """

    def __init__(
        self,
        tol: float = SM_TOL,
        iters: int = SM_ITERS,
        dense_limit: int = DENSE_LIMIT,
        sr_cap: int = SR_CAP,
    ):
        self.tol = tol
        self.iters = iters
        self.dense_limit = dense_limit
        self.sr_cap = sr_cap

    def rho2(
        self,
        mask: Mask,
        generators: Sequence[LatticeSequence],
        filt: Optional[Jet],
        m: int,
        seed: str = "each",
        method: str = "power",
    ) -> Rho2Estimate:
        """
        rho_2 from the generator-seeded growth ratios.

        seed="each" iterates every generator separately; seed="combined"
        iterates the sum of their autocorrelations.
        """
        autocorrelations = [autocorrelation(u) for u in generators]
        engine = TransferEngine(mask, filt, m, _radius(autocorrelations))
        d = mask.dim
        warnings: List[str] = []
        if method == "dense":
            lam = engine.dense_radius()
            return Rho2Estimate(lam=lam, rho=2 ** (d / 2) * math.sqrt(lam), runs=[],
                                converged=True, method="dense")

        seeds = [engine.embed(f) for f in autocorrelations]
        if seed == "combined":
            seeds = [sum(seeds)]
        runs = [engine.power_iteration(s, self.iters, self.tol) for s in seeds]
        lam = max((run.lam for run in runs), default=0.0)
        converged = all(run.converged for run in runs)
        dense_lam = None
        bracket = None
        if not converged:
            worst = max(runs, key=lambda run: run.lam)
            tail = worst.history[-2:] or [worst.lam]
            bracket = (min(tail), max(tail))
            warnings.append(
                f"transfer iteration unconverged after {self.iters} steps, "
                f"last ratios in [{bracket[0]:.12g}, {bracket[1]:.12g}]"
            )
            if engine.basis.shape[1] <= self.dense_limit:
                dense_lam = engine.dense_radius()
                warnings.append(f"dense restricted eigen-solve gives {dense_lam:.12g}")
        return Rho2Estimate(lam=lam, rho=2 ** (d / 2) * math.sqrt(max(lam, 0.0)), runs=runs,
                            converged=converged, method="power", warnings=warnings,
                            dense_lam=dense_lam, bracket=bracket)

    def estimate(
        self,
        mask: Mask,
        generators: str = "compact",
        seed: str = "each",
        method: str = "power",
        log_callback: Optional[Callable[[str], None]] = None,
    ) -> SmoothnessReport:
        log = log_callback or (lambda _msg: None)
        sr = sum_rule_order(mask, self.sr_cap)
        m = sr.order - 1
        filt = sr.matching_filter.jet if m >= 0 else None
        log(f"✓ sum rules of order {sr.order}, difference order m = {m}")
        d, r = mask.dim, mask.multiplicity
        if generators == "normalizer":
            gens = normalizer_generators(filt, m, d, r)
        else:
            gens = compact_generators(filt, m, d, r)
        log(f"✓ {len(gens)} generators")

        estimate = self.rho2(mask, gens, filt, m, seed=seed, method=method)
        sm2_value = sm_from_lambda(estimate.lam)
        warnings = list(sr.warnings) + estimate.warnings
        if not estimate.converged:
            log(f"⚠ transfer iteration unconverged, last ratio {estimate.lam:.12g}")
        else:
            log(f"✓ sm_2 = {sm2_value:.6f} ({estimate.method})")
        return SmoothnessReport(
            dim=d,
            sr_order=sr.order,
            m_used=m,
            generators=len(gens),
            lambda_per_generator=[run.lam for run in estimate.runs],
            lam=estimate.lam,
            rho2=estimate.rho,
            sm2=sm2_value,
            sminf_lower=sm2_value - d / 2,
            iterations=estimate.iterations,
            converged=estimate.converged,
            method=estimate.method,
            warnings=warnings,
            dense_sm2=None if estimate.dense_lam is None else sm_from_lambda(estimate.dense_lam),
            last_bracket=estimate.bracket,
        )


def get_estimator(tol: Optional[float] = None, iters: Optional[int] = None) -> SmoothnessEstimator:
    """Estimator configured from the environment, with explicit overrides."""
    return SmoothnessEstimator(
        tol=SM_TOL if tol is None else tol,
        iters=SM_ITERS if iters is None else iters,
    )


def rho2_estimate(
    mask: Mask,
    generators: Sequence[LatticeSequence],
    filt: Optional[Jet],
    m: int,
    iters: int = SM_ITERS,
    tol: float = SM_TOL,
) -> Rho2Estimate:
    return SmoothnessEstimator(tol=tol, iters=iters).rho2(mask, generators, filt, m)


def sm2(mask: Mask, estimator: Optional[SmoothnessEstimator] = None, **options) -> SmoothnessReport:
    return (estimator or get_estimator()).estimate(mask, **options)


def sminf_lowerbound(mask: Mask, estimator: Optional[SmoothnessEstimator] = None) -> float:
    """sm_inf(a) >= sm_2(a) - d/2."""
    return sm2(mask, estimator).sminf_lower


# =========================================================================
# Sup-norm heuristic
# =========================================================================

@dataclass
class RhoInfEstimate:
    rho: float
    sm_inf: float
    levels: int
    heuristic: bool = True


def _column_array(u: LatticeSequence, d: int, r: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
    keys = list(u)
    lo = tuple(min(k[i] for k in keys) for i in range(d))
    hi = tuple(max(k[i] for k in keys) for i in range(d))
    arr = np.zeros(tuple(h - l + 1 for l, h in zip(lo, hi)) + (r,))
    for k, value in u.items():
        arr[tuple(a - b for a, b in zip(k, lo))] = [float(row[0]) for row in value]
    return arr, lo


def _lattice_convolve(left: np.ndarray, right: np.ndarray, d: int) -> np.ndarray:
    """(left * right)(k) = sum_s left(k - s) right(s) with matrix products on the trailing axes."""
    spatial = tuple(a + b - 1 for a, b in zip(left.shape[:d], right.shape[:d]))
    out = np.zeros(spatial + left.shape[d:-1] + right.shape[d + 1:])
    for s in np.ndindex(*right.shape[:d]):
        block = right[s]
        if not block.any():
            continue
        window = tuple(slice(si, si + n) for si, n in zip(s, left.shape[:d]))
        out[window] += left @ block
    return out


def rho_inf_estimate(
    mask: Mask,
    generators: Sequence[LatticeSequence],
    n_max: Optional[int] = None,
    max_points: int = RHO_INF_MAX_POINTS,
) -> RhoInfEstimate:
    """
    rho_inf = 2^d (s_n / s_{n-3})^{1/3} with s_n = max |a_n * u|, from the
    recursion a_n = (a_{n-1} upsampled by 2) * a.

    Raises:
        LevelCapError: the next level would exceed the memory guard
    """
    d, r = mask.dim, mask.multiplicity
    n_max = n_max or (14 if d == 1 else 7)
    if n_max < 4:
        raise AnalysisError("rho_inf needs at least 4 levels")
    base, _ = mask.to_array()
    level = base
    sups: Dict[int, List[float]] = {}
    columns = [_column_array(u, d, r)[0] for u in generators]
    for n in range(1, n_max + 1):
        if n > 1:
            up_shape = tuple(2 * (x - 1) + 1 for x in level.shape[:d])
            next_points = int(np.prod([a + b - 1 for a, b in zip(up_shape, base.shape[:d])])) * r * r
            if next_points > max_points:
                raise LevelCapError(f"memory guard: level {n} needs {next_points} entries > {max_points}")
            up = np.zeros(up_shape + (r, r))
            up[(slice(None, None, 2),) * d] = level
            level = _lattice_convolve(up, base, d)
        sups[n] = [float(np.max(np.abs(_lattice_convolve(level, col, d)))) for col in columns]
    ratios = []
    for s_now, s_then in zip(sups[n_max], sups[n_max - 3]):
        if s_then > 0 and s_now > 0:
            ratios.append((s_now / s_then) ** (1 / 3))
    growth = max(ratios, default=0.0)
    rho = (2 ** d) * growth
    sm_inf = -math.log2(rho) if rho > 0 else math.inf
    return RhoInfEstimate(rho=rho, sm_inf=sm_inf, levels=n_max)


# =========================================================================
# Convergence verdict
# =========================================================================

@dataclass
class ConvergenceVerdict:
    verdict: str
    smoothness_class: Optional[int]
    margin: float
    inequality: str
    sm2: float
    sminf_lower: float
    sm_inf_heuristic: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "class": self.smoothness_class,
            "margin": self.margin,
            "inequality": self.inequality,
            "sm2": self.sm2,
            "sminf_lower": self.sminf_lower,
            "sm_inf_heuristic": self.sm_inf_heuristic,
            "warnings": list(self.warnings),
        }


def convergence_verdict(
    mask: Mask,
    htype: HermiteType,
    estimator: Optional[SmoothnessEstimator] = None,
    report: Optional[SmoothnessReport] = None,
    use_rho_inf: bool = True,
) -> ConvergenceVerdict:
    """
    "convergent in C^k" when sm_2 - d/2 > max|nu_l|, k the largest integer
    below the bound; otherwise "inconclusive". Never claims divergence.

    Raises:
        AnalysisError: mask is not a generalized Hermite mask of type Lambda
    """
    estimator = estimator or get_estimator()
    hermite = is_generalized_hermite(mask, htype, estimator.sr_cap)
    if not hermite.ok:
        raise AnalysisError(f"not a generalized Hermite mask of the given type: {hermite.reason}")
    report = report or estimator.estimate(mask)
    mdeg = htype.max_degree
    bound = report.best_sm2 - report.dim / 2
    margin = bound - mdeg
    if bound > mdeg + VERDICT_MARGIN:
        k = math.ceil(bound - VERDICT_MARGIN) - 1
        return ConvergenceVerdict(
            verdict=f"convergent in C^{k}",
            smoothness_class=k,
            margin=margin,
            inequality="sm_inf >= sm_2 - d/2",
            sm2=report.sm2,
            sminf_lower=bound,
            warnings=list(report.warnings),
        )

    heuristic = None
    warnings = list(report.warnings)
    if use_rho_inf:
        try:
            filt = sum_rule_order(mask, estimator.sr_cap).matching_filter.jet if report.m_used >= 0 else None
            gens = compact_generators(filt, report.m_used, mask.dim, mask.multiplicity)
            heuristic = rho_inf_estimate(mask, gens).sm_inf
        except LevelCapError as e:
            warnings.append(str(e))
    if heuristic is not None and heuristic > mdeg:
        text = f"inconclusive (heuristic rho_inf suggests C^{mdeg})"
        inequality = "heuristic rho_inf"
    else:
        text = "inconclusive"
        inequality = "sm_inf >= sm_2 - d/2"
    return ConvergenceVerdict(
        verdict=text,
        smoothness_class=None,
        margin=margin,
        inequality=inequality,
        sm2=report.sm2,
        sminf_lower=bound,
        sm_inf_heuristic=heuristic,
        warnings=warnings,
    )
