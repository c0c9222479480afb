"""
📚 Example Registry
Built-in corpus of generalized Hermite masks with their expected facts.

Each record carries a parameterized mask builder, the type (Lambda, T),
default parameters, an optional symmetry descriptor (bivariate families
are stored as orbit representatives), and the facts a verification run
checks: sum-rule and linear-phase orders, interpolatory structure,
printed matching-filter coefficients, spline residuals and sm_2.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from services.analysis import (
    interpolatory_check,
    lpm_order,
    sum_rule_order,
)
from services.construct import (
    SymmetryDescriptor,
    symmetry_check,
    symmetry_complete,
    symmetry_descriptor,
)
from services.core import (
    GHSDError,
    HermiteType,
    Mask,
    Matrix,
    Point,
    RegistryError,
    as_matrix,
    format_rational,
    parse_rational,
)
from services.smoothness import SmoothnessEstimator, convergence_verdict, get_estimator
from services.splines import refinement_residual, registry_spline

Q = Fraction
Params = Dict[str, Fraction]


# =========================================================================
# Records
# =========================================================================

@dataclass
class ExpectedFacts:
    """Facts checked by `verify_example`; None means not checked."""
    sr_order: Optional[int] = None
    sr_at_least: Optional[int] = None
    lpm_order: Optional[int] = None
    lpm_at_least: Optional[int] = None
    interpolatory: Optional[bool] = None
    printed_filter: Optional[Dict[int, Dict[Point, Fraction]]] = None
    filter_order: int = 0
    spline: Optional[str] = None
    sm2: Optional[float] = None
    sm2_tol: float = 1e-2
    convergence_class: Optional[int] = None


@dataclass
class ExampleRecord:
    id: str
    description: str
    htype: HermiteType
    builder: Callable[[Params], object]
    defaults: Params
    facts: ExpectedFacts
    symmetry: Optional[Tuple[str, Tuple[Fraction, ...]]] = None
    variants: Dict[str, Tuple[Params, ExpectedFacts]] = field(default_factory=dict)

    def resolve(self, overrides: Optional[Dict[str, object]] = None) -> Params:
        """
        Defaults updated by overrides.

        Raises:
            RegistryError: unknown parameter name or malformed value
        """
        params = dict(self.defaults)
        for name, value in (overrides or {}).items():
            if name not in params:
                raise RegistryError(f"{self.id} has no parameter {name!r} (known: {sorted(params)})")
            try:
                params[name] = value if isinstance(value, Fraction) else parse_rational(value)
            except GHSDError as e:
                raise RegistryError(f"bad value for {name}: {e}") from e
        return params

    def descriptor(self) -> Optional[SymmetryDescriptor]:
        if self.symmetry is None:
            return None
        group, center = self.symmetry
        return symmetry_descriptor(group, self.htype, center)

    def representatives(self, overrides: Optional[Dict[str, object]] = None) -> Optional[Dict[Point, Matrix]]:
        built = self.builder(self.resolve(overrides))
        return built if isinstance(built, dict) else None

    def mask(self, overrides: Optional[Dict[str, object]] = None) -> Mask:
        built = self.builder(self.resolve(overrides))
        if isinstance(built, Mask):
            return built
        return symmetry_complete(built, self.descriptor(), self.htype.size)

    def variant(self, name: str) -> Tuple[Params, ExpectedFacts]:
        if name not in self.variants:
            raise RegistryError(f"{self.id} has no variant {name!r} (known: {sorted(self.variants)})")
        return self.variants[name]


def _symmetric(matrices_from_zero: Sequence) -> Mask:
    """Univariate mask with a(-k) = a(k) from [a(0), a(1), ...]."""
    tail = list(matrices_from_zero[1:])
    ordered = list(reversed(tail)) + list(matrices_from_zero)
    return Mask.from_list(-len(tail), ordered)


# =========================================================================
# Univariate families
# =========================================================================

def birkhoff_mask(p: Params) -> Mask:
    t1, t2, t3, t4 = p["t1"], p["t2"], p["t3"], p["t4"]
    return _symmetric([
        [[Q(1, 2) + 2 * t3, 2 * t4], [5 * t3 / 6, Q(1, 8) + 5 * t4 / 6]],
        [[Q(27, 128) + t1, Q(3, 32) + t2], [-Q(9, 128) + 11 * t1 / 12, Q(5, 32) + 11 * t2 / 12]],
        [[-t3, -t4], [t3 / 12, t4 / 12]],
        [[Q(5, 128) - t1, -Q(3, 32) - t2], [t1 / 12, t2 / 12]],
    ])


def birkhoff2_mask(p: Params) -> Mask:
    t = p["t"]
    return _symmetric([
        [[Q(633, 1568) - 5 * t / 28, -Q(15, 32)],
         [-Q(31, 2401) - 953 * t / 5488 + 10 * t * t / 147, -Q(327, 6272) + 5 * t / 28]],
        [[Q(1, 4), 0], [-Q(31, 1568) - t / 14, Q(1, 16)]],
        [[Q(151, 3136) + 5 * t / 56, Q(15, 64)],
         [-Q(1887, 307328) - 321 * t / 10976 - 5 * t * t / 147, -Q(359, 12544) - 5 * t / 56]],
    ])


def birkhoff2_filter(t: Fraction) -> Dict[int, Dict[Point, Fraction]]:
    return {
        0: {(0,): Q(1), (2,): -Q(3, 49) + 8 * t / 21, (4,): Q(11, 5880) - 4 * t / 63, (6,): t / 135},
        1: {(2,): Q(1), (4,): -Q(1, 6), (6,): Q(7, 360)},
    }


def dual_mask_1(_p: Params) -> Mask:
    return Mask.from_list(-1, [
        [[Q(5, 64), Q(9, 32)], [-Q(3, 128), -Q(5, 64)]],
        [[Q(27, 64), Q(9, 32)], [-Q(9, 128), Q(3, 64)]],
        [[Q(27, 64), -Q(9, 32)], [Q(9, 128), Q(3, 64)]],
        [[Q(5, 64), -Q(9, 32)], [Q(3, 128), -Q(5, 64)]],
    ])


def dual_mask_2(_p: Params) -> Mask:
    return Mask.from_list(-1, [
        [[Q(13, 128), Q(15, 64)], [-Q(33, 1280), -Q(7, 128)]],
        [[Q(51, 128), Q(15, 64)], [-Q(63, 1280), Q(9, 128)]],
        [[Q(51, 128), -Q(15, 64)], [Q(63, 1280), Q(9, 128)]],
        [[Q(13, 128), -Q(15, 64)], [Q(33, 1280), -Q(7, 128)]],
    ])


def lagrange_mask(p: Params) -> Mask:
    t1, t2, t3 = p["t1"], p["t2"], p["t3"]
    return Mask.from_list(-2, [
        [[t3 / 4, -Q(1, 32) - t1], [0, t1 / 4]],
        [[-t2, Q(9, 32) - t1], [t2 / 4, -Q(1, 32) + t1 / 4]],
        [[Q(1, 2) + 3 * t3 / 2, Q(9, 32) - t1], [-t3, Q(9, 32) + 3 * t1 / 2]],
        [[-t2, -Q(1, 32) - t1], [Q(1, 2) + 3 * t2 / 2, Q(9, 32) + 3 * t1 / 2]],
        [[t3 / 4, 0], [-t3, -Q(1, 32) + t1 / 4]],
        [[0, 0], [t2 / 4, t1 / 4]],
    ])


def lagrange_spline_mask_1(_p: Params) -> Mask:
    return Mask.from_list(-1, [
        [[Q(1, 32), Q(1, 8)], [0, Q(1, 16)]],
        [[Q(1, 4), Q(1, 8)], [Q(1, 8), Q(5, 16)]],
        [[Q(1, 32), 0], [Q(7, 16), Q(5, 16)]],
        [[0, 0], [Q(1, 8), Q(1, 16)]],
    ])


def lagrange_spline_mask_2(_p: Params) -> Mask:
    return Mask.from_list(-1, [
        [[Q(1, 16), Q(3, 16)], [0, Q(1, 32)]],
        [[Q(5, 16), Q(3, 16)], [Q(3, 32), Q(9, 32)]],
        [[Q(1, 16), 0], [Q(3, 8), Q(9, 32)]],
        [[0, 0], [Q(3, 32), Q(1, 32)]],
    ])


# =========================================================================
# Bivariate families (orbit representatives)
# =========================================================================

def hexagonal_family_1(p: Params) -> Dict[Point, Matrix]:
    t1, t2, t3, t4 = p["t1"], p["t2"], p["t3"], p["t4"]
    diag = Q(1, 8) + 6 * t3 + 6 * t4
    return {
        (0, 0): as_matrix([[Q(1, 4) - 12 * t2, 0, 0], [0, diag, 0], [0, 0, diag]]),
        (1, 0): as_matrix([[-4 * t1, -Q(3, 16), Q(3, 32)], [-t1, -Q(1, 32), Q(1, 64)], [0, 0, 0]]),
        (2, 0): as_matrix([[2 * t2, 2 * t3 + 4 * t4, -t3 - 2 * t4], [t2, t3 + t4, -t3], [0, 0, -t3 + t4]]),
        (2, 1): as_matrix([
            [Q(1, 8) + 4 * t1, -Q(3, 32), 0],
            [Q(1, 16) + 2 * t1, -Q(1, 32), 0],
            [Q(1, 32) + t1, -Q(1, 64), 0],
        ]),
    }


def hexagonal_family_2(p: Params) -> Dict[Point, Matrix]:
    t1, t2, t3 = p["t1"], p["t2"], p["t3"]
    diag = Q(1, 8) - 6 * t1 - 6 * t2
    return {
        (0, 0): as_matrix([[Q(47, 128) - 27 * t3 / 8, 0, 0], [0, diag, 0], [0, 0, diag]]),
        (1, 0): as_matrix([
            [Q(21, 128) - 9 * t3 / 8, -Q(3, 8) + 9 * t3 / 2, Q(3, 16) - 9 * t3 / 4],
            [Q(3, 64) - 9 * t3 / 16, -Q(7, 64) + 15 * t3 / 8, Q(1, 32) - 3 * t3 / 8],
            [0, 0, -Q(3, 64) + 9 * t3 / 8],
        ]),
        (2, 1): as_matrix([
            [-Q(5, 128) + 9 * t3 / 8, -Q(3, 16) + 9 * t3 / 4, 0],
            [-Q(1, 64) + 3 * t3 / 8, -Q(5, 64) + 9 * t3 / 8, 0],
            [-Q(1, 128) + 3 * t3 / 16, -Q(1, 32) + 3 * t3 / 8, -Q(1, 64) + 3 * t3 / 8],
        ]),
        (2, 0): as_matrix([
            [-Q(5, 256) + 9 * t3 / 16, -2 * t1, t1],
            [-Q(1, 128) + 3 * t3 / 16, -5 * t1 / 4 - t2 + 3 * t3 / 16, 5 * t1 / 4 + 2 * t2 - 3 * t3 / 16],
            [0, 0, 5 * t1 / 4 + 3 * t2 - 3 * t3 / 16],
        ]),
    }


def square_dual_family_1(p: Params) -> Dict[Point, Matrix]:
    t1, t2, t3 = p["t1"], p["t2"], p["t3"]
    return {
        (1, 1): as_matrix([
            [Q(21, 128) - 4 * t3, -Q(9, 64) + t2, -Q(9, 64) + t2],
            [Q(3, 128) - t3, -Q(3, 256) + t1 + t2 / 2, -t1],
            [Q(3, 128) - t3, -t1, -Q(3, 256) + t1 + t2 / 2],
        ]),
        (2, 1): as_matrix([
            [Q(3, 64) + 4 * t3, -Q(9, 64) + t2, -t2],
            [Q(3, 256) + t3, -Q(15, 256) + t1 + t2 / 2, -Q(3, 128) + t1],
            [Q(3, 256) + t3, -t1, Q(9, 256) - t1 - t2 / 2],
        ]),
        (2, 2): as_matrix([
            [-Q(1, 128) - 4 * t3, -t2, -t2],
            [-t3, Q(5, 256) - t1 - t2 / 2, -Q(3, 128) + t1],
            [-t3, -Q(3, 128) + t1, Q(5, 256) - t1 - t2 / 2],
        ]),
    }


def square_dual_family_2(p: Params) -> Dict[Point, Matrix]:
    t1, t2 = p["t1"], p["t2"]
    return {
        (1, 1): as_matrix([
            [Q(5, 32) + 4 * t1, -Q(5, 128) - 4 * t2, -Q(5, 128) - 4 * t2],
            [Q(1, 64) + t1, Q(11, 256) - t2, -t2],
            [Q(1, 64) + t1, -t2, Q(11, 256) - t2],
        ]),
        (2, 1): as_matrix([
            [Q(1, 32) - 4 * t1, -Q(5, 128) - 4 * t2, -Q(7, 128) + 4 * t2],
            [Q(1, 128) - t1, -Q(1, 256) - t2, -Q(1, 64) + t2],
            [-t1, -t2, Q(1, 256) + t2],
        ]),
        (2, 2): as_matrix([
            [Q(1, 32) + 4 * t1, -Q(7, 128) + 4 * t2, -Q(7, 128) + 4 * t2],
            [Q(1, 128) + t1, -Q(3, 256) + t2, -Q(1, 64) + t2],
            [Q(1, 128) + t1, -Q(1, 64) + t2, -Q(3, 256) + t2],
        ]),
    }


def mixed_birkhoff_family_1(p: Params) -> Dict[Point, Matrix]:
    t1, t2, t3 = p["t1"], p["t2"], p["t3"]
    return {
        # +3/256 in a(1,1)[2,2]; with -3/256 the family stops at sum rules of order 2
        (1, 1): as_matrix([[Q(17, 256) - 6 * t3, Q(3, 32) - 6 * t2], [t1, Q(3, 256) - 5 * t2 / 2]]),
        (2, 1): as_matrix([[Q(19, 256) + 6 * t3, Q(3, 32) - 6 * t2], [-Q(1, 512) + t1, -Q(3, 256) + 5 * t2 / 2]]),
        (2, 2): as_matrix([[Q(1, 256) - 6 * t3, Q(3, 32) - 6 * t2], [Q(1, 128) + t1 + 4 * t3, -Q(5, 256) + 3 * t2 / 2]]),
        (3, 1): as_matrix([[Q(1, 64), 0], [t3, t2]]),
    }


def mixed_birkhoff_family_2(p: Params) -> Dict[Point, Matrix]:
    t1, t2, t3 = p["t1"], p["t2"], p["t3"]
    return {
        (1, 1): as_matrix([[Q(21, 256) - 2 * t2 - 2 * t3, Q(1, 64) - 4 * t1], [t3, t1]]),
        (2, 1): as_matrix([[Q(15, 256) + 2 * t2 + 2 * t3, Q(1, 64) - 4 * t1], [-t2, Q(1, 64) + t1]]),
        (2, 2): as_matrix([[Q(5, 256) - 2 * t2 - 2 * t3, Q(1, 64) - 4 * t1], [t3, t1]]),
        (3, 1): as_matrix([[Q(1, 64), 0], [-Q(1, 512), Q(1, 128)]]),
    }


# =========================================================================
# Corpus
# =========================================================================

BIRKHOFF_TYPE = HermiteType.univariate([0, 2])
DUAL_TYPE = HermiteType.univariate([0, 1], [Q(1, 2), Q(1, 2)])
LAGRANGE_TYPE = HermiteType.univariate([0, 0], [0, Q(1, 2)])
GRADIENT_TYPE = HermiteType(nus=((0, 0), (1, 0), (0, 1)))
HALF = (Q(1, 2), Q(1, 2))
GRADIENT_DUAL_TYPE = HermiteType(nus=((0, 0), (1, 0), (0, 1)), taus=(HALF, HALF, HALF))
MIXED_TYPE = HermiteType(nus=((0, 0), (1, 1)), taus=(HALF, HALF))


def _params(**values) -> Params:
    return {k: Q(v) for k, v in values.items()}


def _filter(components: Dict[int, Dict[int, Fraction]]) -> Dict[int, Dict[Point, Fraction]]:
    return {ell: {(mu,): Q(c) for mu, c in coeffs.items()} for ell, coeffs in components.items()}


def _build_registry() -> Dict[str, ExampleRecord]:
    records = [
        ExampleRecord(
            id="ex6.2a",
            description="Birkhoff family of type {0,2} on [-3,3]",
            htype=BIRKHOFF_TYPE,
            builder=birkhoff_mask,
            defaults=_params(t1=Q(5, 128), t2=Q(-3, 16), t3=Q(-3, 32), t4=Q(-3, 32)),
            facts=ExpectedFacts(lpm_order=6, sr_at_least=6, sm2=4.3522, sm2_tol=1e-2, convergence_class=3),
            symmetry=("Z2", (Q(0),)),
            variants={
                "sr10": (
                    _params(t1=Q(91, 1024), t2=Q(-15, 64), t3=Q(-17, 512), t4=Q(-9, 64)),
                    ExpectedFacts(
                        sr_order=10,
                        sm2=2.53079,
                        printed_filter=_filter({
                            0: {0: 1, 6: Q(-17, 12096), 8: Q(1, 4320)},
                            1: {2: 1, 6: Q(-1, 40), 8: Q(1, 252)},
                        }),
                        filter_order=9,
                    ),
                ),
                "interpolatory": (
                    _params(t1=Q(25, 256), t2=Q(-1, 4), t3=0, t4=0),
                    ExpectedFacts(interpolatory=True, sm2=2.6943),
                ),
                "interpolatory-rough": (
                    _params(t1=Q(-27, 256), t2=Q(33, 128), t3=0, t4=0),
                    ExpectedFacts(interpolatory=True, sr_order=8, sm2=0.02797),
                ),
            },
        ),
        ExampleRecord(
            id="ex6.2b",
            description="Birkhoff spline family of type {0,2} on [-2,2], t = 0",
            htype=BIRKHOFF_TYPE,
            builder=birkhoff2_mask,
            defaults=_params(t=0),
            facts=ExpectedFacts(sr_at_least=8, printed_filter=birkhoff2_filter(Q(0)), filter_order=6,
                                spline="ex6.2b", sm2=5.5, sm2_tol=1e-3),
            symmetry=("Z2", (Q(0),)),
        ),
        ExampleRecord(
            id="ex6.2c",
            description="Birkhoff spline family of type {0,2} on [-2,2], t = 1",
            htype=BIRKHOFF_TYPE,
            builder=birkhoff2_mask,
            defaults=_params(t=1),
            facts=ExpectedFacts(sr_at_least=8, printed_filter=birkhoff2_filter(Q(1)), filter_order=6,
                                spline="ex6.2c"),
            symmetry=("Z2", (Q(0),)),
        ),
        ExampleRecord(
            id="ex6.3a",
            description="Dual Hermite mask of type ({0,1}, {1/2,1/2})",
            htype=DUAL_TYPE,
            builder=dual_mask_1,
            defaults={},
            facts=ExpectedFacts(lpm_order=4, sm2=3.33904, sm2_tol=1e-2),
            symmetry=("Z2", (Q(1, 2),)),
        ),
        ExampleRecord(
            id="ex6.3b",
            description="Dual Hermite spline mask of type ({0,1}, {1/2,1/2})",
            htype=DUAL_TYPE,
            builder=dual_mask_2,
            defaults={},
            facts=ExpectedFacts(
                sr_order=6,
                printed_filter=_filter({
                    0: {0: 1, 1: Q(1, 2), 2: Q(1, 10), 3: Q(1, 120)},
                    1: {1: 1, 2: Q(1, 2), 3: Q(1, 12)},
                }),
                filter_order=3,
                spline="ex6.3b",
                sm2=4.5,
                sm2_tol=1e-3,
            ),
            symmetry=("Z2", (Q(1, 2),)),
        ),
        ExampleRecord(
            id="ex6.4a",
            description="Lagrange family of type ({0,0}, {0,1/2}) on [-2,3]",
            htype=LAGRANGE_TYPE,
            builder=lagrange_mask,
            defaults=_params(t1=Q(-3, 256), t2=Q(-33, 512), t3=Q(-25, 448)),
            facts=ExpectedFacts(sr_order=6, lpm_order=4, sm2=5.06179, sm2_tol=1e-2),
        ),
        ExampleRecord(
            id="ex6.4b",
            description="Interpolatory Lagrange family of type ({0,0}, {0,1/2})",
            htype=LAGRANGE_TYPE,
            builder=lagrange_mask,
            defaults=_params(t1=Q(-3, 128), t2=0, t3=0),
            facts=ExpectedFacts(interpolatory=True, sm2=2.47369, sm2_tol=1e-2, convergence_class=1),
            variants={
                "t1=3/64": (
                    _params(t1=Q(3, 64), t2=0, t3=0),
                    ExpectedFacts(interpolatory=True, sr_order=5, sm2=2.15978, sm2_tol=1e-2),
                ),
            },
        ),
        ExampleRecord(
            id="ex6.4c",
            description="Lagrange spline mask a1",
            htype=LAGRANGE_TYPE,
            builder=lagrange_spline_mask_1,
            defaults={},
            facts=ExpectedFacts(
                sr_order=5,
                printed_filter=_filter({0: {0: 1, 1: 0, 2: Q(-1, 6)}, 1: {0: 1, 1: Q(1, 2), 2: Q(1, 12)}}),
                filter_order=2,
                spline="ex6.4c",
                sm2=3.5,
                sm2_tol=1e-3,
            ),
        ),
        ExampleRecord(
            id="ex6.4d",
            description="Lagrange spline mask a2",
            htype=LAGRANGE_TYPE,
            builder=lagrange_spline_mask_2,
            defaults={},
            facts=ExpectedFacts(
                sr_order=5,
                printed_filter=_filter({0: {0: 1, 1: 0, 2: Q(-1, 12)}, 1: {0: 1, 1: Q(1, 2), 2: Q(1, 12)}}),
                filter_order=2,
                spline="ex6.4d",
                sm2=3.5,
                sm2_tol=1e-3,
            ),
        ),
        ExampleRecord(
            id="ex6.5a",
            description="Hexagonal Hermite family of gradient type under D6",
            htype=GRADIENT_TYPE,
            builder=hexagonal_family_1,
            defaults=_params(t1=Q(-15, 512), t2=Q(1, 512), t3=Q(-1, 128), t4=Q(1, 256)),
            facts=ExpectedFacts(sr_at_least=4, lpm_order=4, sm2=3.13452, sm2_tol=5e-2),
            symmetry=("D6", (Q(0), Q(0))),
        ),
        ExampleRecord(
            id="ex6.5b",
            description="Interpolatory hexagonal Hermite mask of gradient type under D6",
            htype=GRADIENT_TYPE,
            builder=hexagonal_family_1,
            defaults=_params(t1=Q(-1, 32), t2=0, t3=0, t4=0),
            facts=ExpectedFacts(sr_at_least=4, interpolatory=True, sm2=2.71094, sm2_tol=5e-2),
            symmetry=("D6", (Q(0), Q(0))),
        ),
        ExampleRecord(
            id="ex6.5c",
            description="Second hexagonal Hermite family of gradient type under D6",
            htype=GRADIENT_TYPE,
            builder=hexagonal_family_2,
            defaults=_params(t1=Q(5, 256), t2=Q(-1, 256), t3=Q(29, 512)),
            facts=ExpectedFacts(sr_at_least=5, sm2=4.81514, sm2_tol=5e-2),
            symmetry=("D6", (Q(0), Q(0))),
        ),
        ExampleRecord(
            id="ex6.6a",
            description="Dual gradient Hermite family under D4 about (1/2,1/2)",
            htype=GRADIENT_DUAL_TYPE,
            builder=square_dual_family_1,
            defaults=_params(t1=Q(1, 64), t2=Q(5, 128), t3=0),
            facts=ExpectedFacts(lpm_order=4, sm2=3.33904, sm2_tol=5e-2),
            symmetry=("D4", HALF),
        ),
        ExampleRecord(
            id="ex6.6b",
            description="Second dual gradient Hermite family under D4 about (1/2,1/2)",
            htype=GRADIENT_DUAL_TYPE,
            builder=square_dual_family_2,
            defaults=_params(t1=0, t2=Q(1, 64)),
            facts=ExpectedFacts(sr_order=5, sm2=3.0, sm2_tol=5e-2),
            symmetry=("D4", HALF),
        ),
        ExampleRecord(
            id="ex6.7a",
            description="Mixed-derivative Birkhoff family of type {(0,0),(1,1)} under D4",
            htype=MIXED_TYPE,
            builder=mixed_birkhoff_family_1,
            defaults=_params(t1=Q(1, 512), t2=Q(1, 128), t3=Q(-1, 256)),
            facts=ExpectedFacts(sr_order=5, sm2=3.41080, sm2_tol=5e-2),
            symmetry=("D4", HALF),
        ),
        ExampleRecord(
            id="ex6.7b",
            description="Second mixed-derivative Birkhoff family of type {(0,0),(1,1)} under D4",
            htype=MIXED_TYPE,
            builder=mixed_birkhoff_family_2,
            defaults=_params(t1=Q(-1, 128), t2=Q(1, 256), t3=Q(-1, 256)),
            facts=ExpectedFacts(sr_order=5, sm2=3.59632, sm2_tol=5e-2),
            symmetry=("D4", HALF),
        ),
    ]
    return {record.id: record for record in records}


REGISTRY: Dict[str, ExampleRecord] = _build_registry()


def get_example(example_id: str) -> ExampleRecord:
    if example_id not in REGISTRY:
        raise RegistryError(f"unknown example id {example_id!r}")
    return REGISTRY[example_id]


def get_all_example_names() -> List[str]:
    return list(REGISTRY.keys())


def parse_param_overrides(items: Optional[Sequence[str]]) -> Dict[str, Fraction]:
    """["t1=91/1024", ...] -> {"t1": Fraction(91, 1024)}."""
    out: Dict[str, Fraction] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise RegistryError(f"bad --param {item!r}: expected name=value")
        try:
            out[name.strip()] = parse_rational(value.strip())
        except GHSDError as e:
            raise RegistryError(f"bad --param {item!r}: {e}") from e
    return out


# =========================================================================
# Verification
# =========================================================================

@dataclass
class FactCheck:
    name: str
    expected: object
    got: object
    ok: bool

    def to_dict(self) -> Dict:
        return {"fact": self.name, "expected": _jsonable(self.expected), "got": _jsonable(self.got), "ok": self.ok}


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass
class ExampleVerification:
    id: str
    variant: Optional[str]
    checks: List[FactCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "variant": self.variant,
            "ok": self.ok,
            "checks": [check.to_dict() for check in self.checks],
        }


def _check_at_least(checks: List[FactCheck], name: str, exact: Optional[int], minimum: Optional[int], got: int):
    if exact is not None:
        checks.append(FactCheck(name, exact, got, got == exact))
    if minimum is not None:
        checks.append(FactCheck(f"{name} >=", minimum, got, got >= minimum))


def verify_example(
    example_id: str,
    variant: Optional[str] = None,
    overrides: Optional[Dict[str, object]] = None,
    estimator: Optional[SmoothnessEstimator] = None,
    smoothness: bool = True,
    sr_cap: int = 12,
) -> ExampleVerification:
    """Run every expected fact of one record (or one of its variants)."""
    record = get_example(example_id)
    facts = record.facts
    params_overrides = dict(overrides or {})
    if variant is not None:
        variant_params, facts = record.variant(variant)
        params_overrides = {**variant_params, **params_overrides}
    result = ExampleVerification(id=example_id, variant=variant)
    checks = result.checks

    mask = record.mask(params_overrides)
    descriptor = record.descriptor()
    if descriptor is not None and record.htype.is_uniform_translation():
        verdict = symmetry_check(mask, record.htype, descriptor)
        checks.append(FactCheck("symmetry", record.symmetry[0], verdict.witness or "ok", verdict.ok))

    sr = sum_rule_order(mask, sr_cap)
    _check_at_least(checks, "sum rules", facts.sr_order, facts.sr_at_least, sr.order)
    if facts.lpm_order is not None or facts.lpm_at_least is not None:
        lpm = lpm_order(mask, record.htype, sr_cap, sr)
        _check_at_least(checks, "linear-phase moments", facts.lpm_order, facts.lpm_at_least, lpm)
    if facts.interpolatory is not None:
        verdict = interpolatory_check(mask, record.htype)
        checks.append(FactCheck("interpolatory", facts.interpolatory, verdict.ok,
                                verdict.ok == facts.interpolatory))
    if facts.printed_filter is not None:
        filt = sr.matching_filter
        ok = filt.order >= facts.filter_order
        got = {}
        if ok:
            checked = [mu for mu in filt.jet.indices() if sum(mu) <= facts.filter_order]
            for ell, coeffs in facts.printed_filter.items():
                for mu in checked:
                    value = filt.printed(ell, mu)
                    got[f"{ell + 1}:{','.join(map(str, mu))}"] = value
                    if value != coeffs.get(mu, 0):
                        ok = False
        checks.append(FactCheck("matching filter", facts.printed_filter, got, ok))
    if facts.spline is not None:
        params = record.resolve(params_overrides)
        residual = refinement_residual(registry_spline(facts.spline, params), mask)
        checks.append(FactCheck("spline residual", 0, residual.max_abs, residual.ok))
    if smoothness and facts.sm2 is not None:
        estimator = estimator or get_estimator()
        report = estimator.estimate(mask)
        value = report.best_sm2
        checks.append(FactCheck("sm2", facts.sm2, round(value, 6), abs(value - facts.sm2) <= facts.sm2_tol))
        if facts.convergence_class is not None:
            verdict = convergence_verdict(mask, record.htype, estimator, report, use_rho_inf=False)
            checks.append(FactCheck("convergence class", facts.convergence_class, verdict.smoothness_class,
                                    verdict.smoothness_class == facts.convergence_class))
    return result
