"""
✅ Acceptance Suite
Suite-level checks that `verify --all` runs next to the registry records.

Each check returns an ExampleVerification with id "acceptance:<name>" so
the CLI renders and summarizes it the same way as a registry example.
Smoothness facts are skipped when smoothness is off; the exact facts
always run.
"""

import random
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from services.analysis import interpolatory_check, is_generalized_hermite, lpm_order, sum_rule_order
from services.construct import bspline_mask, existence_pipeline, interpolant_to_mask, vectorize_mask
from services.core import (
    HermiteType,
    Mask,
    VectorData,
    lattice_box,
    multi_indices,
    seq_convolve,
)
from services.jets import germ_product, jet_equal, sequence_jet, vanishes_to
from services.polysub import basis_samples, eigenpoly_check, interpolation_relation_check
from services.registry import (
    BIRKHOFF_TYPE,
    LAGRANGE_TYPE,
    REGISTRY,
    ExampleVerification,
    ExpectedFacts,
    FactCheck,
    birkhoff_mask,
    get_example,
)
from services.smoothness import (
    SmoothnessEstimator,
    autocorrelation,
    compact_generators,
    convergence_verdict,
    get_estimator,
    iterate_mask,
    sequence_norm_sq,
    trace_coefficient,
    transfer_apply,
)
from services.splines import example12_interpolant

# Seed shared with the property tests so both draw the same tuples
ACCEPTANCE_SEED = 20240517

SR_CAP = 12
SM2_TOL = 1e-3

AcceptanceCheck = Callable[[Optional[SmoothnessEstimator], bool], ExampleVerification]


def registry_masks() -> Iterator[Tuple[str, Mask, HermiteType, ExpectedFacts]]:
    """Every record and every named variant as (label, mask, type, facts)."""
    for record in REGISTRY.values():
        yield record.id, record.mask(), record.htype, record.facts
        for name in record.variants:
            params, facts = record.variant(name)
            yield f"{record.id}[{name}]", record.mask(params), record.htype, facts


def _sm2_check(checks: List[FactCheck], name: str, estimator: SmoothnessEstimator, mask: Mask, expected: float):
    report = estimator.estimate(mask)
    value = report.best_sm2
    checks.append(FactCheck(name, expected, round(value, 6), abs(value - expected) <= SM2_TOL))
    return report


def check_bspline_battery(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    """sr(a^B_n) = n for n <= 6 and sm_2(a^B_n) = n - 1/2 for n <= 5."""
    result = ExampleVerification(id="acceptance:bspline", variant=None)
    for n in range(1, 7):
        got = sum_rule_order(bspline_mask(n), SR_CAP).order
        result.checks.append(FactCheck(f"sum rules a^B_{n}", n, got, got == n))
    if smoothness:
        estimator = estimator or get_estimator()
        for n in range(1, 6):
            _sm2_check(result.checks, f"sm2 a^B_{n}", estimator, bspline_mask(n), n - 0.5)
    return result


def random_birkhoff_params(rng: random.Random) -> Dict[str, Fraction]:
    return {name: Fraction(rng.randint(-8, 8), 512) for name in ("t1", "t2", "t3", "t4")}


def check_birkhoff_random_lpm(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    """Five seeded rational tuples of the Birkhoff family keep six linear-phase moments."""
    result = ExampleVerification(id="acceptance:birkhoff-random-lpm", variant=None)
    rng = random.Random(ACCEPTANCE_SEED)
    for _ in range(5):
        params = random_birkhoff_params(rng)
        label = ",".join(f"{name}={value}" for name, value in params.items())
        got = lpm_order(birkhoff_mask(params), BIRKHOFF_TYPE, SR_CAP)
        result.checks.append(FactCheck(f"linear-phase moments >= ({label})", 6, got, got >= 6))
    return result


def lagrange_delta_mismatches(mask: Mask, levels: int) -> List[Dict]:
    """
    Positions in (1/2)Z where phi_i differs from the Lagrange delta,
    i.e. phi_1(k) = phi_2(k + 1/2) = delta(k) and both vanish elsewhere.
    """
    samples = basis_samples(mask, LAGRANGE_TYPE, levels)
    (lo,), (hi,) = mask.bounds()
    bad = []
    for i in range(mask.multiplicity):
        tau = LAGRANGE_TYPE.taus[i][0]
        for twice in range(2 * lo - 2, 2 * hi + 3):
            x = Fraction(twice, 2)
            expected = 1 if x == tau else 0
            got = samples.value(i, 0, (x,))
            if got != expected:
                bad.append({"component": i + 1, "x": x, "got": got, "expected": expected})
    return bad


def check_lagrange_deltas(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    result = ExampleVerification(id="acceptance:lagrange-deltas", variant=None)
    mask = get_example("ex6.4b").mask()
    for levels in range(1, 5):
        bad = lagrange_delta_mismatches(mask, levels)
        result.checks.append(FactCheck(f"Lagrange samples, level {levels}", [], bad[:1], not bad))
    return result


def check_construction(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    """Vectorization keeps sr and sm_2; the existence pipeline lands in C^2."""
    result = ExampleVerification(id="acceptance:construction", variant=None)
    checks = result.checks
    vector = vectorize_mask(bspline_mask(4), [[2]])
    got = sum_rule_order(vector, SR_CAP).order
    checks.append(FactCheck("sum rules vectorize(a^B_4)", 4, got, got == 4))

    htype = HermiteType.univariate([0, 2])
    built = existence_pipeline(htype)
    hermite = is_generalized_hermite(built, htype, SR_CAP)
    checks.append(FactCheck("type {0,2}", True, hermite.ok, hermite.ok))
    if smoothness:
        estimator = estimator or get_estimator()
        _sm2_check(checks, "sm2 vectorize(a^B_4)", estimator, vector, 3.5)
        report = _sm2_check(checks, "sm2 existence({0,2})", estimator, built, 3.5)
        verdict = convergence_verdict(built, htype, estimator, report, use_rho_inf=False)
        checks.append(FactCheck("convergence class existence({0,2})", 2, verdict.smoothness_class,
                                verdict.smoothness_class == 2))
    return result


def _random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-64, 64), 2 ** rng.randint(3, 9))


def _random_sequence(rng: random.Random, d: int, size: int = 4):
    return {
        tuple(rng.randint(-2, 2) for _ in range(d)): ((_random_rational(rng),),)
        for _ in range(size)
    }


def jet_homomorphism_failures(rng: random.Random, cases: int = 200, order: int = 3) -> int:
    """Random cases where sequence_jet(u * v) differs from the Leibniz product."""
    failures = 0
    for case in range(cases):
        d = 1 + case % 2
        u, v = _random_sequence(rng, d), _random_sequence(rng, d)
        product = germ_product(sequence_jet(u, order), sequence_jet(v, order))
        conv = seq_convolve(u, v)
        ok = jet_equal(sequence_jet(conv, order), product) if conv else vanishes_to(product, order)
        failures += not ok
    return failures


def transfer_identity_witness(mask: Mask, levels: int = 4, max_generators: int = 2) -> Optional[Dict]:
    """First (generator, level) where ||a_n * u||^2 != 2^{-dn} trace((T^n F)(0))."""
    sr = sum_rule_order(mask, SR_CAP)
    m = sr.order - 1
    filt = sr.matching_filter.jet if m >= 0 else None
    d = mask.dim
    iterates = [iterate_mask(mask, n) for n in range(1, levels + 1)]
    for g, u in enumerate(compact_generators(filt, m, d, mask.multiplicity)[:max_generators]):
        f = autocorrelation(u)
        for n, a_n in enumerate(iterates, start=1):
            f = transfer_apply(mask, f)
            lhs = sequence_norm_sq(seq_convolve(a_n, u))
            rhs = Fraction(1, 2 ** (d * n)) * trace_coefficient(f, d)
            if lhs != rhs:
                return {"generator": g + 1, "level": n, "norm": lhs, "trace": rhs}
    return None


def eigenpolynomial_witness(mask: Mask) -> Optional[Dict]:
    """First mu with |mu| < sr where S_a p_mu != 2^{-|mu|} p_mu."""
    sr = sum_rule_order(mask, SR_CAP)
    for mu in multi_indices(mask.dim, sr.order - 1):
        verdict = eigenpoly_check(mask, sr.matching_filter, mu)
        if not verdict.ok:
            return {"mu": list(mu), **verdict.witness}
    return None


def random_data(rng: random.Random, d: int, r: int, radius: int = 1) -> VectorData:
    values = {
        k: tuple(_random_rational(rng) for _ in range(r))
        for k in lattice_box([-radius] * d, [radius] * d)
    }
    return VectorData(dim=d, width=r, values=values)


def check_properties(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    """Exact identities over the registry masks and random jet cases."""
    result = ExampleVerification(id="acceptance:properties", variant=None)
    checks = result.checks
    rng = random.Random(ACCEPTANCE_SEED)
    failures = jet_homomorphism_failures(rng)
    checks.append(FactCheck("jet homomorphism (200 cases)", 0, failures, failures == 0))
    for label, mask, htype, facts in registry_masks():
        witness = eigenpolynomial_witness(mask)
        checks.append(FactCheck(f"eigenpolynomials {label}", "ok", witness or "ok", witness is None))
        if facts.interpolatory:
            w0 = random_data(rng, mask.dim, mask.multiplicity)
            verdict = interpolation_relation_check(mask, htype, w0, 3)
            checks.append(FactCheck(f"interpolation relation {label}", "ok", verdict.witness or "ok", verdict.ok))
        if mask.dim == 1:
            witness = transfer_identity_witness(mask)
            checks.append(FactCheck(f"transfer identity {label}", "ok", witness or "ok", witness is None))
    return result


def check_example12_loop(estimator: Optional[SmoothnessEstimator] = None, smoothness: bool = True) -> ExampleVerification:
    """The single-copy interpolant gives an interpolatory {0,1} mask with four sum rules."""
    result = ExampleVerification(id="acceptance:example1.2", variant=None)
    htype = HermiteType.univariate([0, 1])
    mask = interpolant_to_mask(example12_interpolant(1, 1), htype)
    verdict = interpolatory_check(mask, htype)
    result.checks.append(FactCheck("interpolatory", True, verdict.ok, verdict.ok))
    got = sum_rule_order(mask, SR_CAP).order
    result.checks.append(FactCheck("sum rules", 4, got, got == 4))
    return result


ACCEPTANCE_CHECKS: Dict[str, AcceptanceCheck] = {
    "bspline": check_bspline_battery,
    "birkhoff-random-lpm": check_birkhoff_random_lpm,
    "lagrange-deltas": check_lagrange_deltas,
    "construction": check_construction,
    "properties": check_properties,
    "example1.2": check_example12_loop,
}


def run_acceptance(
    name: str,
    estimator: Optional[SmoothnessEstimator] = None,
    smoothness: bool = True,
) -> ExampleVerification:
    return ACCEPTANCE_CHECKS[name](estimator, smoothness)
