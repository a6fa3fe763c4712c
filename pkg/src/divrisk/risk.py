"""Value at Risk, Expected Shortfall and risk-measure axiom checks.

Conventions: for a position W, VaR_alpha(W) is the V with
P(W <= -V) = 1 - alpha, and ES_alpha(W) = -E[W | W <= -VaR_alpha(W)].
Every VaR is obtained by inverting the exact trapezoid CDF; no regime
formula is used as a source of truth.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist_mod
from .distributions import RISING, make_dist
from .model import ConfidenceLevel, Diversification, ModelParams, ShiftedPosition, ValidationError

DIVERSIFIED_LOWER = "diversified_lower"
DIVERSIFIED_HIGHER = "diversified_higher"
EQUAL = "equal"

CASH = "cash"


@dataclass(frozen=True)
class RiskResult:
    value: float
    case_tag: str
    alpha: float

    def __float__(self):
        return self.value


def _alpha(alpha) -> float:
    if isinstance(alpha, ConfidenceLevel):
        return alpha.alpha
    return ConfidenceLevel(alpha).alpha


def _check_weight(r):
    if not 0.0 <= r <= 1.0:
        raise ValidationError(f"weight must lie in [0, 1], got {r!r}")


# --- position-level measures ------------------------------------------------

def position_var(pos: ShiftedPosition, s: float, alpha) -> RiskResult:
    alpha = _alpha(alpha)
    if pos.c_x == 0 and pos.c_y == 0:
        return RiskResult(pos.shift, CASH, alpha)
    law = make_dist(pos.weights, s)
    p = 1.0 - alpha
    return RiskResult(pos.shift - law.quantile(p), dist_mod.quantile_piece(law, p), alpha)


def position_es(pos: ShiftedPosition, s: float, alpha) -> RiskResult:
    alpha = _alpha(alpha)
    if pos.c_x == 0 and pos.c_y == 0:
        return RiskResult(pos.shift, CASH, alpha)
    law = make_dist(pos.weights, s)
    p = 1.0 - alpha
    q = law.quantile(p)
    return RiskResult(pos.shift - law.tail_mean_below(q), dist_mod.quantile_piece(law, p), alpha)


# --- the model's positions --------------------------------------------------

def var_individual(params: ModelParams, r: float, alpha) -> RiskResult:
    """VaR of R(r) = (1 - r)(X - d) + r (Y - d).

    At r = 0 or 1 this is d - s(1 - alpha).  When the (1 - alpha)-quantile
    falls in the rising piece it equals d - s sqrt(2 r (1 - r)(1 - alpha)).
    """
    _check_weight(r)
    return position_var(ShiftedPosition.individual(r, params.d), params.s, alpha)


def var_systemic(params: ModelParams, div: Diversification, alpha) -> RiskResult:
    """VaR of the aggregate R(r1) + R(r2)."""
    return position_var(ShiftedPosition.aggregate(div, params.d), params.s, alpha)


def expected_shortfall(params: ModelParams, r: float, alpha) -> RiskResult:
    _check_weight(r)
    return position_es(ShiftedPosition.individual(r, params.d), params.s, alpha)


def es_systemic(params: ModelParams, div: Diversification, alpha) -> RiskResult:
    return position_es(ShiftedPosition.aggregate(div, params.d), params.s, alpha)


def rising_piece_var(params: ModelParams, r: float, alpha) -> float:
    """d - s sqrt(2 r (1 - r)(1 - alpha)); only meaningful in the rising regime."""
    alpha = _alpha(alpha)
    return params.d - params.s * math.sqrt(2.0 * r * (1.0 - r) * (1.0 - alpha))


def systemic_rising_piece_var(params: ModelParams, alpha) -> float:
    """2d - s sqrt(2 (1 - alpha)), the systemic VaR when r1 = r2."""
    alpha = _alpha(alpha)
    return 2.0 * params.d - params.s * math.sqrt(2.0 * (1.0 - alpha))


def in_rising_regime(params: ModelParams, r: float, alpha) -> bool:
    law = make_dist((1.0 - r, r), params.s)
    return dist_mod.quantile_piece(law, 1.0 - _alpha(alpha)) == RISING


# --- comparisons ------------------------------------------------------------

@dataclass(frozen=True)
class VarComparison:
    ordering: str
    var_diversified: float
    var_undiversified: float
    case_tag: str
    predicted: str | None = None  # rising-piece criterion, when it applies


def var_comparison(params: ModelParams, r: float, alpha, tol: float = 1e-12) -> VarComparison:
    """Compare VaR of the diversified R(r) with that of X - d.

    In the rising regime the sign of VaR(X - d) - VaR(R(r)) is the sign
    of 2 r (1 - r) - (1 - alpha), reported as ``predicted``.
    """
    alpha = _alpha(alpha)
    div = var_individual(params, r, alpha)
    undiv = var_individual(params, 0.0, alpha)
    gap = undiv.value - div.value
    ordering = EQUAL if abs(gap) <= tol else (DIVERSIFIED_LOWER if gap > 0 else DIVERSIFIED_HIGHER)
    predicted = None
    if div.case_tag == RISING:
        crit = 2.0 * r * (1.0 - r) - (1.0 - alpha)
        predicted = EQUAL if abs(crit) <= tol else (DIVERSIFIED_LOWER if crit > 0 else DIVERSIFIED_HIGHER)
    return VarComparison(ordering, div.value, undiv.value, div.case_tag, predicted)


@dataclass(frozen=True)
class SubadditivityReport:
    applicable: bool
    lhs: float = math.nan
    rhs: float = math.nan
    reason: str = ""

    @property
    def holds(self) -> bool | None:
        if not self.applicable:
            return None
        return self.lhs <= self.rhs + 1e-12

    @property
    def equality(self) -> bool:
        return self.applicable and abs(self.lhs - self.rhs) <= 1e-12


def systemic_subadditivity_check(params: ModelParams, r: float, alpha) -> SubadditivityReport:
    """VaR(R(r) + R(r)) <= 2 VaR(R(r)) for banks that diversify alike.

    Only applies when the individual quantile lies in the rising piece and
    the aggregate (triangular) quantile does too.
    """
    alpha = _alpha(alpha)
    _check_weight(r)
    indiv = var_individual(params, r, alpha)
    system = var_systemic(params, Diversification(r, r), alpha)
    if indiv.case_tag != RISING:
        return SubadditivityReport(False, reason=f"individual quantile in {indiv.case_tag} piece")
    if system.case_tag != RISING:
        return SubadditivityReport(False, reason=f"aggregate quantile in {system.case_tag} piece")
    return SubadditivityReport(True, system.value, 2.0 * indiv.value)


# --- the printed outer-regime formulas --------------------------------------

def printed_outer_var(params: ModelParams, r: float, alpha, exact_var: float) -> tuple[str, float] | None:
    """Outer-case closed forms as printed, selected by the exact loss level.

    Returns (case, value) or None when the exact quantile sits in neither
    outer regime.
    """
    alpha = _alpha(alpha)
    s, d = params.s, params.d
    k = d - exact_var
    if r < 1.0 and k / (1.0 - r) >= s:
        return "x_intercept_outside", d - s * (1.0 - r * alpha)
    if r > 0.0 and k / r >= s:
        return "y_intercept_outside", d - s * (1.0 - (1.0 - r) * alpha)
    return None


@dataclass(frozen=True)
class PrintedFormulaDiagnostic:
    max_discrepancy: float
    cells: int
    worst: tuple | None


def printed_formula_diagnostic(params: ModelParams, rs, alphas) -> PrintedFormulaDiagnostic:
    """Largest gap between the printed outer-case formulas and exact VaR."""
    worst, cells, max_gap = None, 0, 0.0
    for r, a in itertools.product(rs, alphas):
        r, a = float(r), float(a)
        if r in (0.0, 1.0):
            continue
        exact = var_individual(params, r, a)
        if exact.case_tag == RISING:
            continue
        printed = printed_outer_var(params, r, a, exact.value)
        if printed is None:
            continue
        cells += 1
        gap = abs(printed[1] - exact.value)
        if gap > max_gap:
            max_gap, worst = gap, (r, a, printed[0], printed[1], exact.value)
    return PrintedFormulaDiagnostic(max_gap, cells, worst)


# --- axioms -----------------------------------------------------------------

def var_measure(s: float, alpha):
    def measure(pos):
        return position_var(pos, s, alpha).value
    return measure


def es_measure(s: float, alpha):
    def measure(pos):
        return position_es(pos, s, alpha).value
    return measure


def mc_es_measure(params: ModelParams, alpha, cfg):
    """ES estimated from common Monte Carlo draws; returns McEstimate."""
    from .oracles import mc_expected_shortfall

    p = 1.0 - _alpha(alpha)

    def measure(pos):
        if pos.c_x == 0 and pos.c_y == 0:
            from .oracles import McEstimate
            return McEstimate(pos.shift, 0.0, cfg.n)
        return mc_expected_shortfall(params, pos.weights, pos.shift, p, cfg)
    return measure


@dataclass
class AxiomResult:
    passed: bool = True
    tested: int = 0
    witness: dict | None = None

    @property
    def verdict(self) -> str:
        if not self.passed:
            return "counterexample found"
        if self.tested == 0:
            return "not tested"
        return f"no counterexample found in {self.tested} tests"


AXIOMS = ("monotonicity", "cash_invariance", "positive_homogeneity", "convexity", "subadditivity")


@dataclass
class AxiomReport:
    monotonicity: AxiomResult = field(default_factory=AxiomResult)
    cash_invariance: AxiomResult = field(default_factory=AxiomResult)
    positive_homogeneity: AxiomResult = field(default_factory=AxiomResult)
    convexity: AxiomResult = field(default_factory=AxiomResult)
    subadditivity: AxiomResult = field(default_factory=AxiomResult)

    def items(self):
        return [(name, getattr(self, name)) for name in AXIOMS]

    @property
    def coherent(self) -> bool:
        return all(res.passed for _, res in self.items())


def _value_and_se(v) -> tuple[float, float]:
    if hasattr(v, "stderr"):
        return float(v.value), float(v.stderr)
    return float(v), 0.0


def axiom_check(measure, positions, lambdas=(0.5, 2.0), shifts=(0.1,), *, s: float,
                atol: float = 1e-12, n_sigma: float = 4.0, parallel: bool = False) -> AxiomReport:
    """Search for counterexamples to the monetary / coherent axioms.

    ``measure`` maps a :class:`ShiftedPosition` to a float, or to an object
    with ``value`` and ``stderr`` (then each comparison is allowed
    ``n_sigma`` combined standard errors of slack).  A pass only means no
    counterexample turned up among the supplied cases.
    """
    positions = list(positions)
    if not positions:
        raise ValueError("need at least one position")

    tasks = {}

    def need(pos):
        tasks.setdefault(pos, None)
        return pos

    plans = []
    for p, q in itertools.product(positions, repeat=2):
        if p != q and p.dominated_by(q, s):
            plans.append(("monotonicity", (need(q), 1.0), (need(p), 1.0), 0.0, dict(lower=p, upper=q)))
    for p, m in itertools.product(positions, shifts):
        if m != 0:
            lower, upper = (p, p + m) if m > 0 else (p + m, p)
            plans.append(("monotonicity", (need(upper), 1.0), (need(lower), 1.0), 0.0,
                          dict(lower=lower, upper=upper)))
        plans.append(("cash_invariance", (need(p + m), 1.0), (need(p), 1.0), -m, dict(position=p, m=m)))
        plans.append(("cash_invariance", (need(p), 1.0), (need(p + m), 1.0), m, dict(position=p, m=m)))
    for p, lam in itertools.product(positions, lambdas):
        if lam < 0:
            continue
        plans.append(("positive_homogeneity", (need(p.scale(lam)), 1.0), (need(p), lam), 0.0, dict(position=p, lam=lam)))
        plans.append(("positive_homogeneity", (need(p), lam), (need(p.scale(lam)), 1.0), 0.0, dict(position=p, lam=lam)))
    for (p, q), lam in itertools.product(itertools.combinations(positions, 2), lambdas):
        if 0.0 <= lam <= 1.0:
            mix = p.scale(lam) + q.scale(1.0 - lam)
            plans.append(("convexity", (need(mix), 1.0), [(need(p), lam), (need(q), 1.0 - lam)], 0.0,
                          dict(x1=p, x2=q, lam=lam)))
    for p, q in itertools.combinations_with_replacement(positions, 2):
        plans.append(("subadditivity", (need(p + q), 1.0), [(need(p), 1.0), (need(q), 1.0)], 0.0,
                      dict(x1=p, x2=q)))

    keys = list(tasks)
    if parallel:
        with ThreadPoolExecutor() as pool:
            values = list(pool.map(measure, keys))
    else:
        values = [measure(k) for k in keys]
    results = {k: _value_and_se(v) for k, v in zip(keys, values)}

    report = AxiomReport()
    for name, lhs_term, rhs_terms, offset, info in plans:
        # check lhs <= sum(rhs) + offset, both sides with coefficients
        if isinstance(rhs_terms, tuple):
            rhs_terms = [rhs_terms]
        lv, lse = results[lhs_term[0]]
        lhs = lhs_term[1] * lv
        rhs = offset + sum(c * results[pos][0] for pos, c in rhs_terms)
        var = (lhs_term[1] * lse) ** 2 + sum((c * results[pos][1]) ** 2 for pos, c in rhs_terms)
        tol = atol * max(1.0, abs(lhs), abs(rhs)) + n_sigma * math.sqrt(var)
        res = getattr(report, name)
        res.tested += 1
        if lhs > rhs + tol and res.passed:
            res.passed = False
            res.witness = dict(info, lhs=lhs, rhs=rhs)
    return report


def scenario_positions(params: ModelParams, rs=(0.0, 0.25, 0.5, 0.75, 1.0)) -> list[ShiftedPosition]:
    """Individual positions R(r) plus the aggregates of each pair."""
    out = [ShiftedPosition.individual(r, params.d) for r in rs]
    out += [ShiftedPosition.aggregate(Diversification(r1, r2), params.d)
            for r1, r2 in itertools.combinations(rs, 2)]
    return list(dict.fromkeys(out))


def alpha_grid(lo: float = 0.5, hi: float = 0.99, step: float = 0.1) -> np.ndarray:
    """lo, lo + step, ... below hi, then hi itself."""
    vals = list(np.round(np.arange(lo, hi, step), 10))
    if not vals or abs(vals[-1] - hi) > 1e-12:
        vals.append(hi)
    return np.array(vals)
