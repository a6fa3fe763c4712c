"""Check every closed form against the clipping and Monte Carlo oracles."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import analytics, distributions, risk
from .model import Diversification, ModelParams, ShiftedPosition
from .oracles import (
    HalfPlane,
    McConfig,
    McEstimate,
    QuantileGuardError,
    clipped_area,
    default_halfplanes,
    draw_assets,
    mc_expected_shortfall,
    mc_probability,
    mc_quantile,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    informational: bool = False


@dataclass
class VerifyConfig:
    samples: int = 1_000_000
    seed: int = 42
    streams: int = 1
    s: float = 1.0
    ds: tuple = (0.1, 0.25)
    grid_step: float = 0.05
    n_sigma: float = 4.0
    exact_tol: float = 1e-12
    mc_pass_fraction: float = 0.99
    alphas: tuple = (0.9, 0.95, 0.99, 0.999)

    @property
    def mc(self) -> McConfig:
        return McConfig(self.samples, self.seed, self.streams)

    @property
    def grid(self) -> list:
        return unit_grid(self.grid_step)


def unit_grid(step: float) -> list:
    n = round(1.0 / step)
    if not math.isclose(n * step, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"grid step {step} does not divide [0, 1] evenly")
    return [round(i / n, 12) for i in range(n + 1)]


# --- analytics against the oracles ------------------------------------------

def _closed_forms(params, r1, r2):
    """(name, closed-form value, half-planes, event) for one grid cell."""
    s, d = params.s, params.d
    div = Diversification(r1, r2)
    h1, h2 = default_halfplanes(r1, r2, d)
    c_x, c_y = 1.0 - r1 + r2, 1.0 + r1 - r2
    agg = HalfPlane(c_x, c_y, 2 * d)
    return [
        ("individual_1", analytics.individual_default_prob(params, r1), [h1],
         lambda x, y: (1 - r1) * x + r1 * y <= d),
        ("individual_2", analytics.individual_default_prob(params, r2), [HalfPlane(1 - r2, r2, d)],
         lambda x, y: (1 - r2) * x + r2 * y <= d),
        ("joint", analytics.joint_default_prob(params, div), [h1, h2],
         lambda x, y: ((1 - r1) * x + r1 * y <= d) & (r2 * x + (1 - r2) * y <= d)),
        ("aggregate", analytics.aggregate_default_prob(params, div), [agg],
         lambda x, y: c_x * x + c_y * y <= 2 * d),
    ]


def check_clipping(cfg: VerifyConfig) -> Check:
    worst, where = 0.0, None
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for r1, r2 in itertools.product(cfg.grid, cfg.grid):
            for name, value, planes, _ in _closed_forms(params, float(r1), float(r2)):
                gap = abs(value - clipped_area(cfg.s, planes) / cfg.s**2)
                if gap > worst:
                    worst, where = gap, (name, d, r1, r2)
    return Check("analytics vs clipped_area", worst <= cfg.exact_tol,
                 f"max |diff| = {worst:.3g} at {where}")


def mc_grid_agreement(cfg: VerifyConfig):
    """Fraction of cells where every closed form is within n_sigma of MC.

    A failing cell gets one retry with an independent seed.
    """
    base, retry = cfg.mc, cfg.mc.reseeded()
    cells = fails = retried = 0
    memo = {}

    def estimate(mc, key, params, event):
        k = (mc.seed, params.d) + key
        if k not in memo:
            memo[k] = mc_probability(params, event, mc)
        return memo[k]

    def cell_ok(mc, params, r1, r2):
        for name, value, _, event in _closed_forms(params, r1, r2):
            if name == "individual_1":
                key = ("ind", r1)
            elif name == "individual_2":
                key = ("ind", r2)
            elif name == "aggregate":
                key = ("agg", round(r1 - r2, 12))
            else:
                key = ("joint", r1, r2)
            if not estimate(mc, key, params, event).within(value, cfg.n_sigma):
                return False
        return True

    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for r1, r2 in itertools.product(cfg.grid, cfg.grid):
            r1, r2 = float(r1), float(r2)
            cells += 1
            if cell_ok(base, params, r1, r2):
                continue
            retried += 1
            if not cell_ok(retry, params, r1, r2):
                fails += 1
    return (cells - fails) / cells, cells, retried, fails


def check_mc_grid(cfg: VerifyConfig) -> Check:
    frac, cells, retried, fails = mc_grid_agreement(cfg)
    return Check("analytics vs Monte Carlo", frac >= cfg.mc_pass_fraction,
                 f"{frac:.4f} of {cells} cells within {cfg.n_sigma:g} SE "
                 f"({retried} retried, {fails} failed)")


def check_joint_floor(cfg: VerifyConfig) -> Check:
    params = ModelParams(1.0, 0.25)
    p00 = analytics.joint_default_prob(params, Diversification(0.0, 0.0))
    phalf = analytics.joint_default_prob(params, Diversification(0.5, 0.5))
    rs = np.round(np.linspace(0, 1, 101), 12)
    diag = [analytics.joint_default_prob(params, Diversification(float(r), float(1 - r))) for r in rs]
    r_min = float(rs[int(np.argmin(diag))])
    ok = abs(p00 - 0.0625) <= 1e-12 and abs(phalf - 0.125) <= 1e-12 and r_min == 0.5
    return Check("joint default floor", ok, f"P(0,0)={p00!r} P(.5,.5)={phalf!r} diagonal argmin={r_min}")


def check_continuity(cfg: VerifyConfig) -> Check:
    worst = 0.0
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        eps = 1e-13
        for r in (d / cfg.s, 1 - d / cfg.s):
            lo = analytics.individual_default_prob(params, r - eps)
            hi = analytics.individual_default_prob(params, r + eps)
            worst = max(worst, abs(lo - hi))
        q = 0.5 * (d / cfg.s) ** 2
        for r1 in np.linspace(0.05, 0.95, 19):
            r2 = 1.0 - r1
            below = q * (1 / (1 - r1) + 1 / (1 - r2))
            above = q * (1 / r1 + 1 / r2)
            worst = max(worst, abs(below - above))
    return Check("continuity at regime boundaries", worst < 1e-12, f"max jump {worst:.3g}")


# --- covariance surface -----------------------------------------------------

def fd_hessian(f, x, y, h=1e-3):
    fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    return np.array([[fxx, fxy], [fxy, fyy]])


def covariance_surface_stats(interior: int = 99, h: float = 1e-3):
    w = analytics.covariance_weight
    pts = np.linspace(0, 1, interior + 2)[1:-1]
    max_lap, max_eig_err = 0.0, 0.0
    for x, y in itertools.product(pts, pts):
        hess = fd_hessian(w, x, y, h)
        max_lap = max(max_lap, abs(np.trace(hess)))
        eig = np.sort(np.linalg.eigvalsh(hess))
        max_eig_err = max(max_eig_err, abs(eig[0] + 2), abs(eig[1] - 2))
    dense = np.linspace(0, 1, 201)
    X, Y = np.meshgrid(dense, dense, indexing="ij")
    W = w(X, Y)
    boundary = np.zeros_like(W, dtype=bool)
    boundary[[0, -1], :] = True
    boundary[:, [0, -1]] = True
    wmax, wmin = W.max(), W.min()
    extremes_on_boundary = bool(W[~boundary].max() < wmax and W[~boundary].min() > wmin)
    gx = (w(0.5 + h, 0.5) - w(0.5 - h, 0.5)) / (2 * h)
    gy = (w(0.5, 0.5 + h) - w(0.5, 0.5 - h)) / (2 * h)
    return dict(max_laplacian=max_lap, max_eig_err=max_eig_err, extremes_on_boundary=extremes_on_boundary,
                wmin=float(wmin), wmax=float(wmax), saddle_grad=max(abs(gx), abs(gy)),
                w_center=w(0.5, 0.5))


def check_covariance(cfg: VerifyConfig) -> Check:
    st = covariance_surface_stats()
    params = ModelParams(1.0, 0.25)
    c10 = analytics.covariance_matrix(params, Diversification(1.0, 0.0)).cov
    cm = analytics.covariance_matrix(params, Diversification(0.5, 0.5))
    x, y = draw_assets(params.s, cfg.mc)
    v1 = 0.5 * x + 0.5 * y
    v2 = 0.5 * x + 0.5 * y
    prod = (v1 - v1.mean()) * (v2 - v2.mean())
    mc_cov = McEstimate(float(prod.mean()), float(prod.std() / math.sqrt(len(prod))), len(prod))
    grid = cfg.grid
    superadd = all(
        (m := analytics.covariance_matrix(params, Diversification(float(a), float(b)))).var_sum
        >= m.var1 + m.var2 - 1e-15
        for a, b in itertools.product(grid, grid)
    )
    ok = (st["max_laplacian"] < 1e-6 and st["max_eig_err"] < 1e-4 and st["extremes_on_boundary"]
          and abs(c10 - 1 / 12) <= 1e-15 and st["saddle_grad"] < 1e-9
          and st["wmin"] < st["w_center"] < st["wmax"]
          and mc_cov.within(cm.cov, cfg.n_sigma) and superadd)
    return Check("covariance surface", ok,
                 f"|lap|<={st['max_laplacian']:.2g} eig err {st['max_eig_err']:.2g} "
                 f"w range [{st['wmin']:g},{st['wmax']:g}] MC cov {mc_cov.value:.6f}±{mc_cov.stderr:.1g}")


# --- distributions ----------------------------------------------------------

def random_dists(n: int, seed: int):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 2, size=(n, 2))
    w[rng.random(n) < 0.05, 0] = 0.0
    s = rng.uniform(0.1, 10, size=n)
    return [distributions.make_dist(tuple(wi), float(si)) for wi, si in zip(w, s)]


def distribution_roundtrip(n: int = 10_000, seed: int = 7):
    rng = np.random.default_rng(seed + 1)
    worst_qc = worst_cq = 0.0
    for law in random_dists(n, seed):
        p = rng.uniform(1e-9, 1 - 1e-9)
        worst_cq = max(worst_cq, abs(law.cdf(law.quantile(p)) - p))
        k = rng.uniform(0, law.upper)
        worst_qc = max(worst_qc, abs(law.quantile(law.cdf(k)) - k) / max(1.0, law.upper))
    return worst_qc, worst_cq


def dkw_sup_gap(weights, s: float, mc: McConfig, delta: float = 1e-3):
    """sup |F_n - F| over the sample and the DKW band for confidence 1 - delta."""
    law = distributions.make_dist(weights, s)
    x, y = draw_assets(s, mc)
    z = np.sort(weights[0] * x + weights[1] * y)
    n = len(z)
    F = np.array([law.cdf(v) for v in z]) if n <= 10_000 else _vector_cdf(law, z)
    i = np.arange(1, n + 1)
    gap = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    return float(gap), math.sqrt(math.log(2 / delta) / (2 * n))


def _vector_cdf(law, z):
    a, b = law.a, law.b
    if a == 0:
        return np.clip(z / b, 0, 1)
    out = np.where(z <= a, z * z / (2 * a * b),
                   np.where(z <= b, (2 * z - a) / (2 * b), 1 - (a + b - z) ** 2 / (2 * a * b)))
    return np.clip(np.where(z <= 0, 0.0, out), 0, 1)


def check_distributions(cfg: VerifyConfig) -> Check:
    qc, cq = distribution_roundtrip()
    gaps = [dkw_sup_gap(w, cfg.s, cfg.mc) for w in ((1.0, 0.0), (0.5, 0.5), (0.3, 0.7), (0.5, 1.5))]
    ok = qc <= 1e-10 and cq <= 1e-12 and all(g <= band for g, band in gaps)
    return Check("distribution round trip + DKW", ok,
                 f"q(cdf) err {qc:.2g}, cdf(q) err {cq:.2g}, max DKW gap "
                 f"{max(g for g, _ in gaps):.2g} <= {gaps[0][1]:.2g}")


# --- VaR / ES ---------------------------------------------------------------

def check_var_mc(cfg: VerifyConfig) -> Check:
    params = ModelParams(1.0, 0.25)
    bad = []
    cases = 0
    for r, a in itertools.product((0.0, 0.1, 0.3, 0.5, 0.8), (0.9, 0.95, 0.99)):
        p = 1 - a
        v = risk.var_individual(params, r, a).value
        q = mc_quantile(params, (1 - r, r), params.d, p, cfg.mc)
        e = risk.expected_shortfall(params, r, a).value
        es = mc_expected_shortfall(params, (1 - r, r), params.d, p, cfg.mc)
        cases += 2
        if not q.within(-v, cfg.n_sigma, 1e-12):
            bad.append(("var", r, a))
        if not es.within(e, cfg.n_sigma, 1e-12):
            bad.append(("es", r, a))
    for (r1, r2), a in itertools.product(((0.5, 0.5), (0.0, 0.0), (0.6, 0.1), (0.9, 0.2)), (0.95, 0.99)):
        div = Diversification(r1, r2)
        pos = ShiftedPosition.aggregate(div, params.d)
        v = risk.var_systemic(params, div, a).value
        q = mc_quantile(params, pos.weights, pos.shift, 1 - a, cfg.mc)
        cases += 1
        if not q.within(-v, cfg.n_sigma, 1e-12):
            bad.append(("var_sys", r1, r2, a))
    return Check("VaR/ES vs Monte Carlo", not bad, f"{cases - len(bad)}/{cases} agree; failures {bad}")


def check_undiversified_var(cfg: VerifyConfig) -> Check:
    worst = 0.0
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for a in cfg.alphas:
            for r in (0.0, 1.0):
                worst = max(worst, abs(risk.var_individual(params, r, a).value - (d - cfg.s * (1 - a))))
    return Check("undiversified VaR = d - s(1-alpha)", worst <= cfg.exact_tol, f"max err {worst:.3g}")


def rising_grid(params: ModelParams, rs, alphas):
    for r, a in itertools.product(rs, alphas):
        r, a = float(r), float(a)
        if risk.in_rising_regime(params, r, a):
            yield r, a


def check_rising_piece(cfg: VerifyConfig) -> Check:
    worst, n = 0.0, 0
    rs = np.round(np.linspace(0.01, 0.99, 99), 12)
    alphas = np.round(np.linspace(0.5, 0.999, 100), 12)
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for r, a in rising_grid(params, rs, alphas):
            n += 1
            worst = max(worst, abs(risk.var_individual(params, r, a).value - risk.rising_piece_var(params, r, a)))
    diag = risk.printed_formula_diagnostic(ModelParams(1.0, 0.25), rs, alphas)
    return Check("rising-piece VaR closed form", worst <= cfg.exact_tol and n > 0,
                 f"{n} cells, max err {worst:.3g}; printed outer-case formulas off by up to "
                 f"{diag.max_discrepancy:.4g} over {diag.cells} cells")


def check_printed_diagnostic(cfg: VerifyConfig) -> Check:
    rs = np.round(np.linspace(0.01, 0.99, 99), 12)
    alphas = np.round(np.linspace(0.5, 0.999, 100), 12)
    diag = risk.printed_formula_diagnostic(ModelParams(1.0, 0.25), rs, alphas)
    return Check("printed outer-case VaR discrepancy (diagnostic)", True,
                 f"max |printed - exact| = {diag.max_discrepancy:.6g} over {diag.cells} cells, worst {diag.worst}",
                 informational=True)


def sign_split_grid():
    return np.round(np.arange(0.05, 0.951, 0.05), 12), risk.alpha_grid(0.5, 0.99, 0.1)


def check_sign_split(cfg: VerifyConfig) -> Check:
    rs, alphas = sign_split_grid()
    bad, n = [], 0
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for r, a in rising_grid(params, rs, alphas):
            n += 1
            diff = risk.var_individual(params, 0.0, a).value - risk.var_individual(params, r, a).value
            crit = 2 * r * (1 - r) - (1 - a)
            sd = 0 if abs(diff) <= 1e-12 else np.sign(diff)
            sc = 0 if abs(crit) <= 1e-12 else np.sign(crit)
            if sd != sc:
                bad.append((d, r, a))
    eq = risk.var_comparison(ModelParams(1.0, 0.25), 0.5, 0.5)
    ok = not bad and n > 0 and eq.ordering == risk.EQUAL
    return Check("VaR comparison sign split", ok, f"{n} rising-regime cells, mismatches {bad}; (0.5,0.5) -> {eq.ordering}")


def check_aggregate_floor(cfg: VerifyConfig) -> Check:
    bad = []
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        floor = 2 * d * d / cfg.s**2
        for r1, r2 in itertools.product(cfg.grid, cfg.grid):
            p = analytics.aggregate_default_prob(params, Diversification(float(r1), float(r2)))
            if p < floor - 1e-12 or ((r1 == r2) != (abs(p - floor) <= 1e-12)):
                bad.append((d, r1, r2, p))
    return Check("aggregate default >= 2d^2/s^2, equality iff r1 = r2", not bad, f"violations {bad[:5]}")


def check_systemic_subadditivity(cfg: VerifyConfig) -> Check:
    bad, n, eq_err, cf_err = [], 0, 0.0, 0.0
    rs = np.round(np.linspace(0.01, 0.99, 99), 12)
    alphas = np.round(np.linspace(0.5, 0.999, 50), 12)
    for d in cfg.ds:
        params = ModelParams(cfg.s, d)
        for r, a in itertools.product(rs, alphas):
            rep = risk.systemic_subadditivity_check(params, float(r), float(a))
            if not rep.applicable:
                continue
            n += 1
            if not rep.holds:
                bad.append((d, r, a))
            if r == 0.5:
                eq_err = max(eq_err, abs(rep.lhs - rep.rhs))
            cf_err = max(cf_err, abs(rep.lhs - risk.systemic_rising_piece_var(params, a)))
    ok = not bad and n > 0 and eq_err <= 1e-12 and cf_err <= 1e-12
    return Check("systemic VaR subadditivity", ok,
                 f"{n} cells, violations {bad[:5]}, equality err at r=1/2 {eq_err:.2g}, closed-form err {cf_err:.2g}")


def check_axioms(cfg: VerifyConfig) -> Check:
    params = ModelParams(1.0, 0.25)
    positions = risk.scenario_positions(params)
    shifts, lambdas = (0.1, -0.3), (0.25, 0.5, 2.0)
    rv = risk.axiom_check(risk.var_measure(params.s, 0.95), positions, lambdas, shifts, s=params.s)
    re = risk.axiom_check(risk.es_measure(params.s, 0.95), positions, lambdas, shifts, s=params.s)
    rmc = risk.axiom_check(risk.mc_es_measure(params, 0.95, cfg.mc), positions, lambdas, shifts,
                           s=params.s, n_sigma=cfg.n_sigma)
    ok = (rv.cash_invariance.passed and rv.positive_homogeneity.passed
          and re.coherent and rmc.subadditivity.passed)
    return Check("risk-measure axioms", ok,
                 f"VaR cash {rv.cash_invariance.verdict}, homogeneity {rv.positive_homogeneity.verdict}; "
                 f"ES subadditivity (MC) {rmc.subadditivity.verdict}")


CHECKS = [
    check_clipping,
    check_mc_grid,
    check_joint_floor,
    check_continuity,
    check_covariance,
    check_distributions,
    check_var_mc,
    check_undiversified_var,
    check_rising_piece,
    check_printed_diagnostic,
    check_sign_split,
    check_aggregate_floor,
    check_systemic_subadditivity,
    check_axioms,
]


@dataclass
class VerifyResult:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def preflight(cfg: VerifyConfig):
    """Raise QuantileGuardError if the sample count cannot support the quantile checks."""
    for a in (0.9, 0.95, 0.99):
        p = 1 - a
        if cfg.samples * min(p, 1 - p) < 100:
            raise QuantileGuardError(
                f"--samples {cfg.samples} too small for the {p:g}-quantile checks (n*p = {cfg.samples * p:g} < 100)"
            )


def run_all(cfg: VerifyConfig, checks=None) -> VerifyResult:
    preflight(cfg)
    out = VerifyResult()
    for fn in checks or CHECKS:
        t0 = time.perf_counter()
        chk = fn(cfg)
        chk.seconds = time.perf_counter() - t0
        out.checks.append(chk)
    return out
