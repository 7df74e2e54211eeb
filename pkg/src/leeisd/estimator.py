"""Asymptotic work-factor exponents for the decoding algorithms.

All quantities are per-coordinate exponents in base q ("q-ary"): an
algorithm with exponent t runs in time q^(t*n + o(n)).  The binary
exponent is t * log2(q).  Notation used throughout, relative to the block
lengths n, k = R*n, ell = L*n, p = P*n:

  pi1   log_q of the per-candidate success probability (<= 0),
  zeta  log_q of the number of candidates that survive the merge tree,
  tau   log_q of the time to build the candidate description,
  y     log_q of the candidate domain size,
  u/x   internal list-size and final-match sizes of the merge tree.

The classical model pays max(0, -pi1 - zeta) restarts times max(tau, y)
work per restart; the quantum model halves the restart exponent and
searches the candidate domain in y/2.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .weights import WeightFunction, sphere_exponent_many

MODELS = ("classical", "quantum")
ALGORITHMS = ("prange", "dumer", "wagner")

_EPS = 1e-15


class InfeasibleParameterError(Exception):
    """No admissible (L, P) point exists for the requested algorithm."""


@dataclass(frozen=True)
class CodeParams:
    """Problem family: weight function, rate R = k/n, relative weight omega = w/n."""

    wf: WeightFunction
    rate: float
    omega: float

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError("rate must lie in (0, 1)")
        if not -_EPS <= self.omega <= float(self.wf.max_weight) + _EPS:
            raise ValueError("omega outside the reachable weight range")

    @property
    def q(self) -> int:
        return self.wf.q


@dataclass(frozen=True)
class AlgoPoint:
    """Relative algorithm parameters: L = ell/n, P = p/n, levels a."""

    L: float
    P: float
    a: int


@dataclass(frozen=True)
class WorkFactors:
    """Per-coordinate q-ary exponents of one algorithm at one point."""

    pi1: float
    zeta: float
    tau: float
    y: float
    u: float
    x: float
    s_omega0: float
    total_q: float
    total_bin: float
    point: AlgoPoint


def _feasible_P_range(cp: CodeParams, L: float) -> tuple[float, float]:
    wmax = float(cp.wf.max_weight)
    lo = max(0.0, cp.omega - (1.0 - cp.rate - L) * wmax)
    hi = min(cp.omega, (cp.rate + L) * wmax)
    return lo, hi


def _check_point(cp: CodeParams, L: float, P: float) -> None:
    if not -_EPS <= L <= 1.0 - cp.rate + _EPS:
        raise InfeasibleParameterError(f"L={L} outside [0, 1-R]")
    lo, hi = _feasible_P_range(cp, L)
    if not lo - 1e-9 <= P <= hi + 1e-9:
        raise InfeasibleParameterError(f"P={P} outside [{lo}, {hi}] at L={L}")


def p1_exponent(cp: CodeParams, L: float, P: float) -> float:
    """log_q of the probability that a candidate's top part has weight w - p."""
    _check_point(cp, L, P)
    s_omega = float(sphere_exponent_many(cp.wf, [cp.omega])[0])
    return _p1_from_s(cp, L, P, s_omega)


def _p1_from_s(cp: CodeParams, L: float, P: float, s_omega: float) -> float:
    out_len = 1.0 - cp.rate - L
    if out_len <= _EPS:
        num = 0.0
    else:
        num = out_len * float(sphere_exponent_many(cp.wf, [(cp.omega - P) / out_len])[0])
    den = max(0.0, min(s_omega - L, 1.0 - cp.rate - L))
    return min(0.0, num - den)


def _s_omega0(cp: CodeParams, point: AlgoPoint) -> tuple[float, float, float]:
    """(N' = R+L, m0, s at omega0) shared by both merge-tree variants."""
    np_rel = cp.rate + point.L
    m0 = point.L / np_rel if np_rel > _EPS else 0.0
    omega0 = point.P / np_rel if np_rel > _EPS else 0.0
    s0 = float(sphere_exponent_many(cp.wf, [omega0])[0])
    return np_rel, m0, s0


def wagner1_factors(cp: CodeParams, point: AlgoPoint) -> dict:
    """List-size exponents of the classical merge tree at this point."""
    _check_point(cp, point.L, point.P)
    np_rel, m0, s0 = _s_omega0(cp, point)
    a = point.a
    u = min(s0 / 2**a, m0 / a)
    x = m0 - (a - 1) * u
    return {
        "u": u,
        "x": x,
        "zeta": np_rel * (2 * u - x),
        "tau": np_rel * u,
        "y": np_rel * u,
        "s_omega0": s0,
    }


def wagner2_factors(cp: CodeParams, point: AlgoPoint) -> dict:
    """List-size exponents of the checkable-function merge tree."""
    _check_point(cp, point.L, point.P)
    np_rel, m0, s0 = _s_omega0(cp, point)
    a = point.a
    u = min(s0 / (2**a + 1), m0 / a)
    x = m0 - (a - 1) * u
    return {
        "u": u,
        "x": x,
        "zeta": np_rel * (3 * u - x),
        "tau": np_rel * u,
        "y": 2 * np_rel * u,
        "s_omega0": s0,
    }


def _assemble(cp: CodeParams, point: AlgoPoint, pi1: float, fac: dict, model: str) -> WorkFactors:
    if model == "classical":
        total = max(0.0, -pi1 - fac["zeta"]) + max(fac["tau"], fac["y"])
    else:
        total = 0.5 * max(0.0, -pi1 - fac["zeta"]) + max(fac["tau"], fac["y"] / 2)
    return WorkFactors(
        pi1=pi1,
        zeta=fac["zeta"],
        tau=fac["tau"],
        y=fac["y"],
        u=fac["u"],
        x=fac["x"],
        s_omega0=fac["s_omega0"],
        total_q=total,
        total_bin=total * math.log2(cp.q),
        point=point,
    )


def classical_exponent(cp: CodeParams, point: AlgoPoint) -> WorkFactors:
    """Restart count times per-restart work, classical model."""
    s_omega = float(sphere_exponent_many(cp.wf, [cp.omega])[0])
    pi1 = _p1_from_s(cp, point.L, point.P, s_omega)
    return _assemble(cp, point, pi1, wagner1_factors(cp, point), "classical")


def quantum_exponent(cp: CodeParams, point: AlgoPoint) -> WorkFactors:
    """Square-root restarts and square-root candidate search, quantum model."""
    s_omega = float(sphere_exponent_many(cp.wf, [cp.omega])[0])
    pi1 = _p1_from_s(cp, point.L, point.P, s_omega)
    return _assemble(cp, point, pi1, wagner2_factors(cp, point), "quantum")


# -- optimization over (L, P, a) --------------------------------------------


def _totals_grid(
    cp: CodeParams, model: str, a_values, n_grid: int = 64
) -> tuple[np.ndarray, np.ndarray, dict[int, np.ndarray]]:
    """Vectorized exponent evaluation on an n_grid x n_grid feasible grid."""
    wf, R, omega = cp.wf, cp.rate, cp.omega
    wmax = float(wf.max_weight)
    s_omega = float(sphere_exponent_many(wf, [omega])[0])
    fL = np.linspace(0.0, 1.0, n_grid)
    fP = np.linspace(0.0, 1.0, n_grid)
    L = np.repeat(fL * (1.0 - R), n_grid)
    Plo = np.maximum(0.0, omega - (1.0 - R - L) * wmax)
    Phi = np.minimum(omega, (R + L) * wmax)
    P = Plo + np.tile(fP, n_grid) * (Phi - Plo)

    out_len = 1.0 - R - L
    safe = np.maximum(out_len, _EPS)
    s_out = sphere_exponent_many(wf, (omega - P) / safe)
    num = np.where(out_len > _EPS, out_len * s_out, 0.0)
    den = np.maximum(0.0, np.minimum(s_omega - L, out_len))
    pi1 = np.minimum(0.0, num - den)

    np_rel = R + L
    m0 = L / np_rel
    s0 = sphere_exponent_many(wf, P / np_rel)
    totals: dict[int, np.ndarray] = {}
    for a in a_values:
        if model == "classical":
            u = np.minimum(s0 / 2**a, m0 / a)
            x = m0 - (a - 1) * u
            zeta = np_rel * (2 * u - x)
            work = np_rel * u
            tot = np.maximum(0.0, -pi1 - zeta) + work
        else:
            u = np.minimum(s0 / (2**a + 1), m0 / a)
            x = m0 - (a - 1) * u
            zeta = np_rel * (3 * u - x)
            work = np_rel * u
            tot = 0.5 * np.maximum(0.0, -pi1 - zeta) + work
        totals[a] = tot
    return L, P, totals


def _totals_at(
    cp: CodeParams, model: str, a: int, L: np.ndarray, P: np.ndarray, s_omega: float
) -> np.ndarray:
    """Vectorized exponent at explicit (already feasible) points."""
    wf, R, omega = cp.wf, cp.rate, cp.omega
    out_len = 1.0 - R - L
    safe = np.maximum(out_len, _EPS)
    s_out = sphere_exponent_many(wf, (omega - P) / safe)
    num = np.where(out_len > _EPS, out_len * s_out, 0.0)
    den = np.maximum(0.0, np.minimum(s_omega - L, out_len))
    pi1 = np.minimum(0.0, num - den)
    np_rel = R + L
    m0 = L / np_rel
    s0 = sphere_exponent_many(wf, P / np_rel)
    if model == "classical":
        u = np.minimum(s0 / 2**a, m0 / a)
        x = m0 - (a - 1) * u
        return np.maximum(0.0, -pi1 - np_rel * (2 * u - x)) + np_rel * u
    u = np.minimum(s0 / (2**a + 1), m0 / a)
    x = m0 - (a - 1) * u
    return 0.5 * np.maximum(0.0, -pi1 - np_rel * (3 * u - x)) + np_rel * u


def _pattern_search(
    cp: CodeParams,
    model: str,
    a: int,
    L0: float,
    P0: float,
    s_omega: float,
    tol: float = 1e-5,
) -> tuple[float, float, float]:
    """Compass search in unit-box coordinates, step halved when stuck."""
    R, omega = cp.rate, cp.omega
    wmax = float(cp.wf.max_weight)

    def to_LP(fl: np.ndarray, fp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        L = fl * (1.0 - R)
        lo = np.maximum(0.0, omega - (1.0 - R - L) * wmax)
        hi = np.minimum(omega, (R + L) * wmax)
        return L, lo + fp * (hi - lo)

    fl = min(max(L0 / (1.0 - R), 0.0), 1.0)
    L = fl * (1.0 - R)
    lo, hi = _feasible_P_range(cp, L)
    fp = 0.0 if hi - lo < _EPS else min(max((P0 - lo) / (hi - lo), 0.0), 1.0)
    Ls, Ps = to_LP(np.array([fl]), np.array([fp]))
    cur = float(_totals_at(cp, model, a, Ls, Ps, s_omega)[0])
    step = 1.0 / 63
    polls = 0
    while step > tol and polls < 400:
        polls += 1
        cand_f = np.clip(
            np.array(
                [[fl + step, fp], [fl - step, fp], [fl, fp + step], [fl, fp - step]]
            ),
            0.0,
            1.0,
        )
        Ls, Ps = to_LP(cand_f[:, 0], cand_f[:, 1])
        vals = _totals_at(cp, model, a, Ls, Ps, s_omega)
        i = int(np.argmin(vals))
        if vals[i] < cur - 1e-14:
            cur = float(vals[i])
            fl, fp = float(cand_f[i, 0]), float(cand_f[i, 1])
        else:
            step *= 0.5
    Ls, Ps = to_LP(np.array([fl]), np.array([fp]))
    return cur, float(Ls[0]), float(Ps[0])


def optimize_point(
    cp: CodeParams, model: str = "classical", algorithm: str = "wagner", a_max: int = 10
) -> WorkFactors:
    """Best (L, P, a) for the given cost model, deterministically.

    A 64x64 grid over the feasible box seeds a compass refinement (step
    down to 1e-5) for the most promising level counts.  For "prange" the
    point is pinned to (0, 0); "dumer" fixes a = 1.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    exponent = classical_exponent if model == "classical" else quantum_exponent

    if cp.omega <= _EPS:
        return exponent(cp, AlgoPoint(0.0, 0.0, 1))
    if algorithm == "prange":
        _check_point(cp, 0.0, 0.0)  # infeasible at large weight
        return exponent(cp, AlgoPoint(0.0, 0.0, 1))

    a_values = (1,) if algorithm == "dumer" else tuple(range(1, a_max + 1))
    s_omega = float(sphere_exponent_many(cp.wf, [cp.omega])[0])
    L, P, totals = _totals_grid(cp, model, a_values)
    seeds = []
    for a in a_values:
        i = int(np.argmin(totals[a]))
        seeds.append((float(totals[a][i]), a, float(L[i]), float(P[i])))
    seeds.sort()
    best: tuple[float, AlgoPoint] | None = None
    for _, a, L0, P0 in seeds[:3]:
        v, Lr, Pr = _pattern_search(cp, model, a, L0, P0, s_omega)
        if best is None or v < best[0] - 1e-13:
            best = (v, AlgoPoint(Lr, Pr, a))
    return exponent(cp, best[1])


# -- weight landscape and hardest instances ----------------------------------


def local_maxima_weights(wf: WeightFunction, rate: float) -> tuple[float, float]:
    """The two candidate hardest weights at a given rate.

    Returns (omega_minus, omega_plus): the solutions of s(omega) = 1 - R
    below and above the mean weight; when the upper branch has no crossing
    (the entropy at maximal weight already exceeds 1 - R) the top of the
    weight range is returned for that branch.
    """
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    target = 1.0 - rate
    uniq, mult = wf.weight_classes()
    lnq = math.log(wf.q)

    def state(beta: float) -> tuple[float, float]:
        z = -beta * uniq * lnq + np.log(mult)
        z -= z.max()
        e = np.exp(z)
        lam = e / e.sum()
        mean = float((lam * uniq).sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            ent = -float(
                np.where(lam > 0, lam * (np.log(lam) - np.log(mult)), 0.0).sum()
            ) / lnq
        return ent, mean

    lo, hi = 0.0, 120.0  # s decreases in beta on the low-weight branch
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s, _ = state(mid)
        if s > target:
            lo = mid
        else:
            hi = mid
    omega_minus = state(0.5 * (lo + hi))[1]

    if state(-120.0)[0] > target:
        omega_plus = float(wf.max_weight)
    else:
        lo, hi = -120.0, 0.0  # s increases in beta on the high-weight branch
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            s, _ = state(mid)
            if s < target:
                lo = mid
            else:
                hi = mid
        omega_plus = state(0.5 * (lo + hi))[1]
    return omega_minus, omega_plus


@dataclass(frozen=True)
class HardestResult:
    rate: float
    omega: float
    alpha: float
    alpha_hat: float
    factors: WorkFactors


def _hardness_at(wf: WeightFunction, rate: float, model: str, algorithm: str, a_max: int):
    best = None
    for omega in local_maxima_weights(wf, rate):
        try:
            f = optimize_point(CodeParams(wf, rate, omega), model, algorithm, a_max)
        except InfeasibleParameterError:
            continue
        if best is None or f.total_q > best[0].total_q:
            best = (f, omega)
    if best is None:
        raise InfeasibleParameterError(f"no admissible weight at rate {rate}")
    return best


def hardest_instance(
    wf: WeightFunction,
    model: str = "classical",
    algorithm: str = "wagner",
    a_max: int = 10,
    coarse_step: float = 0.05,
) -> HardestResult:
    """Rate and weight maximizing the optimized exponent.

    Only the two candidate weights from local_maxima_weights are evaluated
    per rate; the rate search is a coarse scan refined by golden-section.
    """
    rates = np.arange(0.10, 0.90 + 1e-9, coarse_step)
    scored = []
    for r in rates:
        try:
            scored.append((_hardness_at(wf, float(r), model, algorithm, a_max), float(r)))
        except InfeasibleParameterError:
            continue
    if not scored:
        raise InfeasibleParameterError("algorithm infeasible across the whole rate range")
    (best_f, best_omega), best_r = max(scored, key=lambda t: t[0][0].total_q)

    a, b = max(0.01, best_r - coarse_step), min(0.99, best_r + coarse_step)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc = _hardness_at(wf, c, model, algorithm, a_max)
    fd = _hardness_at(wf, d, model, algorithm, a_max)
    for _ in range(12):
        if fc[0].total_q > fd[0].total_q:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = _hardness_at(wf, c, model, algorithm, a_max)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = _hardness_at(wf, d, model, algorithm, a_max)
    rate = 0.5 * (a + b)
    f, omega = _hardness_at(wf, rate, model, algorithm, a_max)
    if f.total_q < best_f.total_q:  # keep the coarse winner if refinement regressed
        rate, f, omega = best_r, best_f, best_omega
    return HardestResult(
        rate=rate, omega=omega, alpha=f.total_bin, alpha_hat=f.total_q, factors=f
    )


# -- weight sweeps ------------------------------------------------------------

SWEEP_COLUMNS = (
    ("classical", "prange"),
    ("classical", "dumer"),
    ("classical", "wagner"),
    ("quantum", "wagner"),
)


@dataclass(frozen=True)
class SweepRow:
    omega: float
    omega_normalized: float
    model: str
    algorithm: str
    factors: WorkFactors | None  # None when the algorithm is infeasible there


def _sweep_cell(args) -> SweepRow:
    wf, rate, omega, model, algorithm, a_max = args
    if omega <= _EPS:
        cp = CodeParams(wf, rate, 0.0)
        fac = optimize_point(cp, model, "wagner", 1)
        return SweepRow(omega, 0.0, model, algorithm, fac)
    try:
        fac = optimize_point(CodeParams(wf, rate, omega), model, algorithm, a_max)
    except InfeasibleParameterError:
        fac = None
    return SweepRow(
        omega, omega / float(wf.max_weight), model, algorithm, fac
    )


def sweep(
    wf: WeightFunction,
    rate: float,
    omegas,
    columns=SWEEP_COLUMNS,
    a_max: int = 10,
) -> list[SweepRow]:
    """Exponent curves over a weight grid, one row per (omega, model, algorithm).

    Cells are independent; ISD_THREADS > 1 evaluates them in a thread pool
    with a deterministic result order.
    """
    tasks = [
        (wf, rate, float(om), model, algorithm, a_max)
        for om in omegas
        for model, algorithm in columns
    ]
    threads = int(os.environ.get("ISD_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_cell, tasks))
    return [_sweep_cell(t) for t in tasks]
