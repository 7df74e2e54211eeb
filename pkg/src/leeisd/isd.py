"""The outer information-set-decoding loop and instance plumbing.

An instance is (H, s) over F_q with a target weight w; solving loops over
random column permutations, reduces H to a partial echelon form, asks a
back end for candidate bottom parts e'' with H'' e'' = s'' and weight p,
and tests whether the induced top part e' = s' - H' e'' carries the
remaining weight w - p.  A hit is mapped back through the permutation.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cmsd
from .fieldlin import (
    FqMatrix,
    FqVector,
    Permutation,
    SingularTopLeftError,
    apply_permutation,
    mat_vec_mul,
    partial_gaussian_elim,
    rank,
    random_full_rank_matrix,
)
from .merge import DEFAULT_LIST_CAP
from .weights import WeightFunction, sample_uniform_weight_w, sphere_count_exact, vector_weight

VARIANTS = ("prange", "dumer", "wagner1", "wagner2")


@dataclass(frozen=True, eq=False)
class SdInstance:
    """A syndrome decoding instance, optionally with its planted solution."""

    q: int
    n: int
    k: int
    w: Fraction
    wf: WeightFunction
    h: FqMatrix
    s: FqVector
    planted: FqVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "w", self.w if isinstance(self.w, Fraction) else Fraction(self.w))
        if not 0 < self.k < self.n:
            raise ValueError("need 0 < k < n")
        if self.h.rows != self.n - self.k or self.h.cols != self.n:
            raise ValueError("H must be (n-k) x n")
        if len(self.s) != self.n - self.k:
            raise ValueError("syndrome must have length n-k")
        if self.q != self.h.q or self.q != self.s.q or self.q != self.wf.q:
            raise ValueError("modulus mismatch within instance")

    def check_well_formed(self) -> None:
        """Full invariant check: rank of H, and the planted solution if any."""
        if rank(self.h) != self.n - self.k:
            raise ValueError("H does not have full rank n-k")
        if self.planted is not None and not verify_solution(self, self.planted):
            raise ValueError("planted vector is not a solution")

    def to_dict(self) -> dict:
        doc = {
            "q": self.q,
            "n": self.n,
            "k": self.k,
            "w": _weight_out(self.w),
            "weight": self.wf.name if self.wf.name in ("lee", "hamming") else self.wf.to_json(),
            "H": self.h.tolist(),
            "s": self.s.tolist(),
        }
        if self.planted is not None:
            doc["e"] = self.planted.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SdInstance":
        q = int(doc["q"])
        wf = _weight_in(q, doc["weight"])
        inst = cls(
            q=q,
            n=int(doc["n"]),
            k=int(doc["k"]),
            w=_weight_parse(doc["w"]),
            wf=wf,
            h=FqMatrix(q, np.asarray(doc["H"], dtype=np.int64)),
            s=FqVector(q, np.asarray(doc["s"], dtype=np.int64)),
            planted=FqVector(q, np.asarray(doc["e"], dtype=np.int64)) if "e" in doc else None,
        )
        inst.check_well_formed()
        return inst


def _weight_out(w: Fraction):
    return w.numerator if w.denominator == 1 else str(w)


def _weight_parse(x) -> Fraction:
    return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10**9)


def _weight_in(q: int, spec) -> WeightFunction:
    if spec == "lee":
        return WeightFunction.lee(q)
    if spec == "hamming":
        return WeightFunction.hamming(q)
    if isinstance(spec, dict):
        wf = WeightFunction.from_json(spec)
        if wf.q != q:
            raise ValueError("custom weight table modulus differs from instance modulus")
        return wf
    raise ValueError(f"unknown weight spec {spec!r}")


@dataclass(frozen=True)
class IsdParams:
    """Algorithm parameters for one solve call.

    max_outer_loops caps the loop budget; the default budget itself is
    10 * ceil(1 / (P1 * Z)) from the exact success-probability estimate,
    clamped to this cap.
    """

    variant: str = "prange"
    ell: int = 0
    p: Fraction = Fraction(0)
    a: int = 1
    list_size_cap: int = DEFAULT_LIST_CAP
    max_outer_loops: int = 10_000
    rng_seed: int = 0
    base_list_size: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        object.__setattr__(self, "p", self.p if isinstance(self.p, Fraction) else Fraction(self.p))
        if self.ell < 0 or self.a < 1 or self.max_outer_loops < 1:
            raise ValueError("invalid parameter ranges")


@dataclass(eq=False)
class SolveReport:
    """Outcome of one isd_solve call."""

    solution: FqVector | None
    outer_loops: int
    cmsd_calls: int
    tested_candidates: int
    wall_stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.solution is not None

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "solution": self.solution.tolist() if self.solution is not None else None,
            "outer_loops": self.outer_loops,
            "cmsd_calls": self.cmsd_calls,
            "tested_candidates": self.tested_candidates,
            "wall_stats": dict(self.wall_stats),
        }


def generate_instance(
    q: int, n: int, k: int, w, wf: WeightFunction, rng: random.Random
) -> SdInstance:
    """Draw (H, s = He) with H uniform of full rank and e uniform of weight w."""
    w = _weight_parse(w)
    if sphere_count_exact(wf, n, w) == 0:
        raise ValueError(f"empty sphere: no vectors of weight {w} in F_{q}^{n}")
    h = random_full_rank_matrix(q, n - k, n, rng)
    e = sample_uniform_weight_w(wf, n, w, rng)
    s = mat_vec_mul(h, e)
    return SdInstance(q=q, n=n, k=k, w=w, wf=wf, h=h, s=s, planted=e)


def verify_solution(inst: SdInstance, e: FqVector) -> bool:
    """True iff He = s and wt(e) = w, both exact."""
    if len(e) != inst.n or e.q != inst.q:
        return False
    if mat_vec_mul(inst.h, e) != inst.s:
        return False
    return vector_weight(e, inst.wf) == inst.w


def _exact_p1(inst: SdInstance, ell: int, p: Fraction) -> float:
    """Per-candidate success probability from exact sphere counts."""
    n, k, q = inst.n, inst.k, inst.q
    num = sphere_count_exact(inst.wf, n - k - ell, inst.w - p)
    if num == 0:
        return 0.0
    s_n_w = sphere_count_exact(inst.wf, n, inst.w)
    den = max(1, min(s_n_w // q**ell, q ** (n - k - ell)))
    return min(1.0, math.exp(min(math.log(num) - math.log(den), 0.0)))


def _build_cmsd(inst: SdInstance, params: IsdParams, ech, rng: random.Random):
    if params.variant == "prange":
        return cmsd.cmsd_prange(ech.h_second, ech.s_second, params.p, wf=inst.wf)
    if params.variant == "dumer":
        return cmsd.cmsd_dumer(
            ech.h_second, ech.s_second, inst.wf, params.p, params.list_size_cap
        )
    if params.variant == "wagner1":
        return cmsd.cmsd_wagner_v1(
            ech.h_second,
            ech.s_second,
            inst.wf,
            params.p,
            params.a,
            params.list_size_cap,
            rng,
            params.base_list_size,
        )
    return cmsd.cmsd_wagner_v2_build(
        ech.h_second,
        ech.s_second,
        inst.wf,
        params.p,
        params.a,
        params.list_size_cap,
        rng,
    )


def _check_params(inst: SdInstance, params: IsdParams) -> None:
    if not 0 <= params.ell <= inst.n - inst.k:
        raise ValueError(f"ell must lie in [0, {inst.n - inst.k}]")
    if params.p < 0 or params.p > inst.w:
        raise ValueError("weight budget p must lie in [0, w]")
    if params.variant == "prange" and (params.ell != 0 or params.p != 0):
        raise ValueError("prange requires ell = 0 and p = 0")


def isd_solve(inst: SdInstance, params: IsdParams) -> SolveReport:
    """Run the permute / reduce / merge / test loop until a hit or budget end."""
    _check_params(inst, params)
    rng = random.Random(params.rng_seed)
    t0 = time.monotonic()
    n, q = inst.n, inst.q
    p1 = _exact_p1(inst, params.ell, params.p)
    # an empty outer sphere means no permutation can ever succeed
    budget = params.max_outer_loops if p1 > 0.0 else 0
    singular_retries = 0
    cmsd_calls = 0
    tested = 0
    loops = 0
    while loops < budget:
        loops += 1
        perm = None
        ech = None
        for _ in range(256):  # singular leading blocks are constant-probability events
            perm = Permutation.random(n, rng)
            try:
                ech = partial_gaussian_elim(
                    apply_permutation(inst.h, perm), params.ell, inst.s
                )
                break
            except SingularTopLeftError:
                singular_retries += 1
        if ech is None:
            continue
        desc = _build_cmsd(inst, params, ech, rng)
        cmsd_calls += 1
        if loops == 1:
            z_hat = max(float(desc.meta.get("expected_solutions", 1.0)), 1e-300)
            if p1 > 0.0:
                predicted = 10.0 * math.ceil(1.0 / max(p1 * z_hat, 1e-12))
                budget = max(1, min(params.max_outer_loops, int(predicted)))
        h1 = ech.h_prime.values
        s1 = ech.s_prime.values
        s2 = ech.s_second.values
        h2 = ech.h_second.values
        w_rem = inst.w - params.p
        for i in range(desc.y):
            e2 = desc.evaluate(i)
            tested += 1
            if ((h2 @ e2) % q != s2).any():
                continue
            if vector_weight(FqVector(q, e2), inst.wf) != params.p:
                continue
            e1 = (s1 - h1 @ e2) % q
            if vector_weight(FqVector(q, e1), inst.wf) != w_rem:
                continue
            e_perm = FqVector(q, np.concatenate([e1, e2]))
            e = apply_permutation(e_perm, perm.inverse())
            if not verify_solution(inst, e):  # soundness guard; never expected
                continue
            return SolveReport(
                solution=e,
                outer_loops=loops,
                cmsd_calls=cmsd_calls,
                tested_candidates=tested,
                wall_stats={
                    "elapsed_s": time.monotonic() - t0,
                    "singular_retries": singular_retries,
                    "loop_budget": budget,
                },
            )
    return SolveReport(
        solution=None,
        outer_loops=loops,
        cmsd_calls=cmsd_calls,
        tested_candidates=tested,
        wall_stats={
            "elapsed_s": time.monotonic() - t0,
            "singular_retries": singular_retries,
            "loop_budget": budget,
        },
    )
