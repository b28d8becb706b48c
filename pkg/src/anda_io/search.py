"""
Adaptive precision-combination search.

Uniform seeds are popped cheapest-BOPs first. A popped combination becomes the new
best when it is cheaper than the incumbent and keeps at least (1 - delta) of the
FP16 score; only then are its single-step decrements queued.
"""
from __future__ import annotations

import heapq
import itertools
import json
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Set, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from tqdm import tqdm

from anda_io.bops import ModelShape, PrecisionCombination, eval_bops
from anda_io.constants import (
    DEFAULT_INIT_HI,
    DEFAULT_INIT_LO,
    DEFAULT_MANTISSA_FLOOR,
    DEFAULT_MAX_ITERS,
    DEFAULT_SENSITIVITY_FIXED,
    MAX_MANTISSA_LEN,
    MIN_MANTISSA_LEN,
)
from anda_io.names import ModuleNames
from anda_io.oracles.oracle_cls import CachedOracle, Oracle


class SearchConfig(BaseModel):
    delta: float = Field(0.01, ge=0.0, le=1.0)
    max_iters: Optional[int] = Field(DEFAULT_MAX_ITERS, ge=1)
    init_lo: int = Field(DEFAULT_INIT_LO, ge=MIN_MANTISSA_LEN, le=MAX_MANTISSA_LEN)
    init_hi: int = Field(DEFAULT_INIT_HI, ge=MIN_MANTISSA_LEN, le=MAX_MANTISSA_LEN)
    floor: int = Field(DEFAULT_MANTISSA_FLOOR, ge=MIN_MANTISSA_LEN, le=MAX_MANTISSA_LEN)
    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_range(self):
        if self.init_lo > self.init_hi:
            raise ValueError(f"init range {self.init_lo}..{self.init_hi} is empty")
        return self


@dataclass
class SearchRecord:
    iteration: int
    combination: PrecisionCombination
    bops: int
    score: float
    accepted: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "iter": self.iteration,
                "comb": list(self.combination),
                "bops": self.bops,
                "score": self.score,
                "accepted": self.accepted,
            }
        )


@dataclass
class SearchTrace:
    fp_score: float
    threshold: float
    records: List[SearchRecord] = field(default_factory=list)
    best: Optional[PrecisionCombination] = None
    best_bops: Optional[int] = None
    visited_count: int = 0
    exhausted: bool = False

    def accepted(self) -> List[SearchRecord]:
        return [r for r in self.records if r.accepted]

    def rejected(self) -> Set[PrecisionCombination]:
        return {r.combination for r in self.records if not r.accepted}

    def combinations(self) -> List[PrecisionCombination]:
        return [r.combination for r in self.records]

    def to_jsonl(self, path) -> str:
        with open(path, "w") as f:
            for record in self.records:
                f.write(record.to_json() + "\n")
        return str(path)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            row = asdict(r)
            row["combination"] = str(r.combination)
            rows.append(row)
        return pd.DataFrame(rows, columns=["iteration", "combination", "bops", "score", "accepted"])


def generate_candidates(c: PrecisionCombination, floor: int = DEFAULT_MANTISSA_FLOOR) -> List[PrecisionCombination]:
    return [c.replace(name, c[name] - 1) for name in ModuleNames.ALL if c[name] - 1 >= floor]


def search(
    shape: ModelShape,
    oracle: Oracle,
    cfg: Optional[SearchConfig] = None,
    progress: bool = False,
) -> Tuple[Optional[PrecisionCombination], SearchTrace]:
    cfg = cfg or SearchConfig()
    cached = CachedOracle.wrap(oracle)
    fp_score = cached.fp_score()
    trace = SearchTrace(fp_score=fp_score, threshold=(1.0 - cfg.delta) * fp_score)

    queue: List[Tuple[int, PrecisionCombination]] = []
    queued: Set[PrecisionCombination] = set()
    visited: Set[PrecisionCombination] = set()

    def push(c: PrecisionCombination):
        if c not in queued:
            queued.add(c)
            heapq.heappush(queue, (eval_bops(c, shape), c))

    for m in range(cfg.init_lo, cfg.init_hi + 1):
        push(PrecisionCombination.uniform(m))

    pbar = tqdm(total=cfg.max_iters, desc="Precision search", disable=not progress or None, leave=False)
    iteration = 0
    while cfg.max_iters is None or iteration < cfg.max_iters:
        if not queue:
            break
        bops, comb = heapq.heappop(queue)
        visited.add(comb)
        score = cached.evaluate(comb)
        accepted = (trace.best_bops is None or bops < trace.best_bops) and score >= trace.threshold
        trace.records.append(SearchRecord(iteration, comb, bops, score, accepted))
        if accepted:
            trace.best, trace.best_bops = comb, bops
            for cand in generate_candidates(comb, cfg.floor):
                if cand not in visited:
                    push(cand)
        iteration += 1
        pbar.update(1)
    pbar.close()

    trace.visited_count = len(visited)
    trace.exhausted = not queue
    return trace.best, trace


def brute_force(
    shape: ModelShape,
    oracle: Oracle,
    delta: float,
    lo: int = DEFAULT_INIT_LO,
    hi: int = 8,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> Optional[PrecisionCombination]:
    """
    Evaluate every combination in lo..hi and return the cheapest feasible one,
    ties broken by the smallest tuple.
    """
    cached = CachedOracle.wrap(oracle)
    threshold = (1.0 - delta) * cached.fp_score()
    combos = [PrecisionCombination(*t) for t in itertools.product(range(lo, hi + 1), repeat=4)]

    scores = {}
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(cached.evaluate, c): c for c in combos}
            for future in tqdm(as_completed(futures), total=len(futures), desc="Brute force", disable=not progress or None, leave=False):
                scores[futures[future]] = future.result()
    else:
        for c in tqdm(combos, desc="Brute force", disable=not progress or None, leave=False):
            scores[c] = cached.evaluate(c)

    feasible = [(eval_bops(c, shape), c) for c, s in scores.items() if s >= threshold]
    return min(feasible)[1] if feasible else None


def module_sensitivity(
    oracle: Oracle,
    m_values: Iterable[int],
    fixed: int = DEFAULT_SENSITIVITY_FIXED,
    modules: Iterable[str] = ModuleNames.ALL,
    progress: bool = False,
) -> pd.DataFrame:
    """
    Vary one module's mantissa length while every other module stays at `fixed`.
    """
    cached = CachedOracle.wrap(oracle)
    fp_score = cached.fp_score()
    base = PrecisionCombination.uniform(fixed)
    rows = []
    grid = [(module, m) for module in modules for m in m_values]
    for module, m in tqdm(grid, desc="Sensitivity", disable=not progress or None, leave=False):
        comb = base.replace(module, m)
        score = cached.evaluate(comb)
        rows.append(
            {
                "module": module,
                "m": m,
                "combination": str(comb),
                "score": score,
                "relative_score": score / fp_score if fp_score else float("nan"),
            }
        )
    return pd.DataFrame(rows, columns=["module", "m", "combination", "score", "relative_score"])
