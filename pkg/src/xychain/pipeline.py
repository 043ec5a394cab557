"""Per-point computations and the ordered, cached sweep runner."""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .cache import CacheKey, ResultCache
from .entanglement import PurityTable, entropy_spaced, tangles
from .errors import ConfigError, DegenerateModeError
from .model import ModelParams, majorana_covariance
from .noise import correlation_function, delta00, occupations
from .scaling import long_range_order

log = logging.getLogger(__name__)

LAMBDA_NUDGE = 1e-9


def _covariance(N: int, gamma: float, lam: float):
    """Covariance at ``lam``, nudged upward if a mode sits exactly at zero energy."""
    params = ModelParams(N, gamma, lam)
    try:
        return params, majorana_covariance(params), None
    except DegenerateModeError:
        nudged = params.with_lambda(lam + LAMBDA_NUDGE)
        log.info("lambda %.12g perturbed to %.12g (zero mode)", lam, nudged.lam)
        return nudged, majorana_covariance(nudged), nudged.lam


def _meta(cov, lam_used):
    return {"sector": cov.sector.tag.value, "lambda_used": lam_used}


def point_tangles(N: int, gamma: float, lam: float, k_max: int = 4, max_extent=None) -> dict:
    params, cov, lam_used = _covariance(N, gamma, lam)
    reps = tangles(params, k_max, max_extent=max_extent, table=PurityTable(cov))
    out = {"values": [r.value for r in reps], "truncated": any(r.truncated for r in reps)}
    out.update(_meta(cov, lam_used))
    return out


def point_entropy(N: int, gamma: float, lam: float, spacings=(1,)) -> dict:
    params, cov, lam_used = _covariance(N, gamma, lam)
    out = {"values": [entropy_spaced(L, params, cov).value for L in spacings]}
    out.update(_meta(cov, lam_used))
    return out


def point_noise(N: int, gamma: float, lam: float) -> dict:
    params, cov, lam_used = _covariance(N, gamma, lam)
    nq = occupations(correlation_function(cov))
    out = {"n0": float(nq[0]), "delta00": delta00(params, cov), "nq_sum": float(nq.sum())}
    out.update(_meta(cov, lam_used))
    return out


def point_mx(N: int, gamma: float, lam: float) -> dict:
    params, cov, lam_used = _covariance(N, gamma, lam)
    out = {"mx": long_range_order(params, cov)}
    out.update(_meta(cov, lam_used))
    return out


POINT_FUNCS = {
    "tangle": point_tangles,
    "entropy": point_entropy,
    "noise": point_noise,
    "mx": point_mx,
}


@dataclass(frozen=True)
class Task:
    kind: str
    N: int
    gamma: float
    lam: float
    options: tuple = ()  # sorted (name, value) pairs passed to the point function

    @property
    def key(self) -> CacheKey:
        pattern = ";".join(f"{k}={v}" for k, v in self.options)
        return CacheKey(self.kind, pattern, self.N, self.gamma, self.lam)

    def run(self) -> dict:
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in self.options}
        return POINT_FUNCS[self.kind](self.N, self.gamma, self.lam, **kw)


def _run_task(task: Task) -> dict:
    return task.run()


def run_tasks(tasks, cache: ResultCache | None = None, workers: int = 1) -> list[dict]:
    """Evaluate ``tasks`` in order; cache lookups and writes stay in this process."""
    tasks = list(tasks)
    cache = cache or ResultCache(None)
    results: list = [cache.load(t.key) for t in tasks]
    todo = [i for i, r in enumerate(results) if r is None]
    if todo:
        pending = [tasks[i] for i in todo]
        if workers > 1 and len(pending) > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(min(workers, len(pending))) as pool:
                fresh = pool.map(_run_task, pending, chunksize=1)
        else:
            fresh = [t.run() for t in pending]
        for i, r in zip(todo, fresh):
            cache.store(tasks[i].key, r)
            results[i] = r
    return results


def lambda_grid(spec) -> np.ndarray:
    """Parse ``"start:stop:step"`` (stop included) or a comma-separated list."""
    if isinstance(spec, (list, tuple, np.ndarray)):
        vals = [float(v) for v in spec]
    elif ":" in str(spec):
        try:
            start, stop, step = (float(x) for x in str(spec).split(":"))
        except ValueError as exc:
            raise ConfigError(f"bad lambda grid {spec!r}; expected start:stop:step") from exc
        if not step > 0:
            raise ConfigError(f"lambda grid step must be positive, got {step}")
        if stop < start:
            raise ConfigError(f"lambda grid stop {stop} below start {start}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        # integer multiples avoid accumulated drift; rounding keeps keys canonical
        vals = [float(f"{start + i * step:.12g}") for i in range(n)]
    else:
        try:
            vals = [float(x) for x in str(spec).split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad lambda list {spec!r}") from exc
    if not vals:
        raise ConfigError("lambda grid is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("lambda grid must be strictly increasing")
    return np.array(vals)
