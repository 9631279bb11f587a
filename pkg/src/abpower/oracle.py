"""Brute-force Monte Carlo simulation of A/B experiments under interference.

Every trial draws one measurement per unit from the model using the unit's
*realized* label, averages them by *intended* label, and applies the
known-variance z-test.  Nothing here uses the closed-form power formulas, so
the estimates are an independent check on them.

Trials are grouped in fixed blocks of ``BLOCK_TRIALS``; block ``b`` draws from
``substream(seed, stream_tag, b)``.  The result therefore does not depend on
the number of threads or on the order blocks are evaluated in.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .interference import DegenerateSwitchingError, switch_moments
from .labeling import ClassLabels, check_switch_probs
from .power import BernoulliModel, NormalModel, TestConfig, normal_cdf, z_critical
from .streams import ordered_map, substream

BLOCK_TRIALS = 256

_POWER, _TYPE1, _EXPECTED, _CLT = 10, 11, 12, 13


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    trials: int
    seed: int

    @classmethod
    def from_count(cls, hits: int, trials: int, seed: int) -> "MCEstimate":
        est = hits / trials
        return cls(est, math.sqrt(est * (1.0 - est) / trials), trials, seed)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CLTDiagnostics:
    mean: float
    sd: float
    ks_distance: float
    replicates: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


class _Design:
    """Precomputed contrast for the intended labels."""

    def __init__(self, c: ClassLabels, cfg: TestConfig):
        n_a, n_b = c.n_a, c.n_b
        if n_a == 0 or n_b == 0:
            raise ValueError("both classes must be nonempty under the intended labels")
        self.model = cfg.model
        self.is_a = c.is_a
        self.n_a, self.n_b = n_a, n_b
        self.weights = np.where(c.is_a, 1.0 / n_a, -1.0 / n_b)
        m = cfg.model
        if isinstance(m, NormalModel):
            self.se = m.sigma * math.sqrt(1.0 / n_a + 1.0 / n_b)
        elif isinstance(m, BernoulliModel):
            self.se = math.sqrt(m.var_A / n_a + m.var_B / n_b)
        else:
            raise TypeError(f"unsupported model {m!r}")
        self.z = z_critical(cfg.alpha)

    def reject(self, realized_a: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """One reject flag per trial.

        ``realized_a`` is either one realized labelling ``(n,)`` shared by
        ``size`` trials, or a ``(trials, n)`` boolean array.
        """
        m = self.model
        shape = realized_a.shape if realized_a.ndim == 2 else (size, realized_a.size)
        if isinstance(m, NormalModel):
            # contrast of mu_j + sigma * Z_j, split so the (trials, n) array is only Z
            shift = realized_a @ (self.weights * (m.mu_A - m.mu_B)) + m.mu_B * self.weights.sum()
            contrast = shift + m.sigma * (rng.standard_normal(shape) @ self.weights)
        else:
            means = np.where(realized_a, m.mu_A, m.mu_B)
            hits = rng.random(shape) < means
            contrast = hits[:, self.is_a].sum(axis=1) / self.n_a - hits[:, ~self.is_a].sum(axis=1) / self.n_b
        return contrast / self.se > self.z


def _check_pair(c: ClassLabels, d: ClassLabels) -> None:
    if len(c) != len(d):
        raise ValueError("intended and realized labels differ in length")


def _blocks(trials: int) -> list[tuple[int, int]]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return [(b, min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS)) for b in range(-(-trials // BLOCK_TRIALS))]


def simulate_trial(c: ClassLabels, d: ClassLabels, cfg: TestConfig, rng: np.random.Generator) -> bool:
    """One experiment: measure under ``d``, test under ``c``; True when H0 is rejected."""
    _check_pair(c, d)
    design = _Design(c, cfg)
    return bool(design.reject(d.is_a, rng, size=1)[0])


def _fixed_label_run(c, d, cfg, trials, seed, tag, threads, dump):
    _check_pair(c, d)
    design = _Design(c, cfg)

    def run(block):
        b, size = block
        return design.reject(d.is_a, substream(seed, tag, b), size=size)

    rejects = np.concatenate(ordered_map(run, _blocks(trials), threads))
    if dump is not None:
        _dump_trials(dump, {"reject": rejects.astype(int)})
    return MCEstimate.from_count(int(rejects.sum()), trials, seed)


def empirical_power(
    c: ClassLabels,
    d: ClassLabels,
    cfg: TestConfig,
    trials: int = 200_000,
    seed: int = 0,
    threads: int | None = 1,
    dump=None,
) -> MCEstimate:
    """Rejection rate under H1 with intended labels ``c`` and true labels ``d``."""
    cfg.require_alternative()
    return _fixed_label_run(c, d, cfg, trials, seed, _POWER, threads, dump)


def empirical_type_one(
    c: ClassLabels,
    d: ClassLabels,
    cfg: TestConfig,
    trials: int = 200_000,
    seed: int = 0,
    threads: int | None = 1,
    dump=None,
) -> MCEstimate:
    if cfg.delta != 0:
        raise ValueError("type-I simulation requires mu_A == mu_B")
    return _fixed_label_run(c, d, cfg, trials, seed, _TYPE1, threads, dump)


def empirical_expected_power(
    p,
    c: ClassLabels,
    cfg: TestConfig,
    trials: int = 200_000,
    seed: int = 0,
    threads: int | None = 1,
    dump=None,
) -> MCEstimate:
    """Power averaged over Bernoulli switching: each trial draws its own realized labels."""
    p = check_switch_probs(p)
    if p.size != len(c):
        raise ValueError("switch probabilities and labels differ in length")
    cfg.require_alternative()
    design = _Design(c, cfg)

    def run(block):
        b, size = block
        rng = substream(seed, _EXPECTED, b)
        flips = rng.random((size, p.size)) < p
        return design.reject(c.is_a ^ flips, rng), flips.sum(axis=1)

    parts = ordered_map(run, _blocks(trials), threads)
    rejects = np.concatenate([r for r, _ in parts])
    if dump is not None:
        n_d = np.concatenate([k for _, k in parts])
        _dump_trials(dump, {"n_D": n_d, "reject": rejects.astype(int)})
    return MCEstimate.from_count(int(rejects.sum()), trials, seed)


def ks_distance(samples, cdf=normal_cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    if m == 0:
        raise ValueError("no samples")
    f = np.array([cdf(v) for v in x])
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def clt_diagnostics(
    p, c: ClassLabels, replicates: int = 10_000, seed: int = 0, threads: int | None = 1
) -> CLTDiagnostics:
    """Moments and normality of the standardized switching gap over fresh switch draws."""
    p = check_switch_probs(p)
    if replicates < 100:
        raise ValueError("replicates must be at least 100")
    mom = switch_moments(p, c)
    if mom.s_n_sq <= 0:
        raise DegenerateSwitchingError("s_n^2 = 0: every switch probability is 0 or 1")
    n = p.size
    scale = 2.0 * math.sqrt(mom.s_n_sq)

    def run(block):
        b, size = block
        rng = substream(seed, _CLT, b)
        n_d = (rng.random((size, n)) < p).sum(axis=1)
        return ((n - 2 * n_d) - mom.mu_p) / scale

    z = np.concatenate(ordered_map(run, _blocks(replicates), threads))
    return CLTDiagnostics(
        mean=float(z.mean()),
        sd=float(z.std(ddof=1)),
        ks_distance=ks_distance(z),
        replicates=replicates,
        seed=seed,
    )


def _dump_trials(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", *names])
        for i, row in enumerate(zip(*(columns[k] for k in names))):
            w.writerow([i, *(int(v) for v in row)])


def misspecify(c: ClassLabels, n_d: int, seed: int = 0) -> ClassLabels:
    """Realized labels differing from ``c`` at exactly ``n_d`` random positions."""
    if not 0 <= n_d <= len(c):
        raise ValueError("n_d must lie in [0, n]")
    rng = substream(seed, 4)
    flip = np.zeros(len(c), dtype=bool)
    flip[rng.permutation(len(c))[:n_d]] = True
    return ClassLabels(c.is_a ^ flip)
