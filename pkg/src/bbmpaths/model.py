"""Model constants for branching Brownian motion in the potential beta*|x|**p."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ModelError(ValueError):
    """Raised when model parameters violate an invariant."""


@dataclass(frozen=True)
class OffspringLaw:
    """Law of the offspring increment A on {1, 2, ...}.

    A branching particle is replaced by ``1 + A`` particles, so with ``k >= 1``
    no event ever reduces the population.
    """

    pmf: tuple[tuple[int, float], ...]

    def __init__(self, pmf: Sequence[tuple[int, float]]):
        object.__setattr__(self, "pmf", tuple((int(k), float(pr)) for k, pr in pmf))

    @classmethod
    def constant(cls, k: int = 1) -> "OffspringLaw":
        return cls([(k, 1.0)])

    @property
    def support(self) -> np.ndarray:
        return np.array([k for k, _ in self.pmf], dtype=np.int64)

    @property
    def probs(self) -> np.ndarray:
        return np.array([pr for _, pr in self.pmf], dtype=float)

    @property
    def mean(self) -> float:
        return float(sum(k * pr for k, pr in self.pmf))

    @property
    def a_log_a(self) -> float:
        """E[A log A]; finite because the support is finite."""
        return float(sum(pr * k * math.log(k) for k, pr in self.pmf))

    def size_biased(self) -> "OffspringLaw":
        """Law of A along the spine under the tilted measure: P(k) * (k + 1) / (m + 1)."""
        m = self.mean
        return OffspringLaw([(k, pr * (k + 1) / (m + 1)) for k, pr in self.pmf])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if len(self.pmf) == 1:
            return np.full(size, self.pmf[0][0], dtype=np.int64)
        return rng.choice(self.support, size=size, p=self.probs)

    def to_dict(self) -> dict:
        return {"pmf": [[k, pr] for k, pr in self.pmf]}


@dataclass(frozen=True)
class PotentialParams:
    """Branching intensity ``beta``, potential exponent ``p`` and offspring law.

    ``m`` must equal the mean of ``offspring``; ``validate`` enforces it.
    """

    beta: float
    p: float
    m: float = 1.0
    offspring: OffspringLaw = field(default_factory=OffspringLaw.constant)

    @property
    def m_beta(self) -> float:
        return self.m * self.beta

    @property
    def q(self) -> float:
        """Space scaling exponent 2/(2-p)."""
        return 2.0 / (2.0 - self.p)

    @property
    def growth_exponent(self) -> float:
        """Exponent (2+p)/(2-p) of T in log-population growth."""
        return (2.0 + self.p) / (2.0 - self.p)

    def with_m_beta(self, m_beta: float) -> "PotentialParams":
        """Same law of A, beta rescaled so that m*beta equals ``m_beta``."""
        return PotentialParams(beta=m_beta / self.m, p=self.p, m=self.m, offspring=self.offspring)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "p": self.p, "m": self.m, "offspring": self.offspring.to_dict()}


def reference_params(m_beta: float = 1.0, p: float = 1.0) -> PotentialParams:
    """Binary branching (A = 1) with the requested m*beta."""
    return validate(PotentialParams(beta=m_beta, p=p, m=1.0))


def validate(params: PotentialParams) -> PotentialParams:
    """Return ``params`` unchanged if every invariant holds, else raise ModelError."""
    p, beta, m = params.p, params.beta, params.m
    for name, val in (("beta", beta), ("p", p), ("m", m)):
        if not math.isfinite(val):
            raise ModelError(f"{name} must be finite, got {val!r}")
    if not 0.0 <= p < 2.0:
        raise ModelError(f"p out of [0,2): p={p}")
    if beta <= 0.0:
        raise ModelError(f"beta must be positive, got {beta}")
    law = params.offspring
    if not law.pmf:
        raise ModelError("offspring law has empty support")
    if any(k < 1 for k, _ in law.pmf):
        raise ModelError("offspring support must be >= 1 (no deaths)")
    if any(not 0.0 <= pr <= 1.0 for _, pr in law.pmf):
        raise ModelError("offspring probabilities must lie in [0,1]")
    total = math.fsum(pr for _, pr in law.pmf)
    if abs(total - 1.0) > 1e-12:
        raise ModelError(f"offspring probabilities sum to {total!r}, not 1")
    if m < 1.0:
        raise ModelError(f"m must be >= 1, got {m}")
    if abs(law.mean - m) > 1e-12 * max(1.0, m):
        raise ModelError(f"mean mismatch: E[A]={law.mean} but m={m}")
    q = 2.0 / (2.0 - p)
    # 2q - 1 and (2+p)/(2-p) agree exactly in exact arithmetic; allow rounding only.
    if abs(2.0 * q - 1.0 - (2.0 + p) / (2.0 - p)) > 4 * np.finfo(float).eps * q:
        raise ModelError("inconsistent growth exponent")
    return params


def branch_rate(params: PotentialParams, x):
    """beta * |x|**p, with |x|**0 == 1 everywhere (including x = 0)."""
    x = np.asarray(x, dtype=float)
    if params.p == 0.0:
        out = np.full_like(x, params.beta)
    else:
        out = params.beta * np.abs(x) ** params.p
    return out if out.ndim else float(out)
