"""Scalar probability distributions used for initial conditions, edge
weights, and heterogeneity draws.

A distribution is specified either as a dict (``{"kind": "uniform",
"low": 0.0, "high": 0.1}``) or as a compact string (``"uniform(0, 0.1)"``),
so configs stay readable and CLI flags stay short.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = ["Distribution", "parse_distribution"]

_KINDS = ("normal", "uniform", "constant", "two_point")


@dataclass(frozen=True)
class Distribution:
    """An immutable scalar distribution with known mean and standard deviation.

    kinds:
        normal(mean, std)      Gaussian
        uniform(low, high)     continuous uniform on [low, high]
        constant(value)        point mass
        two_point(a, b, p)     value ``a`` with probability p, else ``b``
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        expected = {"normal": 2, "uniform": 2, "constant": 1, "two_point": 3}[self.kind]
        if len(self.params) != expected:
            raise ValueError(
                f"{self.kind} takes {expected} parameter(s), got {len(self.params)}"
            )
        if self.kind == "normal" and self.params[1] < 0:
            raise ValueError("normal std must be >= 0")
        if self.kind == "uniform" and self.params[1] < self.params[0]:
            raise ValueError("uniform needs low <= high")
        if self.kind == "two_point" and not 0.0 <= self.params[2] <= 1.0:
            raise ValueError("two_point probability must be in [0, 1]")

    @property
    def mean(self) -> float:
        if self.kind == "normal":
            return self.params[0]
        if self.kind == "uniform":
            return 0.5 * (self.params[0] + self.params[1])
        if self.kind == "constant":
            return self.params[0]
        a, b, p = self.params
        return p * a + (1.0 - p) * b

    @property
    def std(self) -> float:
        if self.kind == "normal":
            return self.params[1]
        if self.kind == "uniform":
            return (self.params[1] - self.params[0]) / math.sqrt(12.0)
        if self.kind == "constant":
            return 0.0
        a, b, p = self.params
        return math.sqrt(p * (1.0 - p)) * abs(a - b)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        if self.kind == "normal":
            return rng.normal(self.params[0], self.params[1], size)
        if self.kind == "uniform":
            return rng.uniform(self.params[0], self.params[1], size)
        if self.kind == "constant":
            return np.full(size if size is not None else (), self.params[0])
        a, b, p = self.params
        picks = rng.random(size) < p
        return np.where(picks, a, b)

    def to_dict(self) -> dict:
        keys = {
            "normal": ("mean", "std"),
            "uniform": ("low", "high"),
            "constant": ("value",),
            "two_point": ("a", "b", "p"),
        }[self.kind]
        out: dict = {"kind": self.kind}
        out.update(zip(keys, self.params))
        return out


_STRING_RE = re.compile(r"^\s*([a-z_]+)\s*\(([^)]*)\)\s*$")


def parse_distribution(spec: Union[Distribution, str, dict]) -> Distribution:
    """Build a :class:`Distribution` from a dict, string, or pass one through.

    Examples:
        parse_distribution("normal(0, 1)")
        parse_distribution({"kind": "uniform", "low": -0.5, "high": 0.5})
    """
    if isinstance(spec, Distribution):
        return spec
    if isinstance(spec, str):
        match = _STRING_RE.match(spec)
        if not match:
            raise ValueError(f"cannot parse distribution string {spec!r}")
        kind = match.group(1)
        args = match.group(2).strip()
        params = tuple(float(tok) for tok in args.split(",")) if args else ()
        return Distribution(kind, params)
    if isinstance(spec, dict):
        spec = dict(spec)
        kind = spec.pop("kind", None)
        if kind is None:
            raise ValueError("distribution dict needs a 'kind' key")
        order = {
            "normal": ("mean", "std"),
            "uniform": ("low", "high"),
            "constant": ("value",),
            "two_point": ("a", "b", "p"),
        }.get(kind)
        if order is None:
            raise ValueError(f"unknown distribution kind {kind!r}")
        missing = [key for key in order if key not in spec]
        if missing:
            raise ValueError(f"{kind} distribution missing keys {missing}")
        return Distribution(kind, tuple(float(spec[key]) for key in order))
    raise TypeError(f"cannot interpret {type(spec).__name__} as a distribution")
