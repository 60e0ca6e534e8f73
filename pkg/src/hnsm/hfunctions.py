"""H-functions: maps (0,1)^2 -> (0,1) that turn two independent uniforms into one.

A positive-association H-function is built from a pair of CDFs F1, F2 and
their convolution F12 as H(x, y) = F12(F1^{-1}(x) + F2^{-1}(y)).  Negative
association reflects the positive one at (1-x, 1-y).  Two families are
implemented, both with F1 = F2 the CDF of a negated gamma variable:

* ``gamma-recipe`` with shape a: F1 is the CDF of -Gamma(a, 1), so the
  convolution is the CDF of -Gamma(2a, 1).  Shape 1/2 gives F12(z) = e^z
  for z < 0.
* ``product-log``: shape 1 (negated unit exponentials), which has the
  closed form H(x, y) = xy * (1 - ln(xy)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sc

_EPS = 1e-12

# default grid of gamma shapes; shape 1 is omitted because it coincides
# with the product-log family
_GAMMA_SHAPES = (0.25, 0.5, 0.75, 1.5, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class HFunctionSpec:
    """One member of the H-function catalog.

    ``tilt`` is None for the two proper (monotone) orientations; 'x' or 'y'
    marks the mixed reflections H(1-x, y) and H(x, 1-y), which preserve
    uniformity but are not monotone-consistent and are excluded from the
    default catalog.
    """

    family: str                 # "gamma-recipe" | "product-log"
    shape: float                # gamma shape parameter (1.0 for product-log)
    association: str            # "positive" | "negative"
    tilt: str | None = None     # None | "x" | "y"

    @property
    def id(self) -> str:
        if self.family == "gamma-recipe":
            base = f"gamma-recipe:shape={self.shape:g}"
        else:
            base = "product-log"
        suffix = "pos" if self.association == "positive" else "neg"
        if self.tilt is not None:
            suffix += f":tilt-{self.tilt}"
        return f"{base}:{suffix}"

    @property
    def is_auxiliary(self) -> bool:
        return self.tilt is not None


def _base_eval(family: str, shape: float, x, y):
    """Positive-association recipe value F12(F1^{-1}(x) + F1^{-1}(y))."""
    if family == "product-log":
        p = x * y
        return p * (1.0 - np.log(p))
    # F1^{-1}(u) = -isf of Gamma(shape); sum of two negated gammas is a
    # negated Gamma(2*shape), whose CDF at z is the upper tail of
    # Gamma(2*shape) at -z.
    s = sc.gammainccinv(shape, x) + sc.gammainccinv(shape, y)
    return sc.gammaincc(2.0 * shape, s)


def eval_h(spec: HFunctionSpec, x, y):
    """Evaluate an H-function on scalars or arrays with entries in (0,1).

    Raises ValueError if any input lies outside the open unit interval.
    Inputs are clamped to [1e-12, 1 - 1e-12] before evaluation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x <= 0.0) | (x >= 1.0)) or np.any((y <= 0.0) | (y >= 1.0)):
        raise ValueError("H-function arguments must lie strictly in (0, 1)")
    x = np.clip(x, _EPS, 1.0 - _EPS)
    y = np.clip(y, _EPS, 1.0 - _EPS)
    if spec.tilt == "x":
        x = 1.0 - x
    elif spec.tilt == "y":
        y = 1.0 - y
    if spec.association == "negative":
        x = 1.0 - x
        y = 1.0 - y
    out = _base_eval(spec.family, spec.shape, x, y)
    out = np.clip(out, _EPS, 1.0 - _EPS)
    return float(out) if out.ndim == 0 else out


def catalog(include_auxiliary: bool = False) -> list[HFunctionSpec]:
    """The deterministic list of H-functions searched during fitting.

    The default list has 16 members: the gamma-recipe family over a grid of
    shapes (including 1/2) plus the product-log family, each in positive and
    negative association.  With ``include_auxiliary`` the two mixed (tilted)
    reflections of every member are appended; those are not proper
    H-functions and never participate in fitting by default.
    """
    members: list[HFunctionSpec] = []
    for shape in _GAMMA_SHAPES:
        for assoc in ("positive", "negative"):
            members.append(HFunctionSpec("gamma-recipe", shape, assoc))
    for assoc in ("positive", "negative"):
        members.append(HFunctionSpec("product-log", 1.0, assoc))
    if include_auxiliary:
        aux = [
            HFunctionSpec(m.family, m.shape, m.association, tilt)
            for m in list(members)
            for tilt in ("x", "y")
        ]
        members.extend(aux)
    return members


def catalog_by_id(include_auxiliary: bool = True) -> dict[str, HFunctionSpec]:
    return {m.id: m for m in catalog(include_auxiliary=include_auxiliary)}


def uniformity_check(spec: HFunctionSpec, n: int, seed: int = 0) -> float:
    """KS distance between n sampled H(U, V) values and the uniform CDF."""
    if n < 1000:
        raise ValueError("uniformity_check needs n >= 1000")
    # domain-tagged key so the stream never collides with mask/split draws
    key = np.array([np.uint64(seed), np.uint64(6)], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    u = rng.random(n)
    v = rng.random(n)
    u = np.clip(u, _EPS, 1.0 - _EPS)
    v = np.clip(v, _EPS, 1.0 - _EPS)
    h = np.sort(eval_h(spec, u, v))
    i = np.arange(1, n + 1, dtype=float)
    return float(max(np.max(i / n - h), np.max(h - (i - 1) / n)))
