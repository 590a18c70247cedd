"""Deterministic Mamdani inference core.

Fuzzification, min-AND rule activation, min-implication, max-aggregation
and centroid defuzzification over a fixed uniform sample grid. Everything
here is immutable after construction and free of side effects, so any
number of evaluations may run concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Number of uniform samples (endpoints inclusive) used for aggregation
#: and centroid defuzzification.
GRID_POINTS = 1001


class FuzzyError(Exception):
    """Base class for inference-time errors."""


class OutOfUniverseError(FuzzyError):
    def __init__(self, variable: str, value: float, lo: float, hi: float):
        self.variable = variable
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"value {value!r} for variable '{variable}' is outside its "
            f"universe [{lo}, {hi}]"
        )


class UnknownTermError(FuzzyError):
    def __init__(self, variable: str, term: str):
        self.variable = variable
        self.term = term
        super().__init__(f"variable '{variable}' has no term '{term}'")


class NoRuleFiredError(FuzzyError):
    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(
            f"no rule fired: aggregated output for '{variable}' is zero everywhere"
        )


@dataclass(frozen=True)
class MembershipFunction:
    """Piecewise-linear fuzzy set: triangle (3 breakpoints) or trapezoid (4).

    Breakpoints must be non-decreasing. Degenerate segments (equal adjacent
    breakpoints) are legal and evaluate as vertical edges, which is how
    boundary shoulders saturate at a universe endpoint.
    """

    kind: str  # "triangle" | "trapezoid"
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        n = len(self.breakpoints)
        if self.kind == "triangle" and n != 3:
            raise ValueError(f"triangle needs 3 breakpoints, got {n}")
        if self.kind == "trapezoid" and n != 4:
            raise ValueError(f"trapezoid needs 4 breakpoints, got {n}")
        if self.kind not in ("triangle", "trapezoid"):
            raise ValueError(f"unknown membership kind {self.kind!r}")
        if any(not math.isfinite(p) for p in self.breakpoints):
            raise ValueError("breakpoints must be finite")
        if any(a > b for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError(f"breakpoints must be non-decreasing: {self.breakpoints}")

    @classmethod
    def triangle(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls("triangle", (float(a), float(b), float(c)))

    @classmethod
    def trapezoid(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls("trapezoid", (float(a), float(b), float(c), float(d)))

    @property
    def support(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def core(self) -> tuple[float, float]:
        """Interval where the degree is 1."""
        if self.kind == "triangle":
            b = self.breakpoints[1]
            return b, b
        return self.breakpoints[1], self.breakpoints[2]

    def __call__(self, x: float) -> float:
        if self.kind == "triangle":
            a, b, c = self.breakpoints
            lo_core = hi_core = b
            d = c
        else:
            a, lo_core, hi_core, d = self.breakpoints
        if lo_core <= x <= hi_core:
            return 1.0
        if x <= a or x >= d:
            return 0.0
        if x < lo_core:  # rising edge; a < x < lo_core implies a < lo_core
            return (x - a) / (lo_core - a)
        return (d - x) / (d - hi_core)

    def sample(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of crisp values."""
        if self.kind == "triangle":
            a, b, c = self.breakpoints
            lo_core = hi_core = b
            d = c
        else:
            a, lo_core, hi_core, d = self.breakpoints
        out = np.zeros_like(xs, dtype=float)
        out[(xs >= lo_core) & (xs <= hi_core)] = 1.0
        if a < lo_core:
            rising = (xs > a) & (xs < lo_core)
            out[rising] = (xs[rising] - a) / (lo_core - a)
        if hi_core < d:
            falling = (xs > hi_core) & (xs < d)
            out[falling] = (d - xs[falling]) / (d - hi_core)
        return out


def membership_degree(mf: MembershipFunction, x: float) -> float:
    """Degree of a crisp value under one membership function."""
    return mf(x)


@dataclass(frozen=True)
class LinguisticVariable:
    """Named universe of discourse with an ordered set of named terms."""

    name: str
    lo: float
    hi: float
    terms: tuple[tuple[str, MembershipFunction], ...]
    unit: str = ""

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"universe of '{self.name}' is empty: [{self.lo}, {self.hi}]")
        names = [t for t, _ in self.terms]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate term names on variable '{self.name}'")
        for term, mf in self.terms:
            a, z = mf.support
            if a < self.lo or z > self.hi:
                raise ValueError(
                    f"support of term '{term}' [{a}, {z}] is outside the "
                    f"universe of '{self.name}' [{self.lo}, {self.hi}]"
                )

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)

    def term(self, name: str) -> MembershipFunction:
        for term, mf in self.terms:
            if term == name:
                return mf
        raise UnknownTermError(self.name, name)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def fuzzify(self, x: float) -> dict[str, float]:
        """Map a crisp value to a degree per term.

        Raises OutOfUniverseError when x falls outside [lo, hi].
        """
        if not math.isfinite(x) or not self.contains(x):
            raise OutOfUniverseError(self.name, x, self.lo, self.hi)
        return {term: mf(x) for term, mf in self.terms}

    def coverage_gaps(self, samples: int = 1000) -> list[float]:
        """Sample points of the universe where no term has degree > 0."""
        xs = np.linspace(self.lo, self.hi, samples)
        best = np.zeros(samples)
        for _, mf in self.terms:
            np.maximum(best, mf.sample(xs), out=best)
        return [float(x) for x in xs[best <= 0.0]]


def fuzzify(var: LinguisticVariable, x: float) -> dict[str, float]:
    return var.fuzzify(x)


@dataclass(frozen=True)
class FuzzyRule:
    """IF <var> IS <term> [AND ...] THEN <var> IS <term>."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def activation(self, fuzzified: dict[str, dict[str, float]]) -> float:
        """Min over antecedent term degrees (Mamdani AND)."""
        degree = 1.0
        for var, term in self.antecedents:
            if var not in fuzzified:
                raise UnknownTermError(var, term)
            degrees = fuzzified[var]
            if term not in degrees:
                raise UnknownTermError(var, term)
            degree = min(degree, degrees[term])
        return degree


def rule_activation(rule: FuzzyRule, fuzzified: dict[str, dict[str, float]]) -> float:
    return rule.activation(fuzzified)


@dataclass(frozen=True)
class AggregatedOutput:
    """Pre-defuzzification fuzzy output sampled on a uniform grid."""

    variable: str
    xs: np.ndarray
    degrees: np.ndarray

    def defuzzify_centroid(self) -> float:
        """Center of gravity over the sample grid, summed in ascending-x order.

        Raises NoRuleFiredError when the aggregate is zero everywhere; the
        fail-safe policy belongs to the caller.
        """
        total = float(np.sum(self.degrees))
        if total <= 0.0:
            raise NoRuleFiredError(self.variable)
        weighted = float(np.sum(self.xs * self.degrees))
        return weighted / total


def defuzzify_centroid(agg: AggregatedOutput) -> float:
    return agg.defuzzify_centroid()


@dataclass(frozen=True)
class FuzzySubsystem:
    """Two-input / one-output Mamdani subsystem with a complete rule bank."""

    name: str
    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[FuzzyRule, ...]
    _grid: np.ndarray = field(init=False, repr=False, compare=False)
    _consequent_samples: dict[str, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        known = {v.name: v for v in self.inputs}
        known[self.output.name] = self.output
        for rule in self.rules:
            for var, term in list(rule.antecedents) + [rule.consequent]:
                if var not in known:
                    raise UnknownTermError(var, term)
                known[var].term(term)  # raises UnknownTermError
        grid = np.linspace(self.output.lo, self.output.hi, GRID_POINTS)
        samples = {term: mf.sample(grid) for term, mf in self.output.terms}
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_consequent_samples", samples)

    def input_variable(self, name: str) -> LinguisticVariable:
        for var in self.inputs:
            if var.name == name:
                return var
        raise KeyError(name)

    def activations(self, crisp_inputs: dict[str, float]) -> list[float]:
        fuzzified = {v.name: v.fuzzify(crisp_inputs[v.name]) for v in self.inputs}
        return [rule.activation(fuzzified) for rule in self.rules]

    def infer(self, crisp_inputs: dict[str, float]) -> AggregatedOutput:
        """Clip each consequent at its rule's activation, combine by max."""
        aggregate = np.zeros(GRID_POINTS)
        for rule, act in zip(self.rules, self.activations(crisp_inputs)):
            if act <= 0.0:
                continue
            clipped = np.minimum(act, self._consequent_samples[rule.consequent[1]])
            np.maximum(aggregate, clipped, out=aggregate)
        return AggregatedOutput(self.output.name, self._grid, aggregate)

    def evaluate(self, crisp_inputs: dict[str, float]) -> float:
        """infer + centroid defuzzification in one step."""
        return self.infer(crisp_inputs).defuzzify_centroid()


def infer(fs: FuzzySubsystem, crisp_inputs: dict[str, float]) -> AggregatedOutput:
    return fs.infer(crisp_inputs)
