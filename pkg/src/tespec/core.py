"""Shared data model: grids, sampled functions, potentials and spectra.

Everything here is immutable after construction and safe to share between
threads.  All heavier machinery (kernels, characteristic functions, ...)
builds on these types.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, GridMismatchError

__all__ = [
    "GridSpec",
    "SampledFn",
    "Smoothness",
    "Potential",
    "SpectrumKind",
    "SpectrumSeq",
    "trapezoid",
    "validate_class_R",
    "square_summable_heuristic",
    "potential_from_callable",
    "preset_potential",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``n`` intervals on ``[a, b]``."""

    n: int
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInputError(f"grid needs n >= 2 intervals, got n={self.n}")
        if not self.b > self.a:
            raise InvalidInputError(f"empty domain [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n + 1)

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n * factor, self.a, self.b)


@dataclass(frozen=True)
class SampledFn:
    """Complex samples of a function at the nodes of a uniform grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size != self.grid.n + 1:
            raise GridMismatchError(
                f"expected {self.grid.n + 1} samples, got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)
        self.values.setflags(write=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, x):
        """Piecewise-linear interpolation at arbitrary points."""
        x = np.asarray(x, dtype=float)
        re = np.interp(x, self.nodes, self.values.real)
        im = np.interp(x, self.nodes, self.values.imag)
        return re + 1j * im

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return float(np.max(np.abs(self.values.imag))) <= tol * scale


def trapezoid(f: SampledFn) -> complex:
    """Composite trapezoid quadrature of ``f`` over its grid."""
    if f.values.size == 0:
        raise InvalidInputError("empty sample sequence")
    return complex(np.trapezoid(f.values, dx=f.grid.h))


class Smoothness(enum.Enum):
    L2 = "L2"
    W21 = "W21"


@dataclass(frozen=True)
class Potential:
    """Sampled complex potential on [0, 1].

    ``mean`` caches the trapezoid value of the samples and ``endpoint`` the
    value at x = 1; both are validated against the samples on construction.
    ``smoothness`` is declared by the caller, never inferred.
    """

    samples: np.ndarray
    smoothness: Smoothness = Smoothness.W21
    quad_tol: float = 1e-12
    mean: complex = field(init=False)
    endpoint: complex = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.samples, dtype=complex)
        if vals.ndim != 1 or vals.size < 3:
            raise InvalidInputError("potential needs at least 3 samples on [0,1]")
        object.__setattr__(self, "samples", vals)
        self.samples.setflags(write=False)
        object.__setattr__(self, "mean", complex(np.trapezoid(vals, dx=self.grid.h)))
        object.__setattr__(self, "endpoint", complex(vals[-1]))

    @property
    def n(self) -> int:
        return self.samples.size - 1

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.samples.size - 1, 0.0, 1.0)

    def as_fn(self) -> SampledFn:
        return SampledFn(self.grid, self.samples)

    def __call__(self, x):
        return self.as_fn()(x)

    def resample(self, n: int) -> "Potential":
        """Linear resampling onto an ``n``-interval grid on [0,1]."""
        xs = np.linspace(0.0, 1.0, n + 1)
        return Potential(self(xs), self.smoothness)

    def norm_l1(self) -> float:
        return float(np.trapezoid(np.abs(self.samples), dx=self.grid.h))

    def norm_sup(self) -> float:
        return float(np.max(np.abs(self.samples)))


def validate_class_R(q: Potential, mean_tol: float = 1e-8) -> bool:
    """True iff ``q`` qualifies for the regular a=1 subclass.

    Requires zero mean (within ``mean_tol``), nonzero endpoint value and
    declared W21 smoothness.
    """
    return (
        abs(q.mean) <= mean_tol
        and abs(q.endpoint) > 0.0
        and q.smoothness is Smoothness.W21
    )


class SpectrumKind(enum.Enum):
    TRANSMISSION_A1 = "transmission_a1"
    DIRICHLET_DIRICHLET = "dirichlet_dirichlet"
    DIRICHLET_NEUMANN = "dirichlet_neumann"
    TRANSMISSION_GENERAL = "transmission_general"


def _lattice(kind: SpectrumKind, indices: np.ndarray, omega: complex, a: float):
    """Reference asymptote for each spectrum kind."""
    k = indices.astype(float)
    if kind is SpectrumKind.TRANSMISSION_A1:
        return (np.pi * k) ** 2 / 4.0
    if kind is SpectrumKind.DIRICHLET_DIRICHLET:
        return np.pi**2 * k**2 + omega
    if kind is SpectrumKind.DIRICHLET_NEUMANN:
        return np.pi**2 * (k - 0.5) ** 2 + omega
    if kind is SpectrumKind.TRANSMISSION_GENERAL:
        if a == 1.0:
            raise InvalidInputError("general lattice undefined at a = 1")
        return np.pi**2 * k**2 / (1.0 - a) ** 2 + omega / (1.0 - a)
    raise InvalidInputError(f"unknown kind {kind}")


def square_summable_heuristic(residuals: np.ndarray, share: float = 0.10) -> bool:
    """Decaying-increment test standing in for an l2 tail condition.

    Partial sums of |residual|^2 are monotone by construction; the sequence
    "looks" square-summable when the last quartile of increments carries
    less than ``share`` of the total mass.  This is a heuristic on finite
    data, not a membership proof.
    """
    r2 = np.abs(np.asarray(residuals)) ** 2
    if r2.size < 8:
        raise InvalidInputError("need at least 8 residuals for the tail heuristic")
    total = float(np.sum(r2))
    if total == 0.0:
        return True
    tail = float(np.sum(r2[-(r2.size // 4):]))
    return tail / total < share


@dataclass(frozen=True)
class SpectrumSeq:
    """Indexed eigenvalue sequence with its asymptotic class.

    ``values[i]`` corresponds to index ``start_index + i``.  ``real_tags``
    (optional) marks entries of an almost real subspectrum.
    """

    values: np.ndarray
    kind: SpectrumKind
    start_index: int = 1
    a: float = 1.0
    omega: complex = 0.0
    real_tags: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size == 0:
            raise InvalidInputError("spectrum must be a nonempty 1-d sequence")
        object.__setattr__(self, "values", vals)
        self.values.setflags(write=False)
        expected_start = 2 if self.kind is SpectrumKind.TRANSMISSION_A1 else 1
        if self.start_index != expected_start:
            raise InvalidInputError(
                f"kind {self.kind.value} starts at index {expected_start}, "
                f"got {self.start_index}"
            )

    def __len__(self) -> int:
        return self.values.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + len(self))

    def residuals(self) -> np.ndarray:
        """Asymptotic residuals; the per-kind normalized remainder."""
        ref = _lattice(self.kind, self.indices, self.omega, self.a)
        diff = self.values - ref
        if self.kind is SpectrumKind.TRANSMISSION_A1:
            return diff / self.indices
        return diff

    def check_asymptotics(self, share: float = 0.10) -> bool:
        return square_summable_heuristic(self.residuals(), share=share)

    def is_real(self, tol: float = 1e-8) -> bool:
        scale = np.maximum(1.0, np.abs(self.values.real))
        return bool(np.all(np.abs(self.values.imag) <= tol * scale))


def potential_from_callable(f, n: int, smoothness: Smoothness = Smoothness.W21) -> Potential:
    xs = np.linspace(0.0, 1.0, n + 1)
    return Potential(np.asarray([f(x) for x in xs], dtype=complex), smoothness)


def preset_potential(name: str, n: int = 400, c: float = 1.0) -> Potential:
    """Closed-form presets used across tests and the CLI."""
    xs = np.linspace(0.0, 1.0, n + 1)
    if name == "zero":
        return Potential(np.zeros(n + 1, dtype=complex), Smoothness.W21)
    if name == "linear_centered":
        return Potential((xs - 0.5).astype(complex), Smoothness.W21)
    if name == "constant":
        return Potential(np.full(n + 1, complex(c)), Smoothness.W21)
    if name == "cosine":
        return Potential((c * np.cos(2.0 * np.pi * xs)).astype(complex), Smoothness.W21)
    raise InvalidInputError(f"unknown preset {name!r}")
