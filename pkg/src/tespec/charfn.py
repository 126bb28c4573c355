"""Characteristic functions: integral representations, Hadamard products,
zero location and the normalization-constant limit.

Evaluation conventions
----------------------
rho is the principal square root of lambda; every representation below is a
function of lambda alone (even in rho), and the implementation only ever
combines even expressions, so the branch choice is immaterial to machine
precision.

Oscillatory integrals of sampled densities use a piecewise-linear Filon
rule: the linear interpolant of the density is integrated against
exp(+-i rho t) exactly panel by panel, which keeps the quadrature error
O(h^2) uniformly in rho.  For |lambda| < 0.25 all trigonometric ratios are
evaluated through series in lambda (with explicit 1/lambda terms carried
separately), avoiding the rho -> 0 cancellations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .core import SampledFn, SpectrumKind, SpectrumSeq
from .errors import (
    InvalidInputError,
    DivergenceError,
    MissedZeroError,
    RootConvergenceError,
    ValidationError,
)

__all__ = [
    "CharFnKind",
    "IntegralCharFn",
    "ProductCharFn",
    "build_product",
    "build_theta",
    "find_zeros",
    "gamma_limit",
    "seed_lattice",
    "winding_count",
]

_LAMBDA_SWITCH = 0.25
_SERIES_TERMS = 10


def _rho(lam):
    return np.sqrt(np.asarray(lam, dtype=complex))


def _sinc1(z):
    """sin z / z, series below |z| = 0.5."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for m in range(_SERIES_TERMS):
        acc = acc + term
        term = term * (-(zs**2)) / ((2 * m + 2) * (2 * m + 3))
    out[small] = acc
    zb = z[~small]
    out[~small] = np.sin(zb) / zb
    return out


def _cosm1(z):
    """(cos z - 1) / z^2, series below |z| = 0.5."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.full_like(zs, -0.5)
    for m in range(1, _SERIES_TERMS + 1):
        acc = acc + term
        term = term * (-(zs**2)) / ((2 * m + 1) * (2 * m + 2))
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.cos(zb) - 1.0) / zb**2
    return out


def _m0(z):
    """int_0^1 e^{zs} ds."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.35
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for m in range(14):
        acc = acc + term / (m + 1)
        term = term * zs / (m + 1)
    out[small] = acc
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _m1(z):
    """int_0^1 s e^{zs} ds."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.35
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for m in range(14):
        acc = acc + term / (m + 2)
        term = term * zs / (m + 1)
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb - 1.0) + 1.0) / zb**2
    return out


def _filon_exp(t0, y0, dy, h, s):
    """sum over panels of int p(t) e^{s t} dt for each complex s.

    Panels are [t0_k, t0_k + h] with linear density y0_k + dy_k * (t-t0_k)/h.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty(s.shape, dtype=complex)
    chunk = 128
    for lo in range(0, s.size, chunk):
        sc = s[lo:lo + chunk]
        z = sc[None, :] * h
        phase = np.exp(sc[None, :] * t0[:, None])
        panel = h * phase * (y0[:, None] * _m0(z) + dy[:, None] * _m1(z))
        out[lo:lo + chunk] = panel.sum(axis=0)
    return out


def _panel_moments(fn: SampledFn, jmax: int) -> np.ndarray:
    """Exact moments int p(t) t^j dt of the linear interpolant, j = 0..jmax."""
    t = fn.nodes
    y = fn.values
    t0, t1 = t[:-1], t[1:]
    y0, y1 = y[:-1], y[1:]
    h = fn.grid.h
    out = np.empty(jmax + 1, dtype=complex)
    pow0 = t0.copy()
    pow1 = t1.copy()
    for j in range(jmax + 1):
        a1 = (pow1 * t1 - pow0 * t0) / (j + 1)          # int t^j
        a2 = (pow1 * t1 * t1 - pow0 * t0 * t0) / (j + 2)  # int t^{j+1}
        out[j] = np.sum(y0 * a1 + (y1 - y0) / h * (a2 - t0 * a1))
        pow0 = pow0 * t0
        pow1 = pow1 * t1
    return out


class CharFnKind(enum.Enum):
    DELTA0 = "delta0"
    DELTA1 = "delta1"
    DELTA_GENERAL_A = "delta_general_a"
    DELTA_A1_COS = "delta_a1_cos_form"
    DELTA_A1_SIN = "delta_a1_sin_form"


_DOMAIN = {
    CharFnKind.DELTA0: (0.0, 1.0),
    CharFnKind.DELTA1: (0.0, 1.0),
    CharFnKind.DELTA_A1_COS: (0.0, 2.0),
    CharFnKind.DELTA_A1_SIN: (0.0, 2.0),
}


@dataclass
class IntegralCharFn:
    """Integral representation of a characteristic function.

    ``density`` is w0, w1, w or v depending on ``kind``; ``eta`` is used by
    the a=1 sine form only.
    """

    kind: CharFnKind
    density: SampledFn
    a: float = 1.0
    omega: complex = 0.0
    eta: complex = 0.0
    _moments: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        dom = _DOMAIN.get(self.kind, (self.a - 1.0, self.a + 1.0))
        g = self.density.grid
        if not (abs(g.a - dom[0]) < 1e-12 and abs(g.b - dom[1]) < 1e-12):
            raise InvalidInputError(
                f"{self.kind.value} density must live on [{dom[0]}, {dom[1]}], "
                f"got [{g.a}, {g.b}]"
            )
        if self.kind is CharFnKind.DELTA_A1_SIN and self.eta == 0:
            raise InvalidInputError("a=1 sine form requires eta != 0")

    def _mom(self, j):
        if self._moments is None:
            self._moments = _panel_moments(self.density, 2 * _SERIES_TERMS + 1)
        return self._moments[j]

    def _filon(self, s):
        t = self.density.nodes
        y = self.density.values
        return _filon_exp(t[:-1], y[:-1], y[1:] - y[:-1], self.density.grid.h, s)

    def _int_cos(self, rho):
        return 0.5 * (self._filon(1j * rho) + self._filon(-1j * rho))

    def _int_sin(self, rho):
        return (self._filon(1j * rho) - self._filon(-1j * rho)) / 2j

    def _eval_large(self, lam):
        rho = _rho(lam)
        k = self.kind
        if k is CharFnKind.DELTA0:
            return (
                _sinc1(rho)
                - self.omega * np.cos(rho) / (2.0 * lam)
                + self._int_cos(rho) / lam
            )
        if k is CharFnKind.DELTA1:
            return (
                np.cos(rho)
                + self.omega * _sinc1(rho) / 2.0
                + self._int_sin(rho) / rho
            )
        if k is CharFnKind.DELTA_GENERAL_A:
            oma = 1.0 - self.a
            return (
                oma * _sinc1(rho * oma)
                - self.omega * np.cos(rho * oma) / (2.0 * lam)
                + self._int_cos(rho) / lam
            )
        if k is CharFnKind.DELTA_A1_COS:
            return (-self.omega / 2.0 + self._int_cos(rho)) / lam
        if k is CharFnKind.DELTA_A1_SIN:
            rho3 = rho * lam
            return (self.eta * np.sin(2.0 * rho) + self._int_sin(rho)) / rho3
        raise InvalidInputError(f"unknown kind {k}")

    def _series_sum(self, lam, first_moment_parity):
        """sum_{j>=1} (-1)^j lam^{j-1} m_{2j+p} / (2j+p)! for p in {0,1}."""
        p = first_moment_parity
        acc = np.zeros_like(lam)
        fact = 1.0
        for j in range(1, _SERIES_TERMS + 1):
            fact *= (2 * j + p - 1) * (2 * j + p)
            acc = acc + (-1) ** j * lam ** (j - 1) * self._mom(2 * j + p) / fact
        return acc

    def _eval_small(self, lam):
        rho = _rho(lam)
        k = self.kind
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(lam == 0, 0.0, 1.0 / np.where(lam == 0, 1.0, lam))
        if k is CharFnKind.DELTA0:
            pole = (self._mom(0) - self.omega / 2.0) * inv
            return pole + _sinc1(rho) - self.omega / 2.0 * _cosm1(rho) + self._series_sum(lam, 0)
        if k is CharFnKind.DELTA1:
            reg = np.cos(rho) + self.omega / 2.0 * _sinc1(rho)
            acc = np.full_like(lam, self._mom(1))
            fact = 1.0
            for j in range(1, _SERIES_TERMS + 1):
                fact *= (2 * j) * (2 * j + 1)
                acc = acc + (-1) ** j * lam**j * self._mom(2 * j + 1) / fact
            return reg + acc
        if k is CharFnKind.DELTA_GENERAL_A:
            oma = 1.0 - self.a
            pole = (self._mom(0) - self.omega / 2.0) * inv
            return (
                pole
                + oma * _sinc1(rho * oma)
                - self.omega / 2.0 * oma**2 * _cosm1(rho * oma)
                + self._series_sum(lam, 0)
            )
        if k is CharFnKind.DELTA_A1_COS:
            pole = (self._mom(0) - self.omega / 2.0) * inv
            return pole + self._series_sum(lam, 0)
        if k is CharFnKind.DELTA_A1_SIN:
            pole = (2.0 * self.eta + self._mom(1)) * inv
            sin_series = 8.0 * self.eta * _s3(2.0 * rho)
            return pole + sin_series + self._series_sum(lam, 1)
        raise InvalidInputError(f"unknown kind {k}")

    def eval(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        out = np.empty_like(lam)
        small = np.abs(lam) < _LAMBDA_SWITCH
        if np.any(small):
            out[small] = self._eval_small(lam[small])
        if np.any(~small):
            out[~small] = self._eval_large(lam[~small])
        return out

    def __call__(self, lam):
        res = self.eval(lam)
        return complex(res[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else res


def _s3(z):
    """(sin z - z) / z^3, series below |z| = 0.5."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5
    out = np.empty_like(z)
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.full_like(zs, -1.0 / 6.0)
    for m in range(1, _SERIES_TERMS + 1):
        acc = acc + term
        term = term * (-(zs**2)) / ((2 * m + 2) * (2 * m + 3))
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.sin(zb) - zb) / zb**3
    return out


def _tail_log(z, N):
    """log prod_{k>N} (1 - z^2/k^2) = 2 lnG(N+1) - lnG(N+1-z) - lnG(N+1+z)."""
    return 2.0 * loggamma(N + 1.0) - loggamma(N + 1.0 - z) - loggamma(N + 1.0 + z)


class TailModel(enum.Enum):
    A1_LATTICE = "a1_lattice"        # reference pi^2 k^2 / 4, k >= 2
    SCALED_LATTICE = "scaled_lattice"  # reference c^2 k^2 (+ shift), k >= 1
    NONE = "none"


@dataclass
class ProductCharFn:
    """Truncated Hadamard product with a closed-form reference tail.

    For the a=1 product (kind ``A1_LATTICE``) the value is
    -(8 eta / pi^2) * prod_{k=2}^{N} 4(zeros_k - lam)/(pi k)^2 * T_N(lam)
    with the exact reference tail T_N expressed through log-gamma, so lattice
    points lam = pi^2 k^2 / 4 need no special casing.  ``SCALED_LATTICE``
    evaluates the normalized product Theta = lam^s prod (1 - lam/lam_k) with
    reference lattice c^2 k^2 + shift.
    """

    zeros: np.ndarray
    normalization: complex
    N: int
    tail_model: TailModel = TailModel.A1_LATTICE
    start_index: int = 2
    zero_multiplicity_s: int = 0
    c: float = np.pi / 2.0
    shift: complex = 0.0

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=complex)
        object.__setattr__(self, "zeros", z)
        if self.normalization == 0:
            raise InvalidInputError("product normalization must be nonzero")

    def eval(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        ks = np.arange(self.start_index, self.start_index + self.zeros.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.tail_model is TailModel.A1_LATTICE:
                logs = (
                    np.log(4.0 * (self.zeros[None, :] - lam[:, None]))
                    - 2.0 * np.log(np.pi * ks)[None, :]
                )
                z = 2.0 * _rho(lam) / np.pi
                total = logs.sum(axis=1) + _tail_log(z, self.N)
                vals = self.normalization * np.exp(total)
            elif self.tail_model is TailModel.SCALED_LATTICE:
                nz = self.zeros[self.zeros != 0]
                logs = np.log(nz[None, :] - lam[:, None]) - np.log(nz)[None, :]
                z = np.sqrt((lam - self.shift).astype(complex)) / self.c
                total = logs.sum(axis=1) + _tail_log(z, self.N)
                vals = self.normalization * np.exp(total)
                if self.zero_multiplicity_s:
                    vals = vals * lam**self.zero_multiplicity_s
            else:
                nz = self.zeros[self.zeros != 0]
                logs = np.log(nz[None, :] - lam[:, None]) - np.log(nz)[None, :]
                vals = self.normalization * np.exp(logs.sum(axis=1))
                if self.zero_multiplicity_s:
                    vals = vals * lam**self.zero_multiplicity_s
        zero_hit = np.isin(lam, self.zeros)
        if np.any(zero_hit):
            vals = np.where(zero_hit, 0.0, vals)
        return vals

    def __call__(self, lam):
        res = self.eval(lam)
        return complex(res[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else res


def build_product(zeros: SpectrumSeq, eta: complex, N: int) -> ProductCharFn:
    """Hadamard product for the a=1 characteristic function from its zeros.

    ``N`` is the largest zero index kept as an explicit factor; the reference
    tail beyond it is exact, so the truncation error is governed solely by
    how far the dropped zeros sit from the reference lattice.
    """
    if eta == 0:
        raise InvalidInputError("product normalization requires eta != 0")
    if N < 2:
        raise InvalidInputError("need N >= 2")
    if zeros.kind is not SpectrumKind.TRANSMISSION_A1:
        raise ValidationError("a=1 product needs transmission_a1 zeros")
    if len(zeros) >= 8 and not zeros.check_asymptotics():
        raise ValidationError("zeros fail the a=1 asymptotic residual check")
    keep = min(N - 1, len(zeros))
    vals = zeros.values[:keep]
    return ProductCharFn(
        zeros=vals,
        normalization=-8.0 * eta / np.pi**2,
        N=keep + 1,
        tail_model=TailModel.A1_LATTICE,
        start_index=2,
    )


def build_theta(
    zeros: np.ndarray,
    start_index: int = 1,
    c: float = np.pi,
    shift: complex = 0.0,
    s: int | None = None,
) -> ProductCharFn:
    """Normalized product Theta(lam) = lam^s prod (1 - lam/lam_k)."""
    z = np.asarray(zeros, dtype=complex)
    if s is None:
        s = int(np.sum(z == 0))
    nz = z[z != 0]
    return ProductCharFn(
        zeros=nz,
        normalization=1.0,
        N=start_index + z.size - 1,
        tail_model=TailModel.SCALED_LATTICE,
        start_index=start_index,
        zero_multiplicity_s=s,
        c=c,
        shift=shift,
    )


def seed_lattice(kind: SpectrumKind, indices, omega: complex = 0.0, a: float = 1.0):
    """Asymptotic seed locations for the zero search."""
    k = np.asarray(indices, dtype=float)
    if kind is SpectrumKind.TRANSMISSION_A1:
        return (np.pi * k) ** 2 / 4.0 + 0j
    if kind is SpectrumKind.DIRICHLET_DIRICHLET:
        return np.pi**2 * k**2 + omega
    if kind is SpectrumKind.DIRICHLET_NEUMANN:
        return np.pi**2 * (k - 0.5) ** 2 + omega
    if kind is SpectrumKind.TRANSMISSION_GENERAL:
        return np.pi**2 * k**2 / (1.0 - a) ** 2 + omega / (1.0 - a)
    raise InvalidInputError(f"unknown kind {kind}")


def _as_callable(f):
    if callable(f):
        return f
    raise InvalidInputError("characteristic function must be callable")


def _secant(f, x0, x1, f_scale, zero_tol=1e-12, max_iter=80):
    f0 = complex(f(np.array([x0]))[0])
    f1 = complex(f(np.array([x1]))[0])
    best = (x1, abs(f1))
    for _ in range(max_iter):
        denom = f1 - f0
        if denom == 0:
            break
        step = -f1 * (x1 - x0) / denom
        cand = x1 + step
        fc = complex(f(np.array([cand]))[0])
        damp = 0
        while abs(fc) > abs(f1) and damp < 10:
            step *= 0.5
            cand = x1 + step
            fc = complex(f(np.array([cand]))[0])
            damp += 1
        x0, f0 = x1, f1
        x1, f1 = cand, fc
        if abs(f1) < best[1]:
            best = (x1, abs(f1))
        if abs(f1) <= zero_tol * f_scale or abs(step) <= 1e-13 * max(1.0, abs(x1)):
            return x1, abs(f1), True
    return best[0], best[1], best[1] <= 1e3 * zero_tol * f_scale


def _edge_abscissae(re_lo, re_hi, count):
    """Horizontal-edge sample abscissae, sqrt-spaced where zeros live.

    Characteristic-function zeros are near-equispaced in rho = sqrt(lambda),
    so sqrt spacing gives uniform phase resolution; the (rare) negative part
    of the edge carries no oscillation and is sampled linearly.
    """
    if re_hi <= 1.0:
        return np.linspace(re_lo, re_hi, count, endpoint=False)
    if re_lo >= 0.0:
        r = np.linspace(np.sqrt(re_lo), np.sqrt(re_hi), count, endpoint=False)
        return r**2
    neg = np.linspace(re_lo, 0.0, max(8, count // 4), endpoint=False)
    r = np.linspace(0.0, np.sqrt(re_hi), count, endpoint=False)
    return np.concatenate([neg, r**2])


def winding_count(f, re_lo, re_hi, height, budget=60000, n_hint=8):
    """Zeros inside the rectangle by the argument principle.

    Walks the boundary accumulating phase increments; segments with a jump
    above pi/2 are bisected until resolved or the evaluation budget is hit.
    """
    per_edge = max(32, 12 * n_hint)
    bottom = _edge_abscissae(re_lo, re_hi, per_edge)
    keys = []
    pts = []
    # bottom edge (left to right), right edge, top edge (right to left), left
    keys.extend(np.linspace(0.0, 1.0, bottom.size, endpoint=False))
    pts.extend(bottom - 1j * height)
    ts = np.linspace(0.0, 1.0, 32, endpoint=False)
    keys.extend(1.0 + ts)
    pts.extend(re_hi - 1j * height + ts * (2j * height))
    keys.extend(2.0 + np.linspace(0.0, 1.0, bottom.size, endpoint=False))
    pts.extend(bottom[::-1] + 1j * height)
    keys.extend(3.0 + ts)
    pts.extend(re_lo + 1j * height + ts * (-2j * height))
    keys.append(4.0)
    pts.append(re_lo - 1j * height)
    keys = np.array(keys)
    pts = np.array(pts, dtype=complex)
    vals = f(pts)
    spent = pts.size

    def phase_jumps(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.angle(v[1:] / v[:-1])

    while spent < budget:
        jumps = phase_jumps(vals)
        bad = np.where(np.abs(jumps) > 0.5 * np.pi)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mkeys = 0.5 * (keys[bad] + keys[bad + 1])
        mvals = f(mids)
        spent += mids.size
        keys = np.concatenate([keys, mkeys])
        pts = np.concatenate([pts, mids])
        vals = np.concatenate([vals, mvals])
        order = np.argsort(keys)
        keys, pts, vals = keys[order], pts[order], vals[order]
    else:
        raise MissedZeroError(
            "argument-principle audit could not resolve the contour phase",
            rectangle=(re_lo, re_hi, height),
        )
    if np.any(np.abs(vals) == 0.0) or np.any(~np.isfinite(vals)):
        raise MissedZeroError(
            "contour passes through a zero or overflow region",
            rectangle=(re_lo, re_hi, height),
        )
    total = float(np.sum(phase_jumps(vals)))
    count = total / (2.0 * np.pi)
    rounded = int(np.round(count))
    if abs(count - rounded) > 0.2:
        raise MissedZeroError(
            f"non-integer winding number {count:.3f}",
            rectangle=(re_lo, re_hi, height),
        )
    return rounded


def find_zeros(
    f,
    window: tuple[int, int],
    kind: SpectrumKind = SpectrumKind.TRANSMISSION_A1,
    omega: complex = 0.0,
    a: float = 1.0,
    zero_tol: float = 1e-11,
    audit: bool = True,
    audit_height: float | None = None,
) -> SpectrumSeq:
    """Locate one zero per index in ``window`` near the asymptotic lattice.

    Each zero is refined by a damped complex secant iteration started from
    the kind's asymptotic seed.  When ``audit`` is set, an argument-principle
    count over a rectangle with real edges at the window's lattice mid-gaps
    must match the window size, else :class:`MissedZeroError` is raised.
    """
    fe = _as_callable(f)
    k_lo, k_hi = window
    if k_hi < k_lo:
        raise InvalidInputError("empty index window")
    idx = np.arange(k_lo, k_hi + 1)
    seeds = seed_lattice(kind, idx, omega=omega, a=a)
    lat_prev = seed_lattice(kind, np.array([k_lo - 1]), omega=omega, a=a)[0]
    lat_next = seed_lattice(kind, np.array([k_hi + 1]), omega=omega, a=a)[0]
    gaps = np.diff(np.concatenate([[lat_prev], seeds, [lat_next]])).real

    scale_probe = np.abs(fe(seeds + 0.31 * gaps[1:]))
    f_scale = max(float(np.max(scale_probe)), 1e-300)

    roots = []
    failures = []
    for i, (s, g) in enumerate(zip(seeds, gaps[1:])):
        x0 = s
        x1 = s + 0.05 * g + 0.002j * g
        root, resid, ok = _secant(fe, x0, x1, f_scale, zero_tol=zero_tol)
        if not ok:
            # rescue: coarse scan of the lattice cell for a better start
            span = np.linspace(s - 0.45 * gaps[i], s + 0.45 * g, 41)
            vals = np.abs(fe(span.astype(complex)))
            j = int(np.argmin(vals))
            root, resid, ok = _secant(
                fe, complex(span[j]), complex(span[j]) + 0.01 * g + 0.01j * g,
                f_scale, zero_tol=zero_tol,
            )
        if not ok:
            failures.append((int(idx[i]), resid))
            continue
        roots.append(root)
    if failures:
        raise RootConvergenceError(
            f"zero search failed at indices {[k for k, _ in failures]} "
            f"(best residuals {[f'{r:.2e}' for _, r in failures]})",
            index=failures[0][0],
        )

    roots = np.array(sorted(roots, key=lambda z: (z.real, z.imag)), dtype=complex)

    if audit:
        re_lo = float((lat_prev + seeds[0]).real) / 2.0
        re_hi = float((seeds[-1] + lat_next).real) / 2.0
        if audit_height is None:
            im_max = float(np.max(np.abs(roots.imag))) if roots.size else 0.0
            audit_height = max(1.5 * im_max, 0.45 * float(np.min(gaps.real)))
        expected = idx.size
        got = None
        h = audit_height
        for _ in range(4):
            try:
                got = winding_count(fe, re_lo, re_hi, h, n_hint=expected)
                break
            except MissedZeroError:
                h *= 1.37
        if got is None:
            raise MissedZeroError(
                "audit contour unresolvable after retries",
                expected=expected,
                rectangle=(re_lo, re_hi, h),
            )
        if got != expected:
            raise MissedZeroError(
                f"audit counted {got} zeros in [{re_lo:.4g}, {re_hi:.4g}] x "
                f"[-{h:.3g}, {h:.3g}], expected {expected}",
                expected=expected,
                counted=got,
                rectangle=(re_lo, re_hi, h),
            )

    start = 2 if kind is SpectrumKind.TRANSMISSION_A1 else 1
    if k_lo != start:
        raise InvalidInputError(
            f"zero window must start at the kind's first index {start}, got {k_lo}"
        )
    return SpectrumSeq(values=roots, kind=kind, start_index=start, a=a, omega=omega)


def gamma_limit(theta, a: float, n_max: int = 24):
    """Normalization constant from the odd-lattice limit of 1/Theta.

    Evaluates gamma_n = 2(1-a)/pi * (-1)^{n+1}/(2n-1) / Theta(eta_n) at
    eta_n = (pi (n-1/2)/(1-a))^2 and extrapolates with a least-squares
    gamma + c/n model over the top half of the sequence.
    """
    if not (a <= -1.0 or a > 1.0):
        raise InvalidInputError("gamma limit requires a <= -1 or a > 1")
    te = _as_callable(theta)
    ns = np.arange(max(2, n_max // 2), n_max + 1)
    theta_n = (np.pi / (1.0 - a)) * (ns - 0.5)
    eta_n = (theta_n**2).astype(complex)
    tv = te(eta_n)
    if np.any(tv == 0):
        raise DivergenceError("Theta vanished on the sampling lattice")
    gam = 2.0 * (1.0 - a) / np.pi * ((-1.0) ** (ns + 1)) / (2.0 * ns - 1.0) / tv
    qtr = gam[-max(2, gam.size // 4):]
    center = np.mean(qtr)
    spread = float(np.max(np.abs(qtr - center)))
    if spread > 0.10 * max(1e-300, abs(center)):
        raise DivergenceError(
            f"gamma_n not settling (spread {spread:.2e} vs |center| {abs(center):.2e})",
            history=list(gam),
        )
    # Richardson-style 1/n fit
    A = np.stack([np.ones_like(ns, dtype=float), 1.0 / ns], axis=1)
    coef, *_ = np.linalg.lstsq(A, gam, rcond=None)
    resid = gam - A @ coef
    err = float(np.max(np.abs(resid))) + abs(coef[1]) / n_max**2
    return complex(coef[0]), err
