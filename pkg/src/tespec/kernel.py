"""Transformation-operator kernel: integral-equation solve, derivatives,
Cauchy data and the trace assembly used by the characteristic functions.

The kernel K(x,t) lives on the triangle 0 <= |t| <= x <= 1 with the odd
continuation K(x,-t) = -K(x,t).  The integral equation couples values along
characteristic lines whose endpoints sit on half-steps of the user grid, so
the solver works internally on a half-step lattice restricted to nodes
(m, l) with m = l (mod 2) (units of delta = h/2).  On that sub-lattice every
integration limit is a lattice point and both the odd symmetry and the
diagonal condition K(x,x) = (1/2) * int_0^x q hold exactly in the discrete
system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.integrate import cumulative_simpson

from .core import GridSpec, Potential, SampledFn
from .errors import (
    GridMismatchError,
    InvalidStateError,
    IterationLimitError,
)

__all__ = [
    "TriangularKernel",
    "CauchyData",
    "solve_kernel",
    "kernel_derivatives",
    "cauchy_data_from_kernel",
    "goursat_residual",
    "cauchy_to_w",
]


@dataclass
class TriangularKernel:
    """Solved kernel on the grid triangle, plus derivative fields.

    ``values`` has shape (n+1, 2n+1); entry [i, n+j] holds K(x_i, t_j) for
    |j| <= i, extended oddly in j and by zero outside the triangle.  ``kx``
    and ``kt`` (same layout) are populated by :func:`kernel_derivatives`.
    """

    grid: GridSpec
    values: np.ndarray
    kx: np.ndarray | None = None
    kt: np.ndarray | None = None
    iterations: int = 0
    residual: float = np.nan
    residual_history: list = field(default_factory=list)
    # half-step internals kept for derivative/Cauchy extraction
    _kp: np.ndarray | None = None
    _qd: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.grid.n

    def value(self, i: int, j: int) -> complex:
        """K at node (x_i, t_j), j counted signed from -i..i."""
        return self.values[i, self.n + j]

    @property
    def converged(self) -> bool:
        return np.isfinite(self.residual)

    def diagonal(self) -> np.ndarray:
        idx = np.arange(self.n + 1)
        return self.values[idx, self.n + idx]

    def dump_rows(self):
        """Yield (x, t, re, im) over the stored triangle, for CSV dumps."""
        h = self.grid.h
        for i in range(self.n + 1):
            for j in range(-i, i + 1):
                v = self.values[i, self.n + j]
                yield (i * h, j * h, v.real, v.imag)


@dataclass
class CauchyData:
    """Boundary traces w0 = K_t(1,.), w1 = K_x(1,.) on [0,1].

    w0 extends evenly and w1 oddly to [-1,0); w1(0) = 0 is required for the
    assembled trace on [0,2] to be continuous at t = 1.
    """

    w0: SampledFn
    w1: SampledFn

    def __post_init__(self):
        if self.w0.grid.n != self.w1.grid.n:
            raise GridMismatchError("w0 and w1 must share a grid")
        scale = max(
            1e-30,
            float(np.max(np.abs(self.w0.values))),
            float(np.max(np.abs(self.w1.values))),
        )
        if abs(self.w1.values[0]) > 1e-8 * max(1.0, scale):
            raise GridMismatchError(
                f"w1(0) = {self.w1.values[0]:.3e} must vanish"
            )

    @property
    def grid(self) -> GridSpec:
        return self.w0.grid

    def eta(self) -> complex:
        """(w0(1) + w1(1)) / 2, the quarter endpoint value of q."""
        return (complex(self.w0.values[-1]) + complex(self.w1.values[-1])) / 2.0


def _half_samples(q: Potential, n: int) -> np.ndarray:
    """q at the half-step lattice p*delta, p = 0..2n (linear off-node)."""
    if q.n % n != 0 and n % q.n != 0:
        raise GridMismatchError(
            f"potential grid n={q.n} incommensurable with kernel grid n={n}"
        )
    xs = np.arange(2 * n + 1) * (0.5 / n)
    return q(xs)


@njit(cache=True)
def _class_cumtrapz(kp, delta):
    """Antiderivative table C[p, r] = int_{xi0(p)}^{r*delta} K(tau_p, .) d xi.

    Integration runs along each row's parity class (spacing 2*delta) with
    the trapezoid rule; entries at off-class slots stay zero and are never
    read.
    """
    M = kp.shape[0] - 1
    C = np.zeros_like(kp)
    for p in range(M + 1):
        start = p % 2
        acc = 0.0 + 0.0j
        C[p, start] = acc
        for r in range(start + 2, p + 1, 2):
            acc += delta * (kp[p, r - 2] + kp[p, r])
            C[p, r] = acc
    return C


@njit(parallel=True, cache=True)
def _sweep_rows(kp, k0, qd, delta, C):
    """One application of the discretized integral-equation map."""
    M = kp.shape[0] - 1
    out = np.zeros_like(kp)
    for m in prange(1, M + 1):
        for l in range(m % 2, m + 1, 2):
            umin = (m - l) // 2
            uplus = (m + l) // 2
            t2 = 0.0 + 0.0j
            if umin < m:
                for p in range(umin, m + 1):
                    w = delta
                    if p == umin or p == m:
                        w = 0.5 * delta
                    look = l - m + p
                    if look < 0:
                        look = -look
                    t2 += w * qd[p] * (C[p, p] - C[p, look])
            t3 = 0.0 + 0.0j
            if uplus < m:
                for p in range(uplus, m + 1):
                    w = delta
                    if p == uplus or p == m:
                        w = 0.5 * delta
                    t3 += w * qd[p] * (C[p, p] - C[p, l + m - p])
            out[m, l] = k0[m, l] + 0.5 * t2 - 0.5 * t3
    return out


def _sweep(kp, k0, qd, delta):
    return _sweep_rows(kp, k0, qd, delta, _class_cumtrapz(kp, delta))


def solve_kernel(
    q: Potential,
    grid: GridSpec,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> TriangularKernel:
    """Solve the kernel integral equation by successive approximations.

    Iteration zero is the single-integral term (1/2) int q along the
    characteristic strip, exact whenever the double-integral term vanishes.
    Convergence is declared when the sup-norm change between iterates drops
    below ``tol``; the Volterra structure makes the map a strong contraction.
    """
    if not (grid.a == 0.0 and grid.b == 1.0):
        raise GridMismatchError("kernel grid must live on [0,1]")
    n = grid.n
    M = 2 * n
    delta = 0.5 / n
    qd = _half_samples(q, n)
    Q = np.concatenate([[0.0 + 0.0j], np.cumsum(delta * (qd[:-1] + qd[1:]) / 2.0)])

    k0 = np.zeros((M + 1, M + 1), dtype=complex)
    for m in range(M + 1):
        ls = np.arange(m % 2, m + 1, 2)
        k0[m, ls] = 0.5 * (Q[(m + ls) // 2] - Q[(m - ls) // 2])

    kp = k0.copy()
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = _sweep(kp, k0, qd, delta)
        change = float(np.max(np.abs(nxt - kp)))
        history.append(change)
        kp = nxt
        if change <= tol:
            converged = True
            break
    if not converged:
        raise IterationLimitError(
            f"kernel iteration did not reach tol={tol:g} in {max_iter} iterations "
            f"(last change {history[-1]:.3e})",
            residual=history[-1],
            history=history,
        )

    # project the parity lattice onto the user h-lattice with odd continuation
    vals = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    for i in range(n + 1):
        js = np.arange(0, i + 1)
        vals[i, n + js] = kp[2 * i, 2 * js]
        vals[i, n - js] = -kp[2 * i, 2 * js]
    return TriangularKernel(
        grid=grid,
        values=vals,
        iterations=it,
        residual=history[-1],
        residual_history=history,
        _kp=kp,
        _qd=qd,
    )


@njit(parallel=True, cache=True)
def _derivative_rows(kp, qd, delta, n):
    kx = np.zeros((n + 1, 2 * n + 1), dtype=np.complex128)
    kt = np.zeros((n + 1, 2 * n + 1), dtype=np.complex128)
    for i in prange(n + 1):
        m = 2 * i
        for l in range(0, m + 1, 2):
            umin = (m - l) // 2
            uplus = (m + l) // 2
            t1 = 0.0 + 0.0j
            if umin < m:
                for p in range(umin, m + 1):
                    w = delta
                    if p == umin or p == m:
                        w = 0.5 * delta
                    col = l - m + p
                    v = -kp[p, -col] if col < 0 else kp[p, col]
                    t1 += w * qd[p] * v
            t2 = 0.0 + 0.0j
            if uplus < m:
                for p in range(uplus, m + 1):
                    w = delta
                    if p == uplus or p == m:
                        w = 0.5 * delta
                    t2 += w * qd[p] * kp[p, l + m - p]
            base_minus = 0.25 * (qd[uplus] - qd[umin])
            base_plus = 0.25 * (qd[uplus] + qd[umin])
            j = l // 2
            kx[i, n + j] = base_minus + 0.5 * t1 + 0.5 * t2
            kt[i, n + j] = base_plus - 0.5 * t1 + 0.5 * t2
            # K_x is odd in t, K_t even in t
            kx[i, n - j] = -kx[i, n + j]
            kt[i, n - j] = kt[i, n + j]
    return kx, kt


def kernel_derivatives(K: TriangularKernel, q: Potential) -> TriangularKernel:
    """Populate K_x and K_t from the differentiated integral equation.

    Uses the explicit quarter-sum of shifted potential values plus
    characteristic-line integrals of q*K; no finite differences enter, so the
    Cauchy data inherits only the quadrature error of the solve.
    """
    if K._kp is None or not K.converged:
        raise InvalidStateError("kernel must be solved before differentiating")
    n = K.n
    qd = K._qd if K._qd is not None else _half_samples(q, n)
    K.kx, K.kt = _derivative_rows(K._kp, qd, 0.5 / n, n)
    return K


def cauchy_data_from_kernel(K: TriangularKernel) -> CauchyData:
    """Extract {w0, w1} = {K_t(1,.), K_x(1,.)} on [0,1]."""
    if K.kx is None or K.kt is None:
        raise InvalidStateError("derivatives not populated; run kernel_derivatives")
    n = K.n
    grid = GridSpec(n, 0.0, 1.0)
    w0 = SampledFn(grid, K.kt[n, n:])
    w1 = SampledFn(grid, K.kx[n, n:])
    return CauchyData(w0=w0, w1=w1)


def goursat_residual(K: TriangularKernel, q: Potential) -> float:
    """sup over the diagonal of |K(x,x) - (1/2) int_0^x q|.

    The reference antiderivative is computed with composite Simpson on the
    potential's own samples, so the check is independent of the trapezoid
    rule used inside the solve.  cumulative_simpson mishandles complex
    input, hence the split.
    """
    n = K.n
    qs = q.samples if q.n == n else q(K.grid.nodes)
    ref = cumulative_simpson(qs.real, dx=1.0 / n, initial=0.0) + 1j * (
        cumulative_simpson(qs.imag, dx=1.0 / n, initial=0.0)
    )
    diag = K.diagonal()
    return float(np.max(np.abs(diag - 0.5 * ref)))


def cauchy_to_w(cd: CauchyData, a: float) -> SampledFn:
    """Assemble the trace w on [a-1, a+1] from the Cauchy data.

    Left half uses (w0 - w1)(a - t), right half (w0 + w1)(t - a); for a = 1
    this is the [0,2] trace whose right endpoint value is eta = q(1)/4.
    """
    n = cd.grid.n
    grid = GridSpec(2 * n, a - 1.0, a + 1.0)
    w0 = cd.w0.values
    w1 = cd.w1.values
    left = 0.5 * (w0[::-1] - w1[::-1])          # t in [a-1, a], arg = a - t
    right = 0.5 * (w0[1:] + w1[1:])             # t in (a, a+1], arg = t - a
    return SampledFn(grid, np.concatenate([left, right]))
