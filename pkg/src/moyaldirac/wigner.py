"""Wigner functions on uniform grids.

The transform uses the prefactor ``1/(2 pi)`` with the kernel
``psi*(q - hbar s/2) exp(-i p s) psi(q + hbar s/2)``.  The ``s`` nodes are
chosen as ``s_k = 2 k dq / hbar`` so that both shifted arguments land on the
``q`` grid; the integrand vanishes at the ends of the ``s`` range, so the
plain sum is the trapezoid rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np
from scipy.special import eval_hermite, eval_laguerre

__all__ = [
    "BoundaryDecayError",
    "WignerGrid",
    "HermiteState",
    "NormalizationReport",
    "QuantisationReport",
    "wavefunction_grid",
    "wigner_transform",
    "check_boundary_decay",
    "check_normalization",
    "marginal_error",
    "quantisation_rule_check",
    "d_dq_fourth_order",
    "write_csv",
]

BOUNDARY_TOL = 1e-10


class BoundaryDecayError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    hbar: float
    psi: np.ndarray | None = None
    rho: np.ndarray | None = None  # shape (len(q), len(p))
    imag_residue: float = 0.0

    def __post_init__(self) -> None:
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        for name in ("q", "p"):
            axis = getattr(self, name)
            if axis.ndim != 1 or len(axis) < 2:
                raise ValueError(f"{name} axis must be 1-d with at least two points")
            steps = np.diff(axis)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ValueError(f"{name} axis must be uniformly spaced")
        for arr in (self.q, self.p, self.psi, self.rho):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def dq(self) -> float:
        return float(self.q[1] - self.q[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    @property
    def nq(self) -> int:
        return len(self.q)

    @property
    def np_(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class HermiteState:
    """Harmonic-oscillator eigenstate (unit mass and frequency)."""

    level: int
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    def wavefunction(self, q: np.ndarray) -> np.ndarray:
        x = np.asarray(q, dtype=float) / math.sqrt(self.hbar)
        norm = 1.0 / math.sqrt(2.0**self.level * math.factorial(self.level))
        norm *= (math.pi * self.hbar) ** -0.25
        return (norm * eval_hermite(self.level, x) * np.exp(-0.5 * x * x)).astype(complex)

    def wigner(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Closed form ``(-1)^n / (pi hbar) L_n(2r^2/hbar) exp(-r^2/hbar)`` on the q x p mesh."""
        Q, P = np.meshgrid(np.asarray(q, float), np.asarray(p, float), indexing="ij")
        r2 = (Q * Q + P * P) / self.hbar
        return (-1) ** self.level / (math.pi * self.hbar) * eval_laguerre(self.level, 2 * r2) * np.exp(-r2)

    def extent(self, decay: float = 1e-13) -> float:
        """Half-width beyond which the wavefunction is below ``decay``."""
        x = math.sqrt(2 * math.log(1 / decay)) + math.sqrt(2 * self.level + 1)
        return x * math.sqrt(self.hbar)


def wavefunction_grid(
    state: HermiteState,
    nq: int = 257,
    np_: int = 257,
    extent: float | None = None,
    p_extent: float | None = None,
) -> WignerGrid:
    """Sample ``state`` on a symmetric grid; odd sizes put the origin on the grid."""
    L = extent if extent is not None else state.extent()
    Lp = p_extent if p_extent is not None else L
    q = np.linspace(-L, L, nq)
    p = np.linspace(-Lp, Lp, np_)
    return WignerGrid(q=q, p=p, hbar=state.hbar, psi=state.wavefunction(q))


def check_boundary_decay(grid: WignerGrid, tol: float = BOUNDARY_TOL) -> None:
    if grid.psi is None:
        raise ValueError("grid carries no wavefunction")
    edge = max(abs(grid.psi[0]), abs(grid.psi[-1]))
    if edge >= tol:
        raise BoundaryDecayError(f"|psi| = {edge:.3e} at the boundary exceeds {tol:.0e}; widen the q domain")


def _pair_products(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``out[i, k+K] = conj(left[i-k]) * right[i+k]`` with zeros off the grid."""
    n = len(left)
    K = n - 1
    i = np.arange(n)[:, None]
    k = np.arange(-K, K + 1)[None, :]
    lo, hi = i - k, i + k
    ok = (lo >= 0) & (lo < n) & (hi >= 0) & (hi < n)
    lo_c, hi_c = np.clip(lo, 0, n - 1), np.clip(hi, 0, n - 1)
    return np.where(ok, np.conj(left[lo_c]) * right[hi_c], 0.0)


def _s_transform(grid: WignerGrid, products: np.ndarray) -> np.ndarray:
    """``int products(s) exp(-i p s) ds`` on the ``s_k = 2 k dq / hbar`` nodes."""
    K = grid.nq - 1
    ds = 2 * grid.dq / grid.hbar
    s = np.arange(-K, K + 1) * ds
    phase = np.exp(-1j * np.outer(s, grid.p))
    return (products @ phase) * ds


def wigner_transform(grid: WignerGrid) -> WignerGrid:
    if grid.psi is None:
        raise ValueError("grid carries no wavefunction")
    check_boundary_decay(grid)
    raw = _s_transform(grid, _pair_products(grid.psi, grid.psi)) / (2 * math.pi)
    residue = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
    return replace(grid, rho=np.ascontiguousarray(raw.real), imag_residue=residue)


def spectral_derivative(psi: np.ndarray, dq: float) -> np.ndarray:
    n = len(psi)
    k = 2 * math.pi * np.fft.fftfreq(n, d=dq)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(psi))


def d_dq_fourth_order(f: np.ndarray, h: float) -> np.ndarray:
    """4th-order central differences along axis 0 with one-sided closures."""
    f = np.asarray(f)
    if f.shape[0] < 5:
        raise ValueError("need at least five points")
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return out


@dataclass
class NormalizationReport:
    integral: float
    integral_sq: float
    expected_sq: float

    @property
    def integral_error(self) -> float:
        return abs(self.integral - 1.0)

    @property
    def integral_sq_error(self) -> float:
        return abs(self.integral_sq - self.expected_sq)


def _integrate(values: np.ndarray, grid: WignerGrid) -> float:
    return float(np.trapezoid(np.trapezoid(values, grid.p, axis=1), grid.q))


def check_normalization(grid: WignerGrid) -> NormalizationReport:
    """Phase-space integrals of ``rho`` and ``rho^2`` (expect 1 and ``1/(2 pi hbar)``)."""
    if grid.rho is None:
        raise ValueError("grid carries no Wigner function")
    return NormalizationReport(
        integral=_integrate(grid.rho, grid),
        integral_sq=_integrate(grid.rho**2, grid),
        expected_sq=1.0 / (2 * math.pi * grid.hbar),
    )


def marginal_error(grid: WignerGrid) -> float:
    """``max_q | int rho dp - |psi|^2 |``."""
    if grid.rho is None or grid.psi is None:
        raise ValueError("need both psi and rho")
    marginal = np.trapezoid(grid.rho, grid.p, axis=1)
    return float(np.max(np.abs(marginal - np.abs(grid.psi) ** 2)))


@dataclass
class QuantisationReport:
    """Multiplication by ``p`` (A) against ``-i hbar d/dq`` (B) on a Wigner function.

    ``I_minus`` / ``I_plus`` are the integrals of
    ``[-+ dpsi*/dq psi + psi* dpsi/dq] exp(-i s p)``; integration by parts
    gives ``A = -i hbar/(4 pi) I_minus`` and ``B = -i hbar/(2 pi) I_plus``.
    Residuals are max-norms over interior q rows.
    """

    residual_lhs: float
    residual_rhs: float
    norm_A: float
    norm_B: float
    norm_A_minus_B: float
    p0_slice_A: float | None
    p0_slice_B: float | None
    boundary_rows: int = 2
    extras: dict = field(default_factory=dict)

    @property
    def relative_mismatch(self) -> float:
        return self.norm_A_minus_B / self.norm_A if self.norm_A else math.inf


def quantisation_rule_check(grid: WignerGrid, boundary_rows: int = 2) -> QuantisationReport:
    if grid.psi is None:
        raise ValueError("grid carries no wavefunction")
    if grid.rho is None:
        grid = wigner_transform(grid)
    check_boundary_decay(grid)
    hbar = grid.hbar
    psi = grid.psi
    dpsi = spectral_derivative(psi, grid.dq)
    # conj(left[i-k]) * right[i+k]
    i_minus = _s_transform(grid, -_pair_products(dpsi, psi) + _pair_products(psi, dpsi))
    i_plus = _s_transform(grid, _pair_products(dpsi, psi) + _pair_products(psi, dpsi))
    c_minus = -1j * hbar / (4 * math.pi)
    c_plus = -1j * hbar / (2 * math.pi)

    rho = grid.rho
    A = grid.p[None, :] * rho
    B = -1j * hbar * d_dq_fourth_order(rho, grid.dq)
    inner = slice(boundary_rows, grid.nq - boundary_rows)
    cell = grid.dq * grid.dp

    def l2(x: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(x[inner]) ** 2) * cell))

    p0 = np.flatnonzero(np.isclose(grid.p, 0.0, atol=1e-12 * max(1.0, abs(grid.p).max())))
    slice_A = slice_B = None
    if p0.size:
        j = int(p0[0])
        slice_A = float(np.max(np.abs(A[inner, j])))
        slice_B = float(np.max(np.abs(B[inner, j])))
    return QuantisationReport(
        residual_lhs=float(np.max(np.abs(A - c_minus * i_minus)[inner])),
        residual_rhs=float(np.max(np.abs(B - c_plus * i_plus)[inner])),
        norm_A=l2(A),
        norm_B=l2(B),
        norm_A_minus_B=l2(A - B),
        p0_slice_A=slice_A,
        p0_slice_B=slice_B,
        boundary_rows=boundary_rows,
    )


def write_csv(grid: WignerGrid, fh: IO[str]) -> None:
    """Rows ``q,p,rho`` in q-major order."""
    if grid.rho is None:
        raise ValueError("grid carries no Wigner function")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["q", "p", "rho"])
    for i, q in enumerate(grid.q):
        for j, p in enumerate(grid.p):
            w.writerow([f"{q:.12g}", f"{p:.12g}", f"{grid.rho[i, j]:.12g}"])
