"""Hypergeometric three-point solutions on the cylinder and the four
operator blocks of the pants-decomposition projector for the
one-punctured torus, in the twisted half-integer Fourier basis.

Mode conventions
----------------
All Fourier tables are stored in the circle-anchored basis: the mode
with exponent mu on a circle at height h is phi_mu(z) = e^{2 pi i mu (z - i h)}.
Anchored coefficients decay geometrically in both indices, which is what
justifies the finite truncation; the plain-exponent coefficients are the
anchored ones times e^{2 pi h mu} factors and decay only algebraically.

For the two blocks with a removable z = w singularity (a and d) the
tables are extracted from the twisted part of the kernel alone, on two
circles split by a small height gap.  The identity part acts diagonally
on the modes and has no matrix element between the input and output
windows of those blocks, so the tables are exactly the operator matrix
elements; pointwise, the table sum reproduces the kernel minus its
zero-puncture (m = 0) part.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import (
    ConvergenceDomainError,
    DiagonalSingularityError,
)
from .specfun import as_modulus, gamma_fn, hyp2f1

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class MonodromyData:
    """A-cycle exponent a, puncture exponent m, B-cycle nu, Cauchy twist rho."""

    a: complex
    m: complex = 0.0
    nu: complex = 0.0
    rho: complex = 0.0

    def __post_init__(self):
        for name in ("a", "m", "nu", "rho"):
            object.__setattr__(self, name, complex(getattr(self, name)))
            v = getattr(self, name)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite")
        two_a = 2.0 * self.a
        if abs(two_a.imag) < 1e-9 and abs(two_a.real - round(two_a.real)) < 1e-9:
            raise ValueError(f"2a={two_a} may not be an integer")

    @property
    def sigma(self) -> tuple:
        """Color twists (a, -a) shared by both boundary circles."""
        return (self.a, -self.a)


@dataclass(frozen=True)
class CircleGrid:
    """Uniform sampling of the two boundary circles.

    z-nodes j/M + i*height; w-nodes (j + offset)/M + i*height, so the two
    grids never coincide pointwise.
    """

    n_points: int
    offset: float = 0.5
    height: float = -0.25

    def __post_init__(self):
        if self.n_points < 4:
            raise ValueError("n_points must be at least 4")
        if not 0.0 < self.offset < 1.0:
            raise ValueError("offset must lie in (0, 1)")
        if self.height >= 0.0:
            raise ValueError("height must be negative")

    def z_nodes(self, height: float | None = None) -> np.ndarray:
        h = self.height if height is None else height
        return np.arange(self.n_points) / self.n_points + 1j * h

    def w_nodes(self, height: float | None = None) -> np.ndarray:
        h = self.height if height is None else height
        return (np.arange(self.n_points) + self.offset) / self.n_points + 1j * h


def default_grid(tau, n_modes: int) -> CircleGrid:
    """M = 8 n_modes points on circles at Im z = -Im tau / 4."""
    t = as_modulus(tau).tau
    return CircleGrid(8 * n_modes, 0.5, -t.imag / 4.0)


def _check_domain(x, margin, what):
    amax = float(np.max(np.abs(x)))
    if amax >= 1.0 - margin:
        raise ConvergenceDomainError(
            f"{what}: series variable reaches |x|={amax:.6f}, "
            f"outside |x| < 1 - {margin:g}")


def _f_matrix(x, md: MonodromyData, tol: float):
    """2F1 matrix of the inward solution; entries as arrays over x."""
    a, m = md.a, md.m
    f11 = hyp2f1(m, m - 2 * a, -2 * a, x, tol=tol)
    f12 = -(m / (2 * a)) * hyp2f1(1 + m, m - 2 * a, 1 - 2 * a, x, tol=tol)
    f21 = (m / (2 * a + 1)) * x * hyp2f1(1 + m, 1 + m + 2 * a, 2 + 2 * a, x, tol=tol)
    f22 = hyp2f1(m, 1 + m + 2 * a, 1 + 2 * a, x, tol=tol)
    return f11, f12, f21, f22


def y_in(z, md: MonodromyData, tol: float = 1e-15, margin: float = 1e-3):
    """Inward three-point solution; series in e^{-2 pi i z}, needs Im z < 0."""
    z_arr = np.asarray(z, dtype=complex)
    x = np.exp(-_TWO_PI_I * z_arr)
    _check_domain(x, margin, "y_in")
    pref = np.exp(md.m * np.log(1.0 - x))
    f11, f12, f21, f22 = _f_matrix(x, md, tol)
    tw1 = pref * np.exp(_TWO_PI_I * md.a * z_arr)
    tw2 = pref * np.exp(-_TWO_PI_I * md.a * z_arr)
    out = np.empty(z_arr.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = tw1 * f11
    out[..., 0, 1] = tw1 * f12
    out[..., 1, 0] = tw2 * f21
    out[..., 1, 1] = tw2 * f22
    return out


def y_in_dz(z, md: MonodromyData, tol: float = 1e-15, margin: float = 1e-3):
    """Exact z-derivative of y_in, via 2F1' = (ab/c) 2F1(a+1,b+1;c+1;.)."""
    a, m = md.a, md.m
    z_arr = np.asarray(z, dtype=complex)
    x = np.exp(-_TWO_PI_I * z_arr)
    _check_domain(x, margin, "y_in_dz")
    dx = -_TWO_PI_I * x

    def f(p, q, c):
        return hyp2f1(p, q, c, x, tol=tol)

    def df(p, q, c):
        return (p * q / c) * hyp2f1(p + 1, q + 1, c + 1, x, tol=tol)

    pref = np.exp(m * np.log(1.0 - x))
    dpref = -m * np.exp((m - 1.0) * np.log(1.0 - x)) * dx
    e_p = np.exp(_TWO_PI_I * a * z_arr)
    e_m = np.exp(-_TWO_PI_I * a * z_arr)

    f11 = f(m, m - 2 * a, -2 * a)
    f12 = -(m / (2 * a)) * f(1 + m, m - 2 * a, 1 - 2 * a)
    f21 = (m / (2 * a + 1)) * x * f(1 + m, 1 + m + 2 * a, 2 + 2 * a)
    f22 = f(m, 1 + m + 2 * a, 1 + 2 * a)
    d11 = df(m, m - 2 * a, -2 * a) * dx
    d12 = -(m / (2 * a)) * df(1 + m, m - 2 * a, 1 - 2 * a) * dx
    d21 = (m / (2 * a + 1)) * (dx * f(1 + m, 1 + m + 2 * a, 2 + 2 * a)
                               + x * df(1 + m, 1 + m + 2 * a, 2 + 2 * a) * dx)
    d22 = df(m, 1 + m + 2 * a, 1 + 2 * a) * dx

    out = np.empty(z_arr.shape + (2, 2), dtype=complex)
    tw = _TWO_PI_I * a
    out[..., 0, 0] = e_p * (dpref * f11 + pref * d11 + tw * pref * f11)
    out[..., 0, 1] = e_p * (dpref * f12 + pref * d12 + tw * pref * f12)
    out[..., 1, 0] = e_m * (dpref * f21 + pref * d21 - tw * pref * f21)
    out[..., 1, 1] = e_m * (dpref * f22 + pref * d22 - tw * pref * f22)
    return out


def dnu_phase(md: MonodromyData, flip: bool = False) -> complex:
    """e^{2 pi i dnu} = Gamma(-2a) Gamma(1+2a-m) / (Gamma(1+2a) Gamma(-2a-m))."""
    a, m = md.a, md.m
    w = (gamma_fn(-2 * a) * gamma_fn(1 + 2 * a - m)
         / (gamma_fn(1 + 2 * a) * gamma_fn(-2 * a - m)))
    return 1.0 / w if flip else w


def _swap_both(mat):
    """sigma_1 M sigma_1: swap both matrix indices."""
    out = np.empty_like(mat)
    out[..., 0, 0] = mat[..., 1, 1]
    out[..., 0, 1] = mat[..., 1, 0]
    out[..., 1, 0] = mat[..., 0, 1]
    out[..., 1, 1] = mat[..., 0, 0]
    return out


def _apply_b_twist(mat, md: MonodromyData, flip_dnu: bool):
    e = cmath.exp(_TWO_PI_I * md.nu) * dnu_phase(md, flip_dnu)
    out = mat.copy()
    out[..., 0, :] *= e
    out[..., 1, :] /= e
    return out


def y_out(z, md: MonodromyData, tol: float = 1e-15, margin: float = 1e-3,
          flip_dnu: bool = False):
    """Outward solution e^{2 pi i (nu+dnu) sigma_3} sigma_1 y_in(-z) sigma_1."""
    z_arr = np.asarray(z, dtype=complex)
    return _apply_b_twist(_swap_both(y_in(-z_arr, md, tol, margin)), md, flip_dnu)


def y_out_dz(z, md: MonodromyData, tol: float = 1e-15, margin: float = 1e-3,
             flip_dnu: bool = False):
    z_arr = np.asarray(z, dtype=complex)
    return _apply_b_twist(_swap_both(-y_in_dz(-z_arr, md, tol, margin)),
                          md, flip_dnu)


def inv2(mat):
    """Closed-form adjugate inverse of a stack of 2x2 matrices."""
    det = (mat[..., 0, 0] * mat[..., 1, 1] - mat[..., 0, 1] * mat[..., 1, 0])
    out = np.empty_like(mat)
    out[..., 0, 0] = mat[..., 1, 1] / det
    out[..., 0, 1] = -mat[..., 0, 1] / det
    out[..., 1, 0] = -mat[..., 1, 0] / det
    out[..., 1, 1] = mat[..., 0, 0] / det
    return out


def _cauchy(u):
    return 1.0 / (1.0 - np.exp(-_TWO_PI_I * u))


_BLOCKS = ("a", "b", "c", "d")


def kernel_block(block: str, z, w, md: MonodromyData, tau, limit: bool = False,
                 tol: float = 1e-13, flip_dnu: bool = False):
    """One entry of the assembled one-circle kernel.

    a: (I - Yin(z) Yin(w)^-1) / (1 - e^{-2 pi i (z-w)})           [singular pair]
    d: (Yout(z+tau) Yout(w+tau)^-1 - I) / (1 - e^{-2 pi i (z-w)}) [singular pair]
    c: -e^{-2 pi i rho} Yout(z+tau) Yin(w)^-1 / (1 - e^{-2 pi i (z-w+tau)})
    b: +e^{+2 pi i rho} Yin(z) Yout(w+tau)^-1 / (1 - e^{-2 pi i (z-w-tau)})

    With ``limit`` the removable z = w value of blocks a and d is
    returned: -+ (1/2 pi i) d/dz (Y Y^-1) at w = z.
    """
    if block not in _BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    t = as_modulus(tau).tau
    z_arr = np.asarray(z, dtype=complex)
    w_arr = np.asarray(w, dtype=complex)

    if block in ("a", "d"):
        if limit:
            if block == "a":
                y0 = y_in(z_arr, md, tol)
                dy = y_in_dz(z_arr, md, tol)
                sign = -1.0
            else:
                y0 = y_out(z_arr + t, md, tol, flip_dnu=flip_dnu)
                dy = y_out_dz(z_arr + t, md, tol, flip_dnu=flip_dnu)
                sign = +1.0
            return sign / _TWO_PI_I * (dy @ inv2(y0))
        gap = np.exp(-_TWO_PI_I * (z_arr - w_arr))
        if np.any(np.abs(1.0 - gap) < 1e-8):
            raise DiagonalSingularityError(
                f"block {block} at z=w needs limit mode")
        eye = np.eye(2)
        if block == "a":
            prod = y_in(z_arr, md, tol) @ inv2(y_in(w_arr, md, tol))
            num = eye - prod
        else:
            prod = (y_out(z_arr + t, md, tol, flip_dnu=flip_dnu)
                    @ inv2(y_out(w_arr + t, md, tol, flip_dnu=flip_dnu)))
            num = prod - eye
        return num * _cauchy(z_arr - w_arr)[..., None, None]

    if block == "c":
        num = (y_out(z_arr + t, md, tol, flip_dnu=flip_dnu)
               @ inv2(y_in(w_arr, md, tol)))
        return (-cmath.exp(-_TWO_PI_I * md.rho)
                * num * _cauchy(z_arr - w_arr + t)[..., None, None])
    num = y_in(z_arr, md, tol) @ inv2(y_out(w_arr + t, md, tol, flip_dnu=flip_dnu))
    return (cmath.exp(_TWO_PI_I * md.rho)
            * num * _cauchy(z_arr - w_arr - t)[..., None, None])


@dataclass(frozen=True)
class CoefficientTable:
    """Anchored twisted-Fourier matrix of one projector block.

    values[alpha, r_idx, beta, s_idx] is the matrix element between the
    anchored output mode exp(2 pi i mu_out[alpha, r_idx] (z - i anchor_out))
    and the anchored input mode with exponent mu_in[beta, s_idx].
    """

    block: str
    values: np.ndarray
    mu_out: np.ndarray
    mu_in: np.ndarray
    anchor_out: float
    anchor_in: float
    n_modes: int

    def reconstruct(self, z, w):
        """Kernel value at (z, w) from the table (twisted part for a, d)."""
        ez = np.exp(_TWO_PI_I * np.asarray(self.mu_out)
                    * (complex(z) - 1j * self.anchor_out))
        ew = np.exp(-_TWO_PI_I * np.asarray(self.mu_in)
                    * (complex(w) - 1j * self.anchor_in))
        return np.einsum("ri,risj,sj->rs", ez, self.values, ew)


def _half_levels(n_modes: int) -> np.ndarray:
    return np.arange(n_modes) + 0.5


def _mode_exponents(kind: str, sigma, n_modes: int) -> np.ndarray:
    """Exponent array mu[color, level] for a mode window.

    minus: mu = r + 1/2 + sigma_color (frequencies >= 1)
    plus : mu = 1/2 - r + sigma_color (frequencies <= 0)
    """
    r = _half_levels(n_modes)
    sig = np.asarray(sigma)
    if kind == "minus":
        return sig[:, None] + (r + 0.5)[None, :]
    if kind == "plus":
        return sig[:, None] + (0.5 - r)[None, :]
    raise ValueError(kind)


def _gap_height(grid: CircleGrid, tau_im: float, n_modes: int) -> float:
    gap = 0.55 / n_modes
    return min(gap, abs(grid.height) / 2.0, (tau_im - abs(grid.height)) / 2.0)


def _dual_matrix(mu, nodes, anchor, sign):
    """rows (color, level) against sample nodes: e^{sign 2 pi i mu (node - i anchor)} / M."""
    m = nodes.size
    phases = np.exp(sign * _TWO_PI_I * mu[..., None] * (nodes - 1j * anchor))
    return phases / m


def trinion_tables(md: MonodromyData, n_modes: int, *, position: complex = 0.0,
                   h_in: float, h_out: float, grid_points: int | None = None,
                   offset: float = 0.5, tol: float = 1e-13,
                   flip_dnu: bool = False) -> dict:
    """All four block tables for one trinion with puncture at ``position``
    and boundary circles at heights h_in < Im(position) < h_out.

    Equal in/out A-cycle exponents only (the solvable case); tables come
    from double trapezoid quadrature of the kernels against the anchored
    twisted exponentials, with the two singular blocks taken from the
    twisted part of their kernels on height-split circles.
    """
    m_pts = grid_points if grid_points is not None else 8 * n_modes
    if n_modes > m_pts // 4:
        raise ValueError(
            f"n_modes={n_modes} exceeds anti-aliasing headroom M/4 with "
            f"M={m_pts}")
    pos = complex(position)
    if not h_in < pos.imag < h_out:
        raise ValueError("need h_in < Im(position) < h_out")
    sigma = md.sigma
    span = h_out - h_in
    gap = min(0.55 / n_modes, (pos.imag - h_in) / 2.0, (h_out - pos.imag) / 2.0)
    base = np.arange(m_pts) / m_pts
    woff = offset / m_pts

    def nodes(height, shift=0.0):
        return base + shift + 1j * height

    def yin(zz):
        return y_in(zz - pos, md, tol)

    def yout(zz):
        return y_out(zz - pos, md, tol, flip_dnu=flip_dnu)

    out = {}
    specs = {
        "a": (nodes(h_in - gap), nodes(h_in, woff),
              lambda z, w: -(yin(z)[:, None] @ inv2(yin(w))[None, :]),
              "plus", "minus", (h_in, h_in)),
        "d": (nodes(h_out + gap), nodes(h_out, woff),
              lambda z, w: yout(z)[:, None] @ inv2(yout(w))[None, :],
              "minus", "plus", (h_out, h_out)),
        "b": (nodes(h_in), nodes(h_out, woff),
              lambda z, w: yin(z)[:, None] @ inv2(yout(w))[None, :],
              "plus", "plus", (h_in, h_out)),
        "c": (nodes(h_out), nodes(h_in, woff),
              lambda z, w: -(yout(z)[:, None] @ inv2(yin(w))[None, :]),
              "minus", "minus", (h_out, h_in)),
    }
    for block, (z, w, kfun, kind_out, kind_in, anchors) in specs.items():
        kern = kfun(z, w) * _cauchy(z[:, None] - w[None, :])[..., None, None]
        mu_out = _mode_exponents(kind_out, sigma, n_modes)
        mu_in = _mode_exponents(kind_in, sigma, n_modes)
        ez = _dual_matrix(mu_out, z, anchors[0], -1.0)
        ew = _dual_matrix(mu_in, w, anchors[1], +1.0)
        table = np.empty((2, n_modes, 2, n_modes), dtype=complex)
        for alpha in range(2):
            for beta in range(2):
                table[alpha, :, beta, :] = \
                    ez[alpha] @ kern[:, :, alpha, beta] @ ew[beta].T
        out[block] = CoefficientTable(block, table, mu_out, mu_in,
                                      anchors[0], anchors[1], n_modes)
    return out


def fourier_coefficients(block: str, md: MonodromyData, tau, grid: CircleGrid,
                         n_modes: int, tol: float = 1e-13,
                         flip_dnu: bool = False) -> CoefficientTable:
    """Anchored twisted-Fourier table of one projector block by double
    trapezoid quadrature on the (offset) circle grids.

    One-punctured-torus convention: the trinion sits at the origin with
    its in circle at the grid height and its out circle one tau-period up.
    """
    if block not in _BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    t = as_modulus(tau).tau
    tabs = trinion_tables(md, n_modes, position=0.0, h_in=grid.height,
                          h_out=grid.height + t.imag,
                          grid_points=grid.n_points, offset=grid.offset,
                          tol=tol, flip_dnu=flip_dnu)
    return tabs[block]
