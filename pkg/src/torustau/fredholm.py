"""Truncated-operator assembly for the one-punctured torus, the generic
cyclic n-trinion block layout, determinants, and the shift-operator
(Widom-style) alternative form of the same determinant.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor

from .exceptions import (
    InconsistentTruncationError,
    JumpMatrixError,
    SpectralRadiusWarning,
    UnsupportedTwistError,
)
from .specfun import as_modulus
from .threept import (
    CircleGrid,
    CoefficientTable,
    MonodromyData,
    default_grid,
    inv2,
    trinion_tables,
    y_in,
    y_out,
)

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class TruncatedOperator:
    """Finite section of a Fredholm operator in the twisted Fourier basis."""

    matrix: np.ndarray
    basis: tuple
    n_modes: int
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if m.shape[0] != len(self.basis):
            raise ValueError("basis length must match matrix dimension")
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("basis labels must be unique")
        if not np.all(np.isfinite(m.real) & np.isfinite(m.imag)):
            raise ValueError("matrix entries must be finite")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def basis_index(self) -> dict:
        return {label: i for i, label in enumerate(self.basis)}

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix))))


def det_I_minus_K(op: TruncatedOperator) -> complex:
    """det(I - K) by pivoted LU."""
    return log_det_I_minus_K(op)[0]


def log_det_I_minus_K(op: TruncatedOperator):
    """(det, log-det) of I - K; the log accumulates principal values
    pivot by pivot (diagnostic only, its imaginary part is branch-bound)."""
    a = np.eye(op.dim, dtype=complex) - op.matrix
    lu, piv = lu_factor(a, check_finite=False)
    diag = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(op.dim)))
    sign = -1.0 if swaps % 2 else 1.0
    det = sign * complex(np.prod(diag))
    logdet = complex(np.sum(np.log(diag.astype(complex))))
    if sign < 0:
        logdet += 1j * math.pi
    return det, logdet


@lru_cache(maxsize=64)
def _cached_tables(a, m, nu, tau, n_modes, grid: CircleGrid, flip_dnu: bool):
    md = MonodromyData(a, m, nu, 0.0)
    tabs = trinion_tables(md, n_modes, position=0.0, h_in=grid.height,
                          h_out=grid.height + complex(tau).imag,
                          grid_points=grid.n_points, offset=grid.offset,
                          flip_dnu=flip_dnu)
    return tabs["a"], tabs["b"], tabs["c"], tabs["d"]


def clear_table_cache():
    _cached_tables.cache_clear()


def _nabla_factors(mu_slot_plus, mu_out_minus, rho, tau, lam_sum,
                   anchor_in: float, anchor_out: float):
    """Diagonal factors realizing the gluing shift.

    forward (input side, slot plus-modes mu anchored at anchor_in):
        e^{2 pi i rho} e^{2 pi i tau L} e^{-2 pi i mu tau}
        e^{2 pi mu h_in} e^{-2 pi (mu - L) h_out}
    inverse (output side, table minus-modes mu anchored at anchor_out):
        e^{-2 pi i rho} e^{2 pi i mu tau} e^{2 pi mu h_out}
        e^{-2 pi (mu + L) h_in}
    """
    t = tau
    fwd = (cmath.exp(_TWO_PI_I * rho) * np.exp(_TWO_PI_I * t * lam_sum)
           * np.exp(-_TWO_PI_I * mu_slot_plus * t)
           * np.exp(2 * math.pi * mu_slot_plus * anchor_in)
           * np.exp(-2 * math.pi * (mu_slot_plus - lam_sum) * anchor_out))
    inv = (cmath.exp(-_TWO_PI_I * rho)
           * np.exp(_TWO_PI_I * mu_out_minus * t)
           * np.exp(2 * math.pi * mu_out_minus * anchor_out)
           * np.exp(-2 * math.pi * (mu_out_minus + lam_sum) * anchor_in))
    return fwd, inv


@dataclass(frozen=True)
class BlockLayout:
    """Per-trinion coefficient tables plus the gluing shift data."""

    n: int
    blocks: tuple  # n mappings {'a','b','c','d'} -> CoefficientTable
    rho: complex
    tau: complex
    lambda_sum: complex = 0.0

    def __post_init__(self):
        if self.n < 1 or len(self.blocks) != self.n:
            raise ValueError("need one block quadruple per trinion")
        object.__setattr__(self, "rho", complex(self.rho))
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "lambda_sum", complex(self.lambda_sum))


def _layout_n_modes(layout: BlockLayout) -> int:
    sizes = {tbl.n_modes for blk in layout.blocks for tbl in blk.values()}
    if len(sizes) != 1:
        raise InconsistentTruncationError(
            f"blocks carry mixed n_modes {sorted(sizes)}")
    return sizes.pop()


def assemble_K1n(layout: BlockLayout) -> TruncatedOperator:
    """Assemble the cyclic block operator of the n-punctured torus.

    Super-slots are ordered (in-, out+) per trinion; only the last out+
    slot is pulled back through the gluing shift, exactly like the
    one-trinion case.
    """
    lam = layout.lambda_sum
    lam_int = round(lam.real)
    if abs(lam - lam_int) > 1e-9:
        raise UnsupportedTwistError(
            f"sum of U(1) twists {lam} is not an integer; the shifted modes "
            "leave the truncation lattice")
    n = layout.n
    n_modes = _layout_n_modes(layout)
    width = 2 * n_modes
    dim = 2 * n * width
    K = np.zeros((dim, dim), dtype=complex)

    def flat(tbl: CoefficientTable) -> np.ndarray:
        return tbl.values.reshape(width, width)

    def sl(slot: int) -> slice:
        return slice(slot * width, (slot + 1) * width)

    blocks = layout.blocks
    a1 = blocks[0]["a"]
    cn, dn, bn = blocks[-1]["c"], blocks[-1]["d"], blocks[-1]["b"]
    # pulled-back last slot: plus modes of trinion 1 at the in-circle anchor
    mu_plus_slot = a1.mu_out.reshape(width)
    if not np.allclose(mu_plus_slot - lam_int, dn.mu_in.reshape(width)):
        raise InconsistentTruncationError(
            "trinion-n out modes do not match trinion-1 modes shifted by "
            "the twist sum")
    fwd, inv = _nabla_factors(mu_plus_slot, cn.mu_out.reshape(width),
                              layout.rho, layout.tau, lam_int,
                              a1.anchor_out, cn.anchor_out)

    for k in range(n):
        row_in, row_out = 2 * k, 2 * k + 1
        prev, nxt = (k - 1) % n, (k + 1) % n
        if k == 0:
            K[sl(0), sl(2 * n - 2)] = inv[:, None] * flat(cn)
            K[sl(0), sl(2 * n - 1)] = (inv[:, None] * flat(dn)) * fwd[None, :]
        else:
            K[sl(row_in), sl(2 * prev)] = flat(blocks[prev]["c"])
            K[sl(row_in), sl(2 * prev + 1)] = flat(blocks[prev]["d"])
        a_nxt, b_nxt = blocks[nxt]["a"], blocks[nxt]["b"]
        if k == n - 1:
            K[sl(row_out), sl(0)] = flat(a_nxt)
            K[sl(row_out), sl(1)] = flat(b_nxt) if n > 1 \
                else flat(b_nxt) * fwd[None, :]
        else:
            K[sl(row_out), sl(2 * nxt)] = flat(a_nxt)
            col = flat(b_nxt)
            if nxt == n - 1:
                col = col * fwd[None, :]
            K[sl(row_out), sl(2 * nxt + 1)] = col

    basis = []
    for k in range(n):
        for space in ("in-", "out+"):
            for color in range(2):
                for lvl in range(n_modes):
                    basis.append((k, space, color, lvl + 0.5))
    return TruncatedOperator(K, tuple(basis), n_modes,
                             {"n": n, "lambda_sum": lam_int})


def assemble_K11(md: MonodromyData, tau, n_modes: int,
                 grid: CircleGrid | None = None, check_spectral: bool = True,
                 flip_dnu: bool = False) -> TruncatedOperator:
    """Finite section of the one-punctured-torus operator.

    Basis ordering is (space, color, level) lexicographic with
    space in (minus, plus); recorded in ``basis``.
    """
    mod = as_modulus(tau)
    if grid is None:
        grid = default_grid(mod, n_modes)
    ta, tb, tc, td = _cached_tables(md.a, md.m, md.nu, mod.tau,
                                    n_modes, grid, flip_dnu)
    layout = BlockLayout(1, ({"a": ta, "b": tb, "c": tc, "d": td},),
                         md.rho, mod.tau, 0.0)
    op = assemble_K1n(layout)
    basis = tuple(("minus" if space == "in-" else "plus", color, lvl)
                  for (_, space, color, lvl) in op.basis)
    out = TruncatedOperator(op.matrix, basis, n_modes,
                            {"md": md, "tau": mod.tau, "grid": grid})
    if check_spectral and abs(mod.q) < 0.1:
        rad = out.spectral_radius()
        if rad >= 1.0:
            warnings.warn(
                f"spectral radius {rad:.3f} >= 1 at |q|={abs(mod.q):.3g}",
                SpectralRadiusWarning, stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# Widom-style shift-operator form


def jump_samples(md: MonodromyData, tau, grid: CircleGrid):
    """J(z) = Yout(z+tau)^-1 Yin(z) on the sampling circle."""
    t = as_modulus(tau).tau
    z = grid.z_nodes()
    return z, inv2(y_out(z + t, md)) @ y_in(z, md)


def _toeplitz_coeffs(samples: np.ndarray, kmax: int) -> np.ndarray:
    """Anchored Fourier coefficients hat(J)_k for |k| <= kmax, from M samples."""
    m = samples.shape[0]
    x = np.arange(m) / m
    ks = np.arange(-kmax, kmax + 1)
    duals = np.exp(-_TWO_PI_I * np.multiply.outer(ks, x)) / m
    return np.einsum("kj,jab->kab", duals, samples)


def _mult_block(coeffs: np.ndarray, kmax: int, rows: np.ndarray,
                cols: np.ndarray) -> np.ndarray:
    """Multiplication-operator matrix between integer mode windows."""
    nr, nc = rows.size, cols.size
    out = np.empty((2 * nr, 2 * nc), dtype=complex)
    diff = rows[:, None] - cols[None, :]
    for alpha in range(2):
        for beta in range(2):
            out[alpha * nr:(alpha + 1) * nr, beta * nc:(beta + 1) * nc] = \
                coeffs[diff + kmax, alpha, beta]
    return out


def assemble_widom_form(md: MonodromyData, tau, n_modes: int,
                        rho: complex | None = None, jump_tau=None,
                        grid: CircleGrid | None = None,
                        jump: np.ndarray | None = None,
                        det_tol: float = 1e-8) -> TruncatedOperator:
    """Shift-operator form of the determinant on plain integer modes.

    The two mode windows are n >= 1 (minus side) and n <= 0 (plus side);
    shift weights e^{-+2 pi i rho} e^{+-2 pi i tau n} sit on the diagonal
    and J acts through its Fourier coefficient (block Toeplitz) matrices.
    """
    mod = as_modulus(tau)
    t = mod.tau
    rho_val = complex(md.rho if rho is None else rho)
    jt = as_modulus(jump_tau) if jump_tau is not None else mod
    if grid is None:
        grid = default_grid(jt, n_modes)
    if jump is None:
        _, jmp = jump_samples(md, jt, grid)
    else:
        jmp = np.asarray(jump, dtype=complex)
    det_j = jmp[:, 0, 0] * jmp[:, 1, 1] - jmp[:, 0, 1] * jmp[:, 1, 0]
    worst = float(np.max(np.abs(det_j - 1.0)))
    if worst > det_tol:
        raise JumpMatrixError(f"max |det J - 1| = {worst:.3e} exceeds {det_tol:g}")
    jmp_inv = inv2(jmp)

    kmax = 2 * n_modes
    cj = _toeplitz_coeffs(jmp, kmax)
    cji = _toeplitz_coeffs(jmp_inv, kmax)
    minus = np.arange(1, n_modes + 1)
    plus = -np.arange(0, n_modes)
    s_minus = cmath.exp(-_TWO_PI_I * rho_val) * np.exp(_TWO_PI_I * t * minus)
    s_plus = cmath.exp(_TWO_PI_I * rho_val) * np.exp(-_TWO_PI_I * t * plus)
    sm = np.tile(s_minus, 2)
    sp = np.tile(s_plus, 2)

    width = 2 * n_modes
    kmat = np.zeros((2 * width, 2 * width), dtype=complex)
    kmat[:width, :width] = sm[:, None] * _mult_block(cji, kmax, minus, minus)
    kmat[:width, width:] = -_mult_block(cj, kmax, minus, plus)
    kmat[width:, :width] = -_mult_block(cji, kmax, plus, minus)
    kmat[width:, width:] = sp[:, None] * _mult_block(cj, kmax, plus, plus)

    basis = tuple((space, color, int(lvl))
                  for space in ("minus", "plus")
                  for color in range(2)
                  for lvl in (minus if space == "minus" else plus))
    return TruncatedOperator(kmat, basis, n_modes,
                             {"shift_minus": s_minus, "shift_plus": s_plus,
                              "rho": rho_val, "tau": t})


def widom_constant(md: MonodromyData, jump_tau, n_modes: int,
                   grid: CircleGrid | None = None,
                   jump: np.ndarray | None = None) -> complex:
    """Classical Birkhoff/Widom determinant det(I - P+ J^-1 P- J P+)."""
    jt = as_modulus(jump_tau)
    if grid is None:
        grid = default_grid(jt, n_modes)
    if jump is None:
        _, jmp = jump_samples(md, jt, grid)
    else:
        jmp = np.asarray(jump, dtype=complex)
    kmax = 2 * n_modes
    cj = _toeplitz_coeffs(jmp, kmax)
    cji = _toeplitz_coeffs(inv2(jmp), kmax)
    minus = np.arange(1, n_modes + 1)
    plus = -np.arange(0, n_modes)
    b = _mult_block(cj, kmax, minus, plus)
    c = _mult_block(cji, kmax, plus, minus)
    return complex(np.linalg.det(np.eye(2 * n_modes) - c @ b))
