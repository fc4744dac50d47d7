"""Complex special functions on the torus: theta series, Dedekind eta,
Weierstrass P, Gauss hypergeometric series, Gamma helpers, and the two
A-cycle integral identities used by the rank-1 reductions.

All functions accept scalars or numpy arrays in the spatial argument and
are pure (no mutable global state), so they are safe to call from any
number of workers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _scipy_gamma

from .exceptions import (
    ConvergenceDomainError,
    LatticePointError,
    NoConvergenceError,
    ParameterPoleError,
    TruncationToleranceError,
)

_TWO_PI_I = 2j * math.pi
_MAX_THETA_TERMS = 512
_SAFETY = 10.0


@dataclass(frozen=True)
class TorusModulus:
    """Modular parameter tau of the torus, Im tau > 0."""

    tau: complex

    def __post_init__(self):
        if not math.isfinite(self.tau.real) or not math.isfinite(self.tau.imag):
            raise ValueError("tau must be finite")
        if self.tau.imag <= 0:
            raise ValueError(f"tau={self.tau} not in the upper half-plane")

    @property
    def q(self) -> complex:
        """Nome exp(2*pi*i*tau), |q| < 1."""
        return cmath.exp(_TWO_PI_I * self.tau)

    @property
    def q_half(self) -> complex:
        """Theta-series nome exp(i*pi*tau)."""
        return cmath.exp(1j * math.pi * self.tau)


def as_modulus(tau) -> TorusModulus:
    if isinstance(tau, TorusModulus):
        return tau
    return TorusModulus(complex(tau))


@dataclass(frozen=True)
class ThetaTruncation:
    """Explicit theta-series cutoff with its target absolute error."""

    n_max: int
    tol: float

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _theta_term_bound(n: int, abs_qh: float, im_z: float, deriv: int) -> float:
    # magnitude of the n-th theta_1 term at height |Im z|, including the
    # ((2n+1)*pi)^deriv factor from term-wise differentiation
    half = n + 0.5
    return 2.0 * abs_qh ** (half * half) * math.exp(2.0 * math.pi * half * im_z) \
        * (2.0 * half * math.pi) ** deriv


def _pick_n_max(tau: TorusModulus, im_z: float, deriv: int, tol: float,
                trunc: ThetaTruncation | None) -> int:
    abs_qh = abs(tau.q_half)
    if trunc is not None:
        bound = _theta_term_bound(trunc.n_max + 1, abs_qh, im_z, deriv)
        if bound * _SAFETY >= trunc.tol:
            raise TruncationToleranceError(
                f"theta tail bound {bound:.3e} (x{_SAFETY:g} safety) exceeds "
                f"tol={trunc.tol:g} at n_max={trunc.n_max}")
        return trunc.n_max
    for n in range(1, _MAX_THETA_TERMS):
        if _theta_term_bound(n + 1, abs_qh, im_z, deriv) * _SAFETY < tol:
            return n
    raise TruncationToleranceError(
        f"tol={tol:g} unreachable within {_MAX_THETA_TERMS} theta terms "
        f"(|q_half|={abs_qh:.6f}, |Im z|={im_z:.3f})")


def theta1(z, tau, deriv: int = 0, tol: float = 1e-14,
           trunc: ThetaTruncation | None = None):
    """deriv-th z-derivative of theta_1(z|tau), by term-wise differentiation.

    theta_1(z|tau) = 2 sum_{n>=0} (-1)^n e^{i pi tau (n+1/2)^2} sin((2n+1) pi z)
    """
    if deriv not in (0, 1, 2, 3):
        raise ValueError("deriv must be one of 0,1,2,3")
    tau = as_modulus(tau)
    z_arr = np.asarray(z, dtype=complex)
    im_max = float(np.max(np.abs(z_arr.imag))) if z_arr.size else 0.0
    n_max = _pick_n_max(tau, im_max, deriv, tol, trunc)

    n = np.arange(n_max + 1)
    half = n + 0.5
    qh = tau.q_half
    weights = 2.0 * (-1.0) ** n * qh ** (half * half) * (2 * half * np.pi) ** deriv
    phase = np.multiply.outer(z_arr, 2 * half * np.pi)
    osc = [np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u)][deriv % 4](phase)
    out = osc @ weights
    return out if z_arr.shape else complex(out)


def theta_char(kind: int, z, tau, deriv: int = 0, tol: float = 1e-14):
    """Jacobi theta_2 or theta_3 (kind in {2,3}), optionally d/dz."""
    if kind not in (2, 3):
        raise ValueError("kind must be 2 or 3")
    if deriv not in (0, 1):
        raise ValueError("deriv must be 0 or 1")
    tau = as_modulus(tau)
    z_arr = np.asarray(z, dtype=complex)
    im_max = float(np.max(np.abs(z_arr.imag))) if z_arr.size else 0.0
    n_max = _pick_n_max(tau, im_max, deriv, tol, None)
    n = np.arange(n_max + 1)
    qh = tau.q_half
    freq = (n + 0.5) if kind == 2 else n[1:].astype(float)
    weights = 2.0 * qh ** (freq * freq) * (2 * freq * np.pi) ** deriv
    phase = np.multiply.outer(z_arr, 2 * freq * np.pi)
    osc = np.cos(phase) if deriv == 0 else -np.sin(phase)
    out = osc @ weights
    if kind == 3 and deriv == 0:
        out = out + 1.0
    return out if z_arr.shape else complex(out)


def _eta_product_estimate(tau: TorusModulus, terms: int = 12) -> complex:
    q = tau.q
    prod = 1.0 + 0j
    for n in range(1, terms + 1):
        prod *= 1.0 - q ** n
    return cmath.exp(1j * math.pi * tau.tau / 12.0) * prod


def dedekind_eta(tau, tol: float = 1e-14) -> complex:
    """eta(tau) = (theta_1'(0|tau)/(2 pi))^(1/3).

    The cube root is the branch that is real positive on the imaginary
    axis; it is selected by matching the leading q-product estimate.
    """
    tau = as_modulus(tau)
    t1p = theta1(0.0, tau, deriv=1, tol=tol)
    root = (t1p / (2.0 * math.pi)) ** (1.0 / 3.0)
    guide = _eta_product_estimate(tau)
    omega = cmath.exp(_TWO_PI_I / 3.0)
    candidates = [root, root * omega, root * omega ** 2]
    return min(candidates, key=lambda c: abs(c - guide))


def lattice_distance(z: complex, tau) -> float:
    """Distance from z to the nearest point of Z + tau Z."""
    tau = as_modulus(tau).tau
    y = z.imag / tau.imag
    n2 = round(y)
    z1 = z - n2 * tau
    n1 = round(z1.real)
    return abs(z1 - n1)


def weierstrass_p(z, tau, deriv: int = 0, tol: float = 1e-14,
                  guard_radius: float = 1e-6):
    """Weierstrass P function (deriv=0) or its z-derivative (deriv=1).

    P(z|tau) = -d^2/dz^2 log theta_1(z|tau) + (1/3) theta_1'''(0)/theta_1'(0),
    normalized so the Laurent expansion at 0 is 1/z^2 + O(z^2).
    """
    if deriv not in (0, 1):
        raise ValueError("deriv must be 0 or 1")
    tau = as_modulus(tau)
    z_arr = np.asarray(z, dtype=complex)
    for point in np.atleast_1d(z_arr).ravel():
        if lattice_distance(complex(point), tau) < guard_radius:
            raise LatticePointError(
                f"z={point} within guard radius {guard_radius:g} of the lattice")
    t0 = theta1(z_arr, tau, 0, tol)
    t1 = theta1(z_arr, tau, 1, tol)
    t2 = theta1(z_arr, tau, 2, tol)
    e3 = theta1(0.0, tau, 3, tol) / theta1(0.0, tau, 1, tol)
    logd1 = t1 / t0
    if deriv == 0:
        out = logd1 ** 2 - t2 / t0 + e3 / 3.0
    else:
        t3 = theta1(z_arr, tau, 3, tol)
        out = -t3 / t0 + 3.0 * t2 * t1 / t0 ** 2 - 2.0 * logd1 ** 3
    return out if z_arr.shape else complex(out)


def _is_nonpositive_integer(c: complex, eps: float = 1e-12) -> bool:
    return abs(c.imag) < eps and c.real < 0.5 and abs(c.real - round(c.real)) < eps


def hyp2f1(a: complex, b: complex, c: complex, x, tol: float = 1e-15,
           margin: float = 1e-3, max_terms: int = 200_000):
    """Gauss series 2F1(a,b;c;x), direct summation on |x| < 1 - margin."""
    if _is_nonpositive_integer(complex(c)):
        raise ParameterPoleError(f"2F1 parameter c={c} is a non-positive integer")
    x_arr = np.asarray(x, dtype=complex)
    if x_arr.size and float(np.max(np.abs(x_arr))) >= 1.0 - margin:
        raise ConvergenceDomainError(
            f"|x| up to {float(np.max(np.abs(x_arr))):.6f} outside the "
            f"series domain |x| < 1 - {margin:g}")
    total = np.ones_like(x_arr)
    term = np.ones_like(x_arr)
    stagnant = 0
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * x_arr
        total = total + term
        if not np.all(np.isfinite(term.real) & np.isfinite(term.imag)):
            raise NoConvergenceError("2F1 series produced non-finite terms")
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-8)):
            stagnant += 1
            if stagnant >= 2:
                return total if x_arr.shape else complex(total)
        else:
            stagnant = 0
    raise NoConvergenceError(f"2F1 series did not converge in {max_terms} terms")


def gamma_fn(z: complex) -> complex:
    """Complex Gamma function."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise ParameterPoleError(f"Gamma pole at z={z}")
    value = complex(_scipy_gamma(z))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ParameterPoleError(f"Gamma overflow/pole at z={z}")
    return value


def gamma_ratio_shift(x: complex, n: int) -> complex:
    """Barnes-G ratio G(1+x+n)/G(1+x) for integer n, as a Gamma product."""
    x = complex(x)
    if n == 0:
        return 1.0 + 0j
    out = 1.0 + 0j
    if n > 0:
        for k in range(n):
            out *= gamma_fn(1.0 + x + k)
    else:
        for k in range(1, -n + 1):
            out /= gamma_fn(1.0 + x - k)
    return out


def _trapezoid_periodic(f, height: float, tol: float, max_doublings: int = 14):
    """integral over one period [0,1] at Im z = height, by trapezoid doubling."""
    m = 64
    prev = None
    for _ in range(max_doublings + 1):
        x = np.arange(m) / m + 1j * height
        val = complex(np.mean(f(x)))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        m *= 2
    raise NoConvergenceError(f"adaptive trapezoid stalled at {m} points")


@dataclass(frozen=True)
class AcycleIdentityReport:
    """Residuals of the two A-cycle integral identities."""

    single_integral: complex
    single_expected: complex
    single_residual: float
    pair_integrals: dict
    pair_expected: dict
    pair_residuals: dict

    @property
    def max_residual(self) -> float:
        worst = self.single_residual
        if self.pair_residuals:
            worst = max(worst, max(self.pair_residuals.values()))
        return worst


def _dtau_log_fd(f, tau: complex, h: float = 1e-4) -> complex:
    """d/dtau log f by central differences with one Richardson step."""
    def d(step):
        return (f(tau + step) - f(tau - step)) / (2.0 * step) / f(tau)
    return (4.0 * d(h / 2.0) - d(h)) / 3.0


def acycle_integral_identities(tau, z_points=(), height: float | None = None,
                               tol: float = 1e-10) -> AcycleIdentityReport:
    """Check the A-cycle integrals of (theta_1'/theta_1) products.

    single: int_0^1 (theta_1'/theta_1)^2(z) dz
            = (1/3) theta_1'''/theta_1' + (2 pi i)^2/6
    pairs:  I_kl = int_0^1 (t1'/t1)(z-z_k)(t1'/t1)(z-z_l) dz
            = 2 pi i d/dtau log( theta_1(z_k-z_l) / (eta e^{-i pi tau/3}) )
    with the contour passing below every z_p within one lattice period.
    """
    mod = as_modulus(tau)
    t = mod.tau
    z_points = [complex(p) for p in z_points]

    def logd(z):
        return theta1(z, mod, 1) / theta1(z, mod, 0)

    c0 = height if height is not None else -0.05 * t.imag
    if abs(c0) >= t.imag or c0 == 0.0:
        raise ValueError("single-integral contour height must be in "
                         "(-Im tau, Im tau) and nonzero")
    single = _trapezoid_periodic(lambda zz: logd(zz) ** 2, c0, tol)
    e3 = theta1(0.0, mod, 3) / theta1(0.0, mod, 1)
    single_expected = e3 / 3.0 + (2j * math.pi) ** 2 / 6.0
    single_res = abs(single - single_expected)

    pair_int, pair_exp, pair_res = {}, {}, {}
    if len(z_points) >= 2:
        for i, zk in enumerate(z_points):
            for j, zl in enumerate(z_points):
                if i == j:
                    continue
                if lattice_distance(zk - zl, mod) < 1e-9:
                    raise ValueError("z_points must be distinct mod lattice")
                c = min(zk.imag, zl.imag) - 0.1 * t.imag
                if not (zk.imag - c < t.imag and zl.imag - c < t.imag):
                    raise ValueError("z_points spread over more than one period")
                val = _trapezoid_periodic(
                    lambda zz: logd(zz - zk) * logd(zz - zl), c, tol)

                def ratio(tt, d=zk - zl):
                    mm = as_modulus(tt)
                    return theta1(d, mm) / dedekind_eta(mm) \
                        * cmath.exp(1j * math.pi * tt / 3.0)

                exp_val = 2j * math.pi * _dtau_log_fd(ratio, t)
                pair_int[(i, j)] = val
                pair_exp[(i, j)] = exp_val
                pair_res[(i, j)] = abs(val - exp_val)

    return AcycleIdentityReport(single, single_expected, single_res,
                                pair_int, pair_exp, pair_res)
