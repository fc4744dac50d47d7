"""Isomonodromy layer: tau-function assembly with theta/eta prefactors,
extraction of the particle coordinate from the determinant zero locus,
and numerical verification of the equation of motion and the
Hamiltonian relation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .exceptions import (
    CoincidentPuncturesError,
    DegenerateRatioError,
    NoConvergenceError,
    PrefactorPoleError,
)
from .fredholm import assemble_K11, det_I_minus_K
from .nekrasov import GarnierConfig, tau_cm_series
from .specfun import (
    as_modulus,
    dedekind_eta,
    lattice_distance,
    theta1,
    theta_char,
    weierstrass_p,
)
from .threept import MonodromyData

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class TauAssembly:
    """Determinant (or series) value with its prefactor and constant slot."""

    det_value: complex
    prefactor: complex
    upsilon: complex = 1.0 + 0j

    @property
    def tau_value(self) -> complex:
        return self.det_value * self.prefactor * self.upsilon


@dataclass(frozen=True)
class TrajectoryPoint:
    """One point of the particle trajectory."""

    tau: complex
    q: complex
    p: complex
    hamiltonian: complex
    eom_residual: float


def determinant_at(md: MonodromyData, tau, n_modes: int,
                   rho: complex | None = None) -> complex:
    """det(I - K) with the Cauchy twist optionally overridden."""
    use = md if rho is None else replace(md, rho=complex(rho))
    op = assemble_K11(use, tau, n_modes, check_spectral=False)
    return det_I_minus_K(op)


def reduce_double_cover(q: complex, tau) -> complex:
    """Representative with 2Q in the fundamental cell of Z + 2 tau Z."""
    t = as_modulus(tau).tau
    v = 2.0 * complex(q)
    y = v.imag / (2.0 * t).imag
    v -= math.floor(y) * 2.0 * t
    v -= math.floor(v.real)
    return v / 2.0


def align_branch(q: complex, ref: complex, tau, window: int = 2) -> complex:
    """Translate (and possibly negate) q by lattice vectors to sit nearest ref."""
    t = as_modulus(tau).tau
    best = None
    for sign in (1.0, -1.0):
        for n1 in range(-window, window + 1):
            for n2 in range(-window, window + 1):
                cand = sign * q + n1 + n2 * t
                if best is None or abs(cand - ref) < abs(best - ref):
                    best = cand
    return best


def theta_ratio_rhs(md: MonodromyData, tau, n_modes: int) -> complex:
    """-i e^{-i pi tau / 2} det(rho = 1/4 + tau/2) / det(rho = 1/4).

    Equals theta_3(2Q|2tau)/theta_2(2Q|2tau) for the determinant
    normalization of this package (the twist rho multiplies the gluing
    shift as e^{2 pi i rho} g(z - tau)); fixed against the exact theta
    product identity and the free m = 0 trajectory.
    """
    t = as_modulus(tau).tau
    num = determinant_at(md, tau, n_modes, rho=0.25 + t / 2.0)
    den = determinant_at(md, tau, n_modes, rho=0.25)
    if abs(den) < 1e-13 or abs(num) < 1e-13:
        raise DegenerateRatioError(
            f"determinant ratio degenerate: |num|={abs(num):.3e}, "
            f"|den|={abs(den):.3e}")
    return -1j * cmath.exp(-0.5j * math.pi * t) * num / den


def solve_Q_theta_ratio(md: MonodromyData, tau, n_modes: int = 32,
                        newton_tol: float = 1e-13, max_iter: int = 80) -> complex:
    """Particle coordinate from theta_3(2Q|2tau)/theta_2(2Q|2tau) = det ratio."""
    t = as_modulus(tau).tau
    r = theta_ratio_rhs(md, tau, n_modes)
    # leading inversion: theta3 ~ 1, theta2 ~ 2 e^{i pi tau/2} cos(2 pi Q)
    seed = cmath.acos(cmath.exp(-1j * math.pi * t / 2.0) / (2.0 * r)) / (2.0 * math.pi)
    q = seed
    tau2 = 2.0 * t
    for _ in range(max_iter):
        f = theta_char(3, 2 * q, tau2) - r * theta_char(2, 2 * q, tau2)
        df = 2.0 * (theta_char(3, 2 * q, tau2, deriv=1)
                    - r * theta_char(2, 2 * q, tau2, deriv=1))
        step = f / df
        q = q - step
        if abs(step) < newton_tol:
            return reduce_double_cover(q, t)
    raise NoConvergenceError(
        f"Newton iteration for Q did not converge from seed {seed}")


_FIT_RHOS = (0.10, 0.23, 0.36, 0.49, 0.62 + 0.04j, 0.75 - 0.03j)
_FIT_HOLDOUT = (0.17 + 0.021j, 0.41 - 0.017j, 0.68 + 0.033j, 0.93)


def solve_Q_rho_fit(md: MonodromyData, tau, n_modes: int = 32,
                    rho_samples=None, holdout=None,
                    residual_tol: float = 1e-6):
    """Fit det(rho) e^{-2 pi i rho} = C theta_1(Q-rho) theta_1(Q+rho).

    Returns (Q, C, held-out relative residual).
    """
    mod = as_modulus(tau)
    t = mod.tau
    rhos = [complex(r) for r in (rho_samples if rho_samples is not None
                                 else _FIT_RHOS)]
    if len(rhos) < 4:
        raise ValueError("need at least 4 rho samples")
    if len(set(rhos)) != len(rhos):
        raise ValueError("rho samples must be distinct")
    hold = [complex(r) for r in (holdout if holdout is not None
                                 else _FIT_HOLDOUT)]
    y = np.array([determinant_at(md, mod, n_modes, rho=r)
                  * cmath.exp(-_TWO_PI_I * r) for r in rhos])
    y_hold = np.array([determinant_at(md, mod, n_modes, rho=r)
                       * cmath.exp(-_TWO_PI_I * r) for r in hold])
    scale = float(np.max(np.abs(y)))

    def model(qq, rho_list):
        return np.array([theta1(qq - r, mod) * theta1(qq + r, mod)
                         for r in rho_list])

    def profile_c(qq, rho_list, targets):
        mm = model(qq, rho_list)
        denom = float(np.sum(np.abs(mm) ** 2))
        if denom == 0.0:
            return 0.0 + 0j, mm
        return complex(np.sum(targets * np.conj(mm)) / denom), mm

    def residual_vec(x):
        qq = complex(x[0], x[1])
        c, mm = profile_c(qq, rhos, y)
        res = (y - c * mm) / scale
        return np.concatenate([res.real, res.imag])

    best = None
    for i in range(6):
        for j in range(6):
            qq = (i + 0.5) / 6.0 + (j + 0.5) / 6.0 * t
            r = float(np.linalg.norm(residual_vec([qq.real, qq.imag])))
            if best is None or r < best[1]:
                best = (qq, r)
    sol = least_squares(residual_vec, [best[0].real, best[0].imag],
                        xtol=3e-16, ftol=3e-16, gtol=3e-16)
    q = complex(sol.x[0], sol.x[1])
    c, _ = profile_c(q, rhos, y)
    m_hold = model(q, hold)
    rel = float(np.max(np.abs(y_hold - c * m_hold)) / max(scale, 1e-300))
    if rel > residual_tol:
        raise NoConvergenceError(
            f"rho-fit held-out residual {rel:.3e} above {residual_tol:g}")
    return reduce_double_cover(q, t), c, rel


def _eta_sq_over_thetas(md: MonodromyData, tau, q: complex) -> complex:
    mod = as_modulus(tau)
    t1m = theta1(q - md.rho, mod)
    t1p = theta1(q + md.rho, mod)
    scale = abs(theta1(0.0, mod, 1))
    if min(abs(t1m), abs(t1p)) < 1e-12 * scale:
        raise PrefactorPoleError(
            f"theta_1(Q -+ rho) vanishes at Q={q}, rho={md.rho}")
    return dedekind_eta(mod) ** 2 / (t1m * t1p)


def cm_det_prefactor(md: MonodromyData, tau, q: complex) -> complex:
    """Prefactor relating det(I - K) to the CM tau function."""
    t = as_modulus(tau).tau
    return (cmath.exp(-_TWO_PI_I * md.rho) * _eta_sq_over_thetas(md, tau, q)
            * cmath.exp(_TWO_PI_I * t * (md.a ** 2 + 1.0 / 6.0)))


def assemble_tau_cm(md: MonodromyData, tau, q: complex, det_value: complex,
                    upsilon: complex = 1.0) -> TauAssembly:
    """CM tau function from a determinant value and the coordinate Q."""
    return TauAssembly(complex(det_value), cm_det_prefactor(md, tau, q),
                       complex(upsilon))


def cm_series_prefactor(md: MonodromyData, tau, q: complex) -> complex:
    """Prefactor multiplying the bare charged-partition sum."""
    mod = as_modulus(tau)
    t = mod.tau
    rho_t = md.rho - md.m * (t + 1.0) / 2.0
    t1m = theta1(q - rho_t, mod)
    t1p = theta1(q + rho_t, mod)
    scale = abs(theta1(0.0, mod, 1))
    if min(abs(t1m), abs(t1p)) < 1e-12 * scale:
        raise PrefactorPoleError("theta_1(Q -+ rho~) vanishes")
    eta12 = dedekind_eta(mod) * cmath.exp(-1j * math.pi * t / 12.0)
    power = cmath.exp((2.0 - 2.0 * md.m ** 2) * cmath.log(eta12))
    return (power * cmath.exp(-_TWO_PI_I * (rho_t - t / 4.0)) / (t1m * t1p))


def tau_cm_from_det(md: MonodromyData, tau, n_modes: int = 32,
                    q: complex | None = None,
                    upsilon: complex = 1.0) -> TauAssembly:
    if q is None:
        q = solve_Q_theta_ratio(md, tau, n_modes)
    det = determinant_at(md, tau, n_modes)
    return assemble_tau_cm(md, tau, q, det, upsilon)


def upsilon_ratio(md: MonodromyData, tau, n_modes: int = 32,
                  max_charge: int = 2, max_boxes: int = 8,
                  q: complex | None = None, flip_armleg: bool = False,
                  flip_dnu: bool = False) -> complex:
    """Constant relating the determinant route to the series route.

    Theorem content: this ratio is independent of tau (and of rho).
    """
    mod = as_modulus(tau)
    if q is None:
        q = solve_Q_theta_ratio(md, mod, n_modes)
    use = md
    op = assemble_K11(use, mod, n_modes, check_spectral=False,
                      flip_dnu=flip_dnu)
    det = det_I_minus_K(op)
    det_route = det * cm_det_prefactor(md, mod, q)
    series = tau_cm_series(md, mod, max_charge, max_boxes,
                           flip_armleg=flip_armleg)
    series_route = cm_series_prefactor(md, mod, q) * series
    return det_route / series_route


def _solve_q_aligned(md: MonodromyData, taus, n_modes: int):
    """Q along a small tau stencil on one continuous branch."""
    qs = []
    ref = None
    for t in taus:
        q = solve_Q_theta_ratio(md, t, n_modes)
        if ref is not None:
            q = align_branch(q, ref, t)
        qs.append(q)
        ref = q
    return qs


def _stencil_second(vals, h):
    return (-vals[4] + 16 * vals[3] - 30 * vals[2] + 16 * vals[1] - vals[0]) \
        / (12.0 * h * h)


def verify_eom(md: MonodromyData, tau_center, n_modes: int = 32,
               h: float = 1e-3) -> complex:
    """Residual of (2 pi i)^2 Q'' = m^2 P'(2Q), Richardson over h and h/2."""
    t0 = as_modulus(tau_center).tau
    offsets = [-2 * h, -h, -h / 2, 0.0, h / 2, h, 2 * h]
    qs = _solve_q_aligned(md, [t0 + o for o in offsets], n_modes)
    q_at = dict(zip(offsets, qs))
    rhs = md.m ** 2 * weierstrass_p(2 * q_at[0.0], t0, deriv=1)

    def resid(step):
        seq = [q_at[k] for k in (-2 * step, -step, 0.0, step, 2 * step)]
        return (_TWO_PI_I ** 2) * _stencil_second(seq, step) - rhs

    r_h = resid(h)
    r_h2 = resid(h / 2)
    return (16.0 * r_h2 - r_h) / 15.0


def eta_log_deriv_term(tau) -> complex:
    """4 pi i d/dtau log eta = (1/3) theta_1'''(0)/theta_1'(0)."""
    mod = as_modulus(tau)
    return theta1(0.0, mod, 3) / theta1(0.0, mod, 1) / 3.0


def hamiltonian_value(md: MonodromyData, tau, q: complex, p: complex) -> complex:
    """P^2 - m^2 P(2Q) + 4 pi i m^2 d/dtau log eta."""
    return (p * p - md.m ** 2 * weierstrass_p(2 * q, tau)
            + md.m ** 2 * eta_log_deriv_term(tau))


def verify_hamiltonian(md: MonodromyData, tau_center, n_modes: int = 32,
                       h: float = 1e-3) -> complex:
    """Residual of 2 pi i d/dtau log T_CM = H, Richardson over h and h/2."""
    t0 = as_modulus(tau_center).tau
    offsets = [-h, -h / 2, 0.0, h / 2, h]
    qs = _solve_q_aligned(md, [t0 + o for o in offsets], n_modes)
    q_at = dict(zip(offsets, qs))

    def tau_fn(off):
        t = t0 + off
        return tau_cm_from_det(md, t, n_modes, q=q_at[off]).tau_value

    def log_deriv(step):
        return cmath.log(tau_fn(step) / tau_fn(-step)) / (2.0 * step)

    d_log = (4.0 * log_deriv(h / 2) - log_deriv(h)) / 3.0

    def q_deriv(step):
        return (q_at[step] - q_at[-step]) / (2.0 * step)

    dq = (4.0 * q_deriv(h / 2) - q_deriv(h)) / 3.0
    p = _TWO_PI_I * dq
    return _TWO_PI_I * d_log - hamiltonian_value(md, t0, q_at[0.0], p)


def trajectory_point(md: MonodromyData, tau, n_modes: int = 32,
                     h: float = 1e-3) -> TrajectoryPoint:
    """Q, P, H and the EOM residual at one modulus value."""
    t0 = as_modulus(tau).tau
    offsets = [-2 * h, -h, -h / 2, 0.0, h / 2, h, 2 * h]
    qs = _solve_q_aligned(md, [t0 + o for o in offsets], n_modes)
    q_at = dict(zip(offsets, qs))
    dq = (4.0 * (q_at[h / 2] - q_at[-h / 2]) / h - (q_at[h] - q_at[-h]) / (2 * h)) / 3.0
    p = _TWO_PI_I * dq
    ham = hamiltonian_value(md, t0, q_at[0.0], p)
    rhs = md.m ** 2 * weierstrass_p(2 * q_at[0.0], t0, deriv=1)

    def resid(step):
        seq = [q_at[k] for k in (-2 * step, -step, 0.0, step, 2 * step)]
        return (_TWO_PI_I ** 2) * _stencil_second(seq, step) - rhs

    eom = abs((16.0 * resid(h / 2) - resid(h)) / 15.0)
    return TrajectoryPoint(t0, q_at[0.0], p, ham, eom)


def rank1_prefactors(kind: str, cfg, tau) -> complex:
    """Scalar gauge factor between the rank-1 and the isomonodromic tau.

    cm:      (eta e^{i pi tau/6})^{-2 m^2}
    garnier: prod_k (eta e^{i pi tau/6})^{-2 m_k^2}
             prod_{l != k} (theta_1(z_k - z_l)/(eta e^{-i pi tau/3}))^{-m_k m_l}
    """
    mod = as_modulus(tau)
    t = mod.tau
    eta = dedekind_eta(mod)
    base = eta * cmath.exp(1j * math.pi * t / 6.0)
    if kind == "cm":
        m = cfg.m if isinstance(cfg, MonodromyData) else complex(cfg)
        return cmath.exp(-2.0 * m ** 2 * cmath.log(base))
    if kind != "garnier":
        raise ValueError("kind must be 'cm' or 'garnier'")
    if not isinstance(cfg, GarnierConfig):
        raise TypeError("garnier prefactors need a GarnierConfig")
    out = 1.0 + 0j
    for k in range(cfg.n):
        out *= cmath.exp(-2.0 * cfg.m[k] ** 2 * cmath.log(base))
        for l in range(cfg.n):
            if l == k:
                continue
            dz = cfg.z[k] - cfg.z[l]
            if lattice_distance(dz, mod) < 1e-9:
                raise CoincidentPuncturesError(f"punctures {k},{l} coincide")
            ratio = theta1(dz, mod) / (eta * cmath.exp(-1j * math.pi * t / 3.0))
            out *= cmath.exp(-cfg.m[k] * cfg.m[l] * cmath.log(ratio))
    return out


def garnier_series_prefactor(cfg: GarnierConfig, tau, q: complex) -> complex:
    """Prefactor multiplying the bare Garnier charged-partition sum."""
    mod = as_modulus(tau)
    t = mod.tau
    rho_t = cfg.rho_tilde(mod)
    t1m = theta1(q - rho_t, mod)
    t1p = theta1(q + rho_t, mod)
    scale = abs(theta1(0.0, mod, 1))
    if min(abs(t1m), abs(t1p)) < 1e-12 * scale:
        raise PrefactorPoleError("theta_1(Q -+ rho~) vanishes")
    eta = dedekind_eta(mod)
    eta12 = eta * cmath.exp(-1j * math.pi * t / 12.0)
    out = cmath.exp(-_TWO_PI_I * (rho_t - t / 4.0)) / (t1m * t1p)
    for k in range(cfg.n):
        out *= cmath.exp((2.0 - 2.0 * cfg.m[k] ** 2) * cmath.log(eta12))
        out *= cmath.exp(-_TWO_PI_I * cfg.z[k] * cfg.m[k] ** 2)
        for l in range(cfg.n):
            if l == k:
                continue
            dz = cfg.z[k] - cfg.z[l]
            if lattice_distance(dz, mod) < 1e-9:
                raise CoincidentPuncturesError(f"punctures {k},{l} coincide")
            ratio = (theta1(dz, mod) * cmath.exp(-1j * math.pi * dz)
                     / (eta * cmath.exp(-1j * math.pi * t / 6.0)))
            out *= cmath.exp(-cfg.m[k] * cfg.m[l] * cmath.log(ratio))
    return out


def assemble_tau_garnier(cfg: GarnierConfig, tau, q: complex,
                         series_value: complex,
                         upsilon: complex = 1.0) -> TauAssembly:
    """Garnier tau function from the bare series and the coordinate Q."""
    return TauAssembly(complex(series_value),
                       garnier_series_prefactor(cfg, tau, q),
                       complex(upsilon))
