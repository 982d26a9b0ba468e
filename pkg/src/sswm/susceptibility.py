"""Complex spectral functions: chi5, chi1..chi3, wavenumber mismatch, and the
longitudinal detuning function, plus grid sampling and peak location.

All detuning arguments (delta2, delta3) are in gamma31 units and may be
scalars or broadcastable numpy arrays.  The dressed-state rates are stored
unstarred exactly as defined; conjugation is applied at the evaluation site,
so each symbol has a single definition.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularPointError, ValidationError
from .params import C_LIGHT, SystemParams, effective_splittings, eit_dispersion

#: |D| below this (internal units) counts as sitting on a pole.
POLE_FLOOR = 1e-30

#: |dk*L| below this switches the detuning function to its series form.
PHI_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class ComplexRates:
    """Damped detuning denominators at one (delta2, delta3) point.

    Sign convention: for positive dephasing rates every member has a strictly
    negative real part (damping).
    """

    gamma41_c: complex
    gamma51_c: complex
    gamma54_c: complex
    upsilon21: complex
    upsilon31: complex
    upsilon42: complex
    upsilon52: complex
    upsilon53: complex
    tee_41: complex
    tee_51: complex
    tee_54: complex
    arr_21: complex
    arr_31: complex


def complex_rates(delta2, delta3, p: SystemParams) -> ComplexRates:
    """Evaluate every dressed rate at a single scalar (delta2, delta3)."""
    g41 = 1j * p.delta_p - p.gamma41
    g51 = 1j * (p.delta_p + p.delta_c1) - p.gamma51
    g54 = 1j * p.delta_c1 - p.gamma54
    three = 1j * (p.delta_p + delta2 + delta3)
    return ComplexRates(
        gamma41_c=g41,
        gamma51_c=g51,
        gamma54_c=g54,
        upsilon21=-1j * delta3 - p.gamma21,
        upsilon31=-1j * delta3 - p.gamma31,
        upsilon42=-1j * delta2 - p.gamma42,
        upsilon52=1j * (p.delta_c1 - delta2) - p.gamma52,
        upsilon53=1j * (p.delta_c1 - delta2) - p.gamma53,
        tee_41=g41 - three,
        tee_51=g51 - three,
        tee_54=g54 - three,
        arr_21=(-1j * delta3 - p.gamma21) + three,
        arr_31=(-1j * delta3 - p.gamma31) + three,
    )


def _tee(gamma_c, delta2, delta3, p: SystemParams):
    return gamma_c - 1j * (p.delta_p + delta2 + delta3)


def d_function(delta2, delta3, p: SystemParams):
    """Resonance denominator D = (T41* T51* + |oc1|^2)(U21* U31* + |oc2|^2)."""
    g41 = 1j * p.delta_p - p.gamma41
    g51 = 1j * (p.delta_p + p.delta_c1) - p.gamma51
    t41s = np.conj(_tee(g41, delta2, delta3, p))
    t51s = np.conj(_tee(g51, delta2, delta3, p))
    u21s = np.conj(-1j * delta3 - p.gamma21)
    u31s = np.conj(-1j * delta3 - p.gamma31)
    return (t41s * t51s + abs(p.omega_c1) ** 2) * (u21s * u31s + abs(p.omega_c2) ** 2)


def _check_pole(den, what: str) -> None:
    amin = np.min(np.abs(den))
    if amin < POLE_FLOOR:
        raise SingularPointError(f"{what} evaluated within {POLE_FLOOR} of a pole")


def chi5(delta2, delta3, p: SystemParams):
    """Fifth-order susceptibility (overall prefactor folded into dipole_scale).

    chi5 = -i * T51* / ((G41* G51* + |oc1|^2) * D(delta2, delta3)).
    Finite everywhere off the exact poles of D; pole proximity raises.
    """
    g41 = 1j * p.delta_p - p.gamma41
    g51 = 1j * (p.delta_p + p.delta_c1) - p.gamma51
    t51s = np.conj(_tee(g51, delta2, delta3, p))
    pre = np.conj(g41) * np.conj(g51) + abs(p.omega_c1) ** 2
    den = pre * d_function(delta2, delta3, p)
    _check_pole(den, "chi5")
    return p.dipole_scale * (-1j) * t51s / den


def chi1(delta2, delta3, p: SystemParams):
    """Linear response of the first signal arm.

    Numerator bars read as |omega_p|^2 |omega_c1|^2, the only dimensionally
    consistent grouping of the source expression's unbalanced bars.
    """
    g41 = 1j * p.delta_p - p.gamma41
    g51 = 1j * (p.delta_p + p.delta_c1) - p.gamma51
    g54 = 1j * p.delta_c1 - p.gamma54
    t41 = _tee(g41, delta2, delta3, p)
    t51 = _tee(g51, delta2, delta3, p)
    t54 = _tee(g54, delta2, delta3, p)
    oc1 = abs(p.omega_c1) ** 2
    den = t54 * (g41 * g51 + oc1) * (t41 * t51 + oc1)
    _check_pole(den, "chi1")
    num = -1j * abs(p.omega_p) ** 2 * oc1
    return p.dipole_scale * num / den


def chi2(delta2, p: SystemParams):
    """Linear response of the second signal arm (depends on delta2 only).

    The arr_ij combinations cancel delta3 exactly, so any delta3 may be used
    internally; 0 is passed.
    """
    delta3 = 0.0
    g41 = 1j * p.delta_p - p.gamma41
    g51 = 1j * (p.delta_p + p.delta_c1) - p.gamma51
    r21 = (-1j * delta3 - p.gamma21) + 1j * (p.delta_p + delta2 + delta3)
    r31 = (-1j * delta3 - p.gamma31) + 1j * (p.delta_p + delta2 + delta3)
    u42s = np.conj(-1j * delta2 - p.gamma42)
    u52s = np.conj(1j * (p.delta_c1 - delta2) - p.gamma52)
    u53s = np.conj(1j * (p.delta_c1 - delta2) - p.gamma53)
    oc1 = abs(p.omega_c1) ** 2
    oc2 = abs(p.omega_c2) ** 2
    bracket = u52s * u53s + oc2
    den = (g41 * g51 + oc1) * (r21 * r31 + oc2) * (u53s * oc1 + u42s * bracket)
    _check_pole(den, "chi2")
    num = 1j * abs(p.omega_p) ** 2 * g51 * r31 * bracket
    return p.dipole_scale * num / den


def chi3(delta3, p: SystemParams):
    """EIT response seen by the slow photon: -i / (U31* + |oc2|^2 / U21*)."""
    u21s = np.conj(-1j * delta3 - p.gamma21)
    u31s = np.conj(-1j * delta3 - p.gamma31)
    _check_pole(u21s, "chi3")
    den = u31s + abs(p.omega_c2) ** 2 / u21s
    _check_pole(den, "chi3")
    return p.dipole_scale * (-1j) / den


def chi3_absorption_scale(p: SystemParams) -> float:
    """Dimensional scale S such that Im[k3]*L = OD/2 on bare resonance.

    The unit-scale chi3 has Im = 1 at line center with the coupling off, so
    S = OD*c/(2*omega31*L) calibrates propagation loss to the optical depth.
    The carrier omega31 cancels once Im[k3] = omega31*Im[chi3]/c is formed.
    """
    return p.optical_depth * C_LIGHT / (2 * p.omega31 * p.length_L)


def delta_k(delta2, delta3, p: SystemParams):
    """Wavenumber mismatch in SI 1/m.

    dk = 2(omega21 - Delta_p - delta2)/c + delta3*(1/nu3 + 1/c)
         + i*omega31*Im[chi3]/c
    with the detunings converted from gamma31 units and Im[chi3] carrying the
    OD-calibrated absorption scale.  Im[dk] >= 0 for positive dephasing
    (loss, never gain).
    """
    disp = eit_dispersion(p)
    d2_si = np.asarray(delta2, dtype=float) * p.gamma31_si
    d3_si = np.asarray(delta3, dtype=float) * p.gamma31_si
    dp_si = p.delta_p * p.gamma31_si
    real = (2 * (p.omega21_si - dp_si - d2_si) / C_LIGHT
            + d3_si * (1.0 / disp.group_velocity_nu3 + 1.0 / C_LIGHT))
    scale = chi3_absorption_scale(p)
    im_chi3 = scale * np.imag(chi3(delta3, p)) / p.dipole_scale
    return real + 1j * p.omega31 * im_chi3 / C_LIGHT


def phi(delta2, delta3, p: SystemParams, ideal_rect: bool = False):
    """Longitudinal detuning function of the phase mismatch over length L.

    Implemented as (exp(i*dk*L) - 1)/(i*dk*L): the sign branch for which the
    absorptive part of dk damps the exponential (bounded response, photons
    born at the exit face unattenuated) and the slow-light delay lands the
    support on [0, L/nu3].  The removable singularity at |dk*L| < 1e-6 is
    evaluated by series.  With `ideal_rect` the loss term is dropped, leaving
    the pure phase-mismatch form.
    """
    dk = delta_k(delta2, delta3, p)
    if ideal_rect:
        dk = np.real(dk)
    return phi_of_dkl(dk * p.length_L)


def phi_of_dkl(dkl):
    """(exp(z) - 1)/z with z = i*dk*L, series-expanded near z = 0."""
    z = 1j * np.asarray(dkl, dtype=complex)
    small = np.abs(z) < PHI_SERIES_CUTOFF
    zsafe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 + z / 2 + z * z / 6, (np.exp(zsafe) - 1.0) / zsafe)
    if out.ndim == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform 2D sampling of chi5*Phi over (delta2, delta3), gamma31 units."""

    delta2_axis: np.ndarray
    delta3_axis: np.ndarray
    values: np.ndarray
    params_hash: str = ""
    n_singular_replaced: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for ax in (self.delta2_axis, self.delta3_axis):
            steps = np.diff(ax)
            if not np.all(steps > 0):
                raise ValidationError("grid axes must be strictly increasing")
            if np.ptp(steps) > 1e-12 * abs(steps[0]):
                raise ValidationError("grid axes must be uniform to 1e-12 relative")
        if self.values.shape != (len(self.delta2_axis), len(self.delta3_axis)):
            raise ValidationError("value array shape must match axis lengths")


def _fft_axis(extent: float, n: int) -> np.ndarray:
    step = 2 * extent / n
    return -extent + step * np.arange(n)


def spectral_grid(
    p: SystemParams,
    extent: float,
    n_points: int,
    force_phi_unity: bool = False,
    ideal_rect: bool = False,
) -> SpectralGrid:
    """Sample chi5*Phi on the FFT-ready grid [-extent, extent) x n_points.

    n_points must be a power of two >= 256.  Parameters with any vanishing
    dephasing rate would put poles of D on the real axis and are rejected for
    grid work (scalar evaluation stays legal).  Isolated singular samples are
    replaced by the mean of the 4 nearest regular neighbours, with the count
    recorded.
    """
    if n_points < 256 or (n_points & (n_points - 1)) != 0:
        raise ValidationError("n_points must be a power of two >= 256")
    if extent <= 0:
        raise ValidationError("extent must be > 0")
    if min(p.gamma21, p.gamma31, p.gamma41, p.gamma51) <= 0:
        raise ValidationError("grid sampling requires strictly positive dephasing")
    s = effective_splittings(p)
    needed = [s.omega_e1, s.omega_e2]
    if not force_phi_unity and p.optical_depth > 0:
        needed.append(eit_dispersion(p).delta_omega_g)
    if extent < 4 * max(needed):
        warnings.warn(
            f"extent {extent:g} < 4x max characteristic frequency "
            f"{max(needed):g}; spectrum may be truncated", stacklevel=2)

    d = _fft_axis(extent, n_points)
    d2 = d[:, None]
    d3 = d[None, :]
    try:
        vals = chi5(d2, d3, p)
    except SingularPointError:
        # Salvage isolated poles cell by cell; reject if a whole region is bad.
        den = (np.conj(1j * p.delta_p - p.gamma41)
               * np.conj(1j * (p.delta_p + p.delta_c1) - p.gamma51)
               + abs(p.omega_c1) ** 2) * d_function(d2, d3, p)
        bad = np.abs(den) < POLE_FLOOR
        if bad.mean() > 1e-3:
            raise
        t51s = np.conj(_tee(1j * (p.delta_p + p.delta_c1) - p.gamma51, d2, d3, p))
        densafe = np.where(bad, 1.0, den)
        vals = p.dipole_scale * (-1j) * t51s / densafe
        vals = _patch_singular(vals, bad)
        n_bad = int(bad.sum())
    else:
        n_bad = 0
    if not force_phi_unity:
        vals = vals * phi(d2, d3, p, ideal_rect=ideal_rect)
    return SpectralGrid(
        delta2_axis=d,
        delta3_axis=d.copy(),
        values=vals,
        params_hash=p.content_hash(),
        n_singular_replaced=n_bad,
        meta={"extent": extent, "n_points": n_points,
              "force_phi_unity": force_phi_unity, "ideal_rect": ideal_rect},
    )


def _patch_singular(vals: np.ndarray, bad: np.ndarray) -> np.ndarray:
    out = vals.copy()
    idx = np.argwhere(bad)
    n0, n1 = vals.shape
    for i, j in idx:
        neigh = []
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            a, b = i + di, j + dj
            if 0 <= a < n0 and 0 <= b < n1 and not bad[a, b]:
                neigh.append(vals[a, b])
        out[i, j] = np.mean(neigh) if neigh else 0.0
    return out


def find_resonances(grid: SpectralGrid, threshold: float = 0.25) -> list[dict]:
    """Interior local maxima of |values| above threshold*global max.

    3x3-neighbourhood maxima, returned sorted by magnitude (descending) as
    dicts with delta2/delta3 coordinates and magnitude.  The 0.25 threshold
    separates the four channel peaks without admitting ringing sidelobes.
    """
    mag = np.abs(grid.values)
    if mag.size == 0 or not np.any(mag > 0):
        raise ValidationError("find_resonances needs a non-empty grid")
    peak = mag.max()
    hits = []
    core = mag[1:-1, 1:-1]
    neighborhood_max = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = mag[1 + di:mag.shape[0] - 1 + di, 1 + dj:mag.shape[1] - 1 + dj]
            neighborhood_max &= core >= shifted
    # strict on the lexicographically earlier side to avoid plateau doubles
    neighborhood_max &= core > mag[:-2, 1:-1]
    neighborhood_max &= core > mag[1:-1, :-2]
    neighborhood_max &= core > threshold * peak
    for i, j in np.argwhere(neighborhood_max):
        hits.append({
            "delta2": float(grid.delta2_axis[i + 1]),
            "delta3": float(grid.delta3_axis[j + 1]),
            "magnitude": float(core[i, j]),
        })
    hits.sort(key=lambda h: -h["magnitude"])
    return hits
