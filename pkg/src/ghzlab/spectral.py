"""Gaussian joint-spectral-amplitude model: filtering, Schmidt purity, HOM visibility.

Frequencies are wavelength detunings in nm around the 788 nm degenerate point.
Grid axis 0 is the e photon, axis 1 the o photon. The two FWHMs set the
widths of |JSA| along the principal axes of the ellipse, which is rotated so
that a positive tilt gives positively correlated detunings. Default
parameters include 3 nm (e) and 8 nm (o) Gaussian filters; pass
``math.inf`` widths for the bare source.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import DegenerateStateError, ValidationError

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
CENTER_NM = 788.0


@dataclass(frozen=True)
class SpectrumParams:
    fwhm_e: float = 5.2
    fwhm_o: float = 10.3
    tilt_deg: float = 25.0
    filter_e_fwhm: float = 3.0
    filter_o_fwhm: float = 8.0
    filter_order: int = 1
    n_points: int = 256
    span: float = 3.0

    def __post_init__(self):
        if self.fwhm_e <= 0 or self.fwhm_o <= 0:
            raise ValidationError("bandwidths must be positive")
        if not -90.0 < self.tilt_deg < 90.0:
            raise ValidationError("tilt must lie in (-90, 90) degrees")
        if self.filter_e_fwhm <= 0 or self.filter_o_fwhm <= 0:
            raise ValidationError("filter widths must be positive")
        if self.n_points < 64:
            raise ValidationError("grid needs at least 64 points per axis")
        if self.filter_order < 1 or self.span <= 0:
            raise ValidationError("filter_order >= 1 and span > 0 required")


@dataclass(frozen=True)
class JointSpectrum:
    grid: np.ndarray
    nu_e: np.ndarray
    nu_o: np.ndarray
    params: SpectrumParams
    transmission: float = 1.0

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.nu_e[1] - self.nu_e[0]), float(self.nu_o[1] - self.nu_o[0])

    def intensity(self) -> np.ndarray:
        return np.abs(self.grid) ** 2

    def correlation(self) -> float:
        """Pearson correlation of the detunings under |JSA|^2."""
        w = self.intensity()
        x, y = self.nu_e[:, None], self.nu_o[None, :]
        mx, my = (w * x).sum(), (w * y).sum()
        cxy = (w * (x - mx) * (y - my)).sum()
        return float(cxy / math.sqrt((w * (x - mx) ** 2).sum() * (w * (y - my) ** 2).sum()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("nu_e_nm,nu_o_nm,intensity\n")
        inten = self.intensity()
        for i, ne in enumerate(self.nu_e):
            for j, no in enumerate(self.nu_o):
                buf.write(f"{ne + CENTER_NM:.6f},{no + CENTER_NM:.6f},{inten[i, j]:.6e}\n")
        return buf.getvalue()


def _normalized(grid: np.ndarray) -> np.ndarray:
    norm = math.sqrt(float(np.sum(np.abs(grid) ** 2)))
    if norm == 0 or not math.isfinite(norm):
        raise DegenerateStateError("spectrum grid has no weight")
    return grid / norm


def gaussian_jsa(params: SpectrumParams | None = None, **overrides) -> JointSpectrum:
    """Tilted elliptical Gaussian; filters in ``params`` are applied too."""
    params = replace(params or SpectrumParams(), **overrides)
    half = params.span * max(params.fwhm_e, params.fwhm_o)
    axis = np.linspace(-half, half, params.n_points)
    s1, s2 = params.fwhm_e * FWHM_TO_SIGMA, params.fwhm_o * FWHM_TO_SIGMA
    t = math.radians(params.tilt_deg)
    c, s = math.cos(t), math.sin(t)
    pxx = c * c / s1 ** 2 + s * s / s2 ** 2
    pyy = s * s / s1 ** 2 + c * c / s2 ** 2
    # a negative cross term in the precision gives a positive correlation
    pxy = -c * s * abs(1 / s1 ** 2 - 1 / s2 ** 2)
    grid = _kernels.gaussian_grid(axis, axis, pxx, pxy, pyy).astype(np.complex128)
    js = JointSpectrum(_normalized(grid), axis, axis.copy(), params)
    if math.isfinite(params.filter_e_fwhm) or math.isfinite(params.filter_o_fwhm):
        js = apply_filters(js, params.filter_e_fwhm, params.filter_o_fwhm, params.filter_order)
    return js


def filter_intensity(nu: np.ndarray, fwhm: float, order: int = 1) -> np.ndarray:
    """(Super-)Gaussian transmission with the given FWHM on intensity."""
    if math.isinf(fwhm):
        return np.ones_like(nu)
    return np.exp(-math.log(2.0) * (2.0 * np.abs(nu) / fwhm) ** (2 * order))


def apply_filters(js: JointSpectrum, fwhm_e: float, fwhm_o: float, order: int = 1) -> JointSpectrum:
    if fwhm_e <= 0 or fwhm_o <= 0:
        raise ValidationError("filter widths must be positive")
    amp = np.sqrt(filter_intensity(js.nu_e, fwhm_e, order))[:, None] * \
        np.sqrt(filter_intensity(js.nu_o, fwhm_o, order))[None, :]
    out = js.grid * amp
    kept = float(np.sum(np.abs(out) ** 2) / np.sum(np.abs(js.grid) ** 2))
    params = replace(js.params, filter_e_fwhm=fwhm_e, filter_o_fwhm=fwhm_o, filter_order=order)
    return JointSpectrum(_normalized(out), js.nu_e, js.nu_o, params, js.transmission * kept)


def schmidt_coefficients(js: JointSpectrum) -> np.ndarray:
    try:
        s = np.linalg.svd(js.grid, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStateError(f"SVD failed: {exc}") from exc
    lam = s ** 2
    total = lam.sum()
    if total <= 0:
        raise DegenerateStateError("spectrum grid has no weight")
    return lam / total


def schmidt_purity(js: JointSpectrum) -> float:
    lam = schmidt_coefficients(js)
    return float(np.sum(lam ** 2))


def profile_fwhm(values: np.ndarray, axis: np.ndarray) -> float:
    """FWHM of a sampled single-peaked profile, with linear interpolation at the edges."""
    v = np.asarray(values, dtype=np.float64)
    half = v.max() / 2
    above = np.flatnonzero(v >= half)
    i, j = above[0], above[-1]

    def cross(a, b):
        return axis[a] + (half - v[a]) * (axis[b] - axis[a]) / (v[b] - v[a])

    left = cross(i - 1, i) if i > 0 else axis[0]
    right = cross(j, j + 1) if j + 1 < v.size else axis[-1]
    return float(right - left)


def hom_visibility(purity_1: float, purity_2: float, cross_overlap: float = 1.0) -> float:
    """Two-photon interference visibility sqrt(P1 P2) * overlap."""
    for x in (purity_1, purity_2, cross_overlap):
        if not 0.0 <= x <= 1.0:
            raise ValidationError("purities and overlap must lie in [0, 1]")
    return math.sqrt(purity_1 * purity_2) * cross_overlap


def hom_visibility_from_spectra(js1: JointSpectrum, js2: JointSpectrum, photon: str = "e") -> float:
    """Tr(rho1 rho2) of the reduced states of the interfering photons."""
    if js1.grid.shape != js2.grid.shape or not (np.array_equal(js1.nu_e, js2.nu_e)
                                                 and np.array_equal(js1.nu_o, js2.nu_o)):
        raise ValidationError("spectra must share a grid")
    a1, a2 = (js1.grid, js2.grid) if photon == "e" else (js1.grid.T, js2.grid.T)
    return float(np.linalg.norm(a1.conj().T @ a2) ** 2)


def double_pair_visibility(v0: float, p: float) -> float:
    """Visibility diluted by double-pair emission from two sources: V0/(1 + 2p)."""
    if p < 0:
        raise ValidationError("p must be nonnegative")
    return v0 / (1.0 + 2.0 * p)


def fit_double_pair_p(v0: float, v_observed: float) -> float:
    """Invert double_pair_visibility for p."""
    if not 0 < v_observed <= v0:
        raise ValidationError("observed visibility must lie in (0, v0]")
    return (v0 / v_observed - 1.0) / 2.0
