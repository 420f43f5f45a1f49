"""Bias correction of top sample correlation eigenvalues and the
adjusted-thresholding factor count.

The sample eigenvalue lambda_j of a high-dimensional correlation matrix
overshoots its population counterpart. The correction inverts a partial
Stieltjes transform of the trailing spectrum evaluated at lambda_j:

    m_j(z)  = (p-j)^{-1} [ sum_{l>j} (lambda_l - z)^{-1}
                           + ((3 lambda_j + lambda_{j+1})/4 - z)^{-1} ]
    mu_j(z) = -(1 - rho_j)/z + rho_j m_j(z),   rho_j = (p-j)/(n-1)
    adjusted_j = -1 / mu_j(lambda_j)

The divisor is p-j even though the bracket has p-j+1 summands; that is the
operative definition and is kept verbatim (an inclusive-divisor variant is
available for sensitivity checks only).

The count is then max{j <= r_max : adjusted_j > 1 + sqrt(p/(n-1))}, with
the empty set giving 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateGap, PoleAtZ, SeparationError, SupportViolation
from .spectral import Spectrum

__all__ = [
    "AdjustedSpectrum",
    "SpectralLaw",
    "partial_stieltjes",
    "companion_stieltjes",
    "adjust_eigenvalues",
    "act_threshold",
    "act_select",
    "act_estimate",
    "default_r_max",
    "psi",
    "predicted_spike",
    "law_from_spectrum_tail",
]

#: relative jitter applied to break exact eigenvalue ties
TIE_JITTER = 1e-9


@dataclass(frozen=True)
class AdjustedSpectrum:
    """Bias-corrected top eigenvalues with the decision threshold.

    adjusted[j-1] holds the corrected value for the j-th eigenvalue,
    j = 1..r_max. `jittered` flags that tied eigenvalues were perturbed.
    """

    adjusted: np.ndarray
    threshold: float
    p: int
    n: int
    r_max: int
    jittered: bool = False

    def __post_init__(self):
        arr = np.asarray(self.adjusted, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.r_max:
            raise ConfigError("adjusted values must be a 1-d sequence of length r_max")
        if self.r_max > self.p - 2:
            raise ConfigError(f"r_max={self.r_max} must be <= p-2={self.p - 2}")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ConfigError("adjusted eigenvalues must be finite and positive")
        object.__setattr__(self, "adjusted", arr)


@dataclass(frozen=True)
class SpectralLaw:
    """Discrete spectral law: atoms t_i in [0, 1] with weights summing to 1,
    plus the dimension-to-sample limit ratio rho."""

    atoms: np.ndarray
    weights: np.ndarray
    rho: float

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 1 or atoms.shape != weights.shape or atoms.size == 0:
            raise ConfigError("atoms and weights must be equal-length non-empty 1-d arrays")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ConfigError("weights must be nonnegative and sum to 1")
        if np.any(atoms < -1e-9) or np.any(atoms > 1.0 + 1e-9):
            raise ConfigError("law support must lie within [0, 1]")
        if not self.rho > 0:
            raise ConfigError("rho must be positive")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def max_atom(self) -> float:
        return float(self.atoms.max())


def default_r_max(p: int, n: int) -> int:
    """min(p//2, (n-1)//2, 50): generous for K up to ~10 while <= p-2."""
    return min(p // 2, (n - 1) // 2, 50)


def act_threshold(p: int, n: int) -> float:
    """Decision threshold 1 + sqrt(p/(n-1))."""
    if n < 2:
        raise ConfigError(f"threshold needs n >= 2, got {n}")
    return 1.0 + math.sqrt(p / (n - 1))


def _check_j(j: int, p: int) -> None:
    if not 1 <= j <= p - 1:
        raise ConfigError(f"index j={j} must satisfy 1 <= j <= p-1={p - 1}")


def _resolvent_sum(j: int, spec: Spectrum, z: float) -> float:
    """sum_{l>j} (lambda_l - z)^{-1} plus the synthetic node term."""
    lam = spec.eigenvalues
    p = spec.p
    _check_j(j, p)
    if lam[j - 1] <= lam[j]:
        raise DegenerateGap(
            f"eigenvalues {j} and {j + 1} are tied ({lam[j - 1]:g}); the correction needs a strict gap"
        )
    tail = lam[j:]
    node = (3.0 * lam[j - 1] + lam[j]) / 4.0
    if np.any(tail == z) or node == z:
        raise PoleAtZ(f"z={z:g} coincides with a pole of the transform")
    return float(np.sum(1.0 / (tail - z))) + 1.0 / (node - z)


def partial_stieltjes(j: int, spec: Spectrum, z: float) -> float:
    """Partial Stieltjes transform m_j(z) of the spectrum past index j.

    Sums (lambda_l - z)^{-1} over l = j+1..p plus one synthetic node at
    (3 lambda_j + lambda_{j+1})/4, divided by p-j (p-j+1 summands).
    """
    return _resolvent_sum(j, spec, z) / (spec.p - j)


def companion_stieltjes(j: int, spec: Spectrum, n: int, z: float) -> float:
    """Companion transform -(1-rho_j)/z + rho_j m_j(z), rho_j = (p-j)/(n-1)."""
    if n < 2:
        raise ConfigError(f"companion transform needs n >= 2, got {n}")
    if z == 0.0:
        raise PoleAtZ("z=0 is a pole of the companion transform")
    rho = (spec.p - j) / (n - 1)
    return -(1.0 - rho) / z + rho * partial_stieltjes(j, spec, z)


def adjust_eigenvalues(
    spec: Spectrum,
    n: int,
    r_max: int | None = None,
    on_ties: str = "jitter",
    divisor: str = "verbatim",
) -> AdjustedSpectrum:
    """Correct the top r_max eigenvalues: adjusted_j = -1/mu_j(lambda_j).

    Exact ties among the leading eigenvalues are broken by lowering the
    lower member by TIE_JITTER * lambda_j (flagged in the result), or
    rejected with on_ties="error". divisor="inclusive" switches to the
    p-j+1 normalization; it exists for sensitivity checks only.
    """
    if on_ties not in ("jitter", "error"):
        raise ConfigError(f"on_ties must be 'jitter' or 'error', got {on_ties!r}")
    if divisor not in ("verbatim", "inclusive"):
        raise ConfigError(f"divisor must be 'verbatim' or 'inclusive', got {divisor!r}")
    p = spec.p
    if r_max is None:
        r_max = default_r_max(p, n)
    if not 1 <= r_max <= p - 2:
        raise ConfigError(f"r_max={r_max} must satisfy 1 <= r_max <= p-2={p - 2}")
    if n < 2:
        raise ConfigError(f"adjustment needs n >= 2, got {n}")

    work = spec.eigenvalues.copy()
    jittered = False
    for j in range(r_max):
        if work[j + 1] >= work[j]:
            if on_ties == "error":
                raise DegenerateGap(f"eigenvalues {j + 1} and {j + 2} are tied")
            if work[j] <= 0.0:
                raise DegenerateGap(f"cannot jitter a tie at eigenvalue {work[j]:g}")
            work[j + 1] = min(work[j + 1], work[j]) - TIE_JITTER * work[j]
            jittered = True
    work_spec = Spectrum(work, p=p, n=spec.n) if jittered else spec

    adjusted = np.empty(r_max)
    for j in range(1, r_max + 1):
        z = float(work[j - 1])
        if z == 0.0:
            raise PoleAtZ(f"eigenvalue {j} is zero; the spectrum is too degenerate to adjust")
        denom = (p - j) if divisor == "verbatim" else (p - j + 1)
        m_partial = _resolvent_sum(j, work_spec, z) / denom
        rho = (p - j) / (n - 1)
        m = -(1.0 - rho) / z + rho * m_partial
        adjusted[j - 1] = -1.0 / m
    return AdjustedSpectrum(
        adjusted, act_threshold(p, n), p=p, n=n, r_max=r_max, jittered=jittered
    )


def act_select(adjusted: AdjustedSpectrum) -> int:
    """max{j : adjusted_j > threshold}; the empty set gives 0."""
    hits = np.flatnonzero(adjusted.adjusted > adjusted.threshold)
    return int(hits[-1] + 1) if hits.size else 0


def act_estimate(spec: Spectrum, n: int, r_max: int | None = None, **kwargs) -> int:
    """Adjusted correlation thresholding count from a correlation spectrum."""
    return act_select(adjust_eigenvalues(spec, n, r_max, **kwargs))


def psi(x: float, law: SpectralLaw) -> float:
    """psi(x) = 1 + rho * integral t/(x - t) dH(t) for a discrete law H."""
    if x <= law.max_atom:
        raise SupportViolation(f"x={x:g} must exceed the largest atom {law.max_atom:g}")
    return 1.0 + law.rho * float(np.sum(law.weights * law.atoms / (x - law.atoms)))


def predicted_spike(lam: float, law: SpectralLaw) -> float:
    """Asymptotic sample location lam * psi(lam) of a separated population spike.

    Requires lam >= (max atom) * (1 + sqrt(rho)); equality sits exactly at
    the bulk edge and is admitted.
    """
    bound = law.max_atom * (1.0 + math.sqrt(law.rho))
    if lam < bound * (1.0 - 1e-12):
        raise SeparationError(
            f"spike {lam:g} is below the separation bound {bound:g}"
        )
    return lam * psi(lam, law)


def law_from_spectrum_tail(population: Spectrum, k: int, rho: float) -> SpectralLaw:
    """Point-mass law on the trailing eigenvalues lambda_{k+1..p}, equal weights."""
    lam = population.eigenvalues
    if not 0 <= k < population.p:
        raise ConfigError(f"k={k} must lie in [0, p)")
    tail = np.clip(lam[k:], 0.0, 1.0)
    return SpectralLaw(tail, np.full(tail.size, 1.0 / tail.size), rho)
