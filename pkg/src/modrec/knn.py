"""kNN denoising of mod-1 samples on the unit circle, with bandwidth rules.

The estimator embeds each noisy mod-1 sample y as z = exp(i*2*pi*y), averages
z over the kNN neighborhood of every grid point, projects the average back to
the circle and returns its angle divided by 2*pi.  Because the projection
discards the magnitude, the averaging normalization is irrelevant; we divide
by the actual neighborhood size, which is also the right thing under ties.

Neighborhoods of grid points are integer Chebyshev boxes clipped to the grid,
so the whole pass runs on d-dimensional prefix sums: O(n log m) total, with a
fixed summation order that makes results independent of scheduling.

Bandwidth selection implements three rules:

*   ``choose_k_expected_risk`` minimizes the pointwise expected-risk bound
    64*pi^2*M^2*(k/n)^(2/d) + 32*pi^2*sigma^2/k over real k.
*   ``choose_k_sup_norm`` follows the high-probability sup-norm rate, with the
    sample-size hypothesis reported alongside.
*   ``choose_k_practical`` is the desk recipe k = ceil(C * n^(2/(d+2)) *
    (log n)^(d/(d+2))).

The bound evaluators return their value even when the hypotheses
(sigma <= 1/(2*pi), n >= 2^d) fail, flagging the violation, so parameter
sweeps can chart validity regions.  All logarithms are natural.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circle import TWO_PI, circle_arg
from .grid import GridField, UniformGrid, _knn_axis_ranges


@dataclass(frozen=True)
class DenoiseResult:
    """Denoised mod-1 field plus diagnostics.

    zero_resultants counts grid points whose neighborhood average cancelled to
    numerically zero (resultant below 1e-14 per member, i.e. perfect antipodal
    cancellation up to roundoff); those outputs are 0.0 by the projection
    convention that sends the zero vector to 1.
    """

    ghat: GridField
    k: int
    zero_resultants: int


# A resultant this small relative to the member count has no meaningful
# direction: antipodal cancellation computed in binary64.
_CANCEL_TOL = 1e-14


def _padded_prefix_sums(arr: np.ndarray) -> np.ndarray:
    p = arr
    for ax in range(arr.ndim):
        p = p.cumsum(axis=ax)
    return np.pad(p, [(1, 0)] * arr.ndim)


def _box_radii(shape: tuple, k: int) -> np.ndarray:
    """Minimal integer Chebyshev radius per grid point whose clipped box holds >= k points."""
    d = len(shape)
    m = shape[0]
    idx = [ax.reshape(-1) for ax in np.indices(shape)]  # 0-based coords, flat
    n = idx[0].size
    lo_c = np.zeros(n, dtype=np.int64)
    hi_c = np.full(n, m - 1, dtype=np.int64)

    def counts(c):
        total = np.ones(n, dtype=np.int64)
        for a in range(d):
            lo = np.maximum(idx[a] - c, 0)
            hi = np.minimum(idx[a] + c, m - 1)
            total *= hi - lo + 1
        return total

    while np.any(lo_c < hi_c):
        mid = (lo_c + hi_c) // 2
        ok = counts(mid) >= k
        hi_c = np.where(ok, mid, hi_c)
        lo_c = np.where(ok, lo_c, mid + 1)
    return lo_c


def _box_sums(prefix: np.ndarray, shape: tuple, radii: np.ndarray):
    """Clipped-box sums around every grid point via inclusion-exclusion."""
    d = len(shape)
    m = shape[0]
    idx = [ax.reshape(-1) for ax in np.indices(shape)]
    lo = [np.maximum(idx[a] - radii, 0) for a in range(d)]
    hi = [np.minimum(idx[a] + radii, m - 1) for a in range(d)]
    total = np.zeros(idx[0].size, dtype=prefix.dtype)
    counts = np.ones(idx[0].size, dtype=np.int64)
    for a in range(d):
        counts *= hi[a] - lo[a] + 1
    for corner in itertools.product((0, 1), repeat=d):
        pick = tuple(hi[a] + 1 if corner[a] else lo[a] for a in range(d))
        sign = 1 if (d - sum(corner)) % 2 == 0 else -1
        total += sign * prefix[pick]
    return total, counts


def denoise(y: GridField, k: int) -> DenoiseResult:
    """Circle-average denoising of a mod-1 field over kNN neighborhoods.

    For every grid point the embedded samples are averaged over the kNN set of
    that point, the mean is projected back to the circle and converted to a
    mod-1 value.  k = 1 (or any radius-zero neighborhood) returns the input
    sample unchanged.
    """
    if y.kind != "mod1":
        raise ValueError("denoise expects a mod1 field")
    grid = y.grid
    if not 1 <= k <= grid.n:
        raise ValueError(f"k must lie in [1, {grid.n}]")
    z = np.exp(1j * TWO_PI * y.values)
    prefix = _padded_prefix_sums(z)
    radii = _box_radii(grid.shape, k)
    sums, counts = _box_sums(prefix, grid.shape, radii)

    mags = np.abs(sums)
    zero_mask = mags <= _CANCEL_TOL * counts
    ghat = np.asarray(circle_arg(np.where(zero_mask, 1.0 + 0.0j, sums)))
    ghat = np.where(zero_mask, 0.0, ghat)
    # Radius-zero neighborhoods are the sample itself: skip the embed/arg
    # round trip so the output is bitwise equal to the input there.
    ghat = np.where(radii == 0, y.flat, ghat)
    field = GridField(grid, ghat.reshape(grid.shape), kind="mod1")
    return DenoiseResult(ghat=field, k=int(k), zero_resultants=int(zero_mask.sum()))


def circle_estimate(y: GridField, k: int, x) -> complex:
    """kNN circle estimate at an arbitrary point x in [0,1]^d (unit complex).

    The un-normalized neighborhood mean is projected to the circle; an exactly
    zero mean returns 1 by the projection convention.
    """
    if y.kind != "mod1":
        raise ValueError("circle_estimate expects a mod1 field")
    ranges, _ = _knn_axis_ranges(y.grid, x, k)
    block = y.values[tuple(slice(lo, hi + 1) for lo, hi in ranges)]
    s = np.exp(1j * TWO_PI * block).sum()
    mag = abs(s)
    return complex(s / mag) if mag > _CANCEL_TOL * block.size else 1.0 + 0.0j


def choose_k_expected_risk(d: int, sigma: float, M: float, n: int) -> int:
    """Number of neighbors minimizing the expected-risk bound, clamped to [1, n].

    The continuous minimizer is (d*sigma^2/(4*M^2))^(d/(d+2)) * n^(2/(d+2));
    the returned k is its ceiling.  sigma = 0 is the bias-only regime and
    returns 1 with a warning.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        warnings.warn("sigma = 0: bias-only regime, using k = 1", stacklevel=2)
        return 1
    k_star = (d * sigma ** 2 / (4.0 * M ** 2)) ** (d / (d + 2)) * n ** (2.0 / (d + 2))
    return int(min(max(math.ceil(k_star), 1), n))


@dataclass(frozen=True)
class SupNormSelection:
    k: int
    k_star: float
    sample_condition_ok: bool
    k_star_at_least_log_n: bool


def choose_k_sup_norm(d: int, sigma: float, M: float, n: int) -> SupNormSelection:
    """Sup-norm rate bandwidth k = ceil(k_star), with hypothesis reports.

    k_star = n^(2/(d+2)) (log n)^(d/(d+2)) (d*((4*pi^2*sigma^2+2)/3 + pi*sigma)
    / (pi*M))^(2d/(d+2)).  Also reports whether the sample-size condition
    n/log n >= (pi*M / (2*d*((4*pi^2*sigma^2+2)/3 + pi*sigma)))^d holds and
    whether k_star >= log n (the simplification used to derive the rule).
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    c_sigma = (4.0 * np.pi ** 2 * sigma ** 2 + 2.0) / 3.0 + np.pi * sigma
    log_n = math.log(n)
    k_star = (
        n ** (2.0 / (d + 2))
        * log_n ** (d / (d + 2))
        * (d * c_sigma / (np.pi * M)) ** (2.0 * d / (d + 2))
    )
    sample_ok = n / log_n >= (np.pi * M / (2.0 * d * c_sigma)) ** d
    k = int(min(max(math.ceil(k_star), 1), n))
    return SupNormSelection(
        k=k,
        k_star=float(k_star),
        sample_condition_ok=bool(sample_ok),
        k_star_at_least_log_n=bool(k_star >= log_n),
    )


def choose_k_practical(n: int, d: int = 1, C: float = 0.09) -> int:
    """Desk rule k = ceil(C * n^(2/(d+2)) * (log n)^(d/(d+2))), clamped to [1, n]."""
    if C <= 0:
        raise ValueError("C must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    k_star = C * n ** (2.0 / (d + 2)) * math.log(n) ** (d / (d + 2))
    return int(min(max(math.ceil(k_star), 1), n))


@dataclass(frozen=True)
class RiskBoundInputs:
    """Inputs to the risk-bound evaluators; M is the l-inf Lipschitz constant."""

    d: int
    sigma: float
    M: float
    n: int
    k: int

    def __post_init__(self):
        if self.sigma < 0 or self.M <= 0 or self.n < 1 or not 1 <= self.k:
            raise ValueError("invalid risk-bound inputs")

    @property
    def envelope_bound(self) -> float:
        """Almost-sure bound 1 + exp(2*pi^2*sigma^2) on the centered embedded noise."""
        return 1.0 + math.exp(2.0 * np.pi ** 2 * self.sigma ** 2)

    @property
    def variance(self) -> float:
        """Exact variance exp(4*pi^2*sigma^2) - 1 of each centered embedded sample."""
        return math.exp(4.0 * np.pi ** 2 * self.sigma ** 2) - 1.0

    def _violations(self) -> tuple:
        out = []
        if self.sigma > 1.0 / TWO_PI:
            out.append("sigma > 1/(2*pi)")
        if self.n < 2 ** self.d:
            out.append("n < 2^d")
        return tuple(out)


@dataclass(frozen=True)
class BoundValue:
    value: float
    hypothesis_ok: bool
    violations: tuple


def expected_risk_bound(inputs: RiskBoundInputs) -> BoundValue:
    """Pointwise expected-risk bound 64*pi^2*M^2*(k/n)^(2/d) + 32*pi^2*sigma^2/k."""
    v = (
        64.0 * np.pi ** 2 * inputs.M ** 2 * (inputs.k / inputs.n) ** (2.0 / inputs.d)
        + 32.0 * np.pi ** 2 * inputs.sigma ** 2 / inputs.k
    )
    viol = inputs._violations()
    return BoundValue(value=float(v), hypothesis_ok=not viol, violations=viol)


def sup_norm_bound(inputs: RiskBoundInputs) -> BoundValue:
    """High-probability (>= 1 - 1/n) in-sample sup-norm bound on the circle estimate.

    8*pi*M*(k/n)^(1/d) + (64/3)*(2*pi^2*sigma^2 + 1)*log(n)/k
    + 32*pi*sigma*sqrt(log(n)/k).  The middle term does not vanish at
    sigma = 0; it comes from the bounded-difference concentration step.
    """
    log_n = math.log(inputs.n)
    v = (
        8.0 * np.pi * inputs.M * (inputs.k / inputs.n) ** (1.0 / inputs.d)
        + (64.0 / 3.0) * (2.0 * np.pi ** 2 * inputs.sigma ** 2 + 1.0) * log_n / inputs.k
        + 32.0 * np.pi * inputs.sigma * math.sqrt(log_n / inputs.k)
    )
    viol = inputs._violations()
    return BoundValue(value=float(v), hypothesis_ok=not viol, violations=viol)


@dataclass(frozen=True)
class SupErrorScale:
    """Uniform chord-error scale delta(n) and the two gates that use it.

    small_enough: delta(n) <= 2, so the bound is informative.
    unwrap_feasible: delta(n) + 2*M/(m - 1) < 1, under which the branch
    corrections of the unwrapping stage are exact.
    """

    value: float
    small_enough: bool
    unwrap_feasible: bool


def sup_error_scale(d: int, sigma: float, M: float, n: int) -> SupErrorScale:
    """delta(n) = 6*(8*pi*M)^(d/(d+2)) * (32*((4*pi^2*sigma^2+2)/3 + pi*sigma))^(2/(d+2))
    * (log(n)/n)^(1/(d+2)); one quarter of it bounds the wrap error of the
    denoised samples with probability >= 1 - 1/n."""
    if M <= 0 or sigma < 0 or n < 2:
        raise ValueError("invalid inputs")
    c_sigma = (4.0 * np.pi ** 2 * sigma ** 2 + 2.0) / 3.0 + np.pi * sigma
    gamma = 6.0 * (8.0 * np.pi * M) ** (d / (d + 2)) * (32.0 * c_sigma) ** (2.0 / (d + 2))
    value = gamma * (math.log(n) / n) ** (1.0 / (d + 2))
    m = round(n ** (1.0 / d))
    while m ** d > n:
        m -= 1
    while (m + 1) ** d <= n:
        m += 1
    feasible = m >= 2 and value + 2.0 * M / (m - 1) < 1.0
    return SupErrorScale(
        value=float(value),
        small_enough=bool(value <= 2.0),
        unwrap_feasible=bool(feasible),
    )


def bernstein_tail_bound(t: float, K: float, var_sum: float) -> float:
    """Bernstein tail 2*exp(-t^2/2 / (var_sum + K*t/3)) for sums of centered
    variables bounded by K with total variance var_sum."""
    if t <= 0 or K <= 0 or var_sum < 0:
        raise ValueError("invalid inputs")
    return 2.0 * math.exp(-(t ** 2) / 2.0 / (var_sum + K * t / 3.0))
