"""Maximum-excursion statistic and its sliding backward/forward variants.

The scalar statistic is the maximal distance from the start point,
scaled by the elapsed time and the estimated diffusion coefficient; it
is invariant to position scaling and to the time step. The sliding pass
computes the same statistic on the k-point windows ending (B) and
starting (A) at every admissible index, classifies each against two
cut-offs, and emits the difference signal Q.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidParam, NoMotion, NoMotionWindow, TooShort, WindowTooLarge
from .trajectory import Segment

SUBDIFFUSIVE = 1
SUPERDIFFUSIVE = 2
NEUTRAL = 0


@dataclass(frozen=True)
class ThresholdPair:
    """Classification cut-offs gamma1 < gamma2.

    gamma1 = 0 with gamma2 = inf is admitted as the degenerate pair that
    classifies everything as Brownian (useful as a null in experiments);
    calibrated pairs are always strictly positive.
    """

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not 0 <= self.gamma1 < self.gamma2:
            raise InvalidParam(f"need 0 <= gamma1 < gamma2, got ({self.gamma1}, {self.gamma2})")


@dataclass(frozen=True)
class SlidingStats:
    """Per-index backward/forward statistics over i = k .. n-k.

    Arrays are aligned: entry j corresponds to trajectory index k + j.
    """

    k: int
    first_index: int
    B: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    phi_B: np.ndarray = field(repr=False)
    phi_A: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)

    @property
    def indices(self):
        return np.arange(self.first_index, self.first_index + len(self.B))


def phi(x, thresholds):
    """Three-level step function: 1 below gamma1, 2 above gamma2, else 0."""
    x = np.asarray(x)
    return np.where(
        x < thresholds.gamma1, SUBDIFFUSIVE, np.where(x > thresholds.gamma2, SUPERDIFFUSIVE, NEUTRAL)
    )


def _step_norms_sq(positions):
    steps = np.diff(positions, axis=0)
    return np.einsum("ij,ij->i", steps, steps)


def estimate_sigma2(traj, seg=None):
    """Diffusion-coefficient estimate from mean squared step length.

    sigma2_hat = (1 / (m d delta)) * sum of squared step norms over the
    m steps of the segment; unbiased for Brownian motion in d dimensions.
    """
    if seg is None:
        seg = Segment(0, traj.n_steps)
    if seg.n_points < 2:
        raise TooShort("segment needs at least 2 points")
    ssq = _step_norms_sq(traj.positions[seg.start_index : seg.end_index + 1])
    total = math.fsum(ssq)
    if total == 0.0:
        raise NoMotion("all steps are zero; diffusion coefficient undefined")
    return total / (seg.n_steps * traj.dim * traj.grid.delta)


def statistic_T(traj, seg=None):
    """Scaled maximum excursion from the segment's start point.

    T = max_i ||X_{t_i} - X_{t_0}|| / sqrt((t_n - t_0) sigma2_hat).
    Under the Brownian null its law depends only on the number of steps.
    """
    if seg is None:
        seg = Segment(0, traj.n_steps)
    if seg.n_steps < 2:
        raise TooShort("statistic needs at least 2 steps")
    sigma2 = estimate_sigma2(traj, seg)
    pos = traj.positions[seg.start_index : seg.end_index + 1]
    disp = pos[1:] - pos[0]
    excursion = np.sqrt(np.einsum("ij,ij->i", disp, disp)).max()
    span = seg.n_steps * traj.grid.delta
    return excursion / math.sqrt(span * sigma2)


def backward_forward(traj, k):
    """Arrays (B, A) of the windowed statistics for i = k .. n-k.

    B_i uses the window X_{t_{i-k}} .. X_{t_i} with reference point
    X_{t_i}; A_i mirrors it forward. Both denominators use the window
    span k*delta and the diffusion estimate from that window's own
    steps. Raises NoMotionWindow if any window has zero motion.
    """
    n = traj.n_steps
    if k < 1 or k > n // 2:
        raise WindowTooLarge(f"need 1 <= k <= n/2 = {n // 2}, got {k}")
    pos = traj.positions
    d = traj.dim
    delta = traj.grid.delta

    ssq = _step_norms_sq(pos)
    # Left-to-right accumulation keeps each window sum identical to a
    # naive sequential loop over that window.
    win_ssq = np.add.accumulate(sliding_window_view(ssq, k), axis=1)[:, -1]
    # win_ssq[j] = sum of squared steps j .. j+k-1 (step j links points j, j+1).
    idx = np.arange(k, n - k + 1)
    sig2_back = win_ssq[idx - k] / (k * d * delta)
    sig2_fwd = win_ssq[idx] / (k * d * delta)
    bad = np.flatnonzero((sig2_back == 0) | (sig2_fwd == 0))
    if bad.size:
        raise NoMotionWindow(int(idx[bad[0]]))

    windows = sliding_window_view(pos, k + 1, axis=0)  # (n+1-k, d, k+1)
    back = windows[idx - k]
    diff_b = back[:, :, :-1] - back[:, :, -1:]
    max_b = np.sqrt(np.einsum("mdj,mdj->mj", diff_b, diff_b)).max(axis=1)
    fwd = windows[idx]
    diff_f = fwd[:, :, 1:] - fwd[:, :, :1]
    max_f = np.sqrt(np.einsum("mdj,mdj->mj", diff_f, diff_f)).max(axis=1)

    span = k * delta
    B = max_b / np.sqrt(span * sig2_back)
    A = max_f / np.sqrt(span * sig2_fwd)
    return B, A


def sliding_stats(traj, k, thresholds):
    """Full sliding pass: B, A, their classifications and the Q signal."""
    B, A = backward_forward(traj, k)
    phi_B = phi(B, thresholds)
    phi_A = phi(A, thresholds)
    return SlidingStats(
        k=k, first_index=k, B=B, A=A, phi_B=phi_B, phi_A=phi_A, Q=phi_A - phi_B
    )


def empirical_msd(traj, max_lag):
    """Time-averaged mean squared displacement at lags 1 .. max_lag.

    Returns a list of (lag * delta, msd) pairs. Diagnostic only; the
    detector never uses it.
    """
    n = traj.n_steps
    if not 1 <= max_lag < n:
        raise TooShort(f"need 1 <= max_lag < n = {n}, got {max_lag}")
    pos = traj.positions
    out = []
    for lag in range(1, max_lag + 1):
        disp = pos[lag:] - pos[:-lag]
        out.append((lag * traj.grid.delta, float(np.einsum("ij,ij->i", disp, disp).mean())))
    return out
