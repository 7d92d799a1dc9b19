"""Adaptive explicit integration shared by the exact and cumulant solvers.

Implements the Dormand-Prince 5(4) embedded pair with a quartic dense-output
interpolant, proportional step control, threshold-crossing location by
bisection on the dense output, and trailing-window steady-state detection.
State vectors may be real or complex; observables are linear maps of the
state and are recorded (with dense interpolation) at every accepted step.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "ObservableMap",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "detect_event",
    "detect_steady_state",
]

# Dormand-Prince 5(4) tableau, error weights and dense-output polynomial.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = (
    np.array([], dtype=float),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Error weights include the FSAL stage f(t + h, y_new).
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


class IntegrationError(RuntimeError):
    """Raised on step-size underflow or a non-finite right-hand side."""


@dataclass
class IntegratorConfig:
    """Tolerances, horizon and steady-state detection parameters."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    t_end: float = 1.0
    steady_window: float | None = None
    steady_slope: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Threshold crossing of one observable in a given direction."""

    observable: str | int
    threshold: float
    direction: str = "rising"  # "rising" or "falling"

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise ValueError("event threshold must be finite")
        if self.direction not in ("rising", "falling"):
            raise ValueError(f"unknown direction {self.direction!r}")


class ObservableMap:
    """Real observables obs = Re(A @ y + B @ conj(y)) + const.

    Linearity in the integration state is what allows dense interpolation of
    the observables from the projected Runge-Kutta stages alone.
    """

    def __init__(self, names, matrix, conj_matrix=None, const=None):
        self.names = tuple(names)
        self.matrix = np.asarray(matrix)
        self.conj_matrix = None if conj_matrix is None else np.asarray(conj_matrix)
        self.const = np.zeros(len(self.names)) if const is None else np.asarray(const, dtype=float)
        if self.matrix.shape[0] != len(self.names):
            raise ValueError("one matrix row per observable name required")

    @classmethod
    def identity(cls, n, names=None):
        names = names if names is not None else tuple(f"y{i}" for i in range(n))
        return cls(names, np.eye(n))

    def index_of(self, key) -> int:
        if isinstance(key, str):
            return self.names.index(key)
        return int(key)

    def _project(self, vec):
        out = self.matrix @ vec
        if self.conj_matrix is not None:
            out = out + self.conj_matrix @ np.conj(vec)
        return out

    def __call__(self, y) -> np.ndarray:
        return np.real(self._project(y)) + self.const

    def project_stages(self, stages) -> np.ndarray:
        """Map stage derivatives (k, n) -> real (k, n_obs); const drops out."""
        return np.real(self._project(stages.T).T)


@dataclass
class Trajectory:
    """Accepted-step times, observables there, and dense observable output."""

    t: np.ndarray
    obs: np.ndarray
    names: tuple
    seg_coef: np.ndarray  # (steps, 4, n_obs) dense-output polynomial coefficients
    final_state: np.ndarray
    final_t: float
    state_t: np.ndarray = field(default_factory=lambda: np.empty(0))
    states: list = field(default_factory=list)
    nfev: int = 0
    naccepted: int = 0
    nrejected: int = 0

    def index_of(self, key) -> int:
        if isinstance(key, str):
            return self.names.index(key)
        return int(key)

    def obs_at(self, times, key=None):
        """Dense observable values at arbitrary times within the span."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < self.t[0] - 1e-12) or np.any(times > self.t[-1] + 1e-12):
            raise ValueError("requested times outside the integrated span")
        seg = np.clip(np.searchsorted(self.t, times, side="right") - 1, 0, len(self.t) - 2)
        t0 = self.t[seg]
        h = self.t[seg + 1] - t0
        theta = np.clip((times - t0) / h, 0.0, 1.0)
        powers = np.stack([theta, theta**2, theta**3, theta**4], axis=1)  # (m, 4)
        vals = self.obs[seg] + h[:, None] * np.einsum("mk,mko->mo", powers, self.seg_coef[seg])
        if key is None:
            return vals
        return vals[:, self.index_of(key)]


def _error_norm(delta, scale):
    return math.sqrt(float(np.mean((np.abs(delta) / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, rel_tol, abs_tol, t_end, max_step):
    """Hairer-Norsett-Wanner starting step heuristic."""
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((np.abs(y0) / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((np.abs(f0) / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * (t_end - t0))
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean((np.abs(f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, t_end - t0)


def integrate(rhs, y0, config: IntegratorConfig, *, t0=0.0, t_end=None,
              obs: ObservableMap | None = None, state_sample_times=None) -> Trajectory:
    """Integrate dy/dt = rhs(t, y) from t0 to t_end with local error control.

    ``obs`` projects the state onto the recorded observables (identity when
    omitted).  ``state_sample_times`` requests copies of the raw state at the
    first accepted node past each time (plus the final state, always kept).
    """
    t_end = config.t_end if t_end is None else float(t_end)
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    y = np.asarray(y0).copy()
    if obs is None:
        obs = ObservableMap.identity(y.size)

    f = rhs(t0, y)
    if not np.all(np.isfinite(np.abs(f))):
        raise IntegrationError("non-finite derivative at the initial state")
    nfev = 1

    sample_times = [] if state_sample_times is None else sorted(float(s) for s in state_sample_times)
    sample_pos = 0

    ts = [t0]
    obs_list = [obs(y)]
    coefs = []
    states_t, states = [], []
    naccepted = nrejected = 0

    h = _initial_step(rhs, t0, y, f, config.rel_tol, config.abs_tol, t_end, config.max_step)
    nfev += 1
    t = t0
    K = np.empty((7, y.size), dtype=np.result_type(y.dtype, np.float64))
    hmin_floor = 1e-14

    while t < t_end:
        h = min(h, config.max_step, t_end - t)
        if h < hmin_floor * max(abs(t), abs(t_end)):
            raise IntegrationError(f"step size underflow at t = {t:.6g}")

        K[0] = f
        for s in range(1, 6):
            K[s] = rhs(t + _C[s] * h, y + h * (_A[s] @ K[:s]))
        y_new = y + h * (_B @ K[:6])
        f_new = rhs(t + h, y_new)
        K[6] = f_new
        nfev += 6

        if not np.all(np.isfinite(np.abs(y_new))) or not np.all(np.isfinite(np.abs(f_new))):
            nrejected += 1
            h *= 0.25
            continue

        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _error_norm(h * (_E @ K), scale)
        if err > 1.0:
            nrejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue

        coefs.append(_P.T @ obs.project_stages(K))
        t_new = t + h
        ts.append(t_new)
        obs_list.append(obs(y_new))
        naccepted += 1

        while sample_pos < len(sample_times) and t_new >= sample_times[sample_pos]:
            states_t.append(t_new)
            states.append(y_new.copy())
            sample_pos += 1

        y, f, t = y_new, f_new, t_new
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        h *= max(_MIN_FACTOR, factor)

    return Trajectory(
        t=np.array(ts),
        obs=np.array(obs_list),
        names=obs.names,
        seg_coef=np.array(coefs) if coefs else np.empty((0, 4, len(obs.names))),
        final_state=y,
        final_t=t,
        state_t=np.array(states_t),
        states=states,
        nfev=nfev,
        naccepted=naccepted,
        nrejected=nrejected,
    )


def detect_event(traj: Trajectory, event: EventSpec, *, rel_time_tol=1e-6):
    """Earliest crossing time of the event threshold, or None when absent.

    The bracketing interval is found on the accepted-step grid and refined by
    bisection on the dense output; integration failures surface earlier as
    IntegrationError, so a None here genuinely means "no crossing".
    """
    idx = traj.index_of(event.observable)
    vals = traj.obs[:, idx] - event.threshold
    rising = event.direction == "rising"
    for k in range(len(vals) - 1):
        lo_v, hi_v = vals[k], vals[k + 1]
        crossed = (lo_v < 0.0 <= hi_v) if rising else (lo_v > 0.0 >= hi_v)
        if not crossed:
            continue
        lo, hi = traj.t[k], traj.t[k + 1]
        while hi - lo > rel_time_tol * max(abs(hi), 1e-300):
            mid = 0.5 * (lo + hi)
            v = traj.obs_at(mid, idx)[0] - event.threshold
            if (v >= 0.0) == rising:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)
    return None


def detect_steady_state(traj: Trajectory, *, window: float, slope: float, names=None):
    """Earliest time T with max |d obs/dt| below ``slope`` on [T - window, T].

    Slopes are finite differences between accepted steps of the selected
    observables (default: all of them).  Returns None when no trailing window
    of the required length qualifies before the end of the trajectory.
    """
    if window <= 0 or slope <= 0:
        raise ValueError("window and slope threshold must be positive")
    if names is None:
        cols = np.arange(traj.obs.shape[1])
    else:
        cols = np.array([traj.index_of(n) for n in names])
    t = traj.t
    if len(t) < 2:
        return None
    dt = np.diff(t)
    rates = np.max(np.abs(np.diff(traj.obs[:, cols], axis=0)) / dt[:, None], axis=1)
    below = rates < slope

    # Earliest start u of a streak of below-threshold intervals covering
    # [u, u + window]; the steady time is then u + window.
    streak_start = None
    for k, ok in enumerate(below):
        if ok and streak_start is None:
            streak_start = t[k]
        elif not ok:
            if streak_start is not None and t[k] - streak_start >= window:
                return streak_start + window
            streak_start = None
    if streak_start is not None and t[-1] - streak_start >= window:
        return streak_start + window
    return None
