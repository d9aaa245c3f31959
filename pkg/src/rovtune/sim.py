"""Fixed-step time-domain simulation of LTI step responses and the PI loop.

The integrator is classical 4th-order Runge-Kutta. For a linear system driven
by a constant reference, one RK4 step is the affine map

    x+ = R x + s,   R = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24,
                    s = h (I + hA/2 + (hA)^2/6 + (hA)^3/24) B u,

so the hot loop is a single matrix-vector recurrence (jitted below). With
saturation enabled the loop is nonlinear and falls back to staged RK4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .lti import AlgebraicLoop, Polynomial, TransferFunction, to_state_space

# realizations are pure functions of the (immutable) transfer function
_realize = lru_cache(maxsize=128)(to_state_space)

_BLOWUP_LIMIT = 1e12


class ZeroController(ValueError):
    """PI gains are both zero; there is no controller to realize."""


class NumericalBlowup(RuntimeError):
    """A state magnitude exceeded 1e12 during integration."""

    def __init__(self, time: float, peak_error: float):
        super().__init__(f"state magnitude exceeded 1e12 at t = {time:.6g} s")
        self.time = time
        self.peak_error = peak_error


@dataclass(frozen=True)
class PIGains:
    """Proportional/integral gains of the steering controller."""

    kp: float
    ki: float

    def __post_init__(self) -> None:
        kp, ki = float(self.kp), float(self.ki)
        if not (math.isfinite(kp) and math.isfinite(ki)):
            raise ValueError("gains must be finite")
        if kp < 0.0 or ki < 0.0:
            raise ValueError(f"gains must be nonnegative, got kp={kp}, ki={ki}")
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "ki", ki)


@dataclass(frozen=True)
class SimConfig:
    """Uniform-grid step-response settings.

    The horizon must be an integer number of steps: t_final/dt has to round
    to an integer within 1e-9.
    """

    dt: float = 1e-3
    t_final: float = 15.0
    reference_amplitude: float = 1.0
    saturation: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final < 10.0 * self.dt:
            raise ValueError(f"t_final={self.t_final} is shorter than 10*dt")
        ratio = self.t_final / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"t_final/dt = {ratio} does not round to an integer step count")
        if not math.isfinite(self.reference_amplitude):
            raise ValueError("reference amplitude must be finite")
        if self.saturation is not None and not self.saturation > 0.0:
            raise ValueError("saturation limit must be positive when given")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class SimTrace:
    """Sampled closed-loop signals on the grid t[k] = k*dt, including t = 0.

    r is the reference, e = r - y the tracking error (exact as stored),
    u the actuation, y the output.
    """

    dt: float
    t: np.ndarray
    r: np.ndarray
    e: np.ndarray
    u: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        arrays = {}
        n = None
        for name in ("t", "r", "e", "u", "y"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1 or (n is not None and len(a) != n):
                raise ValueError("trace arrays must be 1-D and of equal length")
            n = len(a)
            if not np.isfinite(a).all():
                raise ValueError(f"trace array {name!r} contains non-finite samples")
            arrays[name] = a
        if n < 2:
            raise ValueError("a trace needs at least two samples")
        k = np.arange(n)
        grid = k * self.dt
        if np.any(np.abs(arrays["t"] - grid) > np.spacing(np.abs(grid))):
            raise ValueError("t is not the uniform grid k*dt")
        if not np.array_equal(arrays["e"], arrays["r"] - arrays["y"]):
            raise ValueError("error channel violates e = r - y")
        for a in arrays.values():
            a.setflags(write=False)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return len(self.t)


def _assemble_trace(dt: float, t: np.ndarray, r: np.ndarray, u: np.ndarray, y: np.ndarray) -> SimTrace:
    # internal fast path: invariants hold by construction, skip re-validation
    trace = object.__new__(SimTrace)
    e = r - y
    for a in (t, r, e, u, y):
        a.setflags(write=False)
    for name, a in (("t", t), ("r", r), ("e", e), ("u", u), ("y", y)):
        object.__setattr__(trace, name, a)
    object.__setattr__(trace, "dt", float(dt))
    return trace


_GRID_CACHE: dict[tuple[float, int], np.ndarray] = {}


def _grid(dt: float, n_steps: int) -> np.ndarray:
    key = (dt, n_steps)
    t = _GRID_CACHE.get(key)
    if t is None:
        t = np.arange(n_steps + 1) * dt
        t.setflags(write=False)
        _GRID_CACHE[key] = t
    return t


@njit(cache=True, nogil=True)
def _scan_affine(R, s, n_steps):
    """x_{k+1} = R x_k + s from x_0 = 0. Returns the (n_steps+1, n) state
    trajectory and the first sample index with any |state| > 1e12 (-1 if none)."""
    n = R.shape[0]
    out = np.empty((n_steps + 1, n))
    for i in range(n):
        out[0, i] = 0.0
    blow = -1
    for k in range(n_steps):
        ok = True
        for i in range(n):
            acc = s[i]
            for j in range(n):
                acc += R[i, j] * out[k, j]
            out[k + 1, i] = acc
            if not (-1e12 <= acc <= 1e12):
                ok = False
        if blow < 0 and not ok:
            blow = k + 1
    return out, blow


@njit(cache=True, nogil=True)
def _scan_affine3(R, s, n_steps):
    """Order-3 specialization of _scan_affine (bit-identical output)."""
    out = np.empty((n_steps + 1, 3))
    r00, r01, r02 = R[0, 0], R[0, 1], R[0, 2]
    r10, r11, r12 = R[1, 0], R[1, 1], R[1, 2]
    r20, r21, r22 = R[2, 0], R[2, 1], R[2, 2]
    s0, s1, s2 = s[0], s[1], s[2]
    x0 = x1 = x2 = 0.0
    out[0, 0] = 0.0
    out[0, 1] = 0.0
    out[0, 2] = 0.0
    blow = -1
    for k in range(n_steps):
        y0 = s0 + r00 * x0 + r01 * x1 + r02 * x2
        y1 = s1 + r10 * x0 + r11 * x1 + r12 * x2
        y2 = s2 + r20 * x0 + r21 * x1 + r22 * x2
        x0, x1, x2 = y0, y1, y2
        out[k + 1, 0] = x0
        out[k + 1, 1] = x1
        out[k + 1, 2] = x2
        if blow < 0 and not (
            -1e12 <= x0 <= 1e12 and -1e12 <= x1 <= 1e12 and -1e12 <= x2 <= 1e12
        ):
            blow = k + 1
    return out, blow


def _scan(R: np.ndarray, s: np.ndarray, n_steps: int):
    if R.shape[0] == 3:
        return _scan_affine3(R, s, n_steps)
    return _scan_affine(R, s, n_steps)


def _rk4_affine(A: np.ndarray, b: np.ndarray, h: float):
    """One-step RK4 propagator (R, s) for x' = A x + b with b constant."""
    n = A.shape[0]
    hA = h * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    eye = np.eye(n)
    R = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 @ hA / 24.0
    s = h * ((eye + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) @ b)
    return R, s


def _raise_blowup(dt: float, r: np.ndarray, y_prefix: np.ndarray, blow: int):
    peak = float(np.max(np.abs(r[: len(y_prefix)] - y_prefix))) if len(y_prefix) else 0.0
    raise NumericalBlowup(time=blow * dt, peak_error=peak)


def simulate_step(sys: TransferFunction, cfg: SimConfig) -> SimTrace:
    """Step response of a proper LTI system via fixed-step RK4.

    The reference (= the system input here) is an ideal step of
    cfg.reference_amplitude applied at t = 0.
    """
    ss = _realize(sys)
    n, N = ss.order, cfg.steps
    amp = cfg.reference_amplitude
    t = _grid(cfg.dt, N)
    r = np.full(N + 1, amp)
    if n == 0:
        y = np.full(N + 1, ss.D * amp)
        return _assemble_trace(cfg.dt, t, r, r, y)
    R, s = _rk4_affine(ss.A, ss.B[:, 0] * amp, cfg.dt)
    Z, blow = _scan(R, s, N)
    c = ss.C[0]
    if blow >= 0:
        _raise_blowup(cfg.dt, r, Z[:blow] @ c + ss.D * amp, blow)
    y = Z @ c + ss.D * amp
    return _assemble_trace(cfg.dt, t, r, r, y)


def pi_tf(gains: PIGains) -> TransferFunction:
    """PI control law as the transfer function (kp s + ki)/s."""
    if gains.kp == 0.0 and gains.ki == 0.0:
        raise ZeroController("kp = ki = 0 is not a controller")
    return TransferFunction(Polynomial((gains.kp, gains.ki)), Polynomial((1.0, 0.0)))


def _pi_closed_loop_matrices(plant_ss, gains: PIGains, amp: float):
    """Augmented loop state z = [x_plant, q] with q' = e; returns (Acl, bcl, beta)."""
    A, b, c, D = plant_ss.A, plant_ss.B[:, 0], plant_ss.C[0], plant_ss.D
    kp, ki = gains.kp, gains.ki
    denom = 1.0 + kp * D
    if denom == 0.0:
        raise AlgebraicLoop("direct plant feedthrough makes the PI loop non-causal")
    beta = 1.0 / denom
    n = plant_ss.order
    Acl = np.zeros((n + 1, n + 1))
    Acl[:n, :n] = A - beta * kp * np.outer(b, c)
    Acl[:n, n] = beta * ki * b
    Acl[n, :n] = -beta * c
    Acl[n, n] = -D * beta * ki
    bcl = np.zeros(n + 1)
    bcl[:n] = beta * kp * b * amp
    bcl[n] = beta * amp
    return Acl, bcl, beta


def simulate_pi_loop(plant: TransferFunction, gains: PIGains, cfg: SimConfig) -> SimTrace:
    """Unit-feedback PI loop around the plant: e = r - y, u = kp e + ki int(e).

    The error integral is a state integrated by the same RK4 scheme, with the
    PI law evaluated continuously inside the stages. With cfg.saturation set,
    u is clamped to +-limit after the PI law and the integrator freezes while
    the actuator is saturated and the error would drive it further in
    (conditional-integration anti-windup).
    """
    ss = _realize(plant)
    if cfg.saturation is not None:
        return _simulate_pi_saturated(ss, gains, cfg)
    n, N = ss.order, cfg.steps
    amp = cfg.reference_amplitude
    kp, ki = gains.kp, gains.ki
    Acl, bcl, beta = _pi_closed_loop_matrices(ss, gains, amp)
    R, s = _rk4_affine(Acl, bcl, cfg.dt)
    Z, blow = _scan(R, s, N)
    c, D = ss.C[0], ss.D
    t = _grid(cfg.dt, N)
    r = np.full(N + 1, amp)

    def output(states):
        cx = states[:, :n] @ c if n else np.zeros(len(states))
        q = states[:, n]
        if D == 0.0:  # beta == 1, y == cx
            e = amp - cx
            return cx, kp * e + ki * q
        y = beta * cx + D * beta * ki * q + D * beta * kp * amp
        u = beta * (kp * (amp - cx) + ki * q)
        return y, u

    if blow >= 0:
        y_prefix, _ = output(Z[:blow])
        _raise_blowup(cfg.dt, r, y_prefix, blow)
    y, u = output(Z)
    return _assemble_trace(cfg.dt, t, r, u, y)


def _simulate_pi_saturated(ss, gains: PIGains, cfg: SimConfig) -> SimTrace:
    """Staged RK4 for the saturated (nonlinear) PI loop."""
    A, b, c, D = ss.A, ss.B[:, 0], ss.C[0], ss.D
    n, N = ss.order, cfg.steps
    amp, h = cfg.reference_amplitude, cfg.dt
    kp, ki = gains.kp, gains.ki
    limit = cfg.saturation
    denom = 1.0 + kp * D
    if denom == 0.0:
        raise AlgebraicLoop("direct plant feedthrough makes the PI loop non-causal")
    beta = 1.0 / denom

    def law(z):
        # unsaturated loop solve, then clamp; freeze q while driven into the limit
        x, q = z[:n], z[n]
        cx = float(c @ x) if n else 0.0
        u_star = beta * (kp * (amp - cx) + ki * q)
        u = min(max(u_star, -limit), limit)
        y = cx + D * u
        e = amp - y
        frozen = (u_star > limit and e > 0.0) or (u_star < -limit and e < 0.0)
        dz = np.empty(n + 1)
        dz[:n] = A @ x + b * u if n else ()
        dz[n] = 0.0 if frozen else e
        return dz, u, y

    z = np.zeros(n + 1)
    t = _grid(h, N)
    r = np.full(N + 1, amp)
    u_out = np.empty(N + 1)
    y_out = np.empty(N + 1)
    for k in range(N + 1):
        d1, u_out[k], y_out[k] = law(z)
        if not np.all(np.abs(z) <= _BLOWUP_LIMIT):  # NaN-safe
            _raise_blowup(h, r, y_out[:k], k)
        if k == N:
            break
        d2, _, _ = law(z + 0.5 * h * d1)
        d3, _, _ = law(z + 0.5 * h * d2)
        d4, _, _ = law(z + h * d3)
        z = z + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    return _assemble_trace(h, t, r, u_out, y_out)
