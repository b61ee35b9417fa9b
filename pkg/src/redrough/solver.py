"""Picard fixed-point solver for ``dY = F(Y) dX`` driven by a reduced rough path.

On a window ``[t_a, t_b]`` the map

    (Y, Y') -> (xi + int F(Y) dX, F(Y))

is iterated from the canonical center ``P = xi + F(xi) X[a, .]``,
``P' = F(xi)``.  Successive sup-distances are logged; a window is accepted
when every logged ratio is at most ``contraction_target`` and the iterates
stay in the ball ``||Y - P, Y' - P'|| <= ball_radius``.  Otherwise the window
is halved.  Windows are concatenated over ``[0, T]`` with ``Y' = F(Y)``
re-derived at every junction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .controlled import ControlledPath, act, compose, controlled_norms
from .errors import (
    DimensionMismatch,
    InvalidExponent,
    MaxItersExceeded,
    NonFiniteOutput,
    StepTooSmall,
)
from .functions import SmoothFunction
from .grid import holder_seminorm, two_param_seminorm
from .rough_path import ReducedRoughPath
from .sewing import integral_as_controlled, integrate, sewing_constant
from .tensor import frob


def default_alpha(beta: float) -> float:
    """``beta - 0.05`` clipped into ``(1/3, beta)``."""
    lo = 1.0 / 3.0
    a = beta - 0.05
    if a <= lo:
        a = 0.5 * (lo + beta)
    return a


@dataclass
class SolverConfig:
    beta: float | None = None  # driver exponent; defaults to the rough path's alpha
    alpha: float | None = None  # working exponent; defaults to beta - 0.05
    tau_init: float | None = None  # defaults to the horizon
    tau_min: float = 1e-9
    contraction_target: float = 0.5
    max_picard_iters: int = 200
    fixed_point_tol: float = 1e-12
    ball_radius: float | None = 1.0  # None: monitor the ball without gating on it
    budget: str = "dyadic"
    monitor_every: int = 0  # 0: seminorm distance only at the end of a window
    tau_policy: str = "empirical"  # or "theory"

    def resolve(self, r: ReducedRoughPath) -> SolverConfig:
        beta = r.alpha if self.beta is None else float(self.beta)
        if not (1.0 / 3.0 < beta <= 0.5):
            raise InvalidExponent(f"beta = {beta} is outside the reduced rough path regime (1/3, 1/2]")
        alpha = default_alpha(beta) if self.alpha is None else float(self.alpha)
        if not (1.0 / 3.0 < alpha < beta):
            raise InvalidExponent(f"working exponent {alpha} must lie in (1/3, beta = {beta})")
        t = r.grid.horizon
        tau = t if self.tau_init is None else float(self.tau_init)
        if not (0 < self.tau_min <= tau):
            raise ValueError("need 0 < tau_min <= tau_init")
        if not (0 < self.contraction_target < 1):
            raise ValueError("contraction_target must lie in (0, 1)")
        if self.tau_policy not in ("empirical", "theory"):
            raise ValueError(f"unknown tau policy {self.tau_policy!r}")
        out = SolverConfig(**asdict(self))
        out.beta, out.alpha, out.tau_init = beta, alpha, min(tau, t)
        return out


@dataclass
class StepLog:
    interval: tuple[float, float]
    indices: tuple[int, int]
    iterations: int
    ratios: list[float]
    final_ratio: float
    tau: float
    in_ball: bool
    seminorm: float
    halvings: int


@dataclass
class SolveReport:
    solution: ControlledPath
    steps: list[StepLog]
    residual_norm: float
    global_solution: bool
    theory_tau: float
    config: SolverConfig
    xi: np.ndarray = field(default=None)

    def to_json(self) -> dict:
        return {
            "schema": "redrough.solve_report/1",
            "config": asdict(self.config),
            "global": self.global_solution,
            "residual_norm": self.residual_norm,
            "theory_tau": self.theory_tau,
            "xi": np.asarray(self.xi).tolist(),
            "steps": [
                {
                    "interval": list(s.interval),
                    "indices": list(s.indices),
                    "iterations": s.iterations,
                    "ratios": s.ratios,
                    "final_ratio": s.final_ratio,
                    "tau": s.tau,
                    "in_ball": s.in_ball,
                    "seminorm": s.seminorm,
                    "halvings": s.halvings,
                }
                for s in self.steps
            ],
        }


class _Reject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _check_field(xi: np.ndarray, f: SmoothFunction, r: ReducedRoughPath) -> None:
    n = f.domain_dim
    if xi.shape != (n,):
        raise DimensionMismatch(f"initial value must have shape ({n},), got {xi.shape}")
    if f.codomain != (n, r.dim):
        raise DimensionMismatch(f"field must map R^{n} to L(R^{r.dim}, R^{n}); codomain is {f.codomain}")


def canonical_center(xi, f: SmoothFunction, r: ReducedRoughPath, window: tuple[int, int] | None = None) -> ControlledPath:
    """``P_t = xi + F(xi) X[a, t]``, ``P'_t = F(xi)`` on the window (shifted to start at 0)."""
    xi = np.asarray(xi, dtype=np.float64).reshape(-1)
    _check_field(xi, f, r)
    sub = r if window is None else r.restrict(*window)
    fx = f(xi)
    m = sub.grid.times.size
    inc = sub.x - sub.x[0]
    y = xi + act(np.broadcast_to(fx, (m,) + fx.shape), inc)
    return ControlledPath(sub, y, np.broadcast_to(fx, (m,) + fx.shape))


def picard_map(y: ControlledPath, f: SmoothFunction, xi, r: ReducedRoughPath | None = None) -> ControlledPath:
    """``(xi + int F(Y) dX, F(Y))`` on the base of ``y``."""
    r = y.base if r is None else r
    y.require_base(r)
    xi = np.asarray(xi, dtype=np.float64).reshape(-1)
    try:
        xi_path = compose(f, y)
        z = integral_as_controlled(xi_path, r)
        return ControlledPath(r, xi + z.y, z.y_prime)
    except (ValueError, FloatingPointError) as exc:
        if isinstance(exc, DimensionMismatch):
            raise
        raise NonFiniteOutput(f"Picard iterate is not finite: {exc}") from exc


def _distance(a: ControlledPath, b: ControlledPath) -> float:
    w = len(a.vshape)
    dy = float(np.max(frob(a.y - b.y, w)))
    dyp = float(np.max(frob(a.y_prime - b.y_prime, w + 1)))
    return dy + dyp


def _ball_seminorm(y: ControlledPath, center: ControlledPath, cfg: SolverConfig) -> float:
    return controlled_norms(y - center, cfg.budget, cfg.alpha).seminorm


def solve_local(
    xi,
    f: SmoothFunction,
    r: ReducedRoughPath,
    window: tuple[int, int],
    cfg: SolverConfig,
    initial: ControlledPath | None = None,
    gate: bool = True,
) -> tuple[ControlledPath, StepLog]:
    """Iterate the Picard map on one window.

    Raises the internal ``_Reject`` when ``gate`` is set and the window
    violates the ball or the contraction target.
    """
    xi = np.asarray(xi, dtype=np.float64).reshape(-1)
    center = canonical_center(xi, f, r, window)
    sub = center.base
    y = center if initial is None else initial
    if initial is not None:
        initial.require_base(sub)
    scale = max(1.0, float(np.max(np.abs(center.y))))
    tol = cfg.fixed_point_tol * scale
    ratios: list[float] = []
    prev_d = None
    in_ball, semi = True, 0.0
    for it in range(1, cfg.max_picard_iters + 1):
        nxt = picard_map(y, f, xi, sub)
        d = _distance(nxt, y)
        scale = max(scale, float(np.max(np.abs(nxt.y))))
        tol = cfg.fixed_point_tol * scale
        if prev_d is not None and prev_d > 0:
            ratios.append(d / prev_d)
            if gate and ratios[-1] > cfg.contraction_target and d > tol:
                raise _Reject("contraction")
        if cfg.monitor_every and it % cfg.monitor_every == 0:
            semi = _ball_seminorm(nxt, center, cfg)
            in_ball = cfg.ball_radius is None or semi <= cfg.ball_radius
            if gate and cfg.ball_radius is not None and not in_ball:
                raise _Reject("ball")
        y = nxt
        if d <= tol:
            break
        prev_d = d
    else:
        raise MaxItersExceeded(f"no fixed point after {cfg.max_picard_iters} Picard iterations on window {window}")
    # the accepted iterate with Y' re-derived from Y
    sol = ControlledPath(sub, y.y, f(y.y))
    semi = _ball_seminorm(sol, center, cfg)
    in_ball = cfg.ball_radius is None or semi <= cfg.ball_radius
    if gate and not in_ball:
        raise _Reject("ball")
    t = r.grid.times
    final = ratios[-1] if ratios else 0.0
    log = StepLog(
        (float(t[window[0]]), float(t[window[1]])),
        (int(window[0]), int(window[1])),
        it,
        ratios,
        final,
        float(t[window[1]] - t[window[0]]),
        bool(in_ball),
        float(semi),
        0,
    )
    return sol, log


def theory_tau(f: SmoothFunction, r: ReducedRoughPath, cfg: SolverConfig, xi=None) -> float:
    """Step length solving ``K tau^(beta - alpha) = 1/2`` from the invariance estimate.

    ``K = |F|_C1 ((|F|_inf + 1) |X|_b + 1) + C_a (|F|_C1^2 + C_c M^2 |F|_C2)``
    with ``C_c`` the composition constant.  Usually far below the grid mesh;
    it is reported, not enforced.
    """
    cfg = cfg.resolve(r)
    a, b = cfg.alpha, cfg.beta
    center = None if xi is None else np.asarray(xi, dtype=np.float64).reshape(-1)
    per = f.cb_norm(2, center=center, radius=2.0).per_order
    f_inf, c1, c2 = per[0], per[0] + per[1], sum(per)
    m = f_inf + 1.0
    xb = holder_seminorm(r.path, b, cfg.budget).seminorm
    xa = holder_seminorm(r.path, a, cfg.budget).seminorm
    t = r.grid.horizon
    cc = 2.0 * (1.0 + t**a + t ** (2 * a)) * (1.0 + m) * (1.0 + xa) ** 2
    k = c1 * (m * xb + 1.0) + sewing_constant(a) * (c1 * c1 + cc * m * m * c2)
    if k <= 0.0:
        return float(t)  # F = 0: every step is admissible
    return float(min(t, (0.5 / k) ** (1.0 / (b - a))))


def _window_end(times: np.ndarray, a: int, tau: float) -> int:
    b = int(np.searchsorted(times, times[a] + tau * (1 + 1e-12), side="right")) - 1
    return min(max(b, a + 1), times.size - 1)


def solve_global(xi, f: SmoothFunction, r: ReducedRoughPath, cfg: SolverConfig | None = None) -> SolveReport:
    cfg = (cfg or SolverConfig()).resolve(r)
    xi = np.asarray(xi, dtype=np.float64).reshape(-1)
    _check_field(xi, f, r)
    th = theory_tau(f, r, cfg, xi)
    tau = max(th, r.grid.mesh()) if cfg.tau_policy == "theory" else cfg.tau_init
    times = r.grid.times
    n = r.grid.n_steps
    ys = [xi[None, :]]
    steps: list[StepLog] = []
    a = 0
    start = xi
    while a < n:
        halvings = 0
        while True:
            b = _window_end(times, a, tau)
            try:
                seg, log = solve_local(start, f, r, (a, b), cfg)
                break
            except _Reject as rej:
                if b == a + 1 or tau / 2 < cfg.tau_min:
                    raise StepTooSmall(
                        f"window starting at t = {times[a]:.6g} still fails ({rej.reason}) at tau = {tau:.3g}"
                    ) from None
                tau /= 2
                halvings += 1
        log.halvings = halvings
        steps.append(log)
        ys.append(seg.y[1:])
        start = seg.y[-1]
        a = b
    y = np.concatenate(ys, axis=0)
    sol = ControlledPath(r, y, f(y))
    report = SolveReport(sol, steps, 0.0, f.globally_bounded, th, cfg, xi)
    report.residual_norm = verify_solution(report, f, r)["residual"]
    return report


def verify_solution(report: SolveReport | ControlledPath, f: SmoothFunction, r: ReducedRoughPath, xi=None, beta=None) -> dict:
    """Recompute ``sup_t |Y_t - xi - int_0^t F(Y) dX|`` and the remainder regularity at ``2 beta``."""
    if isinstance(report, SolveReport):
        sol = report.solution
        xi = report.xi if xi is None else xi
        beta = report.config.beta if beta is None else beta
    else:
        sol = report
    xi = sol.y[0] if xi is None else np.asarray(xi, dtype=np.float64).reshape(-1)
    beta = r.alpha if beta is None else beta
    integrand = compose(f, ControlledPath(r, sol.y, f(sol.y)))
    total = integrate(integrand, r, None).values.values
    resid = float(np.max(frob(sol.y - xi - total, 1)))
    rem = two_param_seminorm(sol.remainder_field(), 2 * beta, "dyadic").seminorm
    return {"residual": resid, "remainder_2beta": rem, "remainder_finite": bool(math.isfinite(rem))}
