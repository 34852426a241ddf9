"""Finite-horizon MPC experts.

Both experts optimize a quadratic tracking cost over an open-loop input
sequence and return the first input (receding horizon).  The double
integrator solves a constrained program (state constraints x >= 0,
v >= -1 as hard inequalities); the unicycle uses smooth obstacle
penalties since the avoid region is nonconvex.  Horizons and weights are
implementer defaults: the task is only specified as "MPC expert".
"""

from __future__ import annotations

import numpy as np
from scipy import optimize

from .sim import di_matrices, step

__all__ = ["ExpertError", "di_expert", "gr_expert"]


class ExpertError(RuntimeError):
    """The expert solver failed to produce a usable input."""


def _di_prediction(dt: float, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked prediction matrices: X = F x0 + G U over the horizon."""
    a, b = di_matrices(dt)
    f = np.empty((2 * horizon, 2))
    g = np.zeros((2 * horizon, horizon))
    ak = np.eye(2)
    powers = [ak]
    for k in range(horizon):
        ak = a @ ak
        powers.append(ak)
        f[2 * k : 2 * k + 2] = ak
    for k in range(horizon):
        for j in range(k + 1):
            g[2 * k : 2 * k + 2, j] = (powers[k - j] @ b)[:, 0]
    return f, g


def di_expert(x: np.ndarray, dt: float, horizon: int = 12,
              q: tuple[float, float] = (1.0, 0.3), r: float = 0.4,
              u_lim: float = 3.0, pos_margin: float = 0.2,
              vel_margin: float = 0.35) -> float:
    """First input of a constrained MPC driving the state to the origin.

    Hard constraints: predicted position >= pos_margin and velocity
    >= -1 + vel_margin at every step, input within [-u_lim, u_lim].  The
    margins keep the closed loop strictly inside the safe set so that an
    over-approximating verifier has room to succeed.
    """
    f, g = _di_prediction(dt, horizon)
    qdiag = np.tile(np.asarray(q, dtype=float), horizon)
    fx = f @ x

    def cost(u):
        pred = fx + g @ u
        return float(pred @ (qdiag * pred) + r * u @ u)

    def jac(u):
        pred = fx + g @ u
        return 2.0 * (g.T @ (qdiag * pred) + r * u)

    # position rows are even, velocity rows odd in the stacked prediction
    lower = np.tile([pos_margin, -1.0 + vel_margin], horizon)
    cons = optimize.LinearConstraint(g, lower - fx, np.full(2 * horizon, np.inf))
    res = optimize.minimize(
        cost,
        np.zeros(horizon),
        jac=jac,
        bounds=[(-u_lim, u_lim)] * horizon,
        constraints=[cons],
        method="SLSQP",
        options={"maxiter": 200, "ftol": 1e-10},
    )
    if not res.success or not np.all(np.isfinite(res.x)):
        raise ExpertError(f"SLSQP failed at x={x}: {res.message}")
    return float(res.x[0])


def gr_expert(x: np.ndarray, dt: float, v: float = 1.0, horizon: int = 20,
              obstacles=(((-6.0, -0.5), 2.2), ((-1.25, 1.75), 1.6)),
              margin: float = 0.5, penalty: float = 200.0,
              omega_lim: float = 1.5) -> float:
    """First turn rate of a penalty-based MPC steering (x, y) to the origin.

    The quadratic goal cost is weighted toward late steps; each obstacle
    contributes a hinge-squared penalty on the inflated radius.
    """
    weights = np.linspace(0.2, 1.0, horizon)

    def cost(omega):
        state = x.copy()
        total = 0.0
        for k in range(horizon):
            state = step("gr", state, float(omega[k]), dt, v)
            total += weights[k] * (state[0] ** 2 + state[1] ** 2)
            for (cx, cy), rad in obstacles:
                d2 = (state[0] - cx) ** 2 + (state[1] - cy) ** 2
                gap = (rad + margin) ** 2 - d2
                if gap > 0.0:
                    total += penalty * gap * gap
            total += 0.1 * omega[k] ** 2
        return total

    res = optimize.minimize(
        cost,
        np.zeros(horizon),
        bounds=[(-omega_lim, omega_lim)] * horizon,
        method="L-BFGS-B",
        options={"maxiter": 120},
    )
    if not np.all(np.isfinite(res.x)):
        raise ExpertError(f"L-BFGS-B diverged at x={x}")
    return float(res.x[0])
