"""Finite-difference solver for the steady free-boundary wave problem.

The unknowns are the stream function psi and the surface elevation eta
over one horizontal period, with

    psi_xx + psi_yy + omega(psi) = 0        in 0 < y < eta(x),
    psi = 0 on y = 0,   psi = 1 on y = eta(x),
    |grad psi|^2 + 2 eta = 3 r              on y = eta(x).

The strip is mapped onto a rectangle by q = y / eta(x), which turns the
Laplacian into a variable-coefficient operator

    Psi_xx + (1 + q^2 eta_x^2) / eta^2 Psi_qq
           - 2 q eta_x / eta Psi_xq
           + (2 q eta_x^2 / eta^2 - q eta_xx / eta) Psi_q,

discretized with second-order centered differences in both directions
(one-sided second-order stencils close the q boundary rows). Newton's
method with an analytic psi-block and a finite-difference eta-block
drives the coupled system; a pinned-amplitude variant releases the
Bernoulli constant for continuation off a bifurcation point.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from .errors import (ConfigError, InvalidSweepCase, NewtonDiverged,
                     SurfaceCollapse)
from .hypotheses import HypothesisReport, check_hypotheses
from .stream import StreamSolution
from .vorticity import VorticityDistribution

__all__ = [
    "StripGrid",
    "WaveState",
    "ResidualNorms",
    "NewtonResult",
    "SweepReport",
    "flat_state",
    "perturbed_state",
    "residual_norms",
    "residual_fields",
    "newton_solve",
    "nonexistence_sweep",
    "dispersion_sigma",
    "dispersion_mode",
    "find_bifurcation_points",
    "bifurcation_branch",
    "VERDICT_CONSISTENT",
    "VERDICT_NOT_APPLICABLE",
    "VERDICT_INCONSISTENT",
    "VERDICT_INCONCLUSIVE",
]

NEWTON_TOL = 1e-10
MAX_NEWTON_ITER = 40
MAX_HALVINGS = 8

VERDICT_CONSISTENT = "consistent with nonexistence prediction"
VERDICT_NOT_APPLICABLE = "hypotheses not applicable"
VERDICT_INCONSISTENT = "inconsistent: nontrivial state found"
VERDICT_INCONCLUSIVE = "inconclusive: solver failures"


def _q_difference_operators(ny: int):
    """First and second difference matrices on the ny+1 q-nodes, centered
    inside with one-sided second-order closures at both boundary rows."""
    dq = 1.0 / ny
    c1, c2 = 1.0 / (2.0 * dq), 1.0 / dq ** 2
    D1 = sp.lil_matrix((ny + 1, ny + 1))
    D2 = sp.lil_matrix((ny + 1, ny + 1))
    for j in range(1, ny):
        D1[j, j + 1] = c1
        D1[j, j - 1] = -c1
        D2[j, j] = -2.0 * c2
        D2[j, j + 1] = c2
        D2[j, j - 1] = c2
    D1[0, 0], D1[0, 1], D1[0, 2] = -3.0 * c1, 4.0 * c1, -c1
    D1[ny, ny], D1[ny, ny - 1], D1[ny, ny - 2] = 3.0 * c1, -4.0 * c1, c1
    D2[0, 0], D2[0, 1], D2[0, 2], D2[0, 3] = 2.0 * c2, -5.0 * c2, 4.0 * c2, -c2
    D2[ny, ny], D2[ny, ny - 1], D2[ny, ny - 2], D2[ny, ny - 3] = \
        2.0 * c2, -5.0 * c2, 4.0 * c2, -c2
    return D1.tocsr(), D2.tocsr()


def _color_count(nx: int, periodic: bool) -> int:
    """Number of colors for the eta finite-difference Jacobian block.

    The surface couples into residual rows one x-node to each side, so
    three colors separate the columns; a periodic grid additionally needs
    the color count to divide nx or the wrap-around breaks the pattern.
    """
    if not periodic:
        return 3
    for g in range(3, nx + 1):
        if nx % g == 0:
            return g
    return nx


class StripGrid:
    """Difference operators on the mapped rectangle.

    topology "periodic": nx nodes cover one full period, spacing L / nx,
    with circulant x-stencils. topology "reflect": nx nodes cover half a
    period [0, L/2] endpoints included, with even reflection closing the
    x-stencils; this is the natural grid for waves with a crest at x = 0
    and a trough at x = L/2.
    """

    def __init__(self, period_L: float, nx: int, ny: int,
                 topology: str = "periodic"):
        if period_L <= 0:
            raise ValueError("period_L must be positive")
        if topology not in ("periodic", "reflect"):
            raise ValueError(f"unknown topology {topology!r}")
        if nx < 4 or ny < 4:
            raise ValueError("need nx >= 4 and ny >= 4")
        self.period_L = float(period_L)
        self.nx = int(nx)
        self.ny = int(ny)
        self.topology = topology
        self.periodic = topology == "periodic"

        if self.periodic:
            self.dx = self.period_L / nx
            self.x = np.arange(nx) * self.dx
        else:
            self.dx = (self.period_L / 2.0) / (nx - 1)
            self.x = np.arange(nx) * self.dx
        self.dq = 1.0 / ny
        self.q = np.linspace(0.0, 1.0, ny + 1)

        self.Dx, self.Dxx = self._x_operators()
        self.Dq, self.Dqq = self._q_operators()

        # constant kron factors of the psi-block, cached across Newton steps
        Iq = sp.identity(ny + 1, format="csr")
        Ix = sp.identity(nx, format="csr")
        self._K_xx = sp.kron(self.Dxx, Iq, format="csr")
        self._K_qq = sp.kron(Ix, self.Dqq, format="csr")
        self._K_xq = sp.kron(self.Dx, self.Dq, format="csr")
        self._K_q = sp.kron(Ix, self.Dq, format="csr")

        jj, ii = np.meshgrid(np.arange(1, ny), np.arange(nx))
        self._interior_rows = (ii * (ny + 1) + jj).ravel()
        self.colors = np.arange(nx) % _color_count(nx, self.periodic)

    def _x_operators(self):
        nx, dx = self.nx, self.dx
        c1, c2 = 1.0 / (2.0 * dx), 1.0 / dx ** 2
        D1 = sp.lil_matrix((nx, nx))
        D2 = sp.lil_matrix((nx, nx))
        for i in range(nx):
            if self.periodic:
                D1[i, (i + 1) % nx] += c1
                D1[i, (i - 1) % nx] -= c1
                D2[i, i] -= 2.0 * c2
                D2[i, (i + 1) % nx] += c2
                D2[i, (i - 1) % nx] += c2
            elif i == 0:
                # even reflection: f(-dx) = f(dx)
                D2[0, 0] = -2.0 * c2
                D2[0, 1] = 2.0 * c2
            elif i == nx - 1:
                D2[i, i] = -2.0 * c2
                D2[i, i - 1] = 2.0 * c2
            else:
                D1[i, i + 1] = c1
                D1[i, i - 1] = -c1
                D2[i, i] = -2.0 * c2
                D2[i, i + 1] = c2
                D2[i, i - 1] = c2
        return D1.tocsr(), D2.tocsr()

    def _q_operators(self):
        return _q_difference_operators(self.ny)


@dataclass(eq=False)
class WaveState:
    """One periodic steady state: psi on the mapped grid, eta, and r.

    psi has shape (nx, ny + 1) with q running along the second axis;
    eta has shape (nx,). period_L is the full horizontal period even
    when the state was produced on a half-period grid.
    """

    period_L: float
    nx: int
    ny: int
    psi: np.ndarray
    eta: np.ndarray
    r: float

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        self.validate()

    def validate(self):
        if self.period_L <= 0:
            raise ValueError("period_L must be positive")
        if self.psi.shape != (self.nx, self.ny + 1):
            raise ValueError(
                f"psi shape {self.psi.shape} != ({self.nx}, {self.ny + 1})")
        if self.eta.shape != (self.nx,):
            raise ValueError(f"eta shape {self.eta.shape} != ({self.nx},)")
        if not (np.isfinite(self.psi).all() and np.isfinite(self.eta).all()
                and math.isfinite(self.r)):
            raise ValueError("state contains non-finite entries")
        if np.any(self.eta <= 0):
            raise ValueError("eta must be strictly positive")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * (self.period_L / self.nx)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 1)

    def to_dict(self) -> dict:
        return {
            "period_L": self.period_L,
            "nx": self.nx,
            "ny": self.ny,
            "r": self.r,
            "eta": self.eta.tolist(),
            "psi": self.psi.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveState":
        try:
            return cls(period_L=float(d["period_L"]), nx=int(d["nx"]),
                       ny=int(d["ny"]), psi=np.asarray(d["psi"], dtype=float),
                       eta=np.asarray(d["eta"], dtype=float), r=float(d["r"]))
        except KeyError as exc:
            raise ValueError(f"missing state field: {exc}") from exc


class ResidualNorms(NamedTuple):
    pde: float
    bottom: float
    top: float
    bernoulli: float

    def max(self) -> float:
        return max(self)


@dataclass
class NewtonResult:
    state: WaveState
    iterations: int
    norms: ResidualNorms


@dataclass
class SweepReport:
    verdict: str
    hypothesis: HypothesisReport
    cases: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "hypothesis": self.hypothesis.to_dict(),
            "cases": [dict(c) for c in self.cases],
        }


def _polish_flat_column(col: np.ndarray, h: float, ny: int,
                        dist: VorticityDistribution,
                        tol: float = 1e-13, max_iter: int = 12) -> np.ndarray:
    """Newton-polish a sampled stream profile into the exact solution of
    the discrete vertical system (second differences over h^2 plus omega).

    Sampled ODE values sit within a hair of the discrete solution, but
    the 1/dq^2 amplification of the second difference turns that hair
    into a visible collocation residual; two or three Newton steps on the
    1-D system remove it. Second differences are evaluated by nested
    np.diff, which keeps the cancellation clean near the roundoff floor.
    """
    dq = 1.0 / ny
    col = col.copy()
    col[0], col[-1] = 0.0, 1.0
    _, D2 = _q_difference_operators(ny)
    J_core = (D2[1:ny, 1:ny] / h ** 2).toarray()
    best = col.copy()
    best_norm = math.inf
    for _ in range(max_iter):
        G = np.diff(col, 2) / (dq * h) ** 2 \
            + np.asarray(dist.omega(col[1:ny]), dtype=float)
        norm = float(np.max(np.abs(G)))
        if norm < best_norm:
            best_norm = norm
            best = col.copy()
        if norm <= tol:
            break
        J = J_core + np.diag(np.asarray(dist.derivative(col[1:ny]), dtype=float))
        try:
            step = np.linalg.solve(J, -G)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        col[1:ny] += step
    return best


def flat_state(sol: StreamSolution, dist: VorticityDistribution,
               period_L: float, nx: int, ny: int) -> WaveState:
    """The stream solution written as a periodic wave state (eta = h).

    The column is polished into the exact discrete vertical solution and
    r is set from the discrete surface derivative, so the returned state
    is a fixed point of newton_solve up to roundoff.
    """
    h = sol.depth
    q = np.linspace(0.0, 1.0, ny + 1)
    col = np.asarray(sol.U(q * h), dtype=float)
    col = _polish_flat_column(col, h, ny, dist, tol=1e-13)
    psi = np.tile(col, (nx, 1))
    eta = np.full(nx, h)
    dq = 1.0 / ny
    pq_s = (3.0 * col[-1] - 4.0 * col[-2] + col[-3]) / (2.0 * dq)
    r = ((pq_s / h) ** 2 + 2.0 * h) / 3.0
    return WaveState(period_L=float(period_L), nx=nx, ny=ny, psi=psi,
                     eta=eta, r=r)


def perturbed_state(sol: StreamSolution, dist: VorticityDistribution,
                    period_L: float, nx: int, ny: int,
                    amplitude: float, mode: int = 1) -> WaveState:
    """Flat state with a cosine ripple of the given amplitude on eta."""
    state = flat_state(sol, dist, period_L, nx, ny)
    k = 2.0 * math.pi * mode / period_L
    state.eta = state.eta + amplitude * np.cos(k * state.x)
    state.validate()
    return state


class _ResidualParts(NamedTuple):
    pde: np.ndarray        # (nx, ny - 1), interior collocation rows
    bern: np.ndarray       # (nx,)
    bottom: np.ndarray     # (nx,)
    top: np.ndarray        # (nx,)
    surface_pq: np.ndarray  # (nx,), one-sided Psi_q at q = 1
    ex: np.ndarray         # (nx,), discrete eta_x


def _residual_parts(psi, eta, r, grid: StripGrid,
                    dist: VorticityDistribution) -> _ResidualParts:
    ny = grid.ny
    q = grid.q[None, :]
    ex = grid.Dx @ eta
    exx = grid.Dxx @ eta
    inv_eta = 1.0 / eta[:, None]

    pxx = grid.Dxx @ psi
    pq = (grid.Dq @ psi.T).T
    pqq = (grid.Dqq @ psi.T).T
    pxq = (grid.Dq @ (grid.Dx @ psi).T).T

    c_qq = (1.0 + (q * ex[:, None]) ** 2) * inv_eta ** 2
    c_xq = -2.0 * q * ex[:, None] * inv_eta
    c_q = q * (2.0 * (ex[:, None] * inv_eta) ** 2 - exx[:, None] * inv_eta)

    lap = pxx + c_qq * pqq + c_xq * pxq + c_q * pq
    pde = lap[:, 1:ny] + np.asarray(dist.omega(psi[:, 1:ny]), dtype=float)

    surface_pq = pq[:, ny]
    bern = (1.0 + ex ** 2) * (surface_pq / eta) ** 2 + 2.0 * eta - 3.0 * r
    return _ResidualParts(pde=pde, bern=bern, bottom=psi[:, 0],
                          top=psi[:, ny] - 1.0, surface_pq=surface_pq, ex=ex)


def _residual_vec(psi, eta, r, grid, dist) -> np.ndarray:
    parts = _residual_parts(psi, eta, r, grid, dist)
    return np.concatenate([parts.pde.ravel(), parts.bern])


def residual_fields(state: WaveState, dist: VorticityDistribution) -> dict:
    """Pointwise residuals of a state on its own grid (periodic topology)."""
    grid = StripGrid(state.period_L, state.nx, state.ny, "periodic")
    parts = _residual_parts(state.psi, state.eta, state.r, grid, dist)
    return {"pde": parts.pde, "bernoulli": parts.bern,
            "bottom": parts.bottom, "top": parts.top}


def residual_norms(state: WaveState, dist: VorticityDistribution) -> ResidualNorms:
    f = residual_fields(state, dist)
    return ResidualNorms(pde=float(np.max(np.abs(f["pde"]))),
                         bottom=float(np.max(np.abs(f["bottom"]))),
                         top=float(np.max(np.abs(f["top"]))),
                         bernoulli=float(np.max(np.abs(f["bernoulli"]))))


def _assemble_jacobian(psi, eta, r, grid: StripGrid, dist, F0,
                       pin: Optional[tuple] = None):
    """Jacobian of [pde rows; bernoulli rows] wrt [interior psi; eta].

    The psi-block is analytic (the operator is linear in Psi apart from
    omega(Psi), whose derivative enters the diagonal); the eta-block uses
    colored finite differences on the full residual vector. With pin =
    (index, value) the system is bordered: r joins the unknowns and the
    equation eta[index] = value joins the rows.
    """
    nx, ny = grid.nx, grid.ny
    q = grid.q[None, :]
    ex = grid.Dx @ eta
    exx = grid.Dxx @ eta
    inv_eta = 1.0 / eta[:, None]

    c_qq = ((1.0 + (q * ex[:, None]) ** 2) * inv_eta ** 2).ravel()
    c_xq = (-2.0 * q * ex[:, None] * inv_eta).ravel()
    c_q = (q * (2.0 * (ex[:, None] * inv_eta) ** 2
                - exx[:, None] * inv_eta)).ravel()
    wprime = np.asarray(dist.derivative(psi), dtype=float).ravel()

    J_full = (grid._K_xx
              + sp.diags(c_qq) @ grid._K_qq
              + sp.diags(c_xq) @ grid._K_xq
              + sp.diags(c_q) @ grid._K_q
              + sp.diags(wprime))
    rows = grid._interior_rows
    J_pp = J_full.tocsr()[rows][:, rows]

    # bernoulli rows, analytic in the two topmost interior psi values
    pq_s = (grid.Dq @ psi.T).T[:, ny]
    pref = 2.0 * (1.0 + ex ** 2) * pq_s / eta ** 2
    dq = grid.dq
    n_int = nx * (ny - 1)
    bi = np.arange(nx)
    rows_b = np.concatenate([bi, bi])
    cols_b = np.concatenate([bi * (ny - 1) + (ny - 2),
                             bi * (ny - 1) + (ny - 3)])
    vals_b = np.concatenate([pref * (-2.0 / dq), pref * (0.5 / dq)])
    J_bp = sp.coo_matrix((vals_b, (rows_b, cols_b)), shape=(nx, n_int))

    # eta-block by colored finite differences
    nF = n_int + nx
    J_eta = np.zeros((nF, nx))
    steps = 1e-7 * np.maximum(1.0, np.abs(eta))
    ncolor = int(grid.colors.max()) + 1
    for c in range(ncolor):
        mask = grid.colors == c
        if not mask.any():
            continue
        eta_p = eta.copy()
        eta_p[mask] += steps[mask]
        dF = _residual_vec(psi, eta_p, r, grid, dist) - F0
        dpde = dF[:n_int].reshape(nx, ny - 1)
        dbern = dF[n_int:]
        for m in np.flatnonzero(mask):
            for off in (-1, 0, 1):
                i = m + off
                if grid.periodic:
                    i %= nx
                elif i < 0 or i >= nx:
                    continue
                J_eta[i * (ny - 1):(i + 1) * (ny - 1), m] = dpde[i] / steps[m]
                J_eta[n_int + i, m] = dbern[i] / steps[m]

    J = sp.bmat([[sp.vstack([J_pp, J_bp]), sp.csr_matrix(J_eta)]],
                format="csr")
    if pin is None:
        return J

    pin_index, _ = pin
    r_col = np.zeros((nF, 1))
    r_col[n_int:, 0] = -3.0
    pin_row = np.zeros((1, n_int + nx + 1))
    pin_row[0, n_int + pin_index] = 1.0
    return sp.bmat([[J, sp.csr_matrix(r_col)],
                    [sp.csr_matrix(pin_row[:, :-1]), sp.csr_matrix([[0.0]])]],
                   format="csr")


def _newton_core(psi, eta, r, grid: StripGrid, dist, tol, max_iter,
                 max_halvings, pin: Optional[tuple] = None):
    """Damped Newton on the reduced unknowns. Returns updated arrays.

    Boundary rows of psi are held exact throughout; with pin the
    Bernoulli constant r is released and eta[pin0] = pin1 is enforced.
    """
    nx, ny = grid.nx, grid.ny
    n_int = nx * (ny - 1)
    psi = psi.copy()
    eta = eta.copy()
    psi[:, 0] = 0.0
    psi[:, ny] = 1.0

    def full_vec(ps, et, rr):
        F = _residual_vec(ps, et, rr, grid, dist)
        if pin is not None:
            F = np.append(F, et[pin[0]] - pin[1])
        return F

    F = full_vec(psi, eta, r)
    norm = float(np.max(np.abs(F)))

    for it in range(max_iter):
        if norm <= tol:
            return psi, eta, r, it, norm
        J = _assemble_jacobian(psi, eta, r, grid, dist,
                               F[:n_int + nx] if pin is not None else F,
                               pin=pin)
        dz = spsolve(J.tocsc(), -F)
        if not np.all(np.isfinite(dz)):
            raise NewtonDiverged("singular Jacobian (non-finite Newton step)")
        dpsi = dz[:n_int].reshape(nx, ny - 1)
        deta = dz[n_int:n_int + nx]
        dr = float(dz[-1]) if pin is not None else 0.0

        alpha = 1.0
        accepted = False
        collapse_only = True
        for _ in range(max_halvings + 1):
            eta_t = eta + alpha * deta
            if np.min(eta_t) <= 0.0:
                alpha *= 0.5
                continue
            collapse_only = False
            psi_t = psi.copy()
            psi_t[:, 1:ny] += alpha * dpsi
            r_t = r + alpha * dr
            F_t = full_vec(psi_t, eta_t, r_t)
            norm_t = float(np.max(np.abs(F_t)))
            if norm_t < norm or norm_t <= tol:
                psi, eta, r, F, norm = psi_t, eta_t, r_t, F_t, norm_t
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if collapse_only:
                raise SurfaceCollapse(
                    f"every damped step drove the surface nonpositive "
                    f"(min eta + d = {float(np.min(eta + deta)):.3g})")
            raise NewtonDiverged(
                f"line search stalled at iteration {it} (residual {norm:.3g})")

    if norm <= tol:
        return psi, eta, r, max_iter, norm
    raise NewtonDiverged(
        f"no convergence in {max_iter} iterations (residual {norm:.3g})")


def newton_solve(state: WaveState, dist: VorticityDistribution,
                 tol: float = NEWTON_TOL, max_iter: int = MAX_NEWTON_ITER,
                 max_halvings: int = MAX_HALVINGS) -> NewtonResult:
    """Solve the free-boundary system from the given initial state.

    The Bernoulli constant r is held fixed at state.r. Raises
    NewtonDiverged or SurfaceCollapse on failure.
    """
    grid = StripGrid(state.period_L, state.nx, state.ny, "periodic")
    psi, eta, r, its, _ = _newton_core(state.psi, state.eta, state.r, grid,
                                       dist, tol, max_iter, max_halvings)
    out = WaveState(period_L=state.period_L, nx=state.nx, ny=state.ny,
                    psi=psi, eta=eta, r=r)
    return NewtonResult(state=out, iterations=its,
                        norms=residual_norms(out, dist))


def _thread_cap(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("STILLWAVE_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(
                f"STILLWAVE_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def nonexistence_sweep(sol: StreamSolution, dist: VorticityDistribution,
                       amplitudes, wavelengths, slope_cap: float,
                       nx: int = 64, ny: int = 32,
                       amplitude_cap: Optional[float] = None,
                       flat_tol: float = 1e-8, tol: float = NEWTON_TOL,
                       max_iter: int = MAX_NEWTON_ITER,
                       threads: Optional[int] = None) -> SweepReport:
    """Perturb the flat state over an (amplitude, wavelength) grid and
    record whether Newton falls back to flat.

    Every case must respect the slope cap (2 pi a / L as proxy for the
    seeded surface slope) and the amplitude cap (default a tenth of the
    depth); a violating case raises InvalidSweepCase rather than running
    an experiment outside the hypothesis regime. Cases are enumerated in
    sorted (amplitude, wavelength) order and each case's arithmetic is
    self-contained, so reports are reproducible run to run regardless of
    thread count.
    """
    h = sol.depth
    if amplitude_cap is None:
        amplitude_cap = 0.1 * h
    cases = [(float(a), float(L)) for a in sorted(amplitudes)
             for L in sorted(wavelengths)]
    for a, L in cases:
        if a <= 0 or L <= 0:
            raise InvalidSweepCase(f"case (a={a}, L={L}): must be positive")
        if a >= amplitude_cap:
            raise InvalidSweepCase(
                f"case (a={a}, L={L}): amplitude exceeds cap {amplitude_cap:.6g}")
        if 2.0 * math.pi * a / L > slope_cap:
            raise InvalidSweepCase(
                f"case (a={a}, L={L}): seeded slope {2 * math.pi * a / L:.6g} "
                f"exceeds cap {slope_cap:.6g}")

    report = check_hypotheses(dist, sol, slope_cap)

    def run_case(case):
        a, L = case
        entry = {"amplitude": a, "wavelength": L, "converged_to_flat": False,
                 "final_max_zeta": math.nan, "newton_iterations": 0,
                 "error": None}
        try:
            res = newton_solve(perturbed_state(sol, dist, L, nx, ny, a), dist,
                               tol=tol, max_iter=max_iter)
            zeta_max = float(np.max(np.abs(h - res.state.eta)))
            entry["final_max_zeta"] = zeta_max
            entry["converged_to_flat"] = zeta_max < flat_tol
            entry["newton_iterations"] = res.iterations
        except (NewtonDiverged, SurfaceCollapse) as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        return entry

    workers = _thread_cap(threads)
    if workers == 1 or len(cases) <= 1:
        entries = [run_case(c) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(run_case, cases))

    if not report.applicable:
        verdict = VERDICT_NOT_APPLICABLE
    elif any(e["error"] is None and not e["converged_to_flat"]
             for e in entries):
        verdict = VERDICT_INCONSISTENT
    elif any(e["error"] is not None for e in entries):
        verdict = VERDICT_INCONCLUSIVE
    else:
        verdict = VERDICT_CONSISTENT
    return SweepReport(verdict=verdict, hypothesis=report, cases=entries)


def _dispersion_solve(sol: StreamSolution, dist: VorticityDistribution,
                      k: float):
    """Jointly integrate the stream profile and the transverse mode.

    f solves f'' + (omega'(U) - k^2) f = 0, f(0) = 0, f'(0) = 1, riding
    on the exact U of the flow, up to the surface y = h.
    """
    ksq = float(k) ** 2

    def rhs(y, st):
        u, uy, f, fp = st
        return (uy, -float(dist.omega(u)),
                fp, (ksq - float(dist.derivative(u))) * f)

    h = sol.depth
    out = solve_ivp(rhs, (0.0, h), (0.0, float(sol.profile.s), 0.0, 1.0),
                    method="DOP853", rtol=1e-12, atol=1e-14,
                    dense_output=True)
    if not out.success:
        raise NewtonDiverged(f"dispersion integration failed: {out.message}")
    return out, h


def dispersion_sigma(sol: StreamSolution, dist: VorticityDistribution,
                     k: float) -> float:
    """Boundary functional whose zeros mark linear bifurcation points.

    sigma(k) = U_y(h)^2 f'(h) - (1 + U_y(h) U_yy(h)) f(h), with U_yy(h)
    = -omega(1). For a still flow it reduces to -f(h), strictly negative
    while f keeps its sign on (0, h].
    """
    out, h = _dispersion_solve(sol, dist, k)
    _, uy_h, f_h, fp_h = out.sol(h)
    return float(uy_h ** 2 * fp_h - (1.0 - uy_h * float(dist.omega(1.0))) * f_h)


def dispersion_mode(sol: StreamSolution, dist: VorticityDistribution,
                    k: float):
    """Dense-output callable y -> f(y) for the transverse mode, plus h."""
    out, h = _dispersion_solve(sol, dist, k)

    def f(y):
        return out.sol(y)[2]

    return f, h


def find_bifurcation_points(sol: StreamSolution, dist: VorticityDistribution,
                            k_min: float = 0.0, k_max: float = 5.0,
                            scan_points: int = 201,
                            xtol: float = 1e-12) -> np.ndarray:
    """Zeros of the dispersion functional in [k_min, k_max].

    A sign-change scan brackets each root, then brentq polishes it. For
    still flows the functional is negative throughout and the result is
    empty.
    """
    ks = np.linspace(k_min, k_max, scan_points)
    sig = np.array([dispersion_sigma(sol, dist, k) for k in ks])
    roots = [float(ks[i]) for i in np.flatnonzero(sig == 0.0)]
    for i in np.flatnonzero(np.sign(sig[:-1]) * np.sign(sig[1:]) < 0):
        roots.append(brentq(lambda k: dispersion_sigma(sol, dist, k),
                            ks[i], ks[i + 1], xtol=xtol))
    return np.array(sorted(roots))


def bifurcation_branch(sol: StreamSolution, dist: VorticityDistribution,
                       k: float, amplitude: float = 0.01,
                       nx: int = 64, ny: int = 32, tol: float = NEWTON_TOL,
                       max_iter: int = 60) -> NewtonResult:
    """Continue off a bifurcation point to a genuinely wavy state.

    Works on the half-period reflecting grid with the crest elevation
    pinned at h + amplitude and the Bernoulli constant released, which
    removes the horizontal-translation null direction. The seed is the
    linear mode in mapped coordinates. The result is unfolded to the full
    periodic grid (nx must be even; the half grid has nx/2 + 1 nodes).
    """
    if nx % 2:
        raise ValueError("nx must be even so the half grid unfolds cleanly")
    L = 2.0 * math.pi / k
    nxh = nx // 2 + 1
    grid = StripGrid(L, nxh, ny, "reflect")
    h = sol.depth
    uy_h = float(sol.surface_speed)

    fmode, _ = dispersion_mode(sol, dist, k)
    f_h = float(fmode(h))
    if abs(f_h) < 1e-12:
        raise ValueError("mode vanishes at the surface; cannot scale the seed")
    c = -uy_h * amplitude / f_h

    qh = grid.q * h
    ucol = np.asarray(sol.U(qh), dtype=float)
    uycol = np.asarray(sol.Uy(qh), dtype=float)
    fcol = np.asarray(fmode(qh), dtype=float)
    cosx = np.cos(k * grid.x)

    eta = h + amplitude * cosx
    psi = (ucol[None, :]
           + cosx[:, None] * (c * fcol[None, :]
                              + amplitude * grid.q[None, :] * uycol[None, :]))
    psi[:, 0] = 0.0
    psi[:, -1] = 1.0

    r0 = (uy_h ** 2 + 2.0 * h) / 3.0
    psi_h, eta_h, r_out, its, _ = _newton_core(
        psi, eta, r0, grid, dist, tol, max_iter, MAX_HALVINGS,
        pin=(0, h + amplitude))

    psi_full = np.vstack([psi_h, psi_h[-2:0:-1]])
    eta_full = np.concatenate([eta_h, eta_h[-2:0:-1]])
    state = WaveState(period_L=L, nx=nx, ny=ny, psi=psi_full, eta=eta_full,
                      r=r_out)
    return NewtonResult(state=state, iterations=its,
                        norms=residual_norms(state, dist))
