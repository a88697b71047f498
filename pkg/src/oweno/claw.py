"""Finite-difference WENO solver for 1D conservation laws ``u_t + f(u)_x = 0``.

Split fluxes ``f = f+ + f-`` are reconstructed at cell interfaces with the
cell-average tables (the classical conservative finite-difference framing)
and integrated in time with the three-stage SSP Runge-Kutta method.

State arrays have shape ``(m, N)``: ``m`` conserved components on ``N``
cells.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field, replace
from typing import Any, Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from oweno.core import WeightParams, reconstruct
from oweno.fields import F64
from oweno.tables import DataMode, SchemeTables, build_tables

Array = Any


class NonFiniteInput(ValueError):
    pass


class NonFiniteState(FloatingPointError):
    pass


class BlowUp(FloatingPointError):
    def __init__(self, t: float, cell: int, message: str = "") -> None:
        super().__init__(message or f"non-finite state at t={t:.6e}, cell {cell}")
        self.t = t
        self.cell = cell


class NoConvergence(ArithmeticError):
    pass


class PostShock(ValueError):
    pass


class NonPhysicalState(ValueError):
    pass


# {{{ grid, boundaries, problems


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    N: int

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError(f"empty domain ({self.a}, {self.b})")
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def x(self) -> np.ndarray:
        return self.a + (np.arange(self.N) + 0.5) * self.h

    def validate(self, r: int) -> Grid1D:
        if self.N < 2 * (r + 1):
            raise ValueError(f"N = {self.N} is too small for r = {r}; need N >= {2 * (r + 1)}")
        return self


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class InflowOutflow:
    """Frozen conserved state on the left, zero-order extrapolation on the right."""

    left: tuple[float, ...]


@dataclass(frozen=True)
class Problem:
    name: str
    #: ``(m, N) -> (m, N)``
    flux: Callable[[np.ndarray], np.ndarray]
    #: ``(m, N) -> float``, largest characteristic speed magnitude
    max_speed: Callable[[np.ndarray], float]
    #: ``x -> (m, N)`` conserved initial state at cell centres
    initial: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    T: float
    bc: Periodic | InflowOutflow = dc_field(default_factory=Periodic)
    cfl: float = 0.5
    #: ``"llf"`` or ``"upwind"`` (all characteristic speeds nonnegative)
    splitting: str = "llf"
    #: ``(x, t) -> (m, N)`` exact solution, when known
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None
    ncomponents: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.cfl <= 1:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.splitting not in ("llf", "upwind"):
            raise ValueError(f"unknown splitting {self.splitting!r}")
        if self.T < 0:
            raise ValueError("final time must be nonnegative")

    def grid(self, N: int) -> Grid1D:
        return Grid1D(self.domain[0], self.domain[1], N)


@dataclass
class SolverState:
    u: np.ndarray
    t: float = 0.0
    steps: int = 0

    def check(self) -> None:
        bad = ~np.isfinite(self.u)
        if bad.any():
            cell = int(np.argwhere(bad)[0][-1])
            raise BlowUp(self.t, cell)


# }}}


# {{{ flux splitting and semi-discretization


def llf_split(f: np.ndarray, u: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``f+- = (f +- alpha u) / 2``."""
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(u)) and np.isfinite(alpha)):
        raise NonFiniteInput("non-finite flux, state or alpha in flux splitting")
    return 0.5 * (f + alpha * u), 0.5 * (f - alpha * u)


def _pad(v: np.ndarray, g: int, bc: Periodic | InflowOutflow, ghost_left: np.ndarray | None = None) -> np.ndarray:
    if isinstance(bc, Periodic):
        return np.concatenate([v[:, -g:], v, v[:, :g]], axis=1)
    left = np.repeat(ghost_left[:, None], g, axis=1)
    right = np.repeat(v[:, -1:], g, axis=1)
    return np.concatenate([left, v, right], axis=1)


@dataclass(frozen=True)
class Discretization:
    tables: SchemeTables
    params: WeightParams

    @classmethod
    def make(cls, r: int, params: WeightParams) -> Discretization:
        return cls(build_tables(r, DataMode.CELL), params.validate(r))

    @property
    def r(self) -> int:
        return self.tables.r

    @property
    def ghosts(self) -> int:
        return self.r + 1


def interface_fluxes(fp: np.ndarray, fm: np.ndarray, disc: Discretization) -> np.ndarray:
    """``F_{i+1/2}`` for ``i = -1, ..., N-1`` from ghost-padded split fluxes.

    The padded arrays have ``g = r + 1`` ghost cells on each side. The
    ``f+`` window is centred on cell ``i``; the ``f-`` window is centred on
    cell ``i+1`` and mirrored.
    """
    r, g = disc.r, disc.ghosts
    n = fp.shape[1] - 2 * g
    w = 2 * r - 1
    # interface i+1/2 for i = -1..n-1 uses f+ cells i-r+1..i+r-1
    plus = sliding_window_view(fp[:, g - r:g + n + r - 1], w, axis=1)
    # and f- cells i+r..i-r+2, read backwards
    minus = sliding_window_view(fm[:, g - r + 1:g + n + r], w, axis=1)[..., ::-1]
    windows = np.stack([plus, minus])  # (2, m, n+1, w)
    windows = np.moveaxis(windows, -1, 0)
    q = reconstruct(disc.tables, windows, disc.params, F64, detector=DataMode.POINT).value
    return q[0] + q[1]


def spatial_rhs(u: np.ndarray, grid: Grid1D, problem: Problem, disc: Discretization) -> np.ndarray:
    """Conservative semi-discretization ``-(F_{i+1/2} - F_{i-1/2}) / h``."""
    if not np.all(np.isfinite(u)):
        raise NonFiniteState("non-finite state entering the spatial operator")
    g = disc.ghosts
    left = None
    if isinstance(problem.bc, InflowOutflow):
        left = np.asarray(problem.bc.left, dtype=np.float64)
    up = _pad(u, g, problem.bc, left)
    f = problem.flux(up)
    if problem.splitting == "upwind":
        fp, fm = f, np.zeros_like(f)
    else:
        fp, fm = llf_split(f, up, problem.max_speed(up))
    F = interface_fluxes(fp, fm, disc)
    return -(F[:, 1:] - F[:, :-1]) / grid.h


def ssp_rk_step(u: np.ndarray, dt: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Three-stage, third-order SSP Runge-Kutta step."""
    u1 = u + dt * rhs(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1))
    out = u / 3 + 2 / 3 * (u2 + dt * rhs(u2))
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("non-finite state after Runge-Kutta step")
    return out


# }}}


# {{{ driver


@dataclass(frozen=True)
class StepControl:
    """``dt = cfl h / alpha``, optionally times ``(h / h_ref)**((2r-4)/3)``.

    The extra factor makes the third-order time error scale like
    ``h**(2r-1)`` for convergence studies.
    """

    h_ref: float | None = None

    def dt(self, cfl: float, h: float, alpha: float, r: int) -> float:
        dt = cfl * h / alpha
        if self.h_ref is not None:
            dt *= (h / self.h_ref) ** ((2 * r - 4) / 3)
        return dt


@dataclass(frozen=True)
class SolveResult:
    problem: str
    variant: str
    N: int
    state: SolverState
    grid: Grid1D
    wall_time: float
    l1: float | None = None
    linf: float | None = None


def solve(
    problem: Problem,
    grid: Grid1D,
    disc: Discretization,
    control: StepControl = StepControl(),
    T: float | None = None,
) -> SolveResult:
    """Integrate to ``T`` exactly, truncating the last step."""
    grid.validate(disc.r)
    T = problem.T if T is None else T
    state = SolverState(np.array(problem.initial(grid.x), dtype=np.float64).reshape(problem.ncomponents, grid.N))
    state.check()

    def rhs(u: np.ndarray) -> np.ndarray:
        return spatial_rhs(u, grid, problem, disc)

    tic = time.perf_counter()
    while state.t < T:
        alpha = problem.max_speed(state.u)
        if not alpha > 0:
            alpha = 1.0
        dt = control.dt(problem.cfl, grid.h, alpha, disc.r)
        if state.t + dt >= T:
            dt = T - state.t
        try:
            state.u = ssp_rk_step(state.u, dt, rhs)
        except (NonFiniteState, NonFiniteInput) as exc:
            bad = np.argwhere(~np.isfinite(state.u))
            cell = int(bad[0][-1]) if len(bad) else -1
            raise BlowUp(state.t, cell, f"{exc} at t={state.t:.6e}") from exc
        state.t = T if state.t + dt >= T else state.t + dt
        state.steps += 1
    wall = time.perf_counter() - tic

    result = SolveResult(problem.name, disc.params.variant.value, grid.N, state, grid, wall)
    if problem.exact is not None:
        exact = np.asarray(problem.exact(grid.x, T)).reshape(state.u.shape)
        err = np.abs(state.u - exact)
        result = replace(result, l1=float(grid.h * err.sum()), linf=float(err.max()))
    return result


def rates(errors: list[float]) -> list[float | None]:
    """Local rates ``log2(e_{j-1} / e_j)`` for dyadic refinements."""
    out: list[float | None] = [None]
    for e0, e1 in zip(errors[:-1], errors[1:]):
        out.append(float(np.log2(e0 / e1)))
    return out


def total_variation(u: np.ndarray) -> float:
    return float(np.abs(np.diff(u, axis=-1)).sum())


# }}}


# {{{ exact solutions by characteristics


def characteristics_oracle(
    u0: Callable[[np.ndarray], np.ndarray],
    du0: Callable[[np.ndarray], np.ndarray],
    df: Callable[[np.ndarray], np.ndarray],
    d2f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    t: float,
    bracket: tuple[float, float],
    tol: float = 4 * np.finfo(np.float64).eps,
    maxiter: int = 60,
) -> np.ndarray:
    """Solve ``u = u0(x - f'(u) t)`` by Newton safeguarded with bisection.

    ``bracket`` bounds the range of ``u0``; the residual
    ``g(u) = u - u0(x - f'(u) t)`` changes sign across it. A nonpositive
    derivative ``g'`` signals crossing characteristics.
    """
    x = np.asarray(x, dtype=np.float64)
    if t == 0:
        return u0(x)
    if tol < np.finfo(np.float64).eps:
        raise ValueError("tolerance below double precision epsilon")

    lo = np.full_like(x, bracket[0])
    hi = np.full_like(x, bracket[1])
    glo = lo - u0(x - df(lo) * t)
    ghi = hi - u0(x - df(hi) * t)
    if np.any(glo > 0) or np.any(ghi < 0):
        raise NoConvergence("residual does not change sign over the bracket")

    # g must be monotone over the whole bracket, otherwise several
    # characteristics reach x and the classical solution no longer exists
    probe = np.linspace(bracket[0], bracket[1], 65)[:, None]
    if np.any(1 + du0(x - df(probe) * t) * d2f(probe) * t <= 0):
        raise PostShock(f"characteristics cross before t={t}")

    u = u0(x - df(u0(x)) * t)
    u = np.clip(u, lo, hi)
    scale = max(abs(bracket[0]), abs(bracket[1]), 1.0)
    for _ in range(maxiter):
        xi = x - df(u) * t
        g = u - u0(xi)
        dg = 1 + du0(xi) * d2f(u) * t
        if np.any(dg <= 0):
            raise PostShock(f"characteristics cross before t={t}")
        done = np.abs(g) <= tol * scale
        if done.all():
            return u
        # keep the bracket around the root
        neg = g < 0
        lo = np.where(neg, u, lo)
        hi = np.where(neg, hi, u)
        step = u - g / dg
        outside = (step <= lo) | (step >= hi)
        u = np.where(done, u, np.where(outside, 0.5 * (lo + hi), step))
    raise NoConvergence(f"no convergence after {maxiter} iterations")


def bisection_oracle(
    u0: Callable[[np.ndarray], np.ndarray],
    df: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    t: float,
    bracket: tuple[float, float],
    iterations: int = 200,
) -> np.ndarray:
    """Plain bisection on the same residual, for cross-checking."""
    x = np.asarray(x, dtype=np.float64)
    lo = np.full_like(x, bracket[0])
    hi = np.full_like(x, bracket[1])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        g = mid - u0(x - df(mid) * t)
        lo = np.where(g < 0, mid, lo)
        hi = np.where(g < 0, hi, mid)
    return 0.5 * (lo + hi)


# }}}


# {{{ Euler


GAMMA = 1.4


def primitive_to_conserved(rho: Array, v: Array, p: Array, gamma: float = GAMMA) -> np.ndarray:
    rho, v, p = (np.asarray(a, dtype=np.float64) for a in (rho, v, p))
    return np.stack([rho, rho * v, p / (gamma - 1) + 0.5 * rho * v * v])


def conserved_to_primitive(u: np.ndarray, gamma: float = GAMMA) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rho, mom, E = u
    v = mom / rho
    p = (gamma - 1) * (E - 0.5 * rho * v * v)
    return rho, v, p


def euler_1d_flux(u: np.ndarray, gamma: float = GAMMA) -> tuple[np.ndarray, float]:
    """Flux ``(rho v, p + rho v**2, v (E + p))`` and ``max |v| + c``."""
    u = np.asarray(u, dtype=np.float64)
    rho, v, p = conserved_to_primitive(u, gamma)
    if np.any(rho <= 0) or np.any(p <= 0):
        raise NonPhysicalState("density and pressure must stay positive")
    E = u[2]
    flux = np.stack([u[1], p + u[1] * v, v * (E + p)])
    speed = float(np.max(np.abs(v) + np.sqrt(gamma * p / rho)))
    return flux, speed


# }}}


# {{{ problem catalogue


def _sine(x: np.ndarray) -> np.ndarray:
    return 0.25 + 0.5 * np.sin(np.pi * x)


def _dsine(x: np.ndarray) -> np.ndarray:
    return 0.5 * np.pi * np.cos(np.pi * x)


SINE_RANGE = (-0.25, 0.75)


def linear_advection(T: float = 1.0, cfl: float = 0.5) -> Problem:
    def exact(x: np.ndarray, t: float) -> np.ndarray:
        return _sine(x - t)[None]

    return Problem(
        name="advection",
        flux=lambda u: u.copy(),
        max_speed=lambda u: 1.0,
        initial=lambda x: _sine(x)[None],
        domain=(-1.0, 1.0),
        T=T,
        cfl=cfl,
        splitting="upwind",
        exact=exact,
    )


def _scalar_convex(name: str, shift: float, T: float, cfl: float, splitting: str) -> Problem:
    # f(u) = u**2 / 2 + shift u
    def exact(x: np.ndarray, t: float) -> np.ndarray:
        return characteristics_oracle(
            _sine, _dsine, lambda u: u + shift, np.ones_like, x, t, SINE_RANGE
        )[None]

    return Problem(
        name=name,
        flux=lambda u: 0.5 * u * u + shift * u,
        max_speed=lambda u: float(np.max(np.abs(u + shift))),
        initial=lambda x: _sine(x)[None],
        domain=(-1.0, 1.0),
        T=T,
        cfl=cfl,
        splitting=splitting,
        exact=exact if T < 2 / np.pi else None,
    )


def burgers(T: float = 0.3, cfl: float = 0.5) -> Problem:
    return _scalar_convex("burgers", 0.0, T, cfl, "llf")


def burgers_shock(T: float = 12.0, cfl: float = 0.5) -> Problem:
    return replace(_scalar_convex("burgers-shock", 0.0, T, cfl, "llf"), exact=None)


def critical_flux(T: float = 0.3, cfl: float = 0.5) -> Problem:
    """``f(u) = u**2/2 + u/4``: ``f(u0(x))`` has a third-order critical point at ``x = -1/2``.

    Characteristic speeds ``u + 1/4`` are nonnegative on the data range,
    so the flux is reconstructed without splitting.
    """
    return _scalar_convex("critical", 0.25, T, cfl, "upwind")


SHU_OSHER_LEFT = (27 / 7, 4 * np.sqrt(35) / 9, 31 / 3)


def shu_osher(T: float = 1.8, cfl: float = 0.5) -> Problem:
    left = primitive_to_conserved(*SHU_OSHER_LEFT)

    def initial(x: np.ndarray) -> np.ndarray:
        rho = np.where(x <= -4, SHU_OSHER_LEFT[0], 1 + np.sin(5 * x) / 5)
        v = np.where(x <= -4, SHU_OSHER_LEFT[1], 0.0)
        p = np.where(x <= -4, SHU_OSHER_LEFT[2], 1.0)
        return primitive_to_conserved(rho, v, p)

    return Problem(
        name="shu-osher",
        flux=lambda u: euler_1d_flux(u)[0],
        max_speed=lambda u: euler_1d_flux(u)[1],
        initial=initial,
        domain=(-5.0, 5.0),
        T=T,
        bc=InflowOutflow(tuple(float(c) for c in left)),
        cfl=cfl,
        exact=None,
        ncomponents=3,
    )


PROBLEMS: dict[str, Callable[..., Problem]] = {
    "advection": linear_advection,
    "burgers": burgers,
    "burgers-shock": burgers_shock,
    "critical": critical_flux,
    "shu-osher": shu_osher,
}


def get_problem(name: str, **kwargs: Any) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None
    return factory(**kwargs)


# }}}


# {{{ output


def solution_columns(result: SolveResult) -> np.ndarray:
    """``(x, u)`` for scalar problems, ``(x, rho, v, p)`` for Euler."""
    x = result.grid.x
    u = result.state.u
    if u.shape[0] == 3:
        rho, v, p = conserved_to_primitive(u)
        return np.column_stack([x, rho, v, p])
    return np.column_stack([x, u[0]])


def write_solution(path: Any, result: SolveResult) -> None:
    np.savetxt(path, solution_columns(result), fmt="%.17e")


# }}}
