"""Path generation for the two-factor model on a uniform time grid.

Five one-step recursions for the variance factor are provided.  Three act
directly on Y and differ only in how they keep the square root meaningful:

* ``AVE``  -- absolute-value Euler: sqrt(|y|) in the diffusion term; the
  state itself may go negative.
* ``TE``   -- truncated Euler: sqrt(max(y, 0)); the state may go negative.
* ``SE``   -- symmetrized Euler: absolute value of the whole Euler step;
  the state stays nonnegative by construction.

Two act on the square root Z = sqrt(Y) and require the strict
no-touching-zero condition a > sigma1^2/2:

* ``DESRE`` -- explicit Euler for Z; aborts (``NonPositiveZ``) if Z leaves
  the positive half-line, with no flooring or reflection.
* ``DISRE`` -- drift-implicit Euler for Z, solved exactly by the closed-form
  positive root of its quadratic, hence strictly positive for any draw.

The log-price is advanced by an explicit Euler recursion driven by the
correlated pair (eta, zeta); its diffusion uses sqrt(max(y, 0)) so that the
recursion stays defined for schemes whose variance iterate can be negative.

Randomness contract: every replicate owns two independent Gaussian streams
(eta for the variance, zeta for the price) derived from a master seed, the
replicate index and a fixed stream tag.  Identical (seed, replicate) input
yields bit-identical paths no matter how replicates are batched or threaded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CsvFormatError,
    FellerViolated,
    LengthMismatch,
    NegativeInput,
    NonPositiveZ,
)
from .model import ModelParams

__all__ = [
    "TimeGrid",
    "Scheme",
    "SeedLineage",
    "GaussianDraws",
    "XYPath",
    "step_ave",
    "step_te",
    "step_se",
    "step_desre",
    "step_disre",
    "simulate_y",
    "simulate_x",
    "simulate_xy",
    "write_path_csv",
    "read_path_csv",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``steps`` intervals covering [0, horizon]."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def times(self) -> np.ndarray:
        """Grid points t_0 = 0 < ... < t_N = horizon (endpoint exact)."""
        return np.linspace(0.0, self.horizon, self.steps + 1)


class Scheme(enum.Enum):
    """Variance-step recursion selector."""

    AVE = "AVE"
    TE = "TE"
    SE = "SE"
    DESRE = "DESRE"
    DISRE = "DISRE"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        try:
            return cls(str(text).strip().upper())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {text!r}; expected one of {names}") from None

    @property
    def uses_sqrt_state(self) -> bool:
        """True for the schemes that evolve Z = sqrt(Y)."""
        return self in (Scheme.DESRE, Scheme.DISRE)


# ---------------------------------------------------------------------------
# randomness

_ETA_STREAM = 0
_ZETA_STREAM = 1


@dataclass(frozen=True)
class SeedLineage:
    """Derivation path of a replicate's random streams.

    Streams are PCG64 generators seeded by SeedSequence(master_seed,
    spawn_key=(replicate, tag)) with tag 0 for eta and 1 for zeta.  The
    derivation depends only on (master_seed, replicate), never on execution
    order, so serial and concurrent runs see identical noise.
    """

    master_seed: int
    replicate: int = 0

    def __post_init__(self):
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.replicate < 0:
            raise ValueError("replicate index must be nonnegative")

    def generators(self) -> tuple[np.random.Generator, np.random.Generator]:
        return tuple(
            np.random.Generator(
                np.random.PCG64(
                    np.random.SeedSequence(
                        entropy=self.master_seed,
                        spawn_key=(self.replicate, tag),
                    )
                )
            )
            for tag in (_ETA_STREAM, _ZETA_STREAM)
        )


@dataclass(frozen=True)
class GaussianDraws:
    """Pair of equal-length standard-normal draw vectors (eta, zeta)."""

    eta: np.ndarray
    zeta: np.ndarray
    lineage: SeedLineage | None = None

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        zeta = np.asarray(self.zeta, dtype=float)
        if eta.ndim != 1 or zeta.ndim != 1 or eta.shape != zeta.shape:
            raise LengthMismatch(
                f"eta and zeta must be 1-d arrays of equal length, "
                f"got shapes {eta.shape} and {zeta.shape}"
            )
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "zeta", zeta)

    def __len__(self) -> int:
        return self.eta.shape[0]

    @classmethod
    def from_lineage(cls, lineage: SeedLineage, n_steps: int) -> "GaussianDraws":
        gen_eta, gen_zeta = lineage.generators()
        return cls(
            eta=gen_eta.standard_normal(n_steps),
            zeta=gen_zeta.standard_normal(n_steps),
            lineage=lineage,
        )


# ---------------------------------------------------------------------------
# one-step kernels
#
# The private _*_update functions hold the arithmetic and accept scalars or
# arrays; the public step_* wrappers add the validation described in their
# docstrings.  Batch simulation reuses the updates unchanged, so a batched
# row and a lone path see exactly the same sequence of operations.


def _require_feller(params: ModelParams) -> None:
    if not params.feller_strict:
        raise FellerViolated(
            f"square-root schemes need a > sigma1^2/2, "
            f"got a={params.a}, sigma1^2/2={0.5 * params.sigma1 ** 2}"
        )


def _ave_update(params: ModelParams, y_prev, dt, eta_k):
    drift = (params.a - params.b * y_prev) * dt
    noise = params.sigma1 * np.sqrt(np.abs(y_prev)) * np.sqrt(dt) * eta_k
    return y_prev + drift + noise


def _te_update(params: ModelParams, y_prev, dt, eta_k):
    drift = (params.a - params.b * y_prev) * dt
    noise = params.sigma1 * np.sqrt(np.maximum(y_prev, 0.0)) * np.sqrt(dt) * eta_k
    return y_prev + drift + noise


def _se_update(params: ModelParams, y_prev, dt, eta_k):
    drift = (params.a - params.b * y_prev) * dt
    noise = params.sigma1 * np.sqrt(y_prev) * np.sqrt(dt) * eta_k
    return np.abs(y_prev + drift + noise)


def _desre_update(params: ModelParams, z_prev, dt, eta_k):
    level = 0.5 * params.a - 0.125 * params.sigma1 ** 2
    drift = (level / z_prev - 0.5 * params.b * z_prev) * dt
    return z_prev + drift + 0.5 * params.sigma1 * np.sqrt(dt) * eta_k


def _disre_update(params: ModelParams, z_prev, dt, eta_k):
    den = 2.0 + params.b * dt
    if den <= 0.0:
        raise ValueError(
            f"implicit square-root step needs 2 + b*dt > 0, got b={params.b}, dt={dt}"
        )
    u = (z_prev + 0.5 * params.sigma1 * np.sqrt(dt) * eta_k) / den
    disc = u * u + (params.a - 0.25 * params.sigma1 ** 2) * dt / den
    return u + np.sqrt(disc)


def step_ave(params: ModelParams, y_prev, dt: float, eta_k):
    """Absolute-value Euler variance step; accepts any real state."""
    return _ave_update(params, y_prev, dt, eta_k)


def step_te(params: ModelParams, y_prev, dt: float, eta_k):
    """Truncated Euler variance step; negative states diffuse with zero volatility."""
    return _te_update(params, y_prev, dt, eta_k)


def step_se(params: ModelParams, y_prev, dt: float, eta_k):
    """Symmetrized Euler variance step: |Euler step|.

    Raises:
        NegativeInput: if ``y_prev`` is negative (the kernel's square root
            assumes a nonnegative state, which the scheme itself preserves).
    """
    if np.any(np.asarray(y_prev) < 0.0):
        raise NegativeInput(f"symmetrized step expects y_prev >= 0, got {y_prev}")
    return _se_update(params, y_prev, dt, eta_k)


def step_desre(params: ModelParams, z_prev, dt: float, eta_k):
    """Explicit Euler step for Z = sqrt(Y).

    Raises:
        FellerViolated: unless a > sigma1^2/2.
        NonPositiveZ: if ``z_prev`` is not strictly positive.
    """
    _require_feller(params)
    if np.any(np.asarray(z_prev) <= 0.0):
        raise NonPositiveZ(f"explicit square-root step needs z_prev > 0, got {z_prev}")
    return _desre_update(params, z_prev, dt, eta_k)


def step_disre(params: ModelParams, z_prev, dt: float, eta_k):
    """Drift-implicit Euler step for Z = sqrt(Y), solved in closed form.

    The output is the positive root of the step's quadratic, so it is
    strictly positive whenever a > sigma1^2/2 and 2 + b*dt > 0.

    Raises:
        FellerViolated: unless a > sigma1^2/2.
    """
    _require_feller(params)
    return _disre_update(params, z_prev, dt, eta_k)


# ---------------------------------------------------------------------------
# whole-path simulation


def _simulate_y_batch(
    params: ModelParams, grid: TimeGrid, scheme: Scheme, eta: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Advance a batch of variance paths; rows are independent replicates.

    Args:
        eta: array of shape (rows, steps) of standard-normal draws.

    Returns:
        (y, failed_step): y has shape (rows, steps + 1); failed_step[r] is -1
        for a clean row, otherwise the first grid index at which the DESRE
        iterate left the positive half-line (that row is NaN from there on).
    """
    rows, n = eta.shape
    if n != grid.steps:
        raise LengthMismatch(f"draws provide {n} steps, grid has {grid.steps}")
    dt = grid.dt
    y = np.empty((rows, n + 1), dtype=float)
    y[:, 0] = params.y0
    failed = np.full(rows, -1, dtype=np.int64)

    if not scheme.uses_sqrt_state:
        update = {
            Scheme.AVE: _ave_update,
            Scheme.TE: _te_update,
            Scheme.SE: _se_update,
        }[scheme]
        cur = np.full(rows, float(params.y0))
        for k in range(n):
            cur = update(params, cur, dt, eta[:, k])
            y[:, k + 1] = cur
        return y, failed

    _require_feller(params)
    update = _desre_update if scheme is Scheme.DESRE else _disre_update
    z = np.full(rows, math.sqrt(params.y0))
    for k in range(n):
        z = update(params, z, dt, eta[:, k])
        if scheme is Scheme.DESRE:
            bad = (z <= 0.0) & (failed < 0)
            if bad.any():
                failed[bad] = k + 1
                z = np.where(bad, np.nan, z)
        y[:, k + 1] = z * z
    return y, failed


def simulate_y(
    params: ModelParams, grid: TimeGrid, scheme: Scheme, draws: GaussianDraws
) -> np.ndarray:
    """Simulate one variance path on the grid; returns length steps+1 array.

    Raises:
        LengthMismatch: if the draws do not provide exactly ``grid.steps`` values.
        FellerViolated: for DESRE/DISRE without a > sigma1^2/2.
        NonPositiveZ: if the DESRE iterate leaves the positive half-line
            (carries the offending grid index in ``.step``).
    """
    eta = np.asarray(draws.eta, dtype=float)
    if eta.shape != (grid.steps,):
        raise LengthMismatch(
            f"draws provide {eta.shape[0]} steps, grid has {grid.steps}"
        )
    y, failed = _simulate_y_batch(params, grid, scheme, eta[None, :])
    if failed[0] >= 0:
        raise NonPositiveZ(
            f"square-root state hit zero at grid index {int(failed[0])}",
            step=int(failed[0]),
        )
    return y[0]


def _x_from_y(
    params: ModelParams, grid: TimeGrid, y: np.ndarray, eta: np.ndarray, zeta: np.ndarray
) -> np.ndarray:
    """Euler log-price path(s) from variance path(s); works on 1-d or 2-d input."""
    dt = grid.dt
    y_left = y[..., :-1]
    mix = params.rho * eta + math.sqrt(1.0 - params.rho * params.rho) * zeta
    increments = (params.alpha - params.beta * y_left) * dt + (
        params.sigma2 * np.sqrt(np.maximum(y_left, 0.0)) * np.sqrt(dt) * mix
    )
    head = np.full(y.shape[:-1] + (1,), float(params.x0))
    # cumulative sum over [x0, inc_1, inc_2, ...] reproduces the left-to-right
    # recursion x_k = x_{k-1} + inc_k including its floating-point association
    return np.cumsum(np.concatenate([head, increments], axis=-1), axis=-1)


def simulate_x(
    params: ModelParams, grid: TimeGrid, y_path: np.ndarray, draws: GaussianDraws
) -> np.ndarray:
    """Euler log-price path driven by a given variance path and both streams.

    The diffusion coefficient uses sqrt(max(y, 0)) so variance paths from the
    schemes that can go negative remain usable.

    Raises:
        LengthMismatch: if ``y_path`` does not have steps+1 points or the
            draws do not provide steps values per stream.
    """
    y_path = np.asarray(y_path, dtype=float)
    if y_path.shape != (grid.steps + 1,):
        raise LengthMismatch(
            f"y_path has {y_path.shape[0]} points, grid wants {grid.steps + 1}"
        )
    if len(draws) != grid.steps:
        raise LengthMismatch(f"draws provide {len(draws)} steps, grid has {grid.steps}")
    return _x_from_y(params, grid, y_path, draws.eta, draws.zeta)


@dataclass(frozen=True)
class XYPath:
    """A simulated (or imported) joint path on a uniform grid.

    ``scheme`` records which recursion produced the variance path; it is
    ``None`` for paths read back from CSV, where that information is absent.
    """

    grid: TimeGrid
    y: np.ndarray
    x: np.ndarray
    scheme: Scheme | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        want = self.grid.steps + 1
        if y.shape != (want,) or x.shape != (want,):
            raise LengthMismatch(
                f"paths must have {want} points, got y:{y.shape} x:{x.shape}"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)


def simulate_xy(
    params: ModelParams, grid: TimeGrid, scheme: Scheme, lineage: SeedLineage
) -> XYPath:
    """Simulate the joint (Y, X) path for one replicate of a seed lineage."""
    draws = GaussianDraws.from_lineage(lineage, grid.steps)
    y = simulate_y(params, grid, scheme, draws)
    x = simulate_x(params, grid, y, draws)
    return XYPath(grid=grid, y=y, x=x, scheme=scheme)


# ---------------------------------------------------------------------------
# CSV import/export (header "t,y,x", 17 significant digits, row 0 = start)


def write_path_csv(path_obj: XYPath, dest) -> None:
    """Write a path as CSV with full double-precision round-trip fidelity."""
    t = path_obj.grid.times()
    lines = ["t,y,x"]
    for k in range(t.shape[0]):
        lines.append(f"{t[k]:.17g},{path_obj.y[k]:.17g},{path_obj.x[k]:.17g}")
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


def read_path_csv(src) -> XYPath:
    """Read a path CSV written by :func:`write_path_csv` (or equivalent).

    Raises:
        CsvFormatError: wrong header, malformed row, fewer than two rows,
            or a time column that is not the uniform grid starting at 0.
    """
    if hasattr(src, "read"):
        text = src.read()
    else:
        text = Path(src).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0].strip() != "t,y,x":
        raise CsvFormatError("expected header 't,y,x'")
    t_vals, y_vals, x_vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvFormatError(f"line {lineno}: expected 3 comma-separated values")
        try:
            tv, yv, xv = (float(p) for p in parts)
        except ValueError:
            raise CsvFormatError(f"line {lineno}: non-numeric value") from None
        t_vals.append(tv)
        y_vals.append(yv)
        x_vals.append(xv)
    if len(t_vals) < 2:
        raise CsvFormatError("need at least two rows (initial point plus one step)")
    t = np.asarray(t_vals)
    if t[0] != 0.0:
        raise CsvFormatError(f"time column must start at 0, got {t[0]}")
    if not t[-1] > 0.0:
        raise CsvFormatError(f"final time must be positive, got {t[-1]}")
    grid = TimeGrid(horizon=float(t[-1]), steps=len(t_vals) - 1)
    tol = 1e-9 * max(1.0, abs(grid.horizon))
    if np.max(np.abs(t - grid.times())) > tol:
        raise CsvFormatError("time column is not a uniform grid")
    return XYPath(grid=grid, y=np.asarray(y_vals), x=np.asarray(x_vals), scheme=None)
