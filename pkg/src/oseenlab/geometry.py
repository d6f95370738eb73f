"""Log-polar grid on the annulus outside a centered disk.

The computational domain is r_wall <= r <= r_wall * exp(S_max), discretized
with nodes uniform in s = ln(r / r_wall) and periodic in the polar angle.
The obstacle is always a centered disk; node row i = 0 lies exactly on the
wall. Grids are immutable after construction and safe to share between
concurrent readers.
"""

import math

import numpy as np


class Grid:
    """Tensor-product log-polar grid with metric and quadrature data.

    Attributes:
        r_wall: disk radius (inner boundary).
        S_max: log-radial extent; outer radius is r_wall * exp(S_max).
        n_s: number of radial nodes, s_i = i * ds with ds = S_max / (n_s - 1).
        n_theta: number of azimuthal nodes (even), theta_j = j * dtheta.
        s, theta, r: 1D node coordinate arrays.
        quad_weights: (n_s, n_theta) quadrature weights; the radial rule is
            the trapezoid rule in r on the geometrically spaced nodes, which
            integrates the area element r dr dtheta exactly, so the weights
            sum to the annulus area to rounding error. Interior weights equal
            r^2 * ds * dtheta up to an O(ds^2) metric factor.
    """

    def __init__(self, r_wall: float, S_max: float, n_s: int, n_theta: int):
        if r_wall <= 0.0:
            raise ValueError(f"r_wall must be positive, got {r_wall}")
        if S_max <= 0.0:
            raise ValueError(f"S_max must be positive, got {S_max}")
        if n_s < 8:
            raise ValueError(f"n_s must be at least 8, got {n_s}")
        if n_theta < 8 or n_theta % 2 != 0:
            raise ValueError(f"n_theta must be even and >= 8, got {n_theta}")

        self.r_wall = float(r_wall)
        self.S_max = float(S_max)
        self.n_s = int(n_s)
        self.n_theta = int(n_theta)

        self.ds = self.S_max / (self.n_s - 1)
        self.dtheta = 2.0 * math.pi / self.n_theta
        self.s = np.linspace(0.0, self.S_max, self.n_s)
        self.theta = np.arange(self.n_theta) * self.dtheta
        self.r = self.r_wall * np.exp(self.s)
        self.r_outer = float(self.r[-1])

        self.cos_theta = np.cos(self.theta)
        self.sin_theta = np.sin(self.theta)

        # Trapezoid rule in r: interior node i owns (r_{i+1} - r_{i-1}) / 2,
        # boundary rows own half cells.
        dr_half = np.empty(self.n_s)
        dr_half[1:-1] = 0.5 * (self.r[2:] - self.r[:-2])
        dr_half[0] = 0.5 * (self.r[1] - self.r[0])
        dr_half[-1] = 0.5 * (self.r[-1] - self.r[-2])
        self.ring_weights = self.r * dr_half * self.dtheta
        self.quad_weights = np.broadcast_to(
            self.ring_weights[:, None], (self.n_s, self.n_theta)
        ).copy()
        self.quad_weights.setflags(write=False)
        for arr in (self.s, self.theta, self.r, self.cos_theta, self.sin_theta,
                    self.ring_weights):
            arr.setflags(write=False)

    @property
    def area(self) -> float:
        """Exact annulus area pi * r_wall^2 * (e^{2 S_max} - 1)."""
        return math.pi * self.r_wall**2 * (math.exp(2.0 * self.S_max) - 1.0)

    def cartesian(self):
        """Cartesian node coordinates as two (n_s, n_theta) arrays."""
        x = self.r[:, None] * self.cos_theta[None, :]
        y = self.r[:, None] * self.sin_theta[None, :]
        return x, y

    def radial_index(self, s_probe: float) -> int:
        """Index of the grid level matching s_probe; rejects off-grid levels."""
        i = int(round(s_probe / self.ds))
        if i < 0 or i >= self.n_s or abs(self.s[i] - s_probe) > 1e-9 * max(1.0, self.S_max):
            raise ValueError(f"s_probe={s_probe} is not a grid radial level")
        return i

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.r_wall == other.r_wall
            and self.S_max == other.S_max
            and self.n_s == other.n_s
            and self.n_theta == other.n_theta
        )

    def __hash__(self):
        return hash((self.r_wall, self.S_max, self.n_s, self.n_theta))

    def __repr__(self):
        return (f"Grid(r_wall={self.r_wall}, S_max={self.S_max}, "
                f"n_s={self.n_s}, n_theta={self.n_theta})")


def build_grid(r_wall: float, S_max: float, n_s: int, n_theta: int) -> Grid:
    """Build a validated log-polar grid (deterministic in its arguments)."""
    return Grid(r_wall, S_max, n_s, n_theta)


def cartesian_coords(grid: Grid) -> np.ndarray:
    """All node positions as an (n_s, n_theta, 2) array of 2D points."""
    x, y = grid.cartesian()
    return np.stack([x, y], axis=-1)
