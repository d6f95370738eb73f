"""Fast elliptic solves on the log-polar annulus.

In log-polar form the Laplacian is (1/r^2) (d_ss + d_thth), so after a real
FFT in theta every azimuthal mode satisfies an independent tridiagonal system
in s. Two problems are handled:

* the streamfunction Poisson problem Lap psi = omega, with psi = 0 on the
  wall; at the outer ring mode 0 carries the imposed circulation through a
  Neumann condition d_s psi_0 = gamma / (2 pi) while the remaining modes are
  clamped to zero (circulation-carrying flows decay like 1/r, everything
  else faster);
* the Crank-Nicolson Helmholtz step (I - dt/2 (1/r^2)(d_ss - k^2)) w = rhs
  with homogeneous Dirichlet rows, the backbone of implicit diffusion.

Systems are diagonally dominant for dt > 0; the batched production path
assembles all modes into one symmetric positive definite banded matrix and
reuses its Cholesky factor across solves, while the single-mode entry point
uses plain Thomas elimination. The workspace also precomputes the linear
response functionals (wall-value response of the Helmholtz solve, near-wall
streamfunction row of the Poisson solve) that let the time stepper couple
Thom's wall-vorticity closure implicitly instead of lagging it. Per-mode
solves are independent; a workspace must not be mutated during a solve batch.
"""

import math

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .fields import ScalarField, VectorField, d_ds, d_dtheta
from .geometry import Grid


class ModalWorkspace:
    """Azimuthal transform buffers and cached per-mode factorizations.

    Factorizations are keyed by the time step (Helmholtz) or boundary
    closure (Poisson) and always match the grid the workspace was built for.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.n_modes = grid.n_theta // 2 + 1
        self.k = np.arange(self.n_modes)
        self.r2 = grid.r * grid.r
        self._helmholtz_cache = {}
        self._wall_response_cache = {}
        self._poisson_standard = None
        self._poisson_dirichlet = None
        self._row1_vectors = None

        n = grid.n_s
        # big-vector layout of the standard Poisson system: mode 0 keeps the
        # outer ring as a Neumann unknown, higher modes are interior-only
        self._n0 = n - 1
        self._nk = n - 2
        self._total = self._n0 + (self.n_modes - 1) * self._nk

    # ----------------------------------------------------------------- #
    # banded SPD helpers
    # ----------------------------------------------------------------- #

    @staticmethod
    def _factor_blocks(diagonals, subdiagonals):
        """Cholesky factor of a block-diagonal SPD tridiagonal system."""
        n_total = sum(len(d) for d in diagonals)
        ab = np.zeros((2, n_total))
        pos = 0
        for diag, sub in zip(diagonals, subdiagonals):
            n = len(diag)
            ab[0, pos:pos + n] = diag
            ab[1, pos:pos + n - 1] = sub
            pos += n
        return cholesky_banded(ab, lower=True)

    # ----------------------------------------------------------------- #
    # Poisson problem
    # ----------------------------------------------------------------- #

    def _standard_factor(self):
        if self._poisson_standard is None:
            n = self.grid.n_s
            inv_ds2 = 1.0 / self.grid.ds**2
            # mode 0: unknowns i = 1 .. n-1, Neumann ghost at the outer ring,
            # last row scaled by 1/2 to restore symmetry
            d0 = np.full(n - 1, 2.0 * inv_ds2)
            d0[-1] = inv_ds2
            diags = [d0]
            subs = [np.full(n - 2, -inv_ds2)]
            # modes k >= 1: unknowns i = 1 .. n-2, Dirichlet both ends
            for k in range(1, self.n_modes):
                diags.append(np.full(n - 2, 2.0 * inv_ds2 + k * k))
                subs.append(np.full(n - 3, -inv_ds2))
            self._poisson_standard = self._factor_blocks(diags, subs)
        return self._poisson_standard

    def _dirichlet_factor(self):
        if self._poisson_dirichlet is None:
            n = self.grid.n_s
            inv_ds2 = 1.0 / self.grid.ds**2
            diags = [np.full(n - 2, 2.0 * inv_ds2 + k * k)
                     for k in range(self.n_modes)]
            subs = [np.full(n - 3, -inv_ds2) for _ in range(self.n_modes)]
            self._poisson_dirichlet = self._factor_blocks(diags, subs)
        return self._poisson_dirichlet

    def _assemble_standard(self, omega_hat: np.ndarray, gamma_total: float):
        """Sign-flipped, symmetrized right-hand side of the standard problem.

        omega_hat is the full (n_s, n_modes) modal vorticity; rows 0 and
        n-1 participate only where the closure references them (the outer
        Neumann row of mode 0). The rfft is unnormalized, so the physical
        mean slope gamma / (2 pi) scales by n_theta in coefficient space.
        """
        grid = self.grid
        rhs_hat = self.r2[:, None] * omega_hat
        big = np.zeros((self._total, 2))

        b0 = -rhs_hat[1:, 0].real.copy()
        slope = gamma_total * grid.n_theta / (2.0 * math.pi)
        b0[-1] = 0.5 * (-rhs_hat[-1, 0].real + 2.0 * slope / grid.ds)
        big[:self._n0, 0] = b0

        bk = -rhs_hat[1:-1, 1:]
        big[self._n0:, 0] = bk.real.T.ravel()
        big[self._n0:, 1] = bk.imag.T.ravel()
        return big

    def _unpack_standard(self, sol: np.ndarray) -> np.ndarray:
        n = self.grid.n_s
        psi_hat = np.zeros((n, self.n_modes), dtype=complex)
        psi_hat[1:, 0] = sol[:self._n0, 0]
        interior = (sol[self._n0:, 0] + 1j * sol[self._n0:, 1])
        psi_hat[1:-1, 1:] = interior.reshape(self.n_modes - 1, self._nk).T
        return psi_hat

    def solve_streamfunction_hat(self, omega_hat: np.ndarray,
                                 gamma_total: float) -> np.ndarray:
        """Modal streamfunction of the standard closure, (n_s, n_modes)."""
        big = self._assemble_standard(omega_hat, gamma_total)
        sol = cho_solve_banded((self._standard_factor(), True), big)
        return self._unpack_standard(sol)

    def solve_streamfunction_values(self, omega_values: np.ndarray,
                                    gamma_total: float) -> np.ndarray:
        """psi with Lap psi = omega, psi(wall) = 0, circulation at the outer ring."""
        omega_hat = np.fft.rfft(omega_values, axis=1)
        psi_hat = self.solve_streamfunction_hat(omega_hat, gamma_total)
        return np.fft.irfft(psi_hat, n=self.grid.n_theta, axis=1)

    def _row1_functionals(self):
        """Per-mode vectors v_k with psi_hat_1[k] = v_k . rhs_block_k.

        The Poisson matrices are symmetric, so the row of the inverse that
        produces the near-wall streamfunction value is itself the solution
        of A_k x = e_row1; all modes are extracted from one banded solve.
        """
        if self._row1_vectors is None:
            eye = np.zeros((self._total, self.n_modes))
            eye[0, 0] = 1.0
            for k in range(1, self.n_modes):
                eye[self._n0 + (k - 1) * self._nk, k] = 1.0
            sol = cho_solve_banded((self._standard_factor(), True), eye)
            vecs = [sol[:self._n0, 0]]
            for k in range(1, self.n_modes):
                start = self._n0 + (k - 1) * self._nk
                vecs.append(sol[start:start + self._nk, k])
            self._row1_vectors = (vecs[0], np.vstack(vecs[1:]))
        return self._row1_vectors

    def poisson_psi1_hat(self, omega_hat: np.ndarray,
                         gamma_total: float) -> np.ndarray:
        """Near-wall streamfunction row psi_hat[1, :] without a full solve."""
        big = self._assemble_standard(omega_hat, gamma_total)
        vec0, vecs = self._row1_functionals()
        psi1 = np.empty(self.n_modes, dtype=complex)
        psi1[0] = vec0 @ big[:self._n0, 0]
        rest = big[self._n0:, 0].reshape(self.n_modes - 1, self._nk)
        rest_im = big[self._n0:, 1].reshape(self.n_modes - 1, self._nk)
        psi1[1:] = np.einsum("ki,ki->k", vecs, rest) \
            + 1j * np.einsum("ki,ki->k", vecs, rest_im)
        return psi1

    def solve_dirichlet_values(self, omega_values: np.ndarray,
                               psi_wall: np.ndarray,
                               psi_outer: np.ndarray) -> np.ndarray:
        """psi with Lap psi = omega and prescribed Dirichlet rings."""
        grid = self.grid
        n = grid.n_s
        inv_ds2 = 1.0 / grid.ds**2
        omega_hat = np.fft.rfft(omega_values, axis=1)
        wall_hat = np.fft.rfft(np.asarray(psi_wall, dtype=float))
        outer_hat = np.fft.rfft(np.asarray(psi_outer, dtype=float))

        rhs = -self.r2[1:-1, None] * omega_hat[1:-1, :]
        rhs[0, :] += inv_ds2 * wall_hat
        rhs[-1, :] += inv_ds2 * outer_hat

        nk = n - 2
        big = np.empty((self.n_modes * nk, 2))
        big[:, 0] = rhs.real.T.ravel()
        big[:, 1] = rhs.imag.T.ravel()
        sol = cho_solve_banded((self._dirichlet_factor(), True), big)

        psi_hat = np.empty((n, self.n_modes), dtype=complex)
        psi_hat[1:-1, :] = (sol[:, 0] + 1j * sol[:, 1]).reshape(self.n_modes, nk).T
        psi_hat[0, :] = wall_hat
        psi_hat[-1, :] = outer_hat
        return np.fft.irfft(psi_hat, n=grid.n_theta, axis=1)

    # ----------------------------------------------------------------- #
    # Helmholtz step solves
    # ----------------------------------------------------------------- #

    def _helmholtz_factor(self, dt: float):
        factor = self._helmholtz_cache.get(dt)
        if factor is None:
            n = self.grid.n_s
            half = 0.5 * dt / self.grid.ds**2
            r2_int = self.r2[1:-1]
            diags = [r2_int + 2.0 * half + 0.5 * dt * k * k
                     for k in range(self.n_modes)]
            subs = [np.full(n - 3, -half) for _ in range(self.n_modes)]
            factor = self._factor_blocks(diags, subs)
            self._helmholtz_cache[dt] = factor
        return factor

    def helmholtz_all_modes(self, dt: float, rhs_hat: np.ndarray,
                            wall_hat: np.ndarray,
                            outer_hat: np.ndarray) -> np.ndarray:
        """Solve the Crank-Nicolson step for every mode at once.

        rhs_hat is (n_s, n_modes) complex, already row-scaled by r^2 at the
        interior rows (rows 0 and n-1 are ignored); wall_hat/outer_hat are
        the prescribed new boundary values per mode, injected into the
        returned modal array.
        """
        n = self.grid.n_s
        nk = n - 2
        half = 0.5 * dt / self.grid.ds**2
        rhs = rhs_hat[1:-1, :].copy()
        rhs[0, :] += half * wall_hat
        rhs[-1, :] += half * outer_hat

        big = np.empty((self.n_modes * nk, 2))
        big[:, 0] = rhs.real.T.ravel()
        big[:, 1] = rhs.imag.T.ravel()
        sol = cho_solve_banded((self._helmholtz_factor(dt), True), big)

        w_hat = np.empty((n, self.n_modes), dtype=complex)
        w_hat[1:-1, :] = (sol[:, 0] + 1j * sol[:, 1]).reshape(self.n_modes, nk).T
        w_hat[0, :] = wall_hat
        w_hat[-1, :] = outer_hat
        return w_hat

    def wall_response(self, dt: float):
        """Linear response of the coupled no-slip step to a unit wall value.

        Returns (resp, psi1_resp): resp[:, k] is the interior vorticity a
        unit wall coefficient of mode k induces through the Crank-Nicolson
        solve, and psi1_resp[k] the near-wall streamfunction row it induces
        through the Poisson solve. Both depend only on (grid, dt).
        """
        cached = self._wall_response_cache.get(dt)
        if cached is None:
            nk = self._nk
            half = 0.5 * dt / self.grid.ds**2
            rhs = np.zeros((self.n_modes * nk, self.n_modes))
            for k in range(self.n_modes):
                rhs[k * nk, k] = half
            sol = cho_solve_banded((self._helmholtz_factor(dt), True), rhs)
            resp = np.empty((nk, self.n_modes))
            for k in range(self.n_modes):
                resp[:, k] = sol[k * nk:(k + 1) * nk, k]
            omega_hat = np.zeros((self.grid.n_s, self.n_modes), dtype=complex)
            omega_hat[1:-1, :] = resp
            psi1_resp = self.poisson_psi1_hat(omega_hat, 0.0).real
            cached = (resp, psi1_resp)
            self._wall_response_cache[dt] = cached
        return cached

    def helmholtz_step_solve(self, k: int, dt: float, rhs: np.ndarray) -> np.ndarray:
        """Single-mode Crank-Nicolson solve by Thomas elimination.

        Solves (I - (dt/2) (1/r^2)(d_ss - k^2)) w = rhs with homogeneous
        Dirichlet rows at both radial ends; boundary values are injected
        separately by the caller. dt = 0 reduces to the identity on the
        interior rows.
        """
        if dt < 0.0:
            raise ValueError(f"time step must be nonnegative, got {dt}")
        if not (0 <= k <= self.grid.n_theta // 2):
            raise ValueError(f"mode {k} outside the grid's azimuthal band")
        rhs = np.asarray(rhs, dtype=float)
        n = self.grid.n_s
        if rhs.shape != (n,):
            raise ValueError("rhs must be a radial vector")
        coef = 0.5 * dt / (self.r2 * self.grid.ds**2)
        diag = 1.0 + 2.0 * coef + 0.5 * dt * k * k / self.r2
        off = -coef

        w = np.zeros(n)
        c_prime = np.zeros(n)
        d_prime = np.zeros(n)
        denom = diag[1]
        if denom == 0.0:
            raise ArithmeticError("singular Helmholtz system")
        c_prime[1] = off[1] / denom
        d_prime[1] = rhs[1] / denom
        for i in range(2, n - 1):
            denom = diag[i] - off[i] * c_prime[i - 1]
            if denom == 0.0:
                raise ArithmeticError("singular Helmholtz system")
            c_prime[i] = off[i] / denom
            d_prime[i] = (rhs[i] - off[i] * d_prime[i - 1]) / denom
        w[n - 2] = d_prime[n - 2]
        for i in range(n - 3, 0, -1):
            w[i] = d_prime[i] - c_prime[i] * w[i + 1]
        return w


def solve_streamfunction(omega: ScalarField, gamma_total: float,
                         workspace: ModalWorkspace | None = None) -> ScalarField:
    """Streamfunction psi with Lap psi = omega and imposed outer circulation.

    gamma_total is the counterclockwise circulation carried by the outer
    ring. The solve is linear in (omega, gamma_total); with omega = 0 and
    gamma_total = -1 the discrete solution is exactly psi = -s / (2 pi),
    whose velocity is the harmonic swirl.
    """
    if not math.isfinite(gamma_total):
        raise ValueError("gamma_total must be finite")
    ws = workspace if workspace is not None else ModalWorkspace(omega.grid)
    if ws.grid != omega.grid:
        raise ValueError("workspace grid does not match field grid")
    psi = ws.solve_streamfunction_values(omega.values, gamma_total)
    return ScalarField(omega.grid, psi)


def velocity_from_streamfunction(psi: ScalarField) -> VectorField:
    """u = grad_perp psi = (-d2 psi, d1 psi) via the discrete derivatives."""
    grid = psi.grid
    u_r = -d_dtheta(grid, psi.values) / grid.r[:, None]
    u_t = d_ds(grid, psi.values) / grid.r[:, None]
    cos_t = grid.cos_theta[None, :]
    sin_t = grid.sin_theta[None, :]
    u1 = u_r * cos_t - u_t * sin_t
    u2 = u_r * sin_t + u_t * cos_t
    return VectorField(grid, u1, u2)
