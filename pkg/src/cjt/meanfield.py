"""Variational mean-field ground state of the spin-boson chain.

The ansatz is a product of coherent spin states tilted by theta_j in the
xz plane (the symmetry-breaking direction is fixed to phi = 0) and
displaced chiral boson modes.  Eliminating the displacements gives the
energy functional

    E(theta) = -(omega_z/2) sum_j cos theta_j
               - (1/4) sum_{j,l} J_{j,l} sin theta_j sin theta_l ,

    J_{j,l} = 2 g^2 sum_n b_{n,j} b_{n,l} / Delta_n ,

whose stationary points satisfy omega_z tan theta_j = sum_l J_{j,l}
sin theta_l.  Sign convention: with the low spin state at sigma^z = -1 and
the coupling g sigma^+ (a_r + a_l^dagger) + h.c., energy minimization
puts the induced field and theta_j on the same side, so the self-consistency
equation carries a plus sign and theta_j >= 0; the equivalent branch with
all angles reflected is the phi = pi member of the degenerate U(1) family.
The optimal displacements are

    alpha_{eps,n} = -(g / 2 Delta_n) sum_j b_{n,j} sin theta_j

for both chiralities.  On a periodic uniform chain this reproduces
cos theta = (g_c/g)^2 above the critical coupling g_c = sqrt(Delta_0
omega_z / 2), with Delta_0 the lowest mode energy.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError
from .model import ChiralAmplitudePair, ModelParams
from .modes import PhononSpectrum

#: mean phonon number above which a sweep point counts as condensed
TRANSITION_THRESHOLD = 1e-6


@dataclass(frozen=True)
class MeanFieldSolution:
    """Converged variational parameters and bookkeeping."""

    theta: np.ndarray
    phi: float
    alpha: ChiralAmplitudePair
    energy: float
    converged: bool
    iterations: int
    residual: float


@dataclass(frozen=True)
class SiteObservables:
    """Per-site expectation values of a mean-field solution."""

    phonons_per_site: np.ndarray
    spin_x: np.ndarray
    spin_z: np.ndarray
    order_parameter: float
    total_phonons: float


@dataclass(frozen=True)
class CriticalCouplingEstimate:
    """Two estimates of the transition coupling.

    ``lowest_mode``: sqrt(Delta_0 omega_z / 2), exact for periodic uniform
    chains.  ``linearized``: instability threshold of the linearized
    self-consistency equation, omega_z = g_c^2 lambda_max(J / g^2), which
    also covers inhomogeneous chains.
    """

    lowest_mode: float
    linearized: float


def exchange_matrix(spectrum: PhononSpectrum, g) -> np.ndarray:
    """Effective spin-spin couplings J_{j,l} = 2 g^2 sum_n b_nj b_nl / Delta_n."""
    b = spectrum.wavefunctions
    return 2.0 * g**2 * (b.T / spectrum.energies) @ b


def mean_field_energy(theta, j_matrix, omega_z):
    s = np.sin(theta)
    return -0.5 * omega_z * np.sum(np.cos(theta)) - 0.25 * s @ j_matrix @ s


def condensate_amplitudes(theta, spectrum: PhononSpectrum, g) -> ChiralAmplitudePair:
    alpha = -(0.5 * g / spectrum.energies) * (spectrum.wavefunctions @ np.sin(theta))
    return ChiralAmplitudePair(right=alpha, left=alpha.copy())


def _fixed_point(theta0, j_matrix, omega_z, tol, max_iter, damping):
    """Damped self-consistency iteration; returns (theta, iters, residual).

    The damping factor grows toward 1 whenever the residual stops
    decreasing (oscillation guard); iteration stops early once the update
    norm drops below tol.
    """
    theta = theta0.copy()
    eta = 1.0 - damping
    residual = np.inf
    worse = 0
    for it in range(1, max_iter + 1):
        target = np.arctan((j_matrix @ np.sin(theta)) / omega_z)
        new = (1.0 - eta) * theta + eta * target
        update = np.max(np.abs(new - theta))
        if update > residual:
            worse += 1
            if worse >= 10 and eta > 0.05:
                eta *= 0.5
                worse = 0
        residual = update
        theta = new
        if residual < tol:
            return theta, it, residual
    return theta, max_iter, residual


def _stationarity(theta, j_matrix, omega_z):
    h = j_matrix @ np.sin(theta)
    return omega_z * np.sin(theta) - np.cos(theta) * h


def _newton_polish(theta0, j_matrix, omega_z, tol, max_iter=60):
    """Newton on the stationarity system, with step halving.

    Finishes off fixed points that the damped iteration approaches slowly
    (critical slowing near the transition) and pushes the stationarity
    residual to machine level, which is what pins the symmetry zero mode of
    the fluctuation expansion at zero.  Returns (theta, ok, update).
    """
    theta = theta0.copy()
    g_vec = _stationarity(theta, j_matrix, omega_z)
    gnorm = np.max(np.abs(g_vec))
    gtol = 1e-13 * max(omega_z, float(np.max(np.abs(j_matrix))))
    update = np.inf
    for _ in range(max_iter):
        if gnorm < gtol:
            return theta, True, min(update, gnorm)
        h = j_matrix @ np.sin(theta)
        jac = np.diag(omega_z * np.cos(theta) + np.sin(theta) * h)
        jac -= np.cos(theta)[:, None] * j_matrix * np.cos(theta)[None, :]
        try:
            step = np.linalg.solve(jac, g_vec)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, g_vec, rcond=None)
        scale = 1.0
        for _ in range(40):
            trial = theta - scale * step
            trial_g = _stationarity(trial, j_matrix, omega_z)
            trial_norm = np.max(np.abs(trial_g))
            if trial_norm < gnorm:
                break
            scale *= 0.5
        else:
            return theta, update < tol, update
        update = np.max(np.abs(trial - theta))
        theta, g_vec, gnorm = trial, trial_g, trial_norm
    return theta, gnorm < gtol or update < tol, update


def solve_mean_field(
    params: ModelParams,
    spectrum: PhononSpectrum,
    tol=1e-10,
    max_iter=5000,
    damping=0.5,
    n_random=2,
    rng_seed=0,
    warm_start=None,
) -> MeanFieldSolution:
    """Find the lowest-energy self-consistent spin configuration.

    Damped fixed-point iteration runs from several seeds (the exact normal
    state, small and moderate uniform tilts, an optional warm start, and
    seeded random vectors), each followed by a Newton polish; the converged
    fixed point with the lowest variational energy wins.  In the normal
    phase the returned angles and displacements are identically zero.
    """
    n = params.n_sites
    omega_z = params.omega_z
    j_matrix = exchange_matrix(spectrum, params.g)
    rng = np.random.default_rng(rng_seed)
    seeds = [np.zeros(n), np.full(n, 0.05), np.full(n, 0.6)]
    if warm_start is not None:
        seeds.insert(1, np.asarray(warm_start, dtype=float))
    for _ in range(n_random):
        seeds.append(rng.uniform(0.0, 1.2, size=n))

    candidates = []
    diagnostics = []
    for seed in seeds:
        if np.max(np.abs(seed)) == 0.0:
            # the normal state is always an exact fixed point
            candidates.append((np.zeros(n), 0, 0.0))
            continue
        theta, iters, residual = _fixed_point(
            seed, j_matrix, omega_z, tol, max_iter, damping
        )
        # always polish: the fixed point's update norm underestimates the
        # true stationarity error when contraction is slow near criticality
        theta, ok, newton_update = _newton_polish(theta, j_matrix, omega_z, tol)
        residual = min(residual, newton_update)
        if not ok:
            diagnostics.append({"seed_max": float(np.max(seed)), "residual": residual})
            continue
        if np.sum(np.sin(theta)) < 0:
            theta = -theta  # canonical branch: tilt angles nonnegative
        candidates.append((theta, iters, residual))

    if not candidates:
        raise ConvergenceError(
            f"mean field: no seed converged at g = {params.g}",
            diagnostics={"g": params.g, "failures": diagnostics},
        )

    def sort_key(cand):
        theta = cand[0]
        return (mean_field_energy(theta, j_matrix, omega_z), np.max(np.abs(theta)))

    theta, iterations, residual = min(candidates, key=sort_key)
    energy = mean_field_energy(theta, j_matrix, omega_z)
    if np.max(np.abs(theta)) < 10 * tol:
        theta = np.zeros(n)  # collapse numerically-normal results exactly
        energy = mean_field_energy(theta, j_matrix, omega_z)
    return MeanFieldSolution(
        theta=theta,
        phi=0.0,
        alpha=condensate_amplitudes(theta, spectrum, params.g),
        energy=float(energy),
        converged=True,
        iterations=iterations,
        residual=float(residual),
    )


def site_amplitudes(solution: MeanFieldSolution, spectrum: PhononSpectrum):
    """Coherent displacement per site, <a_{eps,j}> = sum_n b_{n,j} alpha_{eps,n}."""
    b = spectrum.wavefunctions
    return ChiralAmplitudePair(
        right=b.T @ solution.alpha.right, left=b.T @ solution.alpha.left
    )


def mf_observables(
    solution: MeanFieldSolution, spectrum: PhononSpectrum
) -> SiteObservables:
    """Condensate profile, spin projections and the coherence order parameter.

    The order parameter is the mean-field factorization of the normalized
    two-point coherence sum, sum_{j,k,eps} <a_{eps,j}>* <a_{eps,k}> / N^2,
    which is phi-independent and vanishes identically in the normal phase.
    """
    amps = site_amplitudes(solution, spectrum)
    n_per_site = np.abs(amps.right) ** 2 + np.abs(amps.left) ** 2
    n = solution.theta.size
    op = (np.abs(amps.right.sum()) ** 2 + np.abs(amps.left.sum()) ** 2) / n**2
    return SiteObservables(
        phonons_per_site=n_per_site,
        spin_x=np.sin(solution.theta),
        spin_z=-np.cos(solution.theta),
        order_parameter=float(op),
        total_phonons=float(n_per_site.sum()),
    )


def critical_coupling_estimate(
    spectrum: PhononSpectrum, omega_z
) -> CriticalCouplingEstimate:
    """Transition-coupling estimates from the phonon spectrum alone."""
    lowest = np.sqrt(0.5 * spectrum.lowest * omega_z)
    kernel = exchange_matrix(spectrum, 1.0)  # J / g^2
    lam = np.linalg.eigvalsh(kernel)[-1]
    return CriticalCouplingEstimate(
        lowest_mode=float(lowest), linearized=float(np.sqrt(omega_z / lam))
    )


def sweep_mean_field(
    params: ModelParams,
    spectrum: PhononSpectrum,
    g_values,
    tol=1e-10,
    max_iter=5000,
    damping=0.5,
    rng_seed=0,
):
    """Solve an ascending coupling sweep with warm starts.

    Warm-starting from the previous point tracks the continuously connected
    ground branch through the second-order transition; the sweep is
    therefore sequential by construction.  Returns a list of
    (g, MeanFieldSolution, SiteObservables).
    """
    g_values = np.asarray(g_values, dtype=float)
    if g_values.size and np.any(np.diff(g_values) <= 0):
        raise ValueError("sweep grid must be strictly increasing")
    results = []
    warm = None
    for g in g_values:
        point = replace(params, g=float(g))
        sol = solve_mean_field(
            point,
            spectrum,
            tol=tol,
            max_iter=max_iter,
            damping=damping,
            rng_seed=rng_seed,
            warm_start=warm,
        )
        warm = sol.theta if np.max(sol.theta) > 0 else None
        results.append((float(g), sol, mf_observables(sol, spectrum)))
    return results


def detect_transition(g_values, total_phonons, threshold=TRANSITION_THRESHOLD):
    """Transition point of a sweep: midpoint of the first condensing interval.

    Returns None when the sweep never condenses; returns the first grid
    point when the sweep starts already condensed.
    """
    g_values = np.asarray(g_values, dtype=float)
    nph = np.asarray(total_phonons, dtype=float)
    above = nph > threshold
    if not above.any():
        return None
    first = int(np.argmax(above))
    if first == 0:
        return float(g_values[0])
    return float(0.5 * (g_values[first - 1] + g_values[first]))
