"""Gaussian (Bogoliubov) fluctuations around a mean-field solution.

The quadratic fluctuation Hamiltonian over the 3N operators
{da_s,j, da_l,n, da_r,n} (spin waves from the rotated-frame
Holstein-Primakoff linearization, then left and right chiral modes) is

    H_G = sum_j w_j da_s,j^d da_s,j + sum_{n,eps} Delta_n da_eps,n^d da_eps,n
        + (g/2) sum_{j,n} b_{n,j} cos(theta_j)
              (da_s,j + da_s,j^d)(da_l,n + da_l,n^d + da_r,n + da_r,n^d)
        + (g/2) sum_{j,n} b_{n,j}
              (da_s,j - da_s,j^d)(da_l,n - da_l,n^d - da_r,n + da_r,n^d)

with w_j = omega_z / cos(theta_j).  Collecting normal (A) and anomalous
(B) coefficients, H_G = (1/2) Psi^d [[A, B], [B, A]] Psi + const over the
Nambu vector Psi = (da, da^d), and the canonical transformation
da_p = sum_m (U_pm c_m + V_pm c_m^d) diagonalizing it comes from the
eigenvectors of the dynamical matrix [[A, B], [-B, -A]].
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import CjtError, UnstableExpansionPointError
from .meanfield import MeanFieldSolution, mf_observables, solve_mean_field
from .model import ModelParams
from .modes import PhononSpectrum

#: modes below this energy (omega_z units) count as symmetry zero modes
ZERO_MODE_TOL = 1e-6

_BLOCKS = {"s": 0, "l": 1, "r": 2}


@dataclass(frozen=True)
class GaussianHamiltonian:
    """Coefficient matrices of the quadratic fluctuation form.

    ``normal`` is the Hermitian coefficient of da^d da, ``anomalous`` the
    symmetric coefficient of the da^d da^d pairs; both are real here.  The
    mean-field variational energy rides along as the constant term.
    """

    normal: np.ndarray
    anomalous: np.ndarray
    constant: float
    n_sites: int

    def matrix(self):
        """Hermitian 6N x 6N Nambu matrix [[A, B], [B, A]]."""
        return np.block([[self.normal, self.anomalous], [self.anomalous, self.normal]])

    def dynamical(self):
        """Non-Hermitian 6N x 6N matrix [[A, B], [-B, -A]] whose eigenvalues pair as +/- omega."""
        return np.block(
            [[self.normal, self.anomalous], [-self.anomalous, -self.normal]]
        )


@dataclass(frozen=True)
class GaussianSpectrum:
    """Bogoliubov energies, transformation and derived quantities.

    ``energies`` holds all 3N mode energies ascending, with the
    ``zero_mode_count`` leading entries pinned to zero.  The matching
    columns of ``u`` and ``v`` are zeroed: symmetry zero modes admit no
    canonical normalization and are excluded from every variance sum (their
    count is the honest record of the exclusion).  Row blocks of ``u`` and
    ``v``: sites 0..N-1 are spin waves, N..2N-1 left modes, 2N..3N-1 right
    modes.
    """

    energies: np.ndarray
    u: np.ndarray
    v: np.ndarray
    zero_mode_count: int
    zero_mode_tol: float
    constant: float
    trace_normal: float

    @property
    def n_sites(self):
        return self.energies.size // 3

    @property
    def gap(self):
        """Smallest mode energy above the zero-mode tolerance."""
        nonzero = self.energies[self.zero_mode_count :]
        return float(nonzero[0]) if nonzero.size else 0.0

    def block(self, matrix, which):
        n = self.n_sites
        i = _BLOCKS[which]
        return matrix[i * n : (i + 1) * n, :]

    @property
    def zero_point_energy(self):
        """Gaussian correction (1/2)(sum_m omega_m - tr A) to the constant term."""
        return 0.5 * (self.energies.sum() - self.trace_normal)

    @property
    def ground_energy(self):
        """Mean-field energy plus the Gaussian zero-point correction."""
        return self.constant + self.zero_point_energy


@dataclass(frozen=True)
class FluctuationVariances:
    """Variance per atom of spin-wave, left and right fluctuation modes."""

    f_spin: float
    f_left: float
    f_right: float
    zero_mode_count: int


def build_gaussian_hamiltonian(
    params: ModelParams,
    spectrum: PhononSpectrum,
    solution: MeanFieldSolution,
    boson_basis="mode",
) -> GaussianHamiltonian:
    """Assemble the quadratic form around a converged mean-field solution.

    ``boson_basis`` picks the representation of the two chiral species:
    "mode" uses the collective modes (energies Delta_n on the diagonal and
    couplings weighted by the wavefunctions), "site" keeps site operators
    (full bath matrix on the diagonal, on-site couplings).  Both give the
    same spectrum and variances; the site form exists as a cross-check.
    """
    if boson_basis not in ("mode", "site"):
        raise ValueError(f"boson_basis must be 'mode' or 'site', got {boson_basis}")
    n = params.n_sites
    theta = solution.theta
    cos = np.cos(theta)
    if np.any(np.abs(cos) < 1e-12):
        raise CjtError(
            "spin-wave energies diverge at theta = pi/2; the expansion is "
            "singular there (omega_j = omega_z / cos theta_j)"
        )
    g = params.g
    if boson_basis == "mode":
        bath = np.diag(spectrum.energies)
        w_minus = 0.5 * g * spectrum.wavefunctions.T * (cos - 1.0)[:, None]
        w_plus = 0.5 * g * spectrum.wavefunctions.T * (cos + 1.0)[:, None]
    else:
        b = spectrum.wavefunctions
        bath = (b.T * spectrum.energies) @ b
        w_minus = np.diag(0.5 * g * (cos - 1.0))
        w_plus = np.diag(0.5 * g * (cos + 1.0))
    zero = np.zeros((n, n))
    spin = np.diag(params.omega_z / cos)
    a = np.block(
        [[spin, w_minus, w_plus], [w_minus.T, bath, zero], [w_plus.T, zero, bath]]
    )
    b_mat = np.block(
        [[zero, w_plus, w_minus], [w_plus.T, zero, zero], [w_minus.T, zero, zero]]
    )
    return GaussianHamiltonian(
        normal=a, anomalous=b_mat, constant=solution.energy, n_sites=n
    )


def _group_normalize(vectors, values, tol, norm_floor=1e-6):
    """Symplectic Gram-Schmidt within (near-)degenerate eigenvalue groups.

    The indefinite metric diag(I, -I) is positive on the positive-frequency
    eigenspace, so a Cholesky factor of the Gram matrix orthonormalizes each
    group; distinct modes are already metric-orthogonal, which makes the
    grouping tolerance uncritical.  Vectors whose symplectic norm falls
    below ``norm_floor`` are the generalized partners of symmetry zero
    modes and are dropped (returned separately as a count).
    """
    n2 = vectors.shape[0] // 2
    norms = (vectors[:n2] ** 2).sum(axis=0) - (vectors[n2:] ** 2).sum(axis=0)
    healthy = norms > norm_floor * (vectors**2).sum(axis=0)
    dropped = int(np.count_nonzero(~healthy))
    values = values[healthy]
    out = vectors[:, healthy]
    order = np.argsort(values, kind="stable")
    values = values[order]
    out = out[:, order]
    groups = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > tol:
            groups.append((start, i))
            start = i
    for lo, hi in groups:
        block = out[:, lo:hi]
        gram = block[:n2].T @ block[:n2] - block[n2:].T @ block[n2:]
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise UnstableExpansionPointError(
                "positive-frequency eigenvector with non-positive symplectic "
                f"norm near omega = {values[lo]:.6g}"
            ) from None
        out[:, lo:hi] = block @ np.linalg.inv(chol).T
    return values, out, dropped


def bogoliubov_diagonalize(
    form: GaussianHamiltonian,
    zero_tol=ZERO_MODE_TOL,
    imag_tol=1e-8,
    psd_tol=1e-8,
    goldstone_window=1e-4,
) -> GaussianSpectrum:
    """Diagonalize the quadratic form into 3N bosonic normal modes.

    The Nambu matrix must be positive semidefinite (the expansion point is
    a minimum); its failure, or any complex frequency that cannot be a
    numerical artifact, raises :class:`UnstableExpansionPointError`.
    Eigenvectors of the dynamical matrix with frequency above ``zero_tol``
    are symplectically normalized into the columns of U and V; the
    remainder are counted as zero modes.

    Exact symmetry zero modes sit in a defective (Jordan) block of the
    dynamical matrix, which floating point splits into a tiny pair that may
    come out real or purely imaginary; eigenvalues inside the
    ``goldstone_window`` are therefore folded into the zero-mode count no
    matter their phase, and only larger complex frequencies are treated as
    instabilities.  Physical near-critical modes passing ``zero_tol`` are
    real and carry unit symplectic norm, which is what distinguishes them
    from the artifacts.
    """
    m = form.matrix()
    n3 = form.normal.shape[0]
    scale = max(1.0, float(np.max(np.abs(m))))
    min_eig = float(scipy.linalg.eigvalsh(m, subset_by_index=[0, 0])[0])
    if min_eig < -psd_tol * scale:
        raise UnstableExpansionPointError(
            f"fluctuation form is not positive semidefinite (min eigenvalue "
            f"{min_eig:.6g}); the expansion point is a saddle"
        )
    values, vectors = scipy.linalg.eig(form.dynamical())
    complex_mask = np.abs(values.imag) > imag_tol * scale
    bad = complex_mask & (np.abs(values) > goldstone_window * scale)
    if bad.any():
        raise UnstableExpansionPointError(
            f"complex Bogoliubov frequencies (max imag "
            f"{np.max(np.abs(values.imag[bad])):.6g}); the expansion point is unstable"
        )
    keep = (~complex_mask) & (values.real > zero_tol)
    if int(np.count_nonzero(keep)) > n3:
        raise UnstableExpansionPointError(
            "more positive frequencies than modes; eigenvalue pairing failed"
        )
    pos_vals = values.real[keep]
    pos_vecs = np.real(vectors[:, keep])
    pos_vals, pos_vecs, _ = _group_normalize(pos_vecs, pos_vals, tol=1e-9 * scale)
    zero_count = n3 - pos_vals.size
    energies = np.concatenate([np.zeros(zero_count), pos_vals])
    u = np.zeros((n3, n3))
    v = np.zeros((n3, n3))
    u[:, zero_count:] = pos_vecs[:n3]
    v[:, zero_count:] = pos_vecs[n3:]
    return GaussianSpectrum(
        energies=energies,
        u=u,
        v=v,
        zero_mode_count=zero_count,
        zero_mode_tol=zero_tol,
        constant=form.constant,
        trace_normal=float(np.trace(form.normal)),
    )


def symplectic_residual(spectrum: GaussianSpectrum):
    """Worst deviation of sum(|U|^2 - |V|^2) from 1 over the nonzero modes."""
    z = spectrum.zero_mode_count
    norms = (spectrum.u[:, z:] ** 2).sum(axis=0) - (spectrum.v[:, z:] ** 2).sum(axis=0)
    return float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0


def fluctuation_variances(spectrum: GaussianSpectrum) -> FluctuationVariances:
    """Variance per atom F_gamma = (1/N) sum_{n,m} |V^gamma_{n,m}|^2.

    Zero-mode columns are excluded (they carry no canonical V) and their
    count is reported alongside the variances.
    """
    n = spectrum.n_sites
    f = {
        name: float((spectrum.block(spectrum.v, name) ** 2).sum() / n)
        for name in ("s", "l", "r")
    }
    return FluctuationVariances(
        f_spin=f["s"],
        f_left=f["l"],
        f_right=f["r"],
        zero_mode_count=spectrum.zero_mode_count,
    )


def adiabatic_gap(spectrum: GaussianSpectrum):
    """Energy of the lowest mode above the zero-mode tolerance."""
    return spectrum.gap


def quasiparticle_charges(spectrum: GaussianSpectrum):
    """Conserved-charge quantum of each quasiparticle creation operator.

    The fluctuation Hamiltonian inherits the chain's U(1) symmetry, so every
    mode operator carries a definite charge: +1 when c_m mixes spin/right
    annihilators with left creators, -1 for the conjugate family.  Returns
    an int array over the modes (0 for zero modes).  The smallest
    charge-conserving excitation is one quasiparticle of each sign.
    """
    charges = np.zeros(spectrum.energies.size, dtype=int)
    z = spectrum.zero_mode_count
    u, v = spectrum.u, spectrum.v
    minus = (
        (spectrum.block(u, "s") ** 2).sum(axis=0)
        + (spectrum.block(u, "r") ** 2).sum(axis=0)
        + (spectrum.block(v, "l") ** 2).sum(axis=0)
    )
    plus = (
        (spectrum.block(v, "s") ** 2).sum(axis=0)
        + (spectrum.block(v, "r") ** 2).sum(axis=0)
        + (spectrum.block(u, "l") ** 2).sum(axis=0)
    )
    charges[z:] = np.where(minus[z:] >= plus[z:], 1, -1)
    return charges


def charge_conserving_gap(spectrum: GaussianSpectrum):
    """Lowest excitation energy within the ground state's charge sector.

    Single quasiparticles all change the conserved charge by +/-1, so the
    cheapest symmetry-allowed excitation combines one quasiparticle of each
    charge; returns the summed energy (inf when a sign family is empty).
    """
    charges = quasiparticle_charges(spectrum)
    energies = spectrum.energies
    gaps = []
    for sign in (1, -1):
        sel = energies[charges == sign]
        gaps.append(float(sel.min()) if sel.size else np.inf)
    return gaps[0] + gaps[1]


def fluctuation_sweep(
    params: ModelParams,
    spectrum: PhononSpectrum,
    g_values,
    zero_tol=ZERO_MODE_TOL,
    rng_seed=0,
):
    """Mean-field plus fluctuations along an ascending coupling sweep.

    Returns a list of dicts with the coupling, variances, single- and
    charge-conserving gaps, zero-mode count and total mean phonons; the
    mean-field chain is warm-started exactly as in the bare sweep.
    """
    g_values = np.asarray(g_values, dtype=float)
    records = []
    warm = None
    for g in g_values:
        point = replace(params, g=float(g))
        sol = solve_mean_field(point, spectrum, rng_seed=rng_seed, warm_start=warm)
        warm = sol.theta if np.max(sol.theta) > 0 else None
        gs = bogoliubov_diagonalize(
            build_gaussian_hamiltonian(point, spectrum, sol), zero_tol=zero_tol
        )
        var = fluctuation_variances(gs)
        obs = mf_observables(sol, spectrum)
        records.append(
            {
                "g": float(g),
                "f_spin": var.f_spin,
                "f_left": var.f_left,
                "f_right": var.f_right,
                "gap": gs.gap,
                "charge_gap": charge_conserving_gap(gs),
                "zero_mode_count": gs.zero_mode_count,
                "total_phonons": obs.total_phonons,
                "energy": sol.energy,
            }
        )
    return records
