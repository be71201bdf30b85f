"""Collective boson modes of the one-particle bath matrix."""

from dataclasses import dataclass

import numpy as np

from .errors import UnstableBathError
from .model import CouplingMatrix


@dataclass(frozen=True)
class PhononSpectrum:
    """Collective mode energies (ascending) and real orthogonal wavefunctions.

    ``wavefunctions`` has one mode per row: b[n, j] is the amplitude of mode
    n on site j, with sum_j b[n, j] b[m, j] = delta_nm and

        sum_n b[n, j] * energies[n] * b[n, l] = delta_j delta_{jl} + t_{j,l}.
    """

    energies: np.ndarray
    wavefunctions: np.ndarray

    @property
    def n_sites(self):
        return self.energies.size

    @property
    def lowest(self):
        return float(self.energies[0])


def _canonicalize(evals, b, degeneracy_tol=1e-11):
    """Deterministic eigenbasis: re-orthogonalize degenerate groups, fix signs.

    Within a degenerate group the subspace projector is resolved onto the
    sites where it has the largest weight (lowest site index on ties) and
    Gram-Schmidt runs in that site order, so the returned rows do not depend
    on LAPACK's arbitrary in-group rotations.
    """
    n = evals.size
    scale = max(1.0, float(np.max(np.abs(evals))))
    groups = []
    start = 0
    for i in range(1, n + 1):
        if i == n or evals[i] - evals[i - 1] > degeneracy_tol * scale:
            groups.append((start, i))
            start = i
    out = b.copy()
    for lo, hi in groups:
        k = hi - lo
        if k > 1:
            block = b[lo:hi]  # k x N
            weight = (block**2).sum(axis=0)
            # pivot sites: largest subspace weight, ties to the lower index
            pivots = np.argsort(-weight, kind="stable")[:k]
            vecs = []
            for site in pivots:
                v = block.T @ block[:, site]  # projector column
                for prev in vecs:
                    v = v - prev * (prev @ v)
                norm = np.linalg.norm(v)
                if norm < 1e-8:
                    # pathological pivot; fall back to the LAPACK vectors
                    vecs = [row for row in block]
                    break
                vecs.append(v / norm)
            out[lo:hi] = np.array(vecs[:k])
    # sign convention: largest-magnitude component positive (first on ties)
    lead = np.argmax(np.abs(out) > np.max(np.abs(out), axis=1, keepdims=True) - 1e-12, axis=1)
    signs = np.sign(out[np.arange(n), lead])
    signs[signs == 0] = 1.0
    return out * signs[:, None]


def diagonalize_bath(coupling: CouplingMatrix, require_stable=True) -> PhononSpectrum:
    """Exact symmetric eigendecomposition of delta_j delta_{jl} + t_{j,l}.

    Raises :class:`UnstableBathError` when any collective energy is not
    positive, since everything downstream (exchange couplings, fluctuation
    expansion) divides by these energies; pass ``require_stable=False`` to
    inspect an unstable spectrum anyway.
    """
    evals, evecs = np.linalg.eigh(coupling.matrix())
    b = _canonicalize(evals, evecs.T)
    if require_stable and evals[0] <= 0:
        bad = np.flatnonzero(evals <= 0)
        raise UnstableBathError(
            f"collective mode energies not positive for modes {bad.tolist()} "
            f"(lowest {evals[0]:.6g})",
            offending=bad,
        )
    return PhononSpectrum(energies=evals, wavefunctions=b)
