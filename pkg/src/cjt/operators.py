"""Truncated spin and boson operators for the small-chain solver.

Single-site basis ordering (used everywhere a truncated Hilbert space
appears): spin ⊗ Fock_r ⊗ Fock_l, with spin index 0 the low (sigma^z = -1)
state.  Local index of (s, n_r, n_l) is

    l = s * (n_b + 1)**2 + n_r * (n_b + 1) + n_l

and the chain is site-major with site 0 the most significant digit, so a
global basis index I decodes as l_j = (I // dim_local**(N-1-j)) % dim_local.
"""

import numpy as np
import scipy.sparse as sp

# spin basis: index 0 = |0> (sigma^z = -1), index 1 = |1> (sigma^z = +1)
SZ_DIAG = np.array([-1.0, 1.0])
SIGMA_Z = np.diag(SZ_DIAG)
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])  # |1><0|
SIGMA_MINUS = SIGMA_PLUS.T
SIGMA_X = SIGMA_PLUS + SIGMA_MINUS
SIGMA_Y = -1j * (SIGMA_PLUS - SIGMA_MINUS)


def destroy(n_levels):
    """Truncated annihilation operator on ``n_levels`` Fock states."""
    return np.diag(np.sqrt(np.arange(1.0, n_levels)), 1)


def local_dim(n_b):
    """Dimension of one site: spin times two boson species."""
    return 2 * (n_b + 1) ** 2


def hilbert_dim(n_sites, n_b):
    return local_dim(n_b) ** n_sites


def local_operator(spin_op, boson_r_op, boson_l_op):
    """Kronecker product spin ⊗ Fock_r ⊗ Fock_l for one site."""
    return np.kron(spin_op, np.kron(boson_r_op, boson_l_op))


def embed(op_local, site, n_sites):
    """Embed a one-site operator into the chain as a sparse matrix."""
    d = op_local.shape[0]
    left = sp.identity(d**site, format="csr")
    right = sp.identity(d ** (n_sites - site - 1), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op_local)), right, format="csr")


def site_occupations(n_sites, n_b):
    """Decode the product basis into per-site quantum numbers.

    Returns integer arrays ``spin``, ``n_r``, ``n_l`` of shape
    (dim, n_sites); ``spin`` is 0/1, the others are Fock occupations.
    """
    d = local_dim(n_b)
    dim = d**n_sites
    idx = np.arange(dim, dtype=np.int64)
    spin = np.empty((dim, n_sites), dtype=np.int64)
    n_r = np.empty((dim, n_sites), dtype=np.int64)
    n_l = np.empty((dim, n_sites), dtype=np.int64)
    per = n_b + 1
    for j in range(n_sites):
        loc = (idx // d ** (n_sites - 1 - j)) % d
        spin[:, j] = loc // per**2
        n_r[:, j] = (loc // per) % per
        n_l[:, j] = loc % per
    return spin, n_r, n_l
