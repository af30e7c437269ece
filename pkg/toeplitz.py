"""
DIM transfer matrix: construction, singular values and the
encoder/decoder pair that unravels n channel uses into n attenuators
"""

import math
import numbers
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from errors import InvalidParameterError, NumericalError, require
from specialfn import laguerre_row

logger = logging.getLogger(__name__)

# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True)
class ChannelParams:
    """
    Physical parameters of a fibre instance

    Args:
        lam: Transmissivity of a single isolated signal, in [0, 1]
        mu: Memory parameter, in [0, 1)
        nu: Thermal photon number of the environment, >= 0
        gamma: Transversal (memoryless) transmissivity, in (0, 1]
    """
    lam: float
    mu: float = 0.0
    nu: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ('lam', 'mu', 'nu', 'gamma'):
            value = getattr(self, name)
            require(isinstance(value, numbers.Real) and not isinstance(value, bool)
                    and math.isfinite(value),
                    f"{name} must be a finite number, got {value!r}")
        require(0.0 <= self.lam <= 1.0, f"lambda must lie in [0, 1], got {self.lam}")
        require(0.0 <= self.mu < 1.0, f"mu must lie in [0, 1), got {self.mu}")
        require(self.nu >= 0.0, f"nu must be nonnegative, got {self.nu}")
        require(0.0 < self.gamma <= 1.0, f"gamma must lie in (0, 1], got {self.gamma}")

    def with_lambda(self, lam):
        return ChannelParams(lam=lam, mu=self.mu, nu=self.nu, gamma=self.gamma)

    def as_dict(self):
        return {'lambda': self.lam, 'mu': self.mu, 'nu': self.nu, 'gamma': self.gamma}


@dataclass(frozen=True)
class TransferMatrix:
    """Lower-triangular Toeplitz matrix acting on the input annihilation operators"""
    n: int
    entries: np.ndarray


@dataclass(frozen=True)
class TransmissivitySpectrum:
    """Squared singular values of the transfer matrix, nondecreasing"""
    n: int
    values: np.ndarray

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ChannelDecomposition:
    """transfer matrix = o2.T @ diag(sqrt(spectrum)) @ o1"""
    o1: np.ndarray
    o2: np.ndarray
    spectrum: TransmissivitySpectrum

    def reconstruct(self):
        root = np.sqrt(self.spectrum.values)
        return self.o2.T @ (root[:, None] * self.o1)


def _check_uses(n):
    require(isinstance(n, (int, np.integer)) and n >= 1,
            f"number of channel uses n must be a positive integer, got {n!r}")


def _frozen(array):
    array.setflags(write=False)
    return array

# ============================================================================
# Matrix Construction
# ============================================================================

def symbol_generator(order_max, params):
    """
    First-column generator a_j = sqrt(lambda*gamma) mu^(j/2) L_j^(-1)(-ln lambda)

    Returns:
        numpy vector of length order_max + 1
    """
    generator = np.zeros(order_max + 1)
    if params.lam == 0.0:
        return generator
    generator[0] = math.sqrt(params.lam * params.gamma)
    if params.lam == 1.0 or params.mu == 0.0 or order_max == 0:
        # L_m^(-1)(0) = 0 for m >= 1, and mu = 0 kills every sub-diagonal
        return generator
    row = laguerre_row(order_max, -math.log(params.lam)).values
    j = np.arange(order_max + 1)
    generator[1:] = generator[0] * (params.mu ** (j[1:] / 2.0)) * row[1:]
    return generator


def build_dim_matrix(n, params):
    """
    Build the n x n DIM transfer matrix

    Args:
        n: Number of channel uses
        params: ChannelParams

    Returns:
        TransferMatrix (read-only entries)
    """
    _check_uses(n)
    generator = symbol_generator(n - 1, params)
    entries = scipy.linalg.toeplitz(generator, np.zeros(n))
    return TransferMatrix(n=int(n), entries=_frozen(entries))

# ============================================================================
# Singular Values and Decomposition
# ============================================================================

def _svd(matrix, compute_uv):
    """Divide-and-conquer SVD with a fallback to the QR-iteration driver"""
    for driver in ('gesdd', 'gesvd'):
        try:
            return scipy.linalg.svd(matrix, compute_uv=compute_uv,
                                    lapack_driver=driver, check_finite=True)
        except np.linalg.LinAlgError as e:
            logger.warning("SVD driver %s failed on %dx%d matrix: %s",
                           driver, matrix.shape[0], matrix.shape[1], e)
        except ValueError as e:
            raise NumericalError(f"transfer matrix has non-finite entries: {e}") from e
    raise NumericalError("singular value decomposition did not converge")


def _as_spectrum(singular_values):
    # LAPACK returns them descending
    values = np.clip(singular_values[::-1] ** 2, 0.0, 1.0)
    return TransmissivitySpectrum(n=len(values), values=_frozen(values))


def transmissivity_spectrum(n, params):
    """
    Effective transmissivities eta_1 <= ... <= eta_n of n channel uses

    Raises:
        NumericalError: if the SVD fails to converge
    """
    matrix = build_dim_matrix(n, params)
    logger.debug("computing spectrum n=%d lambda=%g mu=%g gamma=%g",
                 n, params.lam, params.mu, params.gamma)
    return _as_spectrum(_svd(matrix.entries, compute_uv=False))


def matrix_spectrum(entries):
    """Spectrum of an arbitrary square transfer matrix (used for the LIM matrix)"""
    entries = np.asarray(entries, dtype=float)
    return _as_spectrum(_svd(entries, compute_uv=False))


def decompose(n, params):
    """
    Orthogonal encoder O1, decoder O2 and spectrum of the transfer matrix

    Rows of o1 are right-singular vectors ordered by increasing singular value;
    each is signed so that its first nonzero entry is positive.
    """
    matrix = build_dim_matrix(n, params)
    u, s, vt = _svd(matrix.entries, compute_uv=True)
    o1 = vt[::-1].copy()
    o2 = u[:, ::-1].T.copy()
    for k in range(n):
        nonzero = np.flatnonzero(np.abs(o1[k]) > 1e-12)
        if nonzero.size and o1[k, nonzero[0]] < 0:
            o1[k] *= -1.0
            o2[k] *= -1.0
    return ChannelDecomposition(o1=_frozen(o1), o2=_frozen(o2), spectrum=_as_spectrum(s))

# ============================================================================
# Composition Property
# ============================================================================

def semigroup_residual(n, lambda1, lambda2, mu):
    """
    Max-entry residual of A(lambda1) A(lambda2) - A(lambda1 * lambda2) at fixed mu

    Zero (to rounding) because fibres compose: two fibre pieces in a row
    behave like one fibre with the product transmissivity.
    """
    first = build_dim_matrix(n, ChannelParams(lam=lambda1, mu=mu))
    second = build_dim_matrix(n, ChannelParams(lam=lambda2, mu=mu))
    product = build_dim_matrix(n, ChannelParams(lam=lambda1 * lambda2, mu=mu))
    return float(np.max(np.abs(first.entries @ second.entries - product.entries)))

# ============================================================================
# Debug Dump
# ============================================================================

def dump_matrix(matrix):
    """Row-major text dump, 17 significant digits per entry"""
    entries = matrix.entries if isinstance(matrix, TransferMatrix) else np.asarray(matrix)
    if entries.ndim != 2:
        raise InvalidParameterError("dump_matrix needs a 2-D matrix")
    lines = [' '.join(format(float(v), '.17g') for v in row) for row in entries]
    return '\n'.join(lines) + '\n'


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Toeplitz module loaded")
    params = ChannelParams(lam=0.3, mu=0.2)
    print(dump_matrix(build_dim_matrix(4, params)), end='')
    print(f"spectrum: {transmissivity_spectrum(4, params).values}")
