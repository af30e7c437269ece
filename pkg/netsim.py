"""
Finite-M interferometer simulation and Gaussian-state propagation

The fibre is cut into M segments. Segment j of use i is a blue beam splitter
(transmissivity lambda^(1/M)) between signal i and environment line j. The line is
then partially reset by a yellow beam splitter (transmissivity mu) against a fresh
thermal mode. With transversal attenuation gamma < 1, a red beam splitter
(transmissivity gamma^(1/M)) against another fresh mode follows every blue one.

Quadrature convention: vacuum covariance = identity, thermal(nu) = (2nu+1) identity,
ordering x1, p1, ..., xn, pn.
"""

import math
import numbers
import logging
from dataclasses import dataclass

import numpy as np

from errors import InvalidParameterError, NumericalError, require
from toeplitz import ChannelParams, build_dim_matrix, decompose

logger = logging.getLogger(__name__)

# Limits on the materialised environment block and the full interferometer
ENVIRONMENT_GUARD = 5000
INTERFEROMETER_MODES_MAX = 256

# ============================================================================
# Gaussian States
# ============================================================================

def symplectic_form(n):
    """Omega = direct sum of [[0, 1], [-1, 0]] over n modes"""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    """First moments and quadrature covariance of an n-mode Gaussian state"""
    n: int
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        covariance = np.array(self.covariance, dtype=float)
        require(isinstance(self.n, (int, np.integer)) and self.n >= 1,
                f"number of modes must be a positive integer, got {self.n!r}")
        require(mean.shape == (2 * self.n,),
                f"mean must have length {2 * self.n}, got shape {mean.shape}")
        require(covariance.shape == (2 * self.n, 2 * self.n),
                f"covariance must be {2 * self.n}x{2 * self.n}, got shape {covariance.shape}")
        require(np.all(np.isfinite(mean)) and np.all(np.isfinite(covariance)),
                "state contains non-finite entries")
        mean.setflags(write=False)
        covariance.setflags(write=False)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', covariance)

    def uncertainty_margin(self):
        """Smallest eigenvalue of covariance + i Omega (>= 0 for physical states)"""
        hermitian = self.covariance + 1j * symplectic_form(self.n)
        return float(np.min(np.linalg.eigvalsh(hermitian)))

    def is_physical(self, tol=1e-9):
        scale = max(1.0, float(np.max(np.abs(self.covariance))))
        symmetric = np.max(np.abs(self.covariance - self.covariance.T)) <= 1e-12 * scale
        return bool(symmetric) and self.uncertainty_margin() >= -tol

    def validate(self, tol=1e-9):
        """Raise InvalidParameterError unless the state is a physical Gaussian state"""
        if not self.is_physical(tol):
            raise InvalidParameterError(
                f"covariance violates symmetry or the uncertainty relation "
                f"(margin {self.uncertainty_margin():.3e})"
            )
        return self

    def mean_photon_number(self):
        """Total mean photon number, (tr V + |d|^2)/4 - n/2 in this convention"""
        return float((np.trace(self.covariance) + self.mean @ self.mean) / 4.0 - self.n / 2.0)

    def to_dict(self):
        return {
            'n': int(self.n),
            'mean': [float(v) for v in self.mean],
            'covariance': [[float(v) for v in row] for row in self.covariance],
        }

    @classmethod
    def from_dict(cls, data):
        """Build a state from its JSON object form; malformed input raises InvalidParameterError"""
        if not isinstance(data, dict):
            raise InvalidParameterError("Gaussian state must be a JSON object")
        missing = [key for key in ('n', 'mean', 'covariance') if key not in data]
        if missing:
            raise InvalidParameterError(f"Gaussian state is missing keys: {', '.join(missing)}")
        n = data['n']
        if not isinstance(n, int) or isinstance(n, bool):
            raise InvalidParameterError(f"'n' must be an integer, got {n!r}")
        try:
            mean = np.asarray(data['mean'], dtype=float)
            covariance = np.asarray(data['covariance'], dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidParameterError(f"Gaussian state has non-numeric entries: {e}") from e
        return cls(n=n, mean=mean, covariance=covariance)


def vacuum_state(n):
    return GaussianState(n=n, mean=np.zeros(2 * n), covariance=np.eye(2 * n))


def thermal_state(n, nu):
    require(nu >= 0, f"nu must be nonnegative, got {nu}")
    return GaussianState(n=n, mean=np.zeros(2 * n), covariance=(2 * nu + 1) * np.eye(2 * n))


def coherent_state(alphas):
    """Product of coherent states |alpha_1> ... |alpha_n>"""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    mean = 2.0 * np.column_stack([alphas.real, alphas.imag]).reshape(-1)
    return GaussianState(n=len(alphas), mean=mean, covariance=np.eye(2 * len(alphas)))

# ============================================================================
# Gaussian Channels
# ============================================================================

def _quadrature_lift(matrix):
    """Act identically on x and p: M (x) I_2"""
    return np.kron(matrix, np.eye(2))


def _symmetrise(covariance):
    return 0.5 * (covariance + covariance.T)


def _checked(state):
    try:
        return state.validate()
    except InvalidParameterError as e:
        raise NumericalError(f"propagated state is unphysical: {e}") from e


def apply_linear_channel(state, transfer, nu):
    """
    Gaussian channel with annihilation-operator transfer matrix `transfer`
    and thermal noise nu in the environment

    mean -> S mean, V -> S V S^T + (2nu+1)(I - S S^T) with S = transfer (x) I_2
    """
    transfer = np.asarray(transfer, dtype=float)
    s = _quadrature_lift(transfer)
    mean = s @ state.mean
    covariance = s @ state.covariance @ s.T + (2 * nu + 1) * (np.eye(2 * state.n) - s @ s.T)
    return _checked(GaussianState(n=state.n, mean=mean, covariance=_symmetrise(covariance)))


def apply_attenuator(state, lam, nu):
    """
    Single-mode thermal attenuator E_{lambda,nu}

    Args:
        state: Single-mode GaussianState
        lam: Transmissivity in [0, 1]
        nu: Thermal photon number of the environment
    """
    if state.n != 1:
        raise InvalidParameterError(f"apply_attenuator acts on one mode, got {state.n}")
    require(0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam}")
    require(nu >= 0.0, f"nu must be nonnegative, got {nu}")
    mean = math.sqrt(lam) * state.mean
    covariance = lam * state.covariance + (1 - lam) * (2 * nu + 1) * np.eye(2)
    return GaussianState(n=1, mean=mean, covariance=covariance)


def apply_attenuators(state, etas, nu):
    """Independent attenuators E_{eta_k,nu} on every mode k"""
    etas = np.asarray(etas, dtype=float)
    require(etas.shape == (state.n,), f"need {state.n} transmissivities, got {etas.shape}")
    require(np.all((etas >= 0) & (etas <= 1)), "transmissivities must lie in [0, 1]")
    return apply_linear_channel(state, np.diag(np.sqrt(etas)), nu)


def _check_state_size(state, n):
    if state.n != n:
        raise InvalidParameterError(f"state has {state.n} modes but n = {n}")


def propagate_gaussian(state, n, params):
    """
    Send an n-mode Gaussian state through n uses of the DIM fibre

    Raises:
        InvalidParameterError: dimension mismatch
        NumericalError: the output violates the Gaussian-state invariants
    """
    _check_state_size(state, n)
    transfer = build_dim_matrix(n, params).entries
    return apply_linear_channel(state, transfer, params.nu)


def propagate_via_decomposition(state, n, params):
    """Same channel, applied as encoder O1, per-mode attenuators, decoder O2^T"""
    _check_state_size(state, n)
    dec = decompose(n, params)
    encoded = apply_linear_channel(state, dec.o1, 0.0)
    attenuated = apply_attenuators(encoded, dec.spectrum.values, params.nu)
    return apply_linear_channel(attenuated, dec.o2.T, 0.0)

# ============================================================================
# Finite-M Interferometer
# ============================================================================

@dataclass(frozen=True)
class FiniteMCoefficients:
    """Output-signal coefficients of the finite-M interferometer"""
    m_steps: int
    n: int
    a_matrix: np.ndarray
    gram_residual: float | None = None
    e_matrix: np.ndarray | None = None
    f_matrix: np.ndarray | None = None


def _check_interferometer_args(m_steps, n, lam, mu, gamma):
    for name, value in (('m_steps', m_steps), ('n', n)):
        require(isinstance(value, (int, np.integer)) and value >= 1,
                f"{name} must be a positive integer, got {value!r}")
    for name, value in (('lambda', lam), ('mu', mu), ('gamma', gamma)):
        require(isinstance(value, numbers.Real) and math.isfinite(value),
                f"{name} must be a finite number, got {value!r}")
    require(0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam}")
    require(0.0 <= mu <= 1.0, f"mu must lie in [0, 1], got {mu}")
    require(0.0 < gamma <= 1.0, f"gamma must lie in (0, 1], got {gamma}")


def _mode_layout(m_steps, n, gamma):
    """Column offsets: signals, then b_h^(l) (h-major), then f_{i,j} when gamma < 1"""
    bath = n
    extra = n + n * m_steps
    total = extra + (n * m_steps if gamma < 1.0 else 0)
    return bath, extra, total


def finite_m_coefficients(m_steps, n, lam, mu, track_environment=False, gamma=1.0):
    """
    Run the beam-splitter recurrences of the M-segment interferometer

    Per column j of use i: blue splitter (signal <-> environment line j), then the
    optional red splitter on the signal, then the yellow splitter resetting line j
    against b_{i+1}^(j).

    Args:
        m_steps: Number of segments M
        n: Number of channel uses
        lam, mu, gamma: Fibre parameters
        track_environment: Also return E (and F) and the Gram residual

    Returns:
        FiniteMCoefficients
    """
    _check_interferometer_args(m_steps, n, lam, mu, gamma)
    if track_environment and n * m_steps > ENVIRONMENT_GUARD:
        raise InvalidParameterError(
            f"environment tracking needs n*M <= {ENVIRONMENT_GUARD}, got {n * m_steps}"
        )
    t = lam ** (1.0 / m_steps)
    c, s = math.sqrt(t), math.sqrt(1.0 - t)
    g = gamma ** (1.0 / m_steps)
    cg, sg = math.sqrt(g), math.sqrt(1.0 - g)
    keep, reset = math.sqrt(mu), math.sqrt(1.0 - mu)
    bath, extra, total = _mode_layout(m_steps, n, gamma)
    dim = total if track_environment else n

    lines = np.zeros((m_steps, dim))
    if track_environment:
        lines[np.arange(m_steps), bath + np.arange(m_steps)] = 1.0
    rows = np.zeros((n, dim))

    for i in range(n):
        signal = np.zeros(dim)
        signal[i] = 1.0
        for j in range(m_steps):
            line = lines[j]
            out = c * signal + s * line
            env_out = c * line - s * signal
            if gamma < 1.0:
                out = cg * out
                if track_environment:
                    out[extra + i * m_steps + j] += sg
            if i < n - 1:
                env_out = keep * env_out
                if track_environment:
                    env_out[bath + (i + 1) * m_steps + j] -= reset
            lines[j] = env_out
            signal = out
        rows[i] = signal

    if not track_environment:
        return FiniteMCoefficients(m_steps=m_steps, n=n, a_matrix=rows)

    a_matrix = rows[:, :n]
    e_matrix = rows[:, bath:extra]
    f_matrix = rows[:, extra:] if gamma < 1.0 else None
    gram = rows @ rows.T
    residual = float(np.max(np.abs(gram - np.eye(n))))
    logger.debug("finite-M coefficients M=%d n=%d gram residual %.3e", m_steps, n, residual)
    return FiniteMCoefficients(m_steps=m_steps, n=n, a_matrix=a_matrix,
                               gram_residual=residual, e_matrix=e_matrix, f_matrix=f_matrix)


def _rotate_rows(matrix, p, q, cos, sin):
    row_p = matrix[p].copy()
    matrix[p] = cos * row_p + sin * matrix[q]
    matrix[q] = -sin * row_p + cos * matrix[q]


def full_interferometer(m_steps, n, lam, mu, gamma=1.0):
    """
    Orthogonal matrix of the whole interferometer as a product of 2-mode rotations

    Rows are output wires, columns input modes, in the layout of
    finite_m_coefficients; the signal/signal block is A^(M).
    """
    _check_interferometer_args(m_steps, n, lam, mu, gamma)
    bath, extra, total = _mode_layout(m_steps, n, gamma)
    if total > INTERFEROMETER_MODES_MAX:
        raise InvalidParameterError(
            f"interferometer has {total} modes, limit is {INTERFEROMETER_MODES_MAX}"
        )
    t = lam ** (1.0 / m_steps)
    g = gamma ** (1.0 / m_steps)
    blue = (math.sqrt(t), math.sqrt(1.0 - t))
    red = (math.sqrt(g), math.sqrt(1.0 - g))
    yellow = (math.sqrt(mu), -math.sqrt(1.0 - mu))

    wires = np.eye(total)
    for i in range(n):
        for j in range(m_steps):
            line_wire = bath + j
            _rotate_rows(wires, i, line_wire, *blue)
            if gamma < 1.0:
                _rotate_rows(wires, i, extra + i * m_steps + j, *red)
            if i < n - 1:
                _rotate_rows(wires, line_wire, bath + (i + 1) * m_steps + j, *yellow)
    return wires

# ============================================================================
# Convergence to the DIM Transfer Matrix
# ============================================================================

def convergence_study(n, lam, mu, m_list):
    """
    Max-entry distance between A^(M) and the M -> infinity transfer matrix

    Returns:
        list of (M, error) tuples in the order of m_list
    """
    m_list = [int(m) for m in m_list]
    require(len(m_list) > 0, "m_list must not be empty")
    require(all(m >= 1 for m in m_list), "every M must be a positive integer")
    require(all(a < b for a, b in zip(m_list, m_list[1:])), "m_list must be increasing")
    limit = build_dim_matrix(n, ChannelParams(lam=lam, mu=mu)).entries
    results = []
    for m_steps in m_list:
        coefficients = finite_m_coefficients(m_steps, n, lam, mu)
        error = float(np.max(np.abs(coefficients.a_matrix - limit)))
        logger.info("convergence M=%d n=%d error=%.3e", m_steps, n, error)
        results.append((m_steps, error))
    return results


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Interferometer module loaded")
    for m_steps, error in convergence_study(4, 0.3, 0.2, [1, 10, 100]):
        print(f"  M={m_steps}: max-entry error {error:.3e}")
