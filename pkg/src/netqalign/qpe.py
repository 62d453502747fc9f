"""Numerically exact state-vector simulation of phase estimation.

The simulated circuit extracts the principal eigenvector of a (normalised)
network operator ``A`` as follows: a ``kappa``-qubit phase register starts
in |0>, the system register starts in a chosen unit vector, a forward
Fourier transform spreads the phase register, controlled powers
``U^(2^j)`` of the propagator ``U = exp(i 2 pi A)`` imprint eigenphases,
and the inverse Fourier transform concentrates each eigencomponent on the
phase code nearest ``lambda * 2^kappa``.  Because the dominant eigenvalue
of a stochastic operator is exactly 1 (phase 0), reading phase code 0
conditions the system register onto the principal eigenvector.

Everything here is double-precision linear algebra on the full state
vector; no sampling noise is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, NumericalError, ValidationError
from .graphs import StochasticMatrix

DEFAULT_KAPPA = 6
SYMMETRY_TOL = 1e-10
UNITARITY_TOL = 1e-8
NORM_TOL = 1e-10
#: Phase codes with probability below this are not conditioned on.
CONDITIONAL_EPS = 1e-12

__all__ = [
    "DEFAULT_KAPPA",
    "SYMMETRY_TOL",
    "UNITARITY_TOL",
    "SpectralDecomposition",
    "Propagator",
    "QuantumState",
    "PhaseEstimationResult",
    "StochasticSuccessReport",
    "CostEstimate",
    "spectral_decompose",
    "propagator",
    "unitarity_defect",
    "qft_matrix",
    "qft",
    "phase_estimate",
    "success_probabilities",
    "nearest_phase_code",
    "phase_code_weights",
    "resolution_condition",
    "conditional_eigenvector",
    "verify_stochastic_success",
    "cost_model",
    "phases_csv",
    "conditional_csv",
]


def _square(a, what):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what} expects a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} expects finite entries")
    return a


def symmetry_defect(a):
    return float(np.max(np.abs(a - a.T))) if a.size else 0.0


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with matching eigenvector columns.

    For symmetric input the columns are orthonormal and each column's sign
    is fixed so that its entry sum is nonnegative (falling back to a
    positive leading entry when the sum is negligible), which makes overlap
    coefficients against nonnegative vectors reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.array(self.eigenvalues, dtype=float)
        v = np.array(self.eigenvectors)
        if w.ndim != 1 or v.ndim != 2 or v.shape[1] != w.size or v.shape[0] != w.size:
            raise ValidationError("decomposition shapes are inconsistent")
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)


def _canonical_signs(v):
    sums = v.sum(axis=0)
    flip = np.where(np.abs(sums) > 1e-12, np.sign(sums), 0.0)
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    flip = np.where(flip == 0.0, np.where(lead < 0, -1.0, 1.0), flip)
    return v * flip


def spectral_decompose(a, symmetric=True):
    """Full eigendecomposition with a residual self-check.

    ``symmetric=True`` validates the input symmetry and uses the symmetric
    solver; ``symmetric=False`` runs a general solver and requires the
    spectrum to be numerically real (raising otherwise, since the result
    type carries real eigenvalues only).
    """
    a = _square(a, "spectral_decompose")
    n = a.shape[0]
    if symmetric:
        defect = symmetry_defect(a)
        if defect > SYMMETRY_TOL:
            raise ValidationError(f"matrix is not symmetric (defect {defect:.3e})")
        w, v = np.linalg.eigh(a)
        v = _canonical_signs(v)
        ortho = float(np.max(np.abs(v.T @ v - np.eye(n))))
        if ortho > 1e-8:
            raise NumericalError(f"eigenbasis lost orthonormality ({ortho:.3e})")
    else:
        w, v = np.linalg.eig(a)
        if w.size and float(np.max(np.abs(w.imag))) > 1e-8:
            raise NumericalError("spectrum is not numerically real")
        w = w.real
        v = v.real if not np.iscomplexobj(v) else v.real
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        norms = np.linalg.norm(v, axis=0)
        if np.any(norms <= 0):
            raise NumericalError("solver returned a zero eigenvector")
        v = _canonical_signs(v / norms)
    residual = float(np.max(np.linalg.norm(a @ v - v * w, axis=0))) if n else 0.0
    if residual > 1e-8:
        raise NumericalError(f"eigenpair residual {residual:.3e} exceeds 1e-8")
    return SpectralDecomposition(w, v)


@dataclass(frozen=True)
class Propagator:
    """Matrix exponential ``exp(i 2 pi A)`` with its unitarity defect.

    The defect is recorded, never hidden: strict-mode construction refuses
    defects above ``UNITARITY_TOL`` while idealized mode reports whatever
    the exponential of a (possibly asymmetric) operator produced.
    """

    matrix: np.ndarray
    source: np.ndarray
    unitarity_defect: float
    mode: str

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        s = np.array(self.source, dtype=float)
        m.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "source", s)


def unitarity_defect(u):
    """Max-abs deviation of ``U^H U`` from the identity."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _propagator_from_decomposition(decomp):
    v = decomp.eigenvectors
    return (v * np.exp(2j * np.pi * decomp.eigenvalues)) @ v.T


def propagator(a, mode="strict"):
    """Build ``exp(i 2 pi A)``.

    strict: spectral route for symmetric ``A`` (exactly unitary up to
    rounding).  idealized: scaling-and-squaring matrix exponential for any
    square ``A``; may be non-unitary and the defect says by how much.
    """
    a = _square(a, "propagator")
    if mode == "strict":
        u = _propagator_from_decomposition(spectral_decompose(a, symmetric=True))
    elif mode == "idealized":
        u = scipy.linalg.expm(2j * np.pi * a)
    else:
        raise ValidationError(f"unknown propagator mode {mode!r}")
    defect = unitarity_defect(u)
    if mode == "strict" and defect > UNITARITY_TOL:
        raise NumericalError(f"strict propagator defect {defect:.3e} exceeds {UNITARITY_TOL}")
    return Propagator(u, a, defect, mode)


def _reunitarize(u):
    # nearest unitary in Frobenius norm (polar factor)
    w, _, vh = np.linalg.svd(u)
    return w @ vh


@dataclass(frozen=True)
class QuantumState:
    """Two-register state: ``kappa`` phase qubits and ``n`` system qubits.

    The flat amplitude index is ``phase_index * 2^n + system_index``; the
    vector must be unit l2 norm.
    """

    kappa: int
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.kappa < 1 or self.n < 1:
            raise ValidationError("register sizes must be at least one qubit")
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size != (1 << self.kappa) * (1 << self.n):
            raise ValidationError(
                f"amplitude vector must have length 2^{self.kappa + self.n}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm is {norm!r}, expected 1")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    def grid(self):
        """Amplitudes reshaped to (phase codes, system components)."""
        return self.amplitudes.reshape(1 << self.kappa, 1 << self.n)


def qft_matrix(kappa):
    """Unitary Fourier matrix ``F[j, k] = exp(i 2 pi j k / 2^kappa) / sqrt(2^kappa)``."""
    if kappa < 1:
        raise ValidationError("kappa must be at least 1")
    dim = 1 << kappa
    j = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(j, j) / dim) / math.sqrt(dim)


def qft(state, register="reg1", direction="forward"):
    """Fourier transform of the phase register of a two-register state."""
    if register != "reg1":
        raise ValidationError("only the phase register (reg1) is transformable")
    if direction not in ("forward", "inverse"):
        raise ValidationError(f"unknown direction {direction!r}")
    f = qft_matrix(state.kappa)
    if direction == "inverse":
        f = f.conj().T
    return QuantumState(state.kappa, state.n, (f @ state.grid()).ravel())


@dataclass(frozen=True)
class PhaseEstimationResult:
    """Distribution over phase codes plus the conditional system vectors.

    ``conditional_vectors`` maps each phase code of nonnegligible
    probability to the unit system vector conditioned on reading that code,
    truncated to the first ``dim`` components (the zero padding added to
    reach a power of two carries no amplitude) and with the global phase
    fixed so the largest-magnitude component is real positive.  ``beta``
    holds the eigenbasis overlaps of the initial system vector in
    ascending-eigenvalue order when the operator was symmetric, else None.
    ``success_probability`` is the probability of phase code 0.
    """

    kappa: int
    dim: int
    phase_distribution: np.ndarray
    conditional_vectors: dict
    beta: np.ndarray | None
    success_probability: float
    eigenvalues: np.ndarray | None
    propagator_defect: float
    norm_drift: float


def _canonical_global_phase(v):
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if abs(pivot) == 0.0:
        return v
    return v * (abs(pivot) / pivot)


def _init_vector(reg2_init, n_problem, padded_dim):
    if isinstance(reg2_init, str):
        if reg2_init != "uniform":
            raise ValidationError(f"unknown initial-state keyword {reg2_init!r}")
        psi = np.zeros(padded_dim, dtype=complex)
        psi[:n_problem] = 1.0 / math.sqrt(n_problem)
        return psi
    v = np.asarray(reg2_init, dtype=complex).ravel()
    if v.size == n_problem:
        psi = np.zeros(padded_dim, dtype=complex)
        psi[:n_problem] = v
    elif v.size == padded_dim:
        if np.any(np.abs(v[n_problem:]) > 0):
            raise ValidationError("initial vector has support on the zero padding")
        psi = v.astype(complex)
    else:
        raise ValidationError(
            f"initial vector has {v.size} entries, expected {n_problem} or {padded_dim}"
        )
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValidationError("initial system vector must be nonzero")
    return psi / norm


def phase_estimate(a, kappa, reg2_init="uniform", mode="strict"):
    """Run the full phase-estimation circuit on operator ``a``.

    ``a`` is any square real matrix (strict mode additionally requires
    symmetry).  Non-power-of-two dimensions are zero-padded; the padding
    block acts as the identity and is never populated because the initial
    vector is supported on the first ``N`` coordinates only.  Norm
    preservation is asserted to 1e-10 per stage in strict mode; idealized
    mode renormalises and reports the accumulated drift.
    """
    a = _square(a, "phase_estimate")
    if int(kappa) != kappa or kappa < 1:
        raise ValidationError("kappa must be a positive integer")
    kappa = int(kappa)
    n_problem = a.shape[0]
    n_qubits = max(1, (n_problem - 1).bit_length())
    padded = 1 << n_qubits

    psi = _init_vector(reg2_init, n_problem, padded)
    prop = propagator(a, mode)
    u = np.eye(padded, dtype=complex)
    u[:n_problem, :n_problem] = prop.matrix

    beta = None
    eigenvalues = None
    if symmetry_defect(a) <= SYMMETRY_TOL:
        decomp = spectral_decompose(a, symmetric=True)
        eigenvalues = decomp.eigenvalues
        beta = decomp.eigenvectors.T @ psi[:n_problem]
        if float(np.max(np.abs(beta.imag))) == 0.0:
            beta = beta.real

    amp = np.zeros(((1 << kappa), padded), dtype=complex)
    amp[0] = psi
    state = qft(QuantumState(kappa, n_qubits, amp.ravel()))
    grid = state.grid().copy()

    drift = 0.0
    codes = np.arange(1 << kappa)
    upow = u
    for j in range(kappa):
        branch = ((codes >> j) & 1) == 1
        grid[branch] = grid[branch] @ upow.T
        if not np.all(np.isfinite(grid.view(float))):
            raise NumericalError(f"state overflowed at controlled power {j}")
        norm = float(np.linalg.norm(grid))
        drift = max(drift, abs(norm - 1.0))
        if mode == "strict" and abs(norm - 1.0) > NORM_TOL:
            raise NumericalError(f"state norm drifted to {norm!r} at controlled power {j}")
        if j + 1 < kappa:
            upow = upow @ upow
            if mode == "strict" and unitarity_defect(upow) > 1e-10:
                upow = _reunitarize(upow)

    norm = float(np.linalg.norm(grid))
    if norm <= 1e-300:
        raise NumericalError("state vanished under the idealized propagator")
    state = qft(QuantumState(kappa, n_qubits, grid.ravel() / norm), direction="inverse")
    grid = state.grid()

    probs = np.einsum("ij,ij->i", grid, grid.conj()).real
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    conditionals = {}
    for code in np.nonzero(probs > CONDITIONAL_EPS)[0]:
        row = grid[code]
        vec = _canonical_global_phase(row[:n_problem] / np.linalg.norm(row))
        vec.flags.writeable = False
        conditionals[int(code)] = vec
    probs.flags.writeable = False
    return PhaseEstimationResult(
        kappa=kappa,
        dim=n_problem,
        phase_distribution=probs,
        conditional_vectors=conditionals,
        beta=beta,
        success_probability=float(probs[0]),
        eigenvalues=eigenvalues,
        propagator_defect=prop.unitarity_defect,
        norm_drift=drift,
    )


def success_probabilities(decomp, vector):
    """Overlap coefficients ``beta_i = <mu_i | v>`` of a unit vector in an
    orthonormal eigenbasis; ``beta_i**2`` is the probability of reading the
    phase code of ``lambda_i`` when the codes are exactly resolvable."""
    v = np.asarray(vector).ravel()
    if v.size != decomp.eigenvalues.size:
        raise ValidationError("vector length does not match the decomposition")
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValidationError("input vector must be unit l2 norm")
    q = decomp.eigenvectors
    ortho = float(np.max(np.abs(q.T @ q - np.eye(q.shape[1]))))
    if ortho > 1e-8:
        raise ValidationError(f"eigenbasis is not orthonormal (defect {ortho:.3e})")
    beta = q.T @ v
    return beta.real if not np.iscomplexobj(v) else beta


def nearest_phase_code(eigenvalue, kappa):
    """Phase code nearest ``eigenvalue`` at kappa-bit resolution (mod 1)."""
    scaled = (float(eigenvalue) % 1.0) * (1 << kappa)
    return int(round(scaled)) % (1 << kappa)


def phase_code_weights(eigenvalues, beta, kappa):
    """Aggregate ``|beta_i|^2`` onto each eigenvalue's nearest phase code."""
    eigenvalues = np.asarray(eigenvalues, dtype=float).ravel()
    beta = np.asarray(beta).ravel()
    if eigenvalues.size != beta.size:
        raise ValidationError("eigenvalue and overlap vectors differ in length")
    weights = np.zeros(1 << kappa)
    for lam, b in zip(eigenvalues, beta):
        weights[nearest_phase_code(lam, kappa)] += float(np.abs(b) ** 2)
    return weights


def resolution_condition(eigenvalues, kappa):
    """True when every eigenvalue sits within a quarter bin
    (``2^-(kappa+2)``) of its nearest phase code."""
    scaled = np.asarray(eigenvalues, dtype=float).ravel() * (1 << kappa)
    return bool(np.all(np.abs(scaled - np.round(scaled)) <= 0.25))


def conditional_eigenvector(result, phase_code):
    """System vector conditioned on reading ``phase_code``.

    Code 0 carries the principal eigenvector when the dominant eigenvalue
    is 1.  Conditioning on a code of numerically zero probability is
    refused.
    """
    probs = result.phase_distribution
    code = int(phase_code)
    if not 0 <= code < probs.size:
        raise ValidationError(f"phase code {code} outside [0, {probs.size})")
    if probs[code] <= CONDITIONAL_EPS:
        raise ConditioningError(
            f"phase code {code} has probability {probs[code]:.3e}; nothing to condition on"
        )
    return result.conditional_vectors[code]


@dataclass(frozen=True)
class StochasticSuccessReport:
    """Eigenvector entry sums of a stochastic operator.

    For a column-stochastic matrix every right eigenvector with eigenvalue
    away from 1 has entry sum zero, which is why the uniform initial vector
    overlaps only the principal eigenvector and the phase-0 readout
    succeeds with certainty in the doubly stochastic symmetric case.
    """

    eigenvalues: np.ndarray
    eigenvector_sums: np.ndarray
    max_nonprincipal_sum: float
    near_defective: bool
    satisfied: bool


def verify_stochastic_success(a, tol=1e-8):
    """Check the zero-sum property of nonprincipal eigenvectors.

    ``a`` must be a :class:`StochasticMatrix` so the line-sum convention is
    known; row-stochastic input is transposed, because the property belongs
    to the orientation with unit column sums.  Violations raise unless the
    eigenbasis is near-defective, in which case only the report flags it.
    """
    if not isinstance(a, StochasticMatrix):
        raise ValidationError("verify_stochastic_success expects a StochasticMatrix")
    m = a.matrix if a.convention in ("column", "doubly") else a.matrix.T
    w, v = np.linalg.eig(m)
    sums = v.sum(axis=0)
    nonprincipal = np.abs(w - 1.0) > tol
    max_off = float(np.max(np.abs(sums[nonprincipal]))) if np.any(nonprincipal) else 0.0
    near_defective = bool(np.linalg.cond(v) > 1e8)
    satisfied = max_off <= tol
    if not satisfied and not near_defective:
        raise NumericalError(
            f"nonprincipal eigenvector sum {max_off:.3e} exceeds {tol} "
            "for a well-conditioned eigenbasis"
        )
    return StochasticSuccessReport(w, sums, max_off, near_defective, satisfied)


@dataclass(frozen=True)
class CostEstimate:
    """Register widths and gate-count bounds for a factorised operator."""

    reg1_qubits: int
    reg2_qubits: int
    gate_bound_dense: int
    gate_bound_sparse: str


def cost_model(network_sizes, kappa):
    """Resource estimate for phase estimation over a product of networks.

    The system register needs ``ceil(log2 M_j)`` qubits per network; the
    dense controlled-power bound is ``kappa * k * max(M)^2`` operator
    entries, while row-sparse factors admit a poly-logarithmic circuit per
    power.
    """
    sizes = [int(m) for m in network_sizes]
    if not sizes or any(m < 2 for m in sizes):
        raise ValidationError("each network must have at least 2 nodes")
    if kappa < 1:
        raise ValidationError("kappa must be at least 1")
    per_network = [max(1, math.ceil(math.log2(m))) for m in sizes]
    k = len(sizes)
    dense = int(kappa) * k * max(sizes) ** 2
    sparse = (
        f"O(poly(m) * kappa * k) single- and two-qubit gates with "
        f"m = {max(per_network)} qubits per network and {int(kappa) * k} controlled powers, "
        "valid when each factor is row-sparse"
    )
    return CostEstimate(int(kappa), sum(per_network), dense, sparse)


def _fmt_complex(z):
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}j"


def phases_csv(result):
    """CSV of the phase-code distribution: ``phase_code,probability``."""
    lines = ["phase_code,probability"]
    for code, p in enumerate(result.phase_distribution):
        lines.append(f"{code},{float(p)!r}")
    return "\n".join(lines) + "\n"


def conditional_csv(result, phase_code=0):
    """CSV of one conditional system vector: ``component_index,amplitude``."""
    vec = conditional_eigenvector(result, phase_code)
    lines = ["component_index,amplitude"]
    for idx, amp in enumerate(vec):
        lines.append(f"{idx},{_fmt_complex(amp)}")
    return "\n".join(lines) + "\n"
